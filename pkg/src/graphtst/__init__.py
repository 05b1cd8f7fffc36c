"""Two-sample testing for low-rank random graphs on different vertex sets."""

from ._version import __version__
from .models import (
    AffineUniform,
    AdmissibilityResult,
    Graph,
    LatentConfig,
    LatentSample,
    Signature,
    admissibility_check,
    blockmodel_points,
    indefinite_gram,
    probability_matrix,
    sample_from_config,
    sample_graph,
    sample_latent,
)
from .embedding import (
    Embedding,
    EigengapReport,
    ase,
    eigengap_report,
    estimate_sparsity,
    scale_estimate,
    scaled_embedding,
)
from .kernels import (
    KernelSpec,
    MMDValue,
    gram,
    kernel_eval,
    median_heuristic,
    resolve_bandwidth,
    u_statistic,
)
from .alignment import (
    AlignmentResult,
    BlockOrthogonal,
    Coupling,
    align,
    block_init_maps,
    cost_matrix,
    exact_wasserstein2,
    procrustes_step,
    project_block_orthogonal,
    random_block_orthogonal,
    sign_matrices,
    sinkhorn,
)
from .twosample import (
    TestConfig,
    TestResult,
    permutation_null,
    power_curve,
    run_test,
)
from .io import (
    format_test_result,
    load_edge_list,
    load_embedding,
    load_graph,
    load_latent_config,
    load_positions,
    save_dense,
    save_edge_list,
    save_embedding,
    save_latent_config,
    save_positions,
    save_test_result,
)
from .harness import (
    ComparisonRecord,
    ExperimentSpec,
    best_sign_flip,
    compare_signflip_rotation,
    experiment_overlay,
    experiment_power,
    experiment_signflip_vs_rotation,
    load_experiment_spec,
    run_experiment,
    save_experiment_spec,
)

__all__ = [
    "AffineUniform", "AdmissibilityResult", "Graph", "LatentConfig",
    "LatentSample", "Signature", "admissibility_check", "blockmodel_points",
    "indefinite_gram", "probability_matrix", "sample_from_config",
    "sample_graph", "sample_latent",
    "Embedding", "EigengapReport", "ase", "eigengap_report",
    "estimate_sparsity", "scale_estimate", "scaled_embedding",
    "KernelSpec", "MMDValue", "gram", "kernel_eval", "median_heuristic",
    "resolve_bandwidth", "u_statistic",
    "AlignmentResult", "BlockOrthogonal", "Coupling", "align",
    "block_init_maps", "cost_matrix",
    "exact_wasserstein2", "procrustes_step", "project_block_orthogonal",
    "random_block_orthogonal", "sign_matrices", "sinkhorn",
    "TestConfig", "TestResult", "permutation_null", "power_curve", "run_test",
    "format_test_result", "load_edge_list", "load_embedding", "load_graph",
    "load_latent_config", "load_positions", "save_dense", "save_edge_list",
    "save_embedding", "save_latent_config", "save_positions",
    "save_test_result",
    "ComparisonRecord", "ExperimentSpec", "best_sign_flip",
    "compare_signflip_rotation", "experiment_overlay", "experiment_power",
    "experiment_signflip_vs_rotation", "load_experiment_spec",
    "run_experiment", "save_experiment_spec",
    "__version__",
]
