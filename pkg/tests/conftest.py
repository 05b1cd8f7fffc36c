"""Shared fixtures: the heavy simulation sweeps reused across test modules.

Everything is seeded, so repeated runs see identical data. Session-scoped
fixtures hold the expensive sweeps (hundreds of sampled graph pairs); they
are computed once and shared between module tests and the acceptance suite.
"""

import math

import numpy as np
import pytest

from graphtst import (
    AffineUniform,
    ExperimentSpec,
    KernelSpec,
    LatentConfig,
    Signature,
    TestConfig,
    align,
    ase,
    experiment_signflip_vs_rotation,
    permutation_null,
    power_curve,
    resolve_bandwidth,
    run_test,
    sample_graph,
    sample_latent,
    u_statistic,
)
from graphtst.util import rng_for

THREE_BLOCK_B = np.array([
    [0.5, 0.8, 0.8],
    [0.8, 0.5, 0.8],
    [0.8, 0.8, 0.5],
])
THREE_BLOCK_SIG = Signature(1, 2)


def three_block_config() -> LatentConfig:
    return LatentConfig.sbm(THREE_BLOCK_B)


def eps_perturbed_config(eps: float) -> LatentConfig:
    """Same block model with the diagonal lifted by eps."""
    return LatentConfig.sbm(THREE_BLOCK_B + eps * np.eye(3))


def heterogeneity_config(beta: float) -> LatentConfig:
    """Degree-corrected variant with propensities beta*U(0,1) + (1-beta)."""
    return LatentConfig.dcsbm(THREE_BLOCK_B, AffineUniform(beta, 1.0 - beta))


def aligned_pair_stats(cfg1, cfg2, n, seed):
    """Embed, scale, and align one graph pair.

    Returns (u statistic, transport distance between the aligned clouds).
    """
    from graphtst import sample_from_config

    g1, _ = sample_from_config(cfg1, n, seed=[seed, 1])
    g2, _ = sample_from_config(cfg2, n, seed=[seed, 2])
    x = ase(g1, THREE_BLOCK_SIG).scaled_positions()
    y = ase(g2, THREE_BLOCK_SIG).scaled_positions()
    res = align(x, y, THREE_BLOCK_SIG, seed=[seed, 0])
    yw = res.w.apply(y)
    spec = resolve_bandwidth(KernelSpec(), x, yw, seed=[seed, 2])
    u = u_statistic(spec, x, yw).u_stat
    return u, math.sqrt(res.transport_cost)


@pytest.fixture(scope="session")
def signflip_sbm_run(tmp_path_factory):
    """100-trial sign-flip vs. alignment comparison, three-block SBM, n=300."""
    spec = ExperimentSpec(
        name="signflip-sbm",
        kind="signflip-vs-rotation",
        model=three_block_config(),
        test=TestConfig(signature=THREE_BLOCK_SIG),
        output_dir=str(tmp_path_factory.mktemp("signflip_sbm")),
        n_grid=(300,),
        trials=100,
        seed=71,
    )
    return experiment_signflip_vs_rotation(spec)


@pytest.fixture(scope="session")
def signflip_dcsbm_run(tmp_path_factory):
    """Same comparison on the degree-corrected model at n=500."""
    spec = ExperimentSpec(
        name="signflip-dcsbm",
        kind="signflip-vs-rotation",
        model=heterogeneity_config(0.5),
        test=TestConfig(signature=THREE_BLOCK_SIG),
        output_dir=str(tmp_path_factory.mktemp("signflip_dcsbm")),
        n_grid=(500,),
        trials=100,
        seed=72,
    )
    return experiment_signflip_vs_rotation(spec)


@pytest.fixture(scope="session")
def null_alt_sweep():
    """(u, transport distance) per seed for the median-trend checks.

    Null pairs at n in {150, 300, 600} and diagonal-perturbed (eps=0.2)
    pairs at n=600, ten seeds each.
    """
    null_cfg = three_block_config()
    alt_cfg = eps_perturbed_config(0.2)
    out = {"null": {}, "alt": {}}
    for n in (150, 300, 600):
        out["null"][n] = [aligned_pair_stats(null_cfg, null_cfg, n, [81, n, s])
                          for s in range(10)]
    out["alt"][600] = [aligned_pair_stats(null_cfg, alt_cfg, 600, [82, 600, s])
                       for s in range(10)]
    return out


@pytest.fixture(scope="session")
def null_power_rows():
    """Size of the test: null vs. null, 100 trials x 500 permutations."""
    cfg = TestConfig(signature=THREE_BLOCK_SIG, permutations=500, seed=91)
    null_cfg = three_block_config()
    return power_curve(null_cfg, null_cfg, (100, 200, 300), 100, cfg)


@pytest.fixture(scope="session")
def eps_power_rows():
    """Power against the eps=0.2 diagonal perturbation along n."""
    cfg = TestConfig(signature=THREE_BLOCK_SIG, permutations=500, seed=92)
    return power_curve(three_block_config(), eps_perturbed_config(0.2),
                       (100, 200, 300), 100, cfg)


@pytest.fixture(scope="session")
def dcsbm_power_rows():
    """Power at n=300 under two degree-heterogeneity levels.

    The two levels share the test seed, so each trial faces the same first
    graph under both; that sharpens the between-level comparison.
    """
    cfg = TestConfig(signature=THREE_BLOCK_SIG, permutations=500, seed=93)
    return {beta: power_curve(three_block_config(),
                              heterogeneity_config(beta), (300,), 100, cfg)
            for beta in (0.1, 0.3)}


@pytest.fixture(scope="session")
def relabel_pvalues():
    """Permutation p-values when the observed split is itself exchangeable.

    Each run embeds and aligns two independent null-model graphs, pools the
    aligned points, randomly relabels the pooled rows into two
    pseudo-samples, and scores that split against the permutation null.
    The relabeling makes the observed statistic exchangeable with the
    permuted ones, so these p-values should be uniform up to the lattice of
    the permutation count.
    """
    from graphtst import sample_from_config

    null_cfg = three_block_config()
    reps = 200
    b = 199
    out = np.empty(reps)
    for t in range(reps):
        g1, _ = sample_from_config(null_cfg, 100, seed=[55, t, 1])
        g2, _ = sample_from_config(null_cfg, 100, seed=[55, t, 2])
        x = ase(g1, THREE_BLOCK_SIG).scaled_positions()
        y = ase(g2, THREE_BLOCK_SIG).scaled_positions()
        res = align(x, y, THREE_BLOCK_SIG, seed=[55, t, 0])
        pooled = np.vstack([x, res.w.apply(y)])
        pooled = pooled[rng_for(55, t, 7).permutation(pooled.shape[0])]
        n = x.shape[0]
        m = pooled.shape[0] - n
        spec = resolve_bandwidth(KernelSpec(), pooled, seed=[55, t, 2])
        obs = u_statistic(spec, pooled[:n], pooled[n:]).u_stat
        null = permutation_null(pooled, n, m, spec, b, seed=[55, t, 9])
        out[t] = (1.0 + float(np.sum(null >= obs))) / (b + 1.0)
    return out


@pytest.fixture(scope="session")
def shared_latent_pvalues():
    """Full-pipeline p-values when one latent draw feeds both graphs.

    200 trials: sample 2n latent positions from the three-block model, split
    them randomly in half, generate one graph per half, and run the complete
    test. The split is exchangeable at the latent level, so these p-values
    must not be anti-conservative.
    """
    null_cfg = three_block_config()
    out = np.empty(200)
    for t in range(200):
        gen = rng_for(56, t)
        latent = sample_latent(null_cfg, 200, rng=gen)
        order = gen.permutation(200)
        g1 = sample_graph(latent.positions[order[:100]], THREE_BLOCK_SIG,
                          rng=gen)
        g2 = sample_graph(latent.positions[order[100:]], THREE_BLOCK_SIG,
                          rng=gen)
        cfg = TestConfig(signature=THREE_BLOCK_SIG, permutations=99,
                         seed=int(rng_for(56, t, 1).integers(0, 2 ** 31)))
        out[t] = run_test(g1, g2, cfg).p_value
    return out
