"""File formats: graphs, embeddings, model configs, and test results.

Graphs travel either as an undirected edge list (header line ``n <count>``,
then one ``i j`` pair per line, 0-indexed, i < j) or as a dense 0/1 matrix in
whitespace-separated text. Both round-trip losslessly. Embeddings are CSV
with a ``dim_1..dim_d`` header plus a YAML metadata sidecar.
"""

from pathlib import Path

import numpy as np
import yaml

from .embedding import Embedding
from .models import Graph, LatentConfig, Signature

FLOAT_FMT = "%.17g"


def save_edge_list(graph: Graph, path) -> None:
    """Write a graph as a header line ``n <count>`` plus sorted i<j pairs."""
    rows, cols = np.nonzero(np.triu(graph.adjacency, k=1))
    lines = ["%d %d" % (graph.n, len(rows))]
    lines.extend("%d %d" % (i, j) for i, j in zip(rows, cols))
    Path(path).write_text("\n".join(lines) + "\n")


def load_edge_list(path) -> Graph:
    tokens = [line.split() for line in Path(path).read_text().splitlines()
              if line.strip()]
    if not tokens or len(tokens[0]) != 2:
        raise ValueError("edge list must start with a 'n <count>' header")
    n, count = int(tokens[0][0]), int(tokens[0][1])
    if len(tokens) - 1 != count:
        raise ValueError(
            "edge list header promises %d edges but file has %d"
            % (count, len(tokens) - 1))
    adjacency = np.zeros((n, n))
    for row in tokens[1:]:
        i, j = int(row[0]), int(row[1])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError("edge (%d, %d) out of range for n=%d" % (i, j, n))
        if i == j:
            raise ValueError("self-loop (%d, %d) not allowed" % (i, j))
        adjacency[i, j] = 1.0
        adjacency[j, i] = 1.0
    return Graph(adjacency)


def save_dense(graph: Graph, path) -> None:
    np.savetxt(path, graph.adjacency, fmt="%d")


def load_dense(path) -> Graph:
    adjacency = np.loadtxt(path, ndmin=2)
    return Graph(adjacency)


def load_graph(path) -> Graph:
    """Load a graph from either supported text format.

    Detection: a dense file has as many rows as columns and every token is
    0 or 1; anything else is treated as an edge list.
    """
    lines = [line.split() for line in Path(path).read_text().splitlines()
             if line.strip()]
    if not lines:
        raise ValueError("empty graph file: %s" % path)
    first = lines[0]
    zero_one = all(tok in ("0", "1") for tok in first)
    if zero_one and len(lines) == len(first):
        return load_dense(path)
    return load_edge_list(path)


def _meta_path(path) -> Path:
    path = Path(path)
    if path.suffix:
        return path.with_suffix(".meta.yaml")
    return Path(str(path) + ".meta.yaml")


def save_positions(positions: np.ndarray, path) -> None:
    """Write a point matrix as CSV with a dim_1..dim_d header."""
    positions = np.asarray(positions, dtype=float)
    if positions.ndim != 2:
        raise ValueError("positions must be a 2-d array")
    d = positions.shape[1]
    header = ",".join("dim_%d" % (k + 1) for k in range(d))
    body = "\n".join(",".join(FLOAT_FMT % v for v in row) for row in positions)
    Path(path).write_text(header + "\n" + body + "\n")


def load_positions(path) -> np.ndarray:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or not lines[0].startswith("dim_1"):
        raise ValueError("embedding CSV must start with a dim_1..dim_d header")
    d = len(lines[0].split(","))
    out = np.empty((len(lines) - 1, d))
    for r, line in enumerate(lines[1:]):
        out[r] = [float(tok) for tok in line.split(",")]
    return out


def save_embedding(embedding: Embedding, path, meta_path=None) -> None:
    """Write positions as CSV and metadata (signature, eigenvalues, sparsity)
    to a YAML sidecar, by default ``<stem>.meta.yaml`` next to the CSV."""
    save_positions(embedding.positions, path)
    meta = {
        "p": embedding.signature.p,
        "q": embedding.signature.q,
        "eigenvalues": [float(v) for v in embedding.eigenvalues],
        "sparsity_estimate": None if embedding.sparsity_estimate is None
        else float(embedding.sparsity_estimate),
    }
    target = _meta_path(path) if meta_path is None else Path(meta_path)
    target.write_text(yaml.safe_dump(meta, sort_keys=True))


def load_embedding(path, meta_path=None) -> Embedding:
    positions = load_positions(path)
    target = _meta_path(path) if meta_path is None else Path(meta_path)
    meta = yaml.safe_load(target.read_text())
    sparsity = meta.get("sparsity_estimate")
    return Embedding(
        positions=positions,
        signature=Signature(int(meta["p"]), int(meta["q"])),
        eigenvalues=np.array([float(v) for v in meta["eigenvalues"]]),
        sparsity_estimate=None if sparsity is None else float(sparsity),
    )


def save_latent_config(config: LatentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))


def load_latent_config(path) -> LatentConfig:
    data = yaml.safe_load(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("model config file must hold a mapping")
    return LatentConfig.from_dict(data)


def save_matrix_csv(matrix: np.ndarray, path, header=None) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = []
    if header is not None:
        lines.append(",".join(header))
    lines.extend(",".join(FLOAT_FMT % v for v in row) for row in matrix)
    Path(path).write_text("\n".join(lines) + "\n")


def format_test_result(result) -> str:
    """Render a test outcome as a small aligned text block."""
    spars = result.sparsity
    rows = [
        ("statistic", FLOAT_FMT % result.statistic),
        ("p_value", FLOAT_FMT % result.p_value),
        ("reject", str(bool(result.reject)).lower()),
        ("permutations", "%d" % len(result.null_samples)),
        ("kernel", "%s (bandwidth=%.6g)" % (result.kernel.family,
                                            result.kernel.bandwidth)),
        ("sparsity", "%.6g, %.6g" % (spars[0], spars[1])),
        ("transport_cost", "%.6g" % result.alignment.transport_cost),
        ("alignment_converged", str(bool(result.alignment.converged)).lower()),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join("%-*s  %s" % (width, k, v) for k, v in rows)


def save_test_result(result, path) -> None:
    data = {
        "statistic": float(result.statistic),
        "p_value": float(result.p_value),
        "reject": bool(result.reject),
        "permutations": int(len(result.null_samples)),
        "kernel": {"family": result.kernel.family,
                   "bandwidth": float(result.kernel.bandwidth)},
        "sparsity": [float(result.sparsity[0]), float(result.sparsity[1])],
        "alignment": {
            "transport_cost": float(result.alignment.transport_cost),
            "u_value": float(result.alignment.u_value),
            "converged": bool(result.alignment.converged),
            "iterations": int(result.alignment.iterations),
            "restarts_tried": int(result.alignment.restarts_tried),
        },
    }
    Path(path).write_text(yaml.safe_dump(data, sort_keys=False))


def save_null_samples(null_samples, path) -> None:
    save_matrix_csv(np.asarray(null_samples, dtype=float).reshape(-1, 1),
                    path, header=["null_statistic"])
