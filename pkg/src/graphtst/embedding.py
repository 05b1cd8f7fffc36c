"""Adjacency spectral embedding for indefinite low-rank graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.sparse.linalg

from .models import Graph, Signature, _fix_column_signs, RANK_RTOL
from .util import rng_for

DENSE_LIMIT = 2048
TIE_TOL = 1e-12
RESIDUAL_TOL = 1e-10


@dataclass
class Embedding:
    """Spectral embedding of one graph.

    positions holds one row per vertex; columns follow the signature layout
    (positive-eigenvalue directions first). eigenvalues are the retained
    adjacency eigenvalues in the same column order. sparsity_estimate is the
    empirical edge density when the input was a binary graph, else None.
    """

    positions: np.ndarray
    signature: Signature
    eigenvalues: np.ndarray
    sparsity_estimate: Optional[float] = None

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def scaled_positions(self) -> np.ndarray:
        """Positions divided by sqrt of the sparsity estimate."""
        if self.sparsity_estimate is None:
            raise ValueError("embedding has no sparsity estimate to scale by")
        if self.sparsity_estimate <= 0.0:
            raise ValueError("sparsity estimate is zero; graph has no edges")
        return self.positions / np.sqrt(self.sparsity_estimate)


def estimate_sparsity(graph: Graph) -> float:
    """Empirical edge density: edges divided by vertex pairs."""
    n = graph.n
    if n < 2:
        raise ValueError("graph must have at least two vertices")
    return float(graph.adjacency.sum()) / (n * (n - 1))


def scaled_embedding(embedding: Embedding, alpha: float) -> np.ndarray:
    """Embedding positions divided by sqrt(alpha)."""
    if not alpha > 0:
        raise ValueError("scaling requires a positive sparsity factor")
    return embedding.positions / np.sqrt(alpha)


def scale_estimate(embedding: Embedding) -> float:
    """Root-mean-square row norm n^{-1/2} ||X||_F of the embedding."""
    return float(np.linalg.norm(embedding.positions) / np.sqrt(embedding.n))


def _select_leading(vals: np.ndarray, d: int) -> np.ndarray:
    """Indices of the d leading eigenvalues by magnitude.

    Magnitude ties within TIE_TOL resolve to the positive eigenvalue first,
    then to the lower input index, so the selection is deterministic.
    """
    order = sorted(range(vals.size),
                   key=lambda i: (-abs(vals[i]), vals[i] <= 0, i))
    merged = list(order)
    # stable pass: within tie groups keep (positive first, lower index)
    i = 0
    while i < len(merged):
        j = i
        while (j + 1 < len(merged)
               and abs(abs(vals[merged[j + 1]]) - abs(vals[merged[i]])) <= TIE_TOL):
            j += 1
        group = sorted(merged[i:j + 1], key=lambda k: (vals[k] <= 0, k))
        merged[i:j + 1] = group
        i = j + 1
    return np.array(merged[:d], dtype=int)


def _dense_eigpairs(matrix: np.ndarray, d: int):
    vals, vecs = np.linalg.eigh(matrix)
    idx = _select_leading(vals, d)
    return vals[idx], vecs[:, idx]


def _iterative_eigpairs(matrix: np.ndarray, d: int):
    n = matrix.shape[0]
    v0 = rng_for(7, n).standard_normal(n)
    vals, vecs = scipy.sparse.linalg.eigsh(matrix, k=d, which="LM", v0=v0,
                                           tol=1e-12, maxiter=50 * n)
    scale = float(np.max(np.abs(vals)))
    resid = matrix @ vecs - vecs * vals
    worst = float(np.max(np.linalg.norm(resid, axis=0)))
    if worst > RESIDUAL_TOL * max(scale, 1.0):
        raise RuntimeError(
            "iterative eigensolver residual %.3g exceeds tolerance" % worst)
    idx = _select_leading(vals, d)
    return vals[idx], vecs[:, idx]


def ase(graph: Union[Graph, np.ndarray], signature: Signature,
        dense_limit: int = DENSE_LIMIT) -> Embedding:
    """Adjacency spectral embedding X = U |L|^{1/2}.

    Takes the d = p + q eigenpairs of largest magnitude and scales the
    eigenvectors by the square root of the absolute eigenvalues. Columns are
    ordered positive eigenvalues descending, then negative eigenvalues most
    negative first, matching the signature metric layout. Accepts either a
    Graph or any symmetric matrix (e.g. an exact edge probability matrix);
    both run through the same eigensolver path.

    Raises if the retained spectrum is rank deficient at the relative
    threshold, or if the counts of positive/negative leading eigenvalues do
    not match the requested signature.
    """
    if isinstance(graph, Graph):
        matrix = graph.adjacency.astype(float)
        sparsity = estimate_sparsity(graph)
    else:
        matrix = np.asarray(graph, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError("matrix input must be square")
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            raise ValueError("matrix input must be symmetric")
        sparsity = None
    n = matrix.shape[0]
    d = signature.d
    if d > n:
        raise ValueError("embedding dimension %d exceeds graph order %d" % (d, n))
    if n <= dense_limit:
        vals, vecs = _dense_eigpairs(matrix, d)
    else:
        vals, vecs = _iterative_eigpairs(matrix, d)
    scale = float(np.max(np.abs(vals)))
    if scale == 0.0 or np.min(np.abs(vals)) <= RANK_RTOL * scale:
        raise ValueError(
            "leading spectrum is rank deficient: smallest retained magnitude "
            "%.3g below threshold" % float(np.min(np.abs(vals))))
    n_pos = int(np.sum(vals > 0))
    n_neg = d - n_pos
    if n_pos != signature.p or n_neg != signature.q:
        raise ValueError(
            "leading spectrum has signature (%d, %d), expected (%d, %d)"
            % (n_pos, n_neg, signature.p, signature.q))
    pos = np.flatnonzero(vals > 0)
    neg = np.flatnonzero(vals < 0)
    pos = pos[np.argsort(-vals[pos], kind="stable")]
    neg = neg[np.argsort(vals[neg], kind="stable")]
    order = np.concatenate([pos, neg]).astype(int)
    vals = vals[order]
    vecs = _fix_column_signs(vecs[:, order])
    positions = vecs * np.sqrt(np.abs(vals))
    return Embedding(positions=positions, signature=signature,
                     eigenvalues=vals, sparsity_estimate=sparsity)


@dataclass
class EigengapReport:
    """Leading eigenvalues, their consecutive magnitude gaps, and the gaps
    normalized by n times the edge density, for judging whether rotation
    alignment is well conditioned at this sample size."""

    eigenvalues: np.ndarray
    magnitudes: np.ndarray
    gaps: np.ndarray
    scaled_gaps: Optional[np.ndarray]
    sparsity_estimate: Optional[float]


def eigengap_report(graph: Union[Graph, np.ndarray], d_max: int) -> EigengapReport:
    """Inspect the top d_max magnitude-sorted eigenvalues of the adjacency
    matrix, their consecutive gaps, and gap/(n * density) ratios."""
    if isinstance(graph, Graph):
        matrix = graph.adjacency.astype(float)
        sparsity = estimate_sparsity(graph)
    else:
        matrix = np.asarray(graph, dtype=float)
        sparsity = None
    n = matrix.shape[0]
    if d_max > n:
        raise ValueError("d_max cannot exceed the graph order")
    k = min(d_max + 1, n)
    if n <= DENSE_LIMIT:
        vals = np.linalg.eigvalsh(matrix)
        idx = _select_leading(vals, k)
        top = vals[idx]
    else:
        top, _ = _iterative_eigpairs(matrix, k)
        top = top[_select_leading(top, k)]
    mags = np.abs(top)
    gaps = np.maximum(mags[:-1] - mags[1:], 0.0)
    scaled = None
    if sparsity is not None and sparsity > 0:
        scaled = gaps / (n * sparsity)
    return EigengapReport(eigenvalues=top, magnitudes=mags, gaps=gaps,
                          scaled_gaps=scaled, sparsity_estimate=sparsity)
