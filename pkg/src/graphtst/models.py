"""Latent-position graph models with indefinite inner products.

Vertices carry latent positions in R^d and edges appear independently with
probability given by an indefinite inner product x^T I_{p,q} y, where
I_{p,q} = diag(+1 x p, -1 x q). Block models (SBM, degree-corrected SBM) are
expressed in this form by spectrally factoring their block matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .util import rng_for

RANK_RTOL = 1e-10
PROB_SLACK = 1e-9


@dataclass(frozen=True)
class Signature:
    """Number of positive (p) and negative (q) inner-product directions."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError("signature counts must be nonnegative")
        if self.p + self.q < 1:
            raise ValueError("signature must have dimension >= 1")

    @property
    def d(self) -> int:
        return self.p + self.q

    def matrix(self) -> np.ndarray:
        """The diagonal metric diag(+1,...,+1,-1,...,-1)."""
        return np.diag(np.concatenate([np.ones(self.p), -np.ones(self.q)]))

    def flip_vector(self) -> np.ndarray:
        """Diagonal of the metric as a length-d vector."""
        return np.concatenate([np.ones(self.p), -np.ones(self.q)])


def indefinite_gram(x: np.ndarray, signature: Signature,
                    y: Optional[np.ndarray] = None) -> np.ndarray:
    """All pairwise indefinite inner products x_i^T I_{p,q} y_j.

    Parameters
    ----------
    x : (n, d) array
    signature : Signature
    y : (m, d) array, optional
        Defaults to ``x``.
    """
    x = np.asarray(x, dtype=float)
    y = x if y is None else np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != signature.d or y.shape[1] != signature.d:
        raise ValueError("positions must be 2-d with %d columns" % signature.d)
    return (x * signature.flip_vector()) @ y.T


@dataclass(frozen=True)
class AffineUniform:
    """Degree-propensity law theta = scale * U(0,1) + shift.

    ``AffineUniform(0.0, 1.0)`` is the constant-1 law and turns a
    degree-corrected model back into the plain block model.
    """

    scale: float
    shift: float

    def __post_init__(self):
        lo = min(self.shift, self.shift + self.scale)
        hi = max(self.shift, self.shift + self.scale)
        if lo < 0 or hi > 1:
            raise ValueError(
                "propensity law has range [%g, %g], must lie in [0, 1]" % (lo, hi))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.scale == 0.0:
            return np.full(n, self.shift)
        return self.scale * rng.uniform(size=n) + self.shift


CONSTANT_ONE = AffineUniform(0.0, 1.0)


def _fix_column_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Ties in magnitude resolve to the lowest index, which argmax already
    guarantees. Makes eigenvector output deterministic up to the input.
    """
    out = vectors.copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        if out[k, j] < 0:
            out[:, j] = -out[:, j]
    return out


def ordered_eigh(matrix: np.ndarray, keep: Optional[int] = None):
    """Symmetric eigendecomposition ordered positive block first.

    Eigenvalues above the relative rank threshold are kept (or exactly
    ``keep`` of largest magnitude if given), sorted with positive values
    descending followed by negative values ascending, so the layout matches
    diag(+1,...,-1,...). Returns ``(values, vectors)``.
    """
    matrix = np.asarray(matrix, dtype=float)
    vals, vecs = np.linalg.eigh(matrix)
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    if scale == 0.0:
        raise ValueError("matrix is numerically zero; no usable eigenvalues")
    if keep is None:
        idx = np.flatnonzero(np.abs(vals) > RANK_RTOL * scale)
        if idx.size == 0:
            raise ValueError("matrix is rank deficient at the %g relative threshold" % RANK_RTOL)
    else:
        order = np.argsort(-np.abs(vals), kind="stable")
        idx = order[:keep]
    kept_vals = vals[idx]
    kept_vecs = vecs[:, idx]
    pos = np.flatnonzero(kept_vals > 0)
    neg = np.flatnonzero(kept_vals <= 0)
    pos = pos[np.argsort(-kept_vals[pos], kind="stable")]
    neg = neg[np.argsort(kept_vals[neg], kind="stable")]
    order = np.concatenate([pos, neg]).astype(int)
    return kept_vals[order], _fix_column_signs(kept_vecs[:, order])


def blockmodel_points(block_matrix: np.ndarray):
    """Latent positions reproducing a block probability matrix.

    Factors the symmetric block matrix ``B`` as ``nu I_{p,q} nu^T`` where the
    indefinite signature (p, q) is read off the signs of the nonzero
    eigenvalues. Row k of ``nu`` is the position shared by all vertices of
    block k.

    Returns
    -------
    nu : (K, d) array
    signature : Signature
    """
    block = np.asarray(block_matrix, dtype=float)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError("block matrix must be square")
    if not np.allclose(block, block.T, atol=1e-12):
        raise ValueError("block matrix must be symmetric")
    if block.min() < 0 or block.max() > 1:
        raise ValueError("block matrix entries must lie in [0, 1]")
    vals, vecs = ordered_eigh(block)
    p = int(np.sum(vals > 0))
    q = int(np.sum(vals <= 0))
    nu = vecs * np.sqrt(np.abs(vals))
    return nu, Signature(p, q)


@dataclass
class LatentSample:
    """Sampled latent positions plus any block structure behind them."""

    positions: np.ndarray
    labels: Optional[np.ndarray] = None
    propensities: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass
class AdmissibilityResult:
    ok: bool
    worst_pair: tuple
    worst_value: float


def admissibility_check(points: np.ndarray, signature: Signature,
                        tol: float = PROB_SLACK) -> AdmissibilityResult:
    """Check that all pairwise inner products (self pairs included) are
    probabilities.

    Reports the pair whose inner product lies farthest outside [0, 1];
    ``ok`` is True when the worst violation is within ``tol``.
    """
    gram = indefinite_gram(points, signature)
    excess = np.maximum(gram - 1.0, -gram)
    i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
    worst = float(excess[i, j])
    return AdmissibilityResult(ok=worst <= tol, worst_pair=(int(i), int(j)),
                               worst_value=float(gram[i, j]))


@dataclass
class Graph:
    """Simple undirected graph as a dense 0/1 adjacency matrix, hollow diagonal."""

    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adjacency)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        uniq = np.unique(adj)
        if not np.all(np.isin(uniq, [0, 1])):
            raise ValueError("adjacency entries must be 0 or 1")
        if np.any(np.diag(adj) != 0):
            raise ValueError("adjacency diagonal must be zero (no self loops)")
        self.adjacency = adj.astype(np.uint8)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def edges(self) -> np.ndarray:
        """(e, 2) array of edges i < j in lexicographic order."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return np.column_stack([i, j])


def probability_matrix(positions: np.ndarray, signature: Signature,
                       sparsity: float = 1.0) -> np.ndarray:
    """Edge probability matrix sparsity * X I_{p,q} X^T, diagonal retained.

    Raises if any entry falls outside [0, 1] beyond a small slack; the error
    names the first offending pair. In-range entries are clipped exactly.
    """
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError("sparsity must lie in [0, 1]")
    probs = sparsity * indefinite_gram(positions, signature)
    bad = (probs < -PROB_SLACK) | (probs > 1.0 + PROB_SLACK)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            "edge probability out of range at pair (%d, %d): %.6g"
            % (i, j, probs[i, j]))
    return np.clip(probs, 0.0, 1.0)


def sample_graph(positions: np.ndarray, signature: Signature,
                 sparsity: float = 1.0, *, seed=None,
                 rng: Optional[np.random.Generator] = None) -> Graph:
    """Draw one graph: independent Bernoulli edges on the upper triangle,
    symmetrized, no self loops."""
    gen = rng if rng is not None else rng_for(seed)
    probs = probability_matrix(positions, signature, sparsity)
    n = probs.shape[0]
    upper = np.triu(gen.uniform(size=(n, n)) < probs, k=1)
    adj = (upper | upper.T).astype(np.uint8)
    return Graph(adj)


_KINDS = ("sbm", "dcsbm", "point-cloud")


@dataclass
class LatentConfig:
    """Declarative description of a graph population.

    kind is one of "sbm", "dcsbm", "point-cloud". Block models carry a block
    matrix ``B`` and mixture weights ``pi``; the degree-corrected variant adds
    an affine-uniform propensity law. Point clouds carry fixed positions and
    an explicit signature. ``sparsity`` scales all edge probabilities.
    """

    kind: str
    B: Optional[np.ndarray] = None
    pi: Optional[np.ndarray] = None
    theta_law: Optional[AffineUniform] = None
    points: Optional[np.ndarray] = None
    signature: Optional[Signature] = None
    sparsity: float = 1.0
    _block_points: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError("kind must be one of %s" % (_KINDS,))
        if not 0.0 <= self.sparsity <= 1.0:
            raise ValueError("sparsity must lie in [0, 1]")
        if self.kind in ("sbm", "dcsbm"):
            if self.B is None:
                raise ValueError("block models require B")
            self.B = np.asarray(self.B, dtype=float)
            k = self.B.shape[0]
            if self.pi is None:
                self.pi = np.full(k, 1.0 / k)
            self.pi = np.asarray(self.pi, dtype=float)
            if self.pi.shape != (k,) or np.any(self.pi < 0) or abs(self.pi.sum() - 1.0) > 1e-9:
                raise ValueError("pi must be a probability vector matching B")
            if self.kind == "dcsbm":
                if self.theta_law is None:
                    self.theta_law = CONSTANT_ONE
            elif self.theta_law is not None:
                raise ValueError("theta_law only applies to dcsbm")
            self._block_points, derived = blockmodel_points(self.B)
            if self.signature is None:
                self.signature = derived
            elif self.signature != derived:
                raise ValueError(
                    "declared signature %s does not match block matrix signature %s"
                    % (self.signature, derived))
        else:
            if self.points is None or self.signature is None:
                raise ValueError("point clouds require points and signature")
            self.points = np.asarray(self.points, dtype=float)
            if self.points.ndim != 2 or self.points.shape[1] != self.signature.d:
                raise ValueError("points must be (n, %d)" % self.signature.d)
            check = admissibility_check(self.points, self.signature)
            if not check.ok:
                raise ValueError(
                    "point cloud is not admissible: pair %s has inner product %.6g"
                    % (check.worst_pair, check.worst_value))

    @classmethod
    def sbm(cls, B, pi=None, sparsity: float = 1.0) -> "LatentConfig":
        return cls(kind="sbm", B=B, pi=pi, sparsity=sparsity)

    @classmethod
    def dcsbm(cls, B, theta_law: AffineUniform, pi=None,
              sparsity: float = 1.0) -> "LatentConfig":
        return cls(kind="dcsbm", B=B, pi=pi, theta_law=theta_law,
                   sparsity=sparsity)

    @classmethod
    def point_cloud(cls, points, signature: Signature,
                    sparsity: float = 1.0) -> "LatentConfig":
        return cls(kind="point-cloud", points=points, signature=signature,
                   sparsity=sparsity)

    def block_positions(self) -> np.ndarray:
        if self._block_points is None:
            raise ValueError("only block models have block positions")
        return self._block_points

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "sparsity": float(self.sparsity)}
        if self.kind in ("sbm", "dcsbm"):
            out["B"] = self.B.tolist()
            out["pi"] = self.pi.tolist()
            if self.kind == "dcsbm":
                out["theta_law"] = {"scale": self.theta_law.scale,
                                    "shift": self.theta_law.shift}
        else:
            out["points"] = self.points.tolist()
        out["signature"] = {"p": self.signature.p, "q": self.signature.q}
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "LatentConfig":
        kind = data.get("kind")
        sparsity = float(data.get("sparsity", 1.0))
        sig = data.get("signature")
        signature = Signature(int(sig["p"]), int(sig["q"])) if sig else None
        if kind in ("sbm", "dcsbm"):
            law = None
            if "theta_law" in data and data["theta_law"] is not None:
                law = AffineUniform(float(data["theta_law"]["scale"]),
                                    float(data["theta_law"]["shift"]))
            return cls(kind=kind, B=np.asarray(data["B"], dtype=float),
                       pi=None if data.get("pi") is None else np.asarray(data["pi"], dtype=float),
                       theta_law=law, signature=signature, sparsity=sparsity)
        return cls(kind="point-cloud",
                   points=np.asarray(data["points"], dtype=float),
                   signature=signature, sparsity=sparsity)


def sample_latent(config: LatentConfig, n: int, *, seed=None,
                  rng: Optional[np.random.Generator] = None) -> LatentSample:
    """Draw latent positions for ``n`` vertices under the config."""
    gen = rng if rng is not None else rng_for(seed)
    if config.kind == "point-cloud":
        if n != config.points.shape[0]:
            raise ValueError(
                "point cloud fixes %d positions; requested %d"
                % (config.points.shape[0], n))
        return LatentSample(positions=config.points.copy())
    labels = gen.choice(config.pi.size, size=n, p=config.pi)
    positions = config.block_positions()[labels]
    if config.kind == "dcsbm":
        theta = config.theta_law.sample(n, gen)
        return LatentSample(positions=theta[:, None] * positions,
                            labels=labels, propensities=theta)
    return LatentSample(positions=positions, labels=labels)


def sample_from_config(config: LatentConfig, n: int, *, seed=None,
                       rng: Optional[np.random.Generator] = None):
    """Draw latent positions and one graph; returns (Graph, LatentSample)."""
    gen = rng if rng is not None else rng_for(seed)
    latent = sample_latent(config, n, rng=gen)
    graph = sample_graph(latent.positions, config.signature,
                         config.sparsity, rng=gen)
    return graph, latent
