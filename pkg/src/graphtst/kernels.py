"""Translation-invariant kernels and the two-sample MMD statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from .util import rng_for

FAMILIES = ("gaussian", "laplace")
MEDIAN_HEURISTIC = "median-heuristic"
EXACT_PAIR_LIMIT = 2000
SUBSAMPLE_PAIRS = 1_000_000
COMPENSATED_MIN_TERMS = 10_000


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus bandwidth, possibly left to the median heuristic.

    gaussian: k(x, y) = exp(-||x - y||_2^2 / h^2)
    laplace:  k(x, y) = exp(-||x - y||_1 / h)
    """

    family: str = "gaussian"
    bandwidth: Union[float, str] = MEDIAN_HEURISTIC

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError("kernel family must be one of %s" % (FAMILIES,))
        if isinstance(self.bandwidth, str):
            if self.bandwidth != MEDIAN_HEURISTIC:
                raise ValueError("string bandwidth must be %r" % MEDIAN_HEURISTIC)
        elif not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    @property
    def resolved(self) -> bool:
        return not isinstance(self.bandwidth, str)


def _pair_distances(pooled: np.ndarray, metric: str, seed) -> np.ndarray:
    n = pooled.shape[0]
    if n < 2:
        raise ValueError("need at least two points for the median heuristic")
    if n <= EXACT_PAIR_LIMIT:
        full = cdist(pooled, pooled, metric)
        iu = np.triu_indices(n, k=1)
        return full[iu]
    gen = rng_for(seed, n)
    i = gen.integers(0, n, size=SUBSAMPLE_PAIRS)
    j = gen.integers(0, n - 1, size=SUBSAMPLE_PAIRS)
    j = np.where(j >= i, j + 1, j)
    diff = pooled[i] - pooled[j]
    if metric == "sqeuclidean":
        return np.einsum("ij,ij->i", diff, diff)
    return np.abs(diff).sum(axis=1)


def median_heuristic(x: np.ndarray, y: Optional[np.ndarray] = None,
                     family: str = "gaussian", seed=0) -> float:
    """Bandwidth from the median pairwise distance of the pooled sample.

    For the gaussian family the squared bandwidth is the median of pairwise
    squared Euclidean distances (so the returned sigma is its square root);
    for laplace the bandwidth is the median of pairwise L1 distances. All
    pairs are used up to 2000 pooled points; beyond that a seeded subsample
    of one million pairs stands in.
    """
    pooled = np.asarray(x, dtype=float)
    if y is not None:
        pooled = np.vstack([pooled, np.asarray(y, dtype=float)])
    metric = "sqeuclidean" if family == "gaussian" else "cityblock"
    dists = _pair_distances(pooled, metric, seed)
    med = float(np.median(dists))
    if med <= 0.0:
        raise ValueError(
            "median pairwise distance is zero; pass an explicit bandwidth")
    return float(np.sqrt(med)) if family == "gaussian" else med


def resolve_bandwidth(spec: KernelSpec, x: np.ndarray,
                      y: Optional[np.ndarray] = None, seed=0) -> KernelSpec:
    """Pin a numeric bandwidth, applying the median heuristic if needed."""
    if spec.resolved:
        return spec
    return replace(spec, bandwidth=median_heuristic(x, y, spec.family, seed))


def gram(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kernel matrix k(x_i, y_j)."""
    if not spec.resolved:
        raise ValueError("bandwidth must be resolved before evaluating the kernel")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if spec.family == "gaussian":
        sq = cdist(x, y, "sqeuclidean")
        return np.exp(-sq / spec.bandwidth ** 2)
    l1 = cdist(x, y, "cityblock")
    return np.exp(-l1 / spec.bandwidth)


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    """Kernel value for a single pair of vectors."""
    return float(gram(spec, np.atleast_2d(x), np.atleast_2d(y))[0, 0])


def _block_sum(k: np.ndarray) -> float:
    # fixed-order compensated reduction once blocks get large
    if k.size >= COMPENSATED_MIN_TERMS:
        return math.fsum(k.ravel().tolist())
    return float(k.sum())


@dataclass
class MMDValue:
    """U- and V-statistic estimates of the squared MMD for one sample pair."""

    u_stat: float
    v_stat: float
    n: int
    m: int
    kernel: KernelSpec


def u_statistic(spec: KernelSpec, x: np.ndarray, y: np.ndarray,
                seed=0) -> MMDValue:
    """Unbiased and biased squared-MMD estimates in one pass.

    The U-statistic drops within-sample diagonal terms and normalizes by
    n(n-1) and m(m-1); the V-statistic keeps them with 1/n^2 and 1/m^2. An
    unresolved bandwidth is resolved on the pooled sample first.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.shape[0], y.shape[0]
    if n < 2 or m < 2:
        raise ValueError("both samples need at least two points")
    spec = resolve_bandwidth(spec, x, y, seed)
    kxx = gram(spec, x, x)
    kyy = gram(spec, y, y)
    kxy = gram(spec, x, y)
    sxx = _block_sum(kxx)
    syy = _block_sum(kyy)
    sxy = _block_sum(kxy)
    txx = float(np.trace(kxx))
    tyy = float(np.trace(kyy))
    u = ((sxx - txx) / (n * (n - 1.0))
         - 2.0 * sxy / (n * m)
         + (syy - tyy) / (m * (m - 1.0)))
    v = sxx / (n * n) - 2.0 * sxy / (n * m) + syy / (m * m)
    return MMDValue(u_stat=float(u), v_stat=float(v), n=n, m=m, kernel=spec)
