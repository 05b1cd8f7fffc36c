#!/usr/bin/env python3
"""Why alignment needs more than sign flips, shown on one planted map.

Spectral embeddings of indefinite low-rank graphs are only identified up to
a block-orthogonal map: any rotation or reflection acting separately on the
positive and negative eigenvalue directions leaves the probability matrix
unchanged. A pipeline that only tries the 2^d diagonal sign flips misses the
continuous part of that group.

This demo makes the gap concrete. It embeds one sampled graph, applies a
random block-orthogonal map with a genuine rotation in the negative block,
and then tries to undo the map two ways: the best of all sign flips, and the
transport-based alignment search. The sign flips cannot reach the planted
rotation; the search recovers it to a fraction of a percent.
"""

import argparse

import numpy as np

from graphtst import (
    KernelSpec,
    LatentConfig,
    Signature,
    align,
    ase,
    best_sign_flip,
    resolve_bandwidth,
    sample_from_config,
    u_statistic,
)
from graphtst.alignment import random_block_orthogonal

B = np.array([
    [0.5, 0.8, 0.8],
    [0.8, 0.5, 0.8],
    [0.8, 0.8, 0.5],
])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=300)
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()

    sig = Signature(1, 2)
    model = LatentConfig.sbm(B)
    graph, _ = sample_from_config(model, args.n, seed=[args.seed, 1])
    x = ase(graph, sig).scaled_positions()

    gen = np.random.default_rng(args.seed)
    planted = random_block_orthogonal(sig, gen)
    y = planted.apply(x)
    print("planted block-orthogonal map:")
    print(np.array_str(planted.matrix, precision=4, suppress_small=True))

    spec = resolve_bandwidth(KernelSpec(), np.vstack([x, y]))
    u_raw = u_statistic(spec, x, y).u_stat
    u_flip, flip = best_sign_flip(spec, x, y)
    print()
    print("statistic with no correction:      %.6f" % u_raw)
    print("statistic after best sign flip:    %.6f  (flip diag %s)"
          % (u_flip, np.diag(flip).astype(int)))

    result = align(x, y, sig, kernel=spec, seed=args.seed)
    recovery = np.linalg.norm(result.w.matrix @ planted.matrix - np.eye(3))
    print("statistic after alignment search:  %.6f" % result.u_value)
    print()
    print("transport distance after alignment: %.2e"
          % np.sqrt(result.transport_cost))
    print("||W_recovered @ W_planted - I||_F:  %.2e" % recovery)
    if result.u_value <= u_flip and recovery < 1e-2:
        print("the search undid the planted rotation; sign flips could not")


if __name__ == "__main__":
    main()
