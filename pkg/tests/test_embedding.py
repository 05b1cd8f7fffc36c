"""Adjacency spectral embedding and degree-scaling estimates."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from graphtst import (
    Graph,
    LatentConfig,
    Signature,
    ase,
    eigengap_report,
    indefinite_gram,
    probability_matrix,
    sample_from_config,
    sample_latent,
)
from graphtst.embedding import (
    Embedding,
    estimate_sparsity,
    scale_estimate,
    scaled_embedding,
)

from conftest import THREE_BLOCK_SIG, three_block_config

TWO_BLOCK_B = np.array([[0.5, 0.2], [0.2, 0.4]])


def min_two_inf_error(positions, target):
    """Best max-row-norm error over block-orthogonal maps for signature (1, 2)."""
    best = np.inf
    for sign in (1.0, -1.0):
        for refl in (1.0, -1.0):
            def error(theta):
                c, s = np.cos(theta), np.sin(theta)
                rot = np.array([[c, -s * refl], [s, c * refl]])
                w = np.zeros((3, 3))
                w[0, 0] = sign
                w[1:, 1:] = rot
                return np.max(np.linalg.norm(positions @ w - target, axis=1))

            grid = np.linspace(0.0, 2.0 * np.pi, 181)
            coarse = [error(t) for t in grid]
            t0 = grid[int(np.argmin(coarse))]
            refined = minimize_scalar(error, bracket=(t0 - 0.05, t0, t0 + 0.05))
            best = min(best, refined.fun, min(coarse))
    return best


class TestAse:
    def test_constant_off_diagonal_matrix(self):
        p = 0.5 * (np.ones((4, 4)) - np.eye(4))
        emb = ase(p, Signature(1, 0))
        assert abs(emb.eigenvalues[0] - 1.5) < 1e-12
        assert np.allclose(np.abs(emb.positions), 0.5 * np.sqrt(1.5))

    def test_exact_probability_matrix_reproduced(self):
        cfg = three_block_config()
        latent = sample_latent(cfg, 90, seed=3)
        p = probability_matrix(latent.positions, cfg.signature)
        emb = ase(p, cfg.signature)
        recon = indefinite_gram(emb.positions, cfg.signature)
        assert np.max(np.abs(recon - p)) < 1e-8

    def test_zero_matrix_raises(self):
        with pytest.raises(ValueError):
            ase(np.zeros((5, 5)), Signature(1, 0))

    def test_signature_sign_mismatch_raises(self):
        cfg = three_block_config()
        latent = sample_latent(cfg, 60, seed=0)
        p = probability_matrix(latent.positions, cfg.signature)
        with pytest.raises(ValueError):
            ase(p, Signature(2, 1))

    def test_dimension_larger_than_graph_raises(self):
        with pytest.raises(ValueError):
            ase(np.array([[0.0, 0.5], [0.5, 0.0]]), Signature(2, 1))

    def test_iterative_path_matches_dense(self):
        cfg = LatentConfig.sbm(TWO_BLOCK_B)
        graph, _ = sample_from_config(cfg, 400, seed=9)
        dense = ase(graph, cfg.signature)
        sparse = ase(graph, cfg.signature, dense_limit=10)
        assert np.allclose(dense.eigenvalues, sparse.eigenvalues, atol=1e-8)
        assert np.max(np.abs(dense.positions - sparse.positions)) < 1e-8

    def test_deterministic(self):
        cfg = three_block_config()
        graph, _ = sample_from_config(cfg, 120, seed=5)
        a = ase(graph, THREE_BLOCK_SIG)
        b = ase(graph, THREE_BLOCK_SIG)
        assert np.array_equal(a.positions, b.positions)


class TestSparsityEstimate:
    def test_complete_and_empty(self):
        n = 10
        complete = Graph(np.ones((n, n), dtype=np.uint8)
                         - np.eye(n, dtype=np.uint8))
        assert estimate_sparsity(complete) == 1.0
        assert estimate_sparsity(Graph(np.zeros((n, n), dtype=np.uint8))) == 0.0

    def test_matches_edge_probability(self):
        cloud = LatentConfig.point_cloud(np.full((600, 1), np.sqrt(0.3)),
                                         Signature(1, 0))
        graph, _ = sample_from_config(cloud, 600, seed=2)
        assert abs(estimate_sparsity(graph) - 0.3) < 0.01

    def test_block_mixture_mean(self):
        graph, _ = sample_from_config(three_block_config(), 500, seed=13)
        assert abs(estimate_sparsity(graph) - 0.7) < 0.03


class TestScaling:
    def test_scaled_embedding_identity_at_unit_sparsity(self):
        cfg = three_block_config()
        graph, _ = sample_from_config(cfg, 80, seed=1)
        emb = ase(graph, THREE_BLOCK_SIG)
        assert np.array_equal(scaled_embedding(emb, 1.0), emb.positions)
        assert np.allclose(scaled_embedding(emb, 0.25), 2.0 * emb.positions)

    def test_scaled_positions_divides_by_root_density(self):
        cfg = three_block_config()
        graph, _ = sample_from_config(cfg, 80, seed=1)
        emb = ase(graph, THREE_BLOCK_SIG)
        expected = emb.positions / np.sqrt(emb.sparsity_estimate)
        assert np.allclose(emb.scaled_positions(), expected)

    def test_scaled_positions_requires_density(self):
        cfg = three_block_config()
        latent = sample_latent(cfg, 40, seed=0)
        p = probability_matrix(latent.positions, cfg.signature)
        emb = ase(p, cfg.signature)
        with pytest.raises(ValueError):
            emb.scaled_positions()

    def test_scale_estimate_values(self):
        assert scale_estimate_of(np.zeros((4, 2))) == 0.0
        assert abs(scale_estimate_of(np.eye(3)) - 1.0) < 1e-12


def scale_estimate_of(positions):
    d = positions.shape[1]
    emb = Embedding(positions=positions, signature=Signature(d, 0),
                    eigenvalues=np.ones(d), sparsity_estimate=1.0)
    return scale_estimate(emb)


class TestEigengapReport:
    def test_three_block_gap_profile(self):
        graph, _ = sample_from_config(three_block_config(), 600, seed=2)
        report = eigengap_report(graph, 6)
        assert len(report.magnitudes) == 7
        assert len(report.gaps) == 6
        assert np.all(np.diff(report.magnitudes) <= 0)
        assert int(np.argmax(report.scaled_gaps)) == 0
        # two repeated negative eigenvalues, then a drop into the noise bulk
        assert report.scaled_gaps[2] > 2.0 * report.scaled_gaps[1]
        assert np.allclose(report.gaps,
                           report.scaled_gaps * graph.n
                           * report.sparsity_estimate)

    def test_complete_graph_single_dominant_direction(self):
        n = 40
        complete = Graph(np.ones((n, n), dtype=np.uint8)
                         - np.eye(n, dtype=np.uint8))
        report = eigengap_report(complete, 3)
        assert abs(report.magnitudes[0] - (n - 1)) < 1e-8
        assert int(np.argmax(report.scaled_gaps)) == 0


@pytest.mark.slow
class TestConcentration:
    def test_two_inf_error_shrinks_with_graph_size(self):
        cfg = three_block_config()
        medians = []
        for n in (150, 300, 600):
            errors = []
            for seed in range(10):
                graph, latent = sample_from_config(cfg, n, seed=seed)
                emb = ase(graph, THREE_BLOCK_SIG)
                target = cfg.block_positions()[latent.labels]
                errors.append(min_two_inf_error(emb.positions, target))
            medians.append(np.median(errors))
        assert medians[0] > medians[1] > medians[2]
