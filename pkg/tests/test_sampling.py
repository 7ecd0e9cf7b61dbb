import math

import numpy as np
import pytest

from holofit.indexsets import ZERO_INDEX, IndexSet, hyperbolic_cross, intrinsic_weights
from holofit.legendre import gauss_rule, psi_table
from holofit.sampling import (
    MeasurementSystem,
    build_system,
    design_matrix,
    discretization_constants,
    draw_samples,
    l2_error,
)
from holofit.targets import TargetFunction
from holofit.targets import test_function_product as product_target


class TestDrawSamples:
    def test_deterministic(self):
        a = draw_samples(100, 5, seed=42)
        b = draw_samples(100, 5, seed=42)
        assert np.array_equal(a, b)
        assert a.tobytes() == b.tobytes()

    def test_seed_changes_points(self):
        assert not np.array_equal(draw_samples(10, 2, 0), draw_samples(10, 2, 1))

    def test_bounds_and_shape(self):
        pts = draw_samples(1, 1, 7)
        assert pts.shape == (1, 1)
        assert np.all(np.abs(pts) <= 1.0)

    def test_empirical_mean_clt(self):
        m = 40_000
        pts = draw_samples(m, 3, seed=11)
        bound = 3.0 / math.sqrt(m) / math.sqrt(3.0)
        assert np.max(np.abs(pts.mean(axis=0))) <= bound

    def test_args_validated(self):
        with pytest.raises(ValueError):
            draw_samples(0, 1, 0)


class TestBuildSystem:
    def test_constant_dictionary_column(self):
        target = product_target(2, [1.0, 2.0])
        pts = draw_samples(50, 2, 1)
        sys_ = build_system(target, IndexSet((ZERO_INDEX,), dim=1), pts)
        assert np.allclose(sys_.A, 1.0 / math.sqrt(50))

    def test_column_norm_concentration(self):
        # Monte Carlo check of E||a_j||^2 = 1 at m = 1e4
        m = 10_000
        Lam = hyperbolic_cross(6)
        pts = draw_samples(m, Lam.dim, seed=3)
        A = design_matrix(pts, Lam)
        norms = np.linalg.norm(A, axis=0)
        u = intrinsic_weights(Lam).values
        assert np.max(np.abs(norms - 1.0) / u**2) <= 3.0 / math.sqrt(m)

    def test_noiseless_data_exact(self):
        target = product_target(3, [1.0, 2.0, 3.0])
        pts = draw_samples(20, 3, 5)
        sys_ = build_system(target, hyperbolic_cross(3), pts, noise_scale=0.0)
        assert np.allclose(sys_.F[:, 0] * math.sqrt(20), target(pts))

    def test_noise_norm_exact(self):
        target = product_target(2, [1.0, 1.0])
        pts = draw_samples(30, 2, 5)
        scale = 0.037
        sys_ = build_system(target, hyperbolic_cross(3), pts, noise_scale=scale, seed=9)
        noise = sys_.F * math.sqrt(30) - target(pts)[:, None]
        assert np.linalg.norm(noise) == pytest.approx(scale, rel=1e-12)

    def test_noise_doubles_linearly(self):
        # same seed, doubled scale: identical direction, doubled magnitude
        target = product_target(2, [1.0, 1.0])
        pts = draw_samples(30, 2, 5)
        s1 = build_system(target, hyperbolic_cross(3), pts, noise_scale=0.01, seed=9)
        s2 = build_system(target, hyperbolic_cross(3), pts, noise_scale=0.02, seed=9)
        n1 = s1.F * math.sqrt(30) - target(pts)[:, None]
        n2 = s2.F * math.sqrt(30) - target(pts)[:, None]
        assert np.allclose(n2, 2.0 * n1, rtol=1e-12)

    def test_dimension_guard(self):
        target = product_target(2, [1.0, 1.0])
        with pytest.raises(ValueError):
            build_system(target, hyperbolic_cross(4), draw_samples(5, 2, 0))

    def test_expectation_identity(self):
        # averaged Gram E[A^T A] = I entrywise for the cross of parameter 6
        m = 10_000
        Lam = hyperbolic_cross(6)
        u = intrinsic_weights(Lam).values
        acc = np.zeros((len(Lam), len(Lam)))
        n_seeds = 10
        for seed in range(n_seeds):
            A = design_matrix(draw_samples(m, Lam.dim, seed=100 + seed), Lam)
            acc += A.T @ A
        acc /= n_seeds
        err = np.abs(acc - np.eye(len(Lam)))
        bound = 5.0 * np.outer(u, u) / math.sqrt(m)
        assert np.all(err <= bound)


class TestDiscretizationConstants:
    def test_constant_column(self):
        A = design_matrix(draw_samples(40, 2, 0), IndexSet((ZERO_INDEX,), dim=1))
        alpha, beta = discretization_constants(A, [0])
        assert alpha == pytest.approx(1.0, abs=1e-12)
        assert beta == pytest.approx(1.0, abs=1e-12)

    def test_underdetermined_gives_zero(self):
        Lam = hyperbolic_cross(4)
        A = design_matrix(draw_samples(len(Lam) - 1, Lam.dim, 0), Lam)
        alpha, _ = discretization_constants(A, range(len(Lam)))
        assert alpha == 0.0

    def test_permutation_invariance(self):
        Lam = hyperbolic_cross(4)
        A = design_matrix(draw_samples(60, Lam.dim, 2), Lam)
        cols = list(range(6))
        a1 = discretization_constants(A, cols)
        a2 = discretization_constants(A, cols[::-1])
        assert a1 == pytest.approx(a2, rel=1e-12)

    def test_log_regime_constants(self):
        # m >= 4 kappa log(2s/eps) puts (alpha, beta) inside [1/2, 2] whp;
        # checked on 20 fixed seeds
        Lam = hyperbolic_cross(3)
        kappa = sum(nu.weight_squared() for nu in Lam)
        s = len(Lam)
        m = int(4 * kappa * math.log(2 * s / 0.1)) + 1
        for seed in range(20):
            A = design_matrix(draw_samples(m, Lam.dim, seed=seed), Lam)
            alpha, beta = discretization_constants(A, range(s))
            assert alpha >= 0.5, (seed, alpha)
            assert beta <= 2.0, (seed, beta)


class TestL2Error:
    def test_zero_for_identical(self):
        target = product_target(2, [1.0, 1.0])
        est, se = l2_error(target, target, 500, seed=0)
        assert est <= 1e-13

    def test_constant_gap(self):
        one = TargetFunction(dim=2, evaluate=lambda p: np.ones(p.shape[0]))
        zero = lambda p: np.zeros(p.shape[0])
        est, se = l2_error(one, zero, 2000, seed=1)
        assert est == pytest.approx(1.0, abs=1e-12)

    def test_matches_quadrature_oracle(self):
        # d = 1 gap between the product target and zero equals its L2 norm,
        # computable by quadrature
        target = product_target(1, [1.0])
        rule = gauss_rule(60)
        vals = target(rule.nodes[:, None])
        truth = math.sqrt(float(np.sum(rule.weights * vals**2)))
        est, se = l2_error(target, lambda p: np.zeros(p.shape[0]), 20_000, seed=2)
        assert abs(est - truth) <= 3.0 * max(se, 1e-6)

    def test_hilbert_valued_with_gram(self):
        K = 4
        G = np.diag([1.0, 2.0, 3.0, 4.0])
        tgt = TargetFunction(dim=1, evaluate=lambda p: np.tile([1.0, 0, 0, 0], (p.shape[0], 1)), output_dim=K)
        zero = lambda p: np.zeros((p.shape[0], K))
        est, _ = l2_error(tgt, zero, 200, seed=0, gram=G)
        assert est == pytest.approx(1.0, abs=1e-12)


class TestContainer:
    def test_round_trip(self, tmp_path):
        target = product_target(2, [1.0, 2.0])
        pts = draw_samples(25, 2, 7)
        sys_ = build_system(target, hyperbolic_cross(3), pts, noise_scale=0.01, seed=7)
        path = tmp_path / "system.bin"
        sys_.save(path)
        back = MeasurementSystem.load(path)
        assert np.array_equal(back.A, sys_.A)
        assert np.array_equal(back.F, sys_.F)
        assert np.array_equal(back.points, sys_.points)
        assert list(back.index_set) == list(sys_.index_set)
        assert back.seed == 7
        assert back.index_digest() == sys_.index_digest()

    def test_csv_export(self, tmp_path):
        target = product_target(1, [1.0])
        sys_ = build_system(target, hyperbolic_cross(2), draw_samples(5, 1, 0))
        path = tmp_path / "system.csv"
        sys_.save_csv(path)
        rows = path.read_text().splitlines()
        assert len(rows) == 6
        assert rows[0].startswith("y1,")

    def test_magic_guard(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"not a container")
        with pytest.raises(ValueError):
            MeasurementSystem.load(path)
