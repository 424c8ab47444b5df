import numpy as np
import pytest

from mlfg import (
    NewtonConfig,
    PrimalDualPoint,
    SubgradConfig,
    aggregate_direction,
    armijo_search,
    generalized_jacobian,
    kkt_residual,
    lu_solve,
    merit,
    merit_subgradient,
    newton_solve,
    subgradient_solve,
)

from conftest import make_game


class TestLuSolve:
    def test_identity(self):
        rhs = np.array([3.0, -1.0, 2.0])
        np.testing.assert_array_equal(lu_solve(np.eye(3), rhs), rhs)

    def test_rank_deficient_flags_singular(self):
        assert lu_solve(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 0.0])) is None

    def test_zero_matrix(self):
        assert lu_solve(np.zeros((2, 2)), np.ones(2)) is None

    def test_residual_contract(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            M = rng.standard_normal((10, 10)) + 3.0 * np.eye(10)
            rhs = rng.standard_normal(10)
            x = lu_solve(M, rhs)
            assert x is not None
            assert np.linalg.norm(M @ x - rhs) <= 1e-9 * (1 + np.linalg.norm(rhs))

    def test_pivoting_handles_zero_leading_entry(self):
        M = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(lu_solve(M, np.array([2.0, 5.0])), [5.0, 2.0])

    def test_near_singular_threshold(self):
        M = np.array([[1.0, 0.0], [0.0, 1e-15]])
        assert lu_solve(M, np.ones(2)) is None
        assert lu_solve(M, np.ones(2), pivot_tol=1e-18) is not None

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            lu_solve(np.ones((2, 3)), np.ones(2))


class TestArmijo:
    def test_descent_direction_accepted(self, ds1):
        rng = np.random.default_rng(1)
        z = PrimalDualPoint(rng.uniform(-1, 1, 4), rng.uniform(0, 1, 6))
        s = -merit_subgradient(ds1, z, eps=0.8)
        t, ok = armijo_search(ds1, z, s, eps=0.8)
        assert ok and t > 0.0

    def test_ascent_direction_flagged(self, ds1):
        # near the root the merit is locally strictly convex, so moving
        # along the positive subgradient can only increase it
        root = newton_solve(ds1, eps=0.8).z
        z = PrimalDualPoint(root.x + 0.01, root.lam.copy())
        s = +merit_subgradient(ds1, z, eps=0.8)
        t, ok = armijo_search(ds1, z, s, eps=0.8)
        assert not ok and t == 0.0

    def test_full_step_near_solution(self, ds1):
        # the local phase takes unit Newton steps
        res = newton_solve(ds1, eps=0.5, cfg=NewtonConfig(tol=1e-6))
        z = res.z
        H = generalized_jacobian(ds1, z, eps=0.5).matrix()
        s = lu_solve(H, -kkt_residual(ds1, z, eps=0.5).stack())
        assert s is not None
        t, ok = armijo_search(ds1, z, s, eps=0.5)
        assert ok and t == 1.0


class TestNewton:
    def test_quadratic_game_two_steps(self, quadratic_game):
        game = quadratic_game
        x_star = np.concatenate([-np.linalg.solve(ld.Q, ld.c) for ld in game.leaders])
        for start in (PrimalDualPoint.zeros(game), PrimalDualPoint(np.ones(4), np.ones(4))):
            res = newton_solve(game, start, eps=0.7)
            assert res.converged
            assert res.iterations <= 2
            np.testing.assert_allclose(res.z.x, x_star, atol=1e-8)
            np.testing.assert_allclose(res.z.lam, np.zeros(4), atol=1e-10)

    def test_dataset1_converges(self, ds1):
        res = newton_solve(ds1, eps=1.6)
        assert res.converged
        assert res.merit <= 1e-10
        assert res.iterations <= 20

    def test_solution_certificate(self, ds1, ds2):
        for game in (ds1, ds2):
            for eps in (1.6, 0.1):
                res = newton_solve(game, eps=eps)
                assert res.converged
                kkt = kkt_residual(game, res.z, eps=eps)
                assert np.max(np.abs(kkt.F1)) <= 1e-5
                assert np.max(np.abs(kkt.F2)) <= 1e-5
                assert np.all(res.z.lam >= -1e-9)
                assert np.all(game.constraint_values(res.z.x) <= 1e-9)

    def test_multistart_agreement(self, ds1):
        # a merit of 1e-10 still allows x-errors near 3e-6 through the
        # Jacobian's smallest singular value, so agreement to 1e-6 needs
        # the tighter stop
        cfg = NewtonConfig(tol=1e-12)
        rng = np.random.default_rng(3)
        finals = []
        for _ in range(20):
            z0 = PrimalDualPoint(rng.uniform(-1, 1, 4), np.maximum(rng.uniform(-1, 1, 6), 0))
            res = newton_solve(ds1, z0, eps=0.5, cfg=cfg)
            assert res.converged
            finals.append(res.z.x)
        spread = max(
            np.linalg.norm(a - b) for i, a in enumerate(finals) for b in finals[i + 1 :]
        )
        assert spread <= 1e-6

    def test_monotone_merit(self, ds1, ds2):
        rng = np.random.default_rng(4)
        for game in (ds1, ds2):
            for _ in range(50):
                z0 = PrimalDualPoint(
                    rng.uniform(-2, 2, game.n), rng.uniform(-1, 1, game.m_bar)
                )
                res = newton_solve(game, z0, eps=0.4)
                hist = np.array(res.merit_history)
                assert np.all(np.diff(hist) <= 0.0)

    def test_determinism(self, ds1):
        z0 = PrimalDualPoint(np.full(4, 0.3), np.full(6, 0.2))
        r1 = newton_solve(ds1, z0, eps=0.3)
        r2 = newton_solve(ds1, z0, eps=0.3)
        assert r1.merit_history == r2.merit_history
        np.testing.assert_array_equal(r1.z.x, r2.z.x)
        np.testing.assert_array_equal(r1.z.lam, r2.z.lam)

    def test_iteration_cap(self, ds1):
        res = newton_solve(ds1, eps=0.5, cfg=NewtonConfig(tol=1e-10, max_iter=1))
        assert not res.converged
        assert res.iterations == 1
        assert np.all(np.isfinite(res.z.stack()))

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            NewtonConfig(beta=1.5)
        with pytest.raises(ValueError):
            NewtonConfig(sigma=0.7)
        with pytest.raises(ValueError):
            NewtonConfig(tol=0.0)


class TestSubgradient:
    def test_immediate_return_at_root(self, ds1):
        root = newton_solve(ds1, eps=0.9).z
        res = subgradient_solve(ds1, root, eps=0.9)
        assert res.converged
        assert res.iterations == 0

    def test_scalar_quadratic_merit(self):
        # single variable, zero weights, loose constraint: the merit is a
        # strictly convex quadratic in x and descent contracts it linearly
        game = make_game(
            [np.array([[1.0]])],
            [np.zeros(1)],
            [np.array([[1.0]])],
            [np.array([-100.0])],
            np.array([1.0]),
            np.array([[1.0]]),
            np.array([[1.0]]),
            np.array([0.0]),
        )
        z0 = PrimalDualPoint(np.array([1.0]), np.zeros(1))
        res = subgradient_solve(game, z0, eps=0.5, cfg=SubgradConfig(tol=1e-12))
        assert res.converged
        assert abs(res.z.x[0]) <= 1e-5
        hist = np.array(res.merit_history)
        assert np.all(np.diff(hist) < 0.0)

    def test_harder_at_smaller_smoothing(self, ds1):
        cfg = SubgradConfig(tol=1e-8)
        easy = subgradient_solve(ds1, eps=1.6, cfg=cfg)
        hard = subgradient_solve(ds1, eps=0.1, cfg=cfg)
        assert easy.converged and hard.converged
        assert hard.iterations > easy.iterations

    def test_monotone_merit(self, ds1):
        res = subgradient_solve(ds1, eps=0.8, cfg=SubgradConfig(tol=1e-8))
        hist = np.array(res.merit_history)
        assert np.all(np.diff(hist) <= 0.0)

    def test_caps_return_best_iterate(self, ds1):
        cfg = SubgradConfig(tol=1e-14, max_outer=2, max_inner=5)
        res = subgradient_solve(ds1, eps=0.5, cfg=cfg)
        assert not res.converged
        assert res.merit <= res.merit_history[0]
        assert np.all(np.isfinite(res.z.stack()))

    def test_determinism(self, ds1):
        cfg = SubgradConfig(tol=1e-6)
        r1 = subgradient_solve(ds1, eps=0.7, cfg=cfg)
        r2 = subgradient_solve(ds1, eps=0.7, cfg=cfg)
        assert r1.merit_history == r2.merit_history
        np.testing.assert_array_equal(r1.z.x, r2.z.x)

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            SubgradConfig(gamma=0.0)
        with pytest.raises(ValueError):
            SubgradConfig(c1=0.1, c2=0.2)


class TestAggregateDirection:
    def test_identical_inputs(self):
        v = np.array([1.0, 2.0])
        np.testing.assert_array_equal(aggregate_direction(v, v), v)

    def test_matches_brute_force_minimum(self):
        rng = np.random.default_rng(5)
        grid = np.linspace(0.0, 1.0, 20001)
        for _ in range(50):
            v = rng.standard_normal(4)
            vt = rng.standard_normal(4)
            combos = np.outer(grid, v) + np.outer(1.0 - grid, vt)
            best = combos[np.argmin(np.einsum("ij,ij->i", combos, combos))]
            agg = aggregate_direction(v, vt)
            assert np.linalg.norm(agg) <= np.linalg.norm(best) + 1e-8
