import numpy as np
import pytest

from mlfg import (
    HomotopyConfig,
    NewtonConfig,
    best_response_exact,
    best_response_smoothed,
    homotopy_solve,
    newton_solve,
    taylor_direction,
)


class TestSchedule:
    def test_geometric_levels_exact(self, trace1):
        eps = trace1.eps_values()
        expected = 1.6 * 0.5 ** np.arange(len(eps))
        np.testing.assert_array_equal(eps, expected)
        assert eps[-1] <= 1e-6
        assert eps[-2] > 1e-6

    def test_all_stages_converge(self, trace1, trace2):
        for trace in (trace1, trace2):
            assert trace.converged
            assert all(s.converged for s in trace.stages)
            assert all(s.merit_final <= 1e-10 for s in trace.stages)

    def test_errors_decrease(self, trace1):
        errs = trace1.errors_to_final()
        assert np.all(np.diff(errs[:-1]) < 0.0)
        assert errs[-1] == 0.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            HomotopyConfig(eps0=0.9)
        with pytest.raises(ValueError):
            HomotopyConfig(eps0=2.5)
        with pytest.raises(ValueError):
            HomotopyConfig(gamma=1.0)
        with pytest.raises(ValueError):
            HomotopyConfig(inner="simplex")


class TestZeroWeightGame:
    def test_constant_path_and_trivial_predictor(self, quadratic_game):
        trace = homotopy_solve(quadratic_game, cfg=HomotopyConfig(eps_min=0.01))
        assert trace.converged
        x_ref = trace.final.x
        for s in trace.stages:
            np.testing.assert_allclose(s.z_star.x, x_ref, atol=1e-9)
            assert s.predictor_norm == 0.0
        # warm starts are exact solutions, so later stages need no steps
        assert all(s.inner_iterations == 0 for s in trace.stages[1:])

    def test_direction_zero(self, quadratic_game):
        d = taylor_direction(quadratic_game, np.ones(4), eps=0.5)
        np.testing.assert_array_equal(d, np.zeros(4))


class TestTaylorDirection:
    def test_matches_solution_path_derivative(self, ds1):
        # oracle: two full solves bracketing the smoothing level
        eps, delta = 0.8, 1e-3
        cfg = NewtonConfig(tol=1e-16, max_iter=400)
        base = newton_solve(ds1, eps=eps, cfg=cfg)
        up = newton_solve(ds1, base.z, eps=eps + delta, cfg=cfg)
        down = newton_solve(ds1, base.z, eps=eps - delta, cfg=cfg)
        fd = (up.z.x - down.z.x) / (2 * delta)
        d = taylor_direction(ds1, base.z.x, eps)
        assert np.linalg.norm(d - fd) / np.linalg.norm(fd) <= 1e-2

    def test_plain_eps_rhs_disagrees(self, ds1):
        # the alternative right-hand side is kept for comparison only; it
        # does not reproduce the solution path derivative
        eps = 0.8
        base = newton_solve(ds1, eps=eps, cfg=NewtonConfig(tol=1e-14))
        d_mixed = taylor_direction(ds1, base.z.x, eps, rhs="mixed")
        d_eps = taylor_direction(ds1, base.z.x, eps, rhs="eps")
        assert np.linalg.norm(d_mixed - d_eps) > 0.1 * np.linalg.norm(d_mixed)

    def test_coefficient_matrix_positive_definite(self, ds1, ds2):
        from mlfg.smoothing import AffineMaps, phi_tilde_d2

        rng = np.random.default_rng(0)
        for game in (ds1, ds2):
            mp = AffineMaps.from_game(game)
            a = game.follower.a
            mu = game.min_curvature()
            for _ in range(20):
                x = rng.uniform(-4, 4, game.n)
                t = mp.A_diff @ x
                E = game.Q_block + 0.5 * (mp.A_diff.T * (a * phi_tilde_d2(t, 0.37, 2))) @ mp.A_diff
                assert np.linalg.eigvalsh(E)[0] >= mu - 1e-9


class TestPredictorValue:
    def test_warm_starts_usually_better(self, trace1, trace1_no_predictor):
        on = [s.warm_start_merit for s in trace1.stages[1:]]
        off = [s.warm_start_merit for s in trace1_no_predictor.stages[1:]]
        assert len(on) == len(off)
        better = sum(1 for a, b in zip(on, off) if a <= b)
        assert better >= 0.8 * len(on)

    def test_mean_iterations_not_worse(self, trace1, trace1_no_predictor):
        mean_on = np.mean([s.inner_iterations for s in trace1.stages])
        mean_off = np.mean([s.inner_iterations for s in trace1_no_predictor.stages])
        assert mean_on <= mean_off


class TestTraceConsistency:
    def test_smoothed_response_near_exact_along_path(self, trace1, ds1):
        for s in trace1.stages:
            y_eps = best_response_smoothed(ds1, s.z_star.x, s.eps)
            y_exact = best_response_exact(ds1, s.z_star.x)
            assert np.max(np.abs(y_eps - y_exact)) <= s.eps + 1e-12

    def test_failure_marks_stage_and_aborts(self, ds1):
        cfg = HomotopyConfig(inner_cfg=NewtonConfig(tol=1e-10, max_iter=1))
        trace = homotopy_solve(ds1, cfg=cfg)
        assert not trace.converged
        assert not trace.stages[-1].converged
        assert len(trace.stages) == 1

    def test_subgradient_inner(self, ds1):
        from mlfg import SubgradConfig

        cfg = HomotopyConfig(
            eps_min=0.4, inner="subgradient", inner_cfg=SubgradConfig(tol=1e-8)
        )
        trace = homotopy_solve(ds1, cfg=cfg)
        assert trace.converged
        assert [round(s.eps, 12) for s in trace.stages] == [1.6, 0.8, 0.4]
