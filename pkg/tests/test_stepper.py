"""Implicit midpoint stepping: system matrix, inner iteration, invariants."""

import numpy as np
import pytest

from fgle.linalg import ComplexField
from fgle.stepper import (
    GridSpec,
    ModelParams,
    NonConvergence,
    SolverSettings,
    TimeGrid,
    build_system_matrix,
    fixed_point_step,
    run_simulation,
)
from fgle.wsgd import assemble_operator, wsgd_weights


def make_operator(alpha, m):
    return assemble_operator(wsgd_weights(alpha, m), m)


def gaussian(x):
    return np.exp(-2.0 * x * x)


EXAMPLE_PARAMS = ModelParams(upsilon=1.0, eta=1.0, kappa=1.0, zeta=2.0, gamma=0.0, alpha=1.8)


class TestGridTypes:
    def test_grid_requires_ordered_interval(self):
        with pytest.raises(ValueError, match="b > a"):
            GridSpec(1.0, -1.0, 8)

    def test_grid_requires_enough_cells(self):
        with pytest.raises(ValueError, match="M"):
            GridSpec(-1.0, 1.0, 2)

    def test_interior_nodes_exclude_endpoints(self):
        g = GridSpec(-1.0, 1.0, 4)
        assert np.allclose(g.interior_nodes(), [-0.5, 0.0, 0.5])

    def test_time_grid_tau(self):
        t = TimeGrid(2.0, 40)
        assert t.tau == pytest.approx(0.05)
        with pytest.raises(ValueError, match="N"):
            TimeGrid(1.0, 0)


class TestModelParams:
    def test_alpha_domain(self):
        with pytest.raises(ValueError, match="alpha"):
            ModelParams(1.0, 0.0, 0.0, 0.0, 0.0, alpha=2.5)

    def test_negative_upsilon_rejected(self):
        with pytest.raises(ValueError, match="upsilon"):
            ModelParams(-1.0, 0.0, 0.0, 0.0, 0.0, alpha=1.5)

    def test_zero_upsilon_and_negative_kappa_allowed(self):
        # dispersive reduction and the benchmark's negative cubic coefficient
        ModelParams(0.0, 1.0, 0.0, -2.0, 0.0, alpha=1.5)
        ModelParams(0.3, 0.5, -0.133, -1.0, 0.0, alpha=2.0)


class TestBuildSystemMatrix:
    def test_tau_zero_gives_identity(self):
        grid = GridSpec(-1.0, 1.0, 8)
        op = make_operator(1.5, 8)
        p = ModelParams(1.0, 1.0, 1.0, 1.0, 1.0, alpha=1.5)
        F = build_system_matrix(p, grid, 0.0, op)
        b = np.arange(7, dtype=complex)
        assert np.allclose(F.solve(b), b, atol=1e-15)

    def test_zero_coefficients_give_identity(self):
        grid = GridSpec(-1.0, 1.0, 8)
        op = make_operator(1.5, 8)
        p = ModelParams(0.0, 0.0, 1.0, 1.0, 0.0, alpha=1.5)
        F = build_system_matrix(p, grid, 0.1, op)
        b = np.ones(7, dtype=complex)
        assert np.allclose(F.solve(b), b, atol=1e-15)

    def test_matches_operator_application(self):
        # A z == z + (tau/2)(upsilon + i eta) Delta_h z - (tau gamma / 2) z
        from fgle.wsgd import apply_fractional_laplacian

        rng = np.random.default_rng(21)
        grid = GridSpec(-2.0, 2.0, 16)
        p = ModelParams(0.7, -0.3, 0.4, 1.1, 0.6, alpha=1.6)
        tau = 0.05
        w = wsgd_weights(1.6, 17)
        op = assemble_operator(w, 16)
        F = build_system_matrix(p, grid, tau, op)
        z = rng.standard_normal(15) + 1j * rng.standard_normal(15)
        x = F.solve(np.asarray(z))
        # apply A to the solution and compare with z
        lap = apply_fractional_laplacian(ComplexField(x, grid.h), w).values
        az = x + (tau / 2) * (0.7 - 0.3j) * lap - (tau * 0.6 / 2) * x
        assert np.max(np.abs(az - z)) < 1e-12 * np.max(np.abs(z))

    def test_operator_mismatch_rejected(self):
        grid = GridSpec(-1.0, 1.0, 8)
        op = make_operator(1.5, 10)
        p = ModelParams(1.0, 0.0, 0.0, 0.0, 0.0, alpha=1.5)
        with pytest.raises(ValueError, match="operator"):
            build_system_matrix(p, grid, 0.1, op)


class TestFixedPointStep:
    def test_identity_dynamics(self):
        grid = GridSpec(-1.0, 1.0, 10)
        p = ModelParams(0.0, 0.0, 0.0, 0.0, 0.0, alpha=1.5)
        op = make_operator(1.5, 10)
        F = build_system_matrix(p, grid, 0.1, op)
        rng = np.random.default_rng(22)
        u = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        u_next, diag = fixed_point_step(u, None, F, p, grid, 0.1, SolverSettings(), op)
        assert np.array_equal(u_next, u)
        assert diag.iterations == 1

    def test_linear_step_matches_direct_solve(self):
        # kappa = zeta = 0: one midpoint step is a single linear solve
        grid = GridSpec(-5.0, 5.0, 40)
        p = ModelParams(0.8, 0.5, 0.0, 0.0, 0.3, alpha=1.7)
        tau = 0.02
        op = make_operator(1.7, 40)
        F = build_system_matrix(p, grid, tau, op)
        u0 = gaussian(grid.interior_nodes()).astype(complex)

        n = 39
        A = (1 - tau * 0.3 / 2) * np.eye(n, dtype=complex) + (tau / 2) * (
            0.8 + 0.5j
        ) * grid.h ** (-1.7) * op.C
        z = np.linalg.solve(A, u0)
        expected = 2 * z - u0

        u_next, diag = fixed_point_step(u0, None, F, p, grid, tau, SolverSettings(), op)
        assert np.max(np.abs(u_next - expected)) < 1e-12
        assert diag.iterations <= 3

    def test_energy_identity_residual_small(self):
        grid = GridSpec(-10.0, 10.0, 400)
        time = TimeGrid(1.0, 20)
        traj = run_simulation(EXAMPLE_PARAMS, grid, time, gaussian)
        for d in traj.diagnostics:
            assert abs(d.energy_identity_residual) < 1e-10

    def test_nonconvergence_raises(self):
        grid = GridSpec(-10.0, 10.0, 50)
        p = ModelParams(1.0, 1.0, 5.0, 3.0, 0.0, alpha=1.8)
        op = make_operator(1.8, 50)
        F = build_system_matrix(p, grid, 5.0, op)
        u = 5.0 * gaussian(grid.interior_nodes()).astype(complex)
        with pytest.raises(NonConvergence):
            fixed_point_step(u, None, F, p, grid, 5.0, SolverSettings(max_iters=2), op)


class TestRunSimulation:
    def test_zero_steps_not_allowed_but_initial_recorded(self):
        # N >= 1 by construction; the trajectory always includes the t=0 state
        grid = GridSpec(-10.0, 10.0, 100)
        traj = run_simulation(EXAMPLE_PARAMS, grid, TimeGrid(0.05, 1), gaussian)
        x = grid.interior_nodes()
        expected = grid.h * np.sum(gaussian(x) ** 2)
        assert traj.norm_sq[0] == pytest.approx(expected, rel=1e-14)
        assert len(traj.diagnostics) == 1

    def test_norm_monotone_for_dissipative_run(self):
        # gamma <= 0, kappa >= 0: the discrete norm cannot grow
        grid = GridSpec(-10.0, 10.0, 400)
        traj = run_simulation(EXAMPLE_PARAMS, grid, TimeGrid(1.0, 20), gaussian)
        norms = np.sqrt(traj.norm_sq)
        assert np.all(norms[1:] <= norms[:-1] + 1e-10)

    def test_gamma_positive_bound(self):
        # tau = 0.05 <= 1/(2 gamma): ||u^n||^2 <= exp(4 gamma T) ||u^0||^2
        gamma = 3.0
        p = ModelParams(1.0, 1.0, 1.0, 2.0, gamma, alpha=1.8)
        grid = GridSpec(-10.0, 10.0, 400)
        T = 1.0
        traj = run_simulation(p, grid, TimeGrid(T, 20), gaussian)
        bound = np.exp(4 * gamma * T) * traj.norm_sq[0] * (1 + 1e-8)
        assert np.all(traj.norm_sq <= bound)

    def test_conservative_reduction_preserves_norm(self):
        # upsilon = kappa = gamma = 0: pure dispersive dynamics, norm constant
        p = ModelParams(0.0, 1.0, 0.0, -2.0, 0.0, alpha=1.5)
        grid = GridSpec(-10.0, 10.0, 128)
        traj = run_simulation(p, grid, TimeGrid(1.0, 100), gaussian)
        drift = np.abs(np.sqrt(traj.norm_sq) - np.sqrt(traj.norm_sq[0]))
        assert np.max(drift) < 1e-10

    def test_deterministic_reruns(self):
        grid = GridSpec(-10.0, 10.0, 120)
        t1 = run_simulation(EXAMPLE_PARAMS, grid, TimeGrid(0.5, 10), gaussian)
        t2 = run_simulation(EXAMPLE_PARAMS, grid, TimeGrid(0.5, 10), gaussian)
        assert np.array_equal(t1.final.values, t2.final.values)
        assert np.array_equal(t1.norm_sq, t2.norm_sq)

    def test_iteration_count_small_at_benchmark_scale(self):
        grid = GridSpec(-10.0, 10.0, 400)
        traj = run_simulation(EXAMPLE_PARAMS, grid, TimeGrid(1.0, 50), gaussian)
        assert max(d.iterations for d in traj.diagnostics) <= 10

    def test_snapshots_recorded_at_grid_times(self):
        grid = GridSpec(-10.0, 10.0, 100)
        traj = run_simulation(
            EXAMPLE_PARAMS, grid, TimeGrid(1.0, 20), gaussian, snapshot_times=(0.0, 0.5, 1.0)
        )
        assert set(traj.snapshots) == {0.0, 0.5, 1.0}
        assert np.array_equal(traj.snapshots[1.0].values, traj.final.values)

    def test_off_grid_snapshot_rejected(self):
        grid = GridSpec(-10.0, 10.0, 100)
        with pytest.raises(ValueError, match="time grid"):
            run_simulation(
                EXAMPLE_PARAMS, grid, TimeGrid(1.0, 20), gaussian, snapshot_times=(0.503,)
            )

    def test_nonconvergence_reports_step(self):
        p = ModelParams(1.0, 1.0, 8.0, 5.0, 0.0, alpha=1.8)
        grid = GridSpec(-10.0, 10.0, 50)
        with pytest.raises(NonConvergence) as err:
            run_simulation(
                p,
                grid,
                TimeGrid(10.0, 2),
                lambda x: 5.0 * gaussian(x),
                SolverSettings(max_iters=3),
            )
        assert err.value.step == 0

    def test_initial_length_validated(self):
        grid = GridSpec(-10.0, 10.0, 100)
        with pytest.raises(ValueError, match="initial"):
            run_simulation(EXAMPLE_PARAMS, grid, TimeGrid(1.0, 10), np.zeros(50))
