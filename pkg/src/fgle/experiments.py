"""Benchmark studies: convergence tables, norm decay, inviscid limit and
spatial-order checks for the discrete fractional Laplacian."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .linalg import ComplexField
from .stepper import GridSpec, ModelParams, SolverSettings, TimeGrid, run_simulation
from .wsgd import assemble_operator, wsgd_weights

__all__ = [
    "ConvergenceRow",
    "ExactReference",
    "FineGridReference",
    "SolitonCoefficients",
    "sech_soliton_coefficients",
    "sech_soliton_solution",
    "sech_soliton_model_params",
    "error_norms",
    "restrict_to_coarse",
    "embed_on_fine",
    "convergence_study",
    "norm_decay_study",
    "inviscid_limit_study",
    "operator_refinement_orders",
]


@dataclass(frozen=True)
class SolitonCoefficients:
    """Derived constants of the decaying-sech benchmark solution."""

    kappa: float
    chirp: float
    amplitude: float
    omega: float


def sech_soliton_coefficients(upsilon: float) -> SolitonCoefficients:
    """Constants of the classical (alpha = 2) chirped-sech solution.

    With eta = 1/2, zeta = -1, gamma = 0 and the matching cubic coefficient
    kappa, the profile F sech(x) exp(i d ln(F sech x) - i omega t) solves the
    equation exactly.
    """
    if not upsilon > 0:
        raise ValueError("upsilon must be positive")
    s = math.sqrt(1.0 + 4.0 * upsilon * upsilon)
    d = (s - 1.0) / (2.0 * upsilon)
    kappa = -upsilon * (3.0 * s - 1.0) / (2.0 * (2.0 + 9.0 * upsilon * upsilon))
    amplitude = math.sqrt(d * s / (-2.0 * kappa))
    omega = -d * (1.0 + 4.0 * upsilon * upsilon) / (2.0 * upsilon)
    return SolitonCoefficients(kappa=kappa, chirp=d, amplitude=amplitude, omega=omega)


def sech_soliton_solution(x, t: float, upsilon: float = 0.3) -> np.ndarray:
    c = sech_soliton_coefficients(upsilon)
    a = c.amplitude / np.cosh(np.asarray(x, dtype=float))
    return a * np.exp(1j * (c.chirp * np.log(a) - c.omega * t))


def sech_soliton_model_params(upsilon: float = 0.3, alpha: float = 2.0) -> ModelParams:
    c = sech_soliton_coefficients(upsilon)
    return ModelParams(upsilon=upsilon, eta=0.5, kappa=c.kappa, zeta=-1.0, gamma=0.0, alpha=alpha)


def error_norms(u: ComplexField, v: ComplexField) -> tuple[float, float]:
    """(l2_h, linf_h) norms of u - v on a shared grid."""
    if len(u) != len(v) or u.h != v.h:
        raise ValueError("error norms need fields on the same grid")
    e = u.values - v.values
    return (
        math.sqrt(u.h * float(np.sum(np.abs(e) ** 2))),
        float(np.max(np.abs(e))),
    )


@dataclass(frozen=True)
class ExactReference:
    """Closed-form reference solution, called as solution(x, t)."""

    solution: Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class FineGridReference:
    """Numerical reference on a nested fine grid (index-subsampled, never
    interpolated, so no extra error enters the measured orders)."""

    h_ref: float
    tau_ref: float


@dataclass
class ConvergenceRow:
    tau: float
    h: float
    err_l2: float
    err_linf: float
    order1: float | None = None
    order2: float | None = None


def _exact_division(num: float, den: float, what: str) -> int:
    ratio = num / den
    r = round(ratio)
    if r < 1 or abs(ratio - r) > 1e-9 * max(1.0, abs(ratio)):
        raise ValueError(f"{what}: {num} is not an integer multiple of {den}")
    return r


def restrict_to_coarse(fine_values: np.ndarray, ratio: int) -> np.ndarray:
    """Interior values on a nested coarse grid: coarse node j is fine node j*ratio."""
    fine_values = np.asarray(fine_values)
    m_fine = fine_values.size + 1
    if m_fine % ratio:
        raise ValueError(f"fine grid with {m_fine} cells is not {ratio}-times a coarse grid")
    m_coarse = m_fine // ratio
    return fine_values[ratio * np.arange(1, m_coarse) - 1]


def embed_on_fine(coarse_values: np.ndarray, ratio: int) -> np.ndarray:
    """Zero-padded injection of coarse interior values onto the nested fine grid."""
    coarse_values = np.asarray(coarse_values)
    m_coarse = coarse_values.size + 1
    fine = np.zeros((m_coarse * ratio - 1,), dtype=coarse_values.dtype)
    fine[ratio * np.arange(1, m_coarse) - 1] = coarse_values
    return fine


def convergence_study(
    params: ModelParams,
    interval: tuple[float, float],
    t_final: float,
    base_tau: float,
    base_h: float,
    levels: int,
    reference: ExactReference | FineGridReference,
    u0: Callable[[np.ndarray], np.ndarray] | None = None,
    settings: SolverSettings | None = None,
) -> list[ConvergenceRow]:
    """Errors and observed orders under simultaneous halving of tau and h.

    Level l runs with (tau, h) = (base_tau, base_h) / 2^l and measures the
    error against the reference at t_final. Orders are the log2 ratios of
    consecutive errors and are left unset on the first row.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    a, b = interval
    if u0 is None:
        if not isinstance(reference, ExactReference):
            raise ValueError("u0 is required when the reference is a fine-grid run")
        u0 = lambda x: reference.solution(x, 0.0)

    ref_final = None
    if isinstance(reference, FineGridReference):
        m_ref = _exact_division(b - a, reference.h_ref, "reference grid")
        n_ref = _exact_division(t_final, reference.tau_ref, "reference time grid")
        for lvl in range(levels):
            _exact_division(base_h / 2**lvl, reference.h_ref, f"level {lvl} grid")
            _exact_division(base_tau / 2**lvl, reference.tau_ref, f"level {lvl} time grid")
        ref_final = run_simulation(
            params, GridSpec(a, b, m_ref), TimeGrid(t_final, n_ref), u0, settings
        ).final

    rows: list[ConvergenceRow] = []
    for lvl in range(levels):
        h = base_h / 2**lvl
        tau = base_tau / 2**lvl
        m = _exact_division(b - a, h, f"level {lvl} grid")
        n = _exact_division(t_final, tau, f"level {lvl} time grid")
        grid = GridSpec(a, b, m)
        traj = run_simulation(params, grid, TimeGrid(t_final, n), u0, settings)
        if isinstance(reference, ExactReference):
            target = ComplexField(reference.solution(grid.interior_nodes(), t_final), grid.h)
        else:
            ratio = round(h / reference.h_ref)
            target = ComplexField(restrict_to_coarse(ref_final.values, ratio), grid.h)
        err_l2, err_linf = error_norms(target, traj.final)
        rows.append(ConvergenceRow(tau=tau, h=h, err_l2=err_l2, err_linf=err_linf))

    for prev, cur in zip(rows, rows[1:]):
        cur.order1 = math.log2(prev.err_l2 / cur.err_l2)
        cur.order2 = math.log2(prev.err_linf / cur.err_linf)
    return rows


def norm_decay_study(
    params: ModelParams,
    gammas: Sequence[float],
    grid: GridSpec,
    time_grid: TimeGrid,
    u0,
    settings: SolverSettings | None = None,
) -> dict[float, tuple[np.ndarray, np.ndarray]]:
    """Sequences (t_n, ||u^n||^2_h) for each linear-gain coefficient gamma."""
    operator = assemble_operator(wsgd_weights(params.alpha, grid.M), grid.M)
    out: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for gamma in gammas:
        traj = run_simulation(
            replace(params, gamma=float(gamma)), grid, time_grid, u0, settings, operator=operator
        )
        out[float(gamma)] = (traj.times, traj.norm_sq)
    return out


def inviscid_limit_study(
    params: ModelParams,
    pairs: Sequence[tuple[float, float]],
    grid: GridSpec,
    time_grid: TimeGrid,
    u0,
    settings: SolverSettings | None = None,
) -> list[tuple[float, float, float]]:
    """Deviation from the dispersive (upsilon = kappa = 0) limit at t = T.

    Returns (upsilon, kappa, ||u - u_limit||_h) for each pair, run with the
    remaining coefficients taken from ``params``.
    """
    operator = assemble_operator(wsgd_weights(params.alpha, grid.M), grid.M)
    limit = run_simulation(
        replace(params, upsilon=0.0, kappa=0.0), grid, time_grid, u0, settings, operator=operator
    ).final
    out = []
    for upsilon, kappa in pairs:
        traj = run_simulation(
            replace(params, upsilon=float(upsilon), kappa=float(kappa)),
            grid,
            time_grid,
            u0,
            settings,
            operator=operator,
        )
        deviation, _ = error_norms(traj.final, limit)
        out.append((float(upsilon), float(kappa), deviation))
    return out


@dataclass
class RefinementOrders:
    alpha: float
    h_values: tuple[float, ...]
    richardson_order: float
    analytic_orders: tuple[float, ...] | None = None


def operator_refinement_orders(
    alpha: float,
    interval: tuple[float, float],
    base_h: float,
    func: Callable[[np.ndarray], np.ndarray],
    exact: Callable[[np.ndarray], np.ndarray] | None = None,
) -> RefinementOrders:
    """Observed spatial order of the discrete operator on a smooth function.

    Applies the operator on grids h, h/2, h/4 and Richardson-compares
    successive differences on shared nodes. When ``exact`` supplies the true
    operator image (available for alpha = 2), per-level error orders against
    it are reported as well.
    """
    a, b = interval
    images = []
    grids = []
    for lvl in range(3):
        h = base_h / 2**lvl
        m = _exact_division(b - a, h, f"level {lvl} grid")
        grid = GridSpec(a, b, m)
        op = assemble_operator(wsgd_weights(alpha, m), m)
        x = grid.interior_nodes()
        images.append(op.apply(np.asarray(func(x), dtype=complex), grid.h))
        grids.append(grid)

    diffs = []
    for lvl in range(2):
        coarse = images[lvl]
        fine_on_coarse = restrict_to_coarse(images[lvl + 1], 2)
        diffs.append(
            math.sqrt(grids[lvl].h * float(np.sum(np.abs(coarse - fine_on_coarse) ** 2)))
        )
    richardson = math.log2(diffs[0] / diffs[1])

    analytic = None
    if exact is not None:
        errs = []
        for lvl in range(3):
            target = np.asarray(exact(grids[lvl].interior_nodes()), dtype=complex)
            errs.append(
                math.sqrt(grids[lvl].h * float(np.sum(np.abs(images[lvl] - target) ** 2)))
            )
        analytic = tuple(math.log2(errs[i] / errs[i + 1]) for i in range(2))

    return RefinementOrders(
        alpha=alpha,
        h_values=tuple(g.h for g in grids),
        richardson_order=richardson,
        analytic_orders=analytic,
    )
