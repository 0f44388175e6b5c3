"""Weighted-shifted Grunwald discretization of the 1-D fractional Laplacian.

Builds the second-order weight sequence for fractional order alpha in
(1, 2], assembles the dense symmetric operator matrix on the interior
nodes of a truncated interval (zero extension outside), and evaluates the
Fourier-symbol functions used to verify the operator's spectral bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import ComplexField, cholesky

__all__ = [
    "WsgdWeights",
    "OperatorMatrix",
    "PropertyCheck",
    "WeightPropertyReport",
    "LEADING_PAIR_ALPHA_THRESHOLD",
    "grunwald_coeffs",
    "wsgd_weights",
    "check_weight_properties",
    "assemble_operator",
    "apply_fractional_laplacian",
    "h_function",
    "symbol_f",
    "c_alpha",
]


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (1.0 < alpha <= 2.0):
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")
    return alpha


# Sign threshold of the leading partial sum w_0 + w_1 = lambda_1 (1 - alpha)
# + lambda_0: positive for alpha below sqrt(6) - 1 (the root of
# a^3 + 4 a^2 - a - 10 in (1, 2)), negative above. All later partial sums
# are strictly negative on the whole range, so this is the one exception to
# the otherwise uniform sign pattern of the weight sequence.
LEADING_PAIR_ALPHA_THRESHOLD = math.sqrt(6.0) - 1.0


def grunwald_coeffs(alpha: float, L: int) -> np.ndarray:
    """Power-series coefficients g_0..g_L of (1 - z)^alpha.

    Uses the two-term recursion g_0 = 1, g_l = (1 - (alpha+1)/l) g_{l-1}.
    For alpha = 2 the factor vanishes at l = 3, so the tail is exactly zero.
    """
    alpha = _check_alpha(alpha)
    if L < 2:
        raise ValueError(f"L must be >= 2, got {L}")
    l = np.arange(1, L + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((l - alpha - 1.0) / l)))


def _lambdas(alpha: float) -> tuple[float, float, float]:
    return (
        (alpha * alpha + 3.0 * alpha + 2.0) / 12.0,
        (4.0 - alpha * alpha) / 6.0,
        (alpha * alpha - 3.0 * alpha + 2.0) / 12.0,
    )


@dataclass
class WsgdWeights:
    """Shift weights lambda_1, lambda_0, lambda_-1 and the sequences g, w.

    w combines three shifted Grunwald expansions:
        w_0 = lambda_1 g_0
        w_1 = lambda_1 g_1 + lambda_0 g_0
        w_l = lambda_1 g_l + lambda_0 g_{l-1} + lambda_-1 g_{l-2},  l >= 2
    """

    alpha: float
    lambda1: float
    lambda0: float
    lambda_m1: float
    g: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        """Largest retained index L (sequences have L + 1 entries)."""
        return self.w.size - 1


def wsgd_weights(alpha: float, L: int) -> WsgdWeights:
    """Weight sequence w_0..w_L of the second-order shifted-average operator."""
    alpha = _check_alpha(alpha)
    g = grunwald_coeffs(alpha, L)
    l1, l0, lm1 = _lambdas(alpha)
    w = l1 * g
    w[1:] += l0 * g[:-1]
    w[2:] += lm1 * g[:-2]
    return WsgdWeights(alpha=alpha, lambda1=l1, lambda0=l0, lambda_m1=lm1, g=g, w=w)


@dataclass
class PropertyCheck:
    name: str
    passed: bool
    margin: float


@dataclass
class WeightPropertyReport:
    alpha: float
    length: int
    checks: list[PropertyCheck]
    total_sum: float
    tail_bound: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def _tail_sum_bound(weights: WsgdWeights) -> float:
    """Empirical bound on |sum_{l>L} w_l|, from 4L further terms.

    The continuation terms decay like l^(-1-alpha); twice their sum safely
    covers the remainder beyond index 5L for every alpha in (1, 2].
    """
    L = weights.length
    alpha = weights.alpha
    l = np.arange(L + 1, 5 * L + 1, dtype=float)
    g_ext = weights.g[L] * np.cumprod((l - alpha - 1.0) / l)
    g_all = np.concatenate((weights.g[L - 1 :], g_ext))  # g_{L-1} .. g_{5L}
    w_ext = (
        weights.lambda1 * g_all[2:]
        + weights.lambda0 * g_all[1:-1]
        + weights.lambda_m1 * g_all[:-2]
    )
    return 2.0 * float(np.sum(w_ext))


def check_weight_properties(weights: WsgdWeights) -> WeightPropertyReport:
    """Evaluate the sign pattern and partial-sum inequalities of the weights.

    For 1 < alpha < 2 the inequalities are checked strictly; at alpha = 2 the
    tail of the sequence is exactly zero and the non-strict forms apply.
    The truncated total sum must be negative (zero at alpha = 2) and no
    larger in magnitude than the empirical tail bound.

    The partial-sum condition is reported in two parts because the leading
    one genuinely changes sign: ``leading_pair_sum_negative`` (w_0 + w_1 < 0)
    only holds for alpha above LEADING_PAIR_ALPHA_THRESHOLD, while
    ``partial_sums_negative`` (all sums from index 2 on) holds on the whole
    range.
    """
    w = weights.w
    if w.size < 4:
        raise ValueError("property report needs at least w_0..w_3")
    strict = weights.alpha < 2.0

    def ok(margin: float) -> bool:
        return margin > 0.0 if strict else margin >= 0.0

    partial = np.cumsum(w)
    total = float(partial[-1])
    tail_bound = _tail_sum_bound(weights)

    checks = [
        PropertyCheck("w0_positive", ok(w[0]), float(w[0])),
        PropertyCheck("w1_negative", ok(-w[1]), float(-w[1])),
        PropertyCheck("later_weights_positive", ok(np.min(w[3:])), float(np.min(w[3:]))),
        PropertyCheck("w0_plus_w2_positive", ok(w[0] + w[2]), float(w[0] + w[2])),
        PropertyCheck("leading_pair_sum_negative", ok(-partial[1]), float(-partial[1])),
        PropertyCheck(
            "partial_sums_negative",
            ok(-np.max(partial[2:])),
            float(-np.max(partial[2:])),
        ),
        PropertyCheck(
            "total_sum_within_tail",
            ok(-total) and abs(total) <= max(tail_bound, 0.0),
            tail_bound - abs(total),
        ),
    ]
    return WeightPropertyReport(
        alpha=weights.alpha,
        length=weights.length,
        checks=checks,
        total_sum=total,
        tail_bound=tail_bound,
    )


@dataclass
class OperatorMatrix:
    """Dense symmetric matrix C with  Delta_h^alpha u = h^(-alpha) C u."""

    alpha: float
    size: int
    C: np.ndarray = field(repr=False)
    chol: np.ndarray | None = field(default=None, repr=False)

    def apply(self, values: np.ndarray, h: float) -> np.ndarray:
        return h ** (-self.alpha) * (self.C @ values)


def assemble_operator(weights: WsgdWeights, M: int) -> OperatorMatrix:
    """Assemble C = (W + W^T) / (2 cos(alpha pi / 2)) on the M-1 interior nodes.

    W is Toeplitz with first column (w_1, ..., w_{M-1}) and first row
    (w_1, w_0, 0, ..., 0). The result is re-symmetrized against rounding and
    validated positive definite by an eager Cholesky factorization.
    """
    if M < 3:
        raise ValueError(f"M must be >= 3, got {M}")
    w = weights.w
    if w.size < M:
        raise ValueError(f"need weights w_0..w_{M - 1}, got only {w.size} entries")
    col = w[1:M]
    row = np.zeros(M - 1)
    row[0] = w[1]
    row[1] = w[0]
    W = scipy.linalg.toeplitz(col, row)
    C = (W + W.T) / (2.0 * math.cos(weights.alpha * math.pi / 2.0))
    C = (C + C.T) / 2.0
    try:
        chol = cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"operator matrix failed Cholesky (alpha={weights.alpha}, M={M}); "
            f"assembly bug or alpha out of range: {exc}"
        ) from exc
    return OperatorMatrix(alpha=weights.alpha, size=M - 1, C=C, chol=chol)


def apply_fractional_laplacian(u: ComplexField, weights: WsgdWeights) -> ComplexField:
    """Apply the discrete fractional Laplacian by direct double summation.

    Independent of the matrix route: each node sums the left- and
    right-shifted weight convolutions against the zero-extended field.
    Agrees with h^(-alpha) C u to machine precision.
    """
    vals = u.values
    M = vals.size + 1
    if weights.w.size < M + 1:
        raise ValueError(f"need weights w_0..w_{M}, got only {weights.w.size} entries")
    w = weights.w
    ext = np.zeros(M + 1, dtype=complex)
    ext[1:M] = vals
    scale = u.h ** (-weights.alpha) / (2.0 * math.cos(weights.alpha * math.pi / 2.0))
    out = np.empty(M - 1, dtype=complex)
    for j in range(1, M):
        left = np.dot(w[: j + 2], ext[j + 1 :: -1])
        right = np.dot(w[: M - j + 2], ext[j - 1 : M + 1])
        out[j - 1] = scale * (left + right)
    return ComplexField(out, u.h)


def h_function(alpha: float, omega) -> np.ndarray | float:
    """Angular factor of the operator symbol on omega in [0, pi].

    Nondecreasing in omega, with value cos(alpha pi / 2) at 0 and
    (1 - alpha^2)/3 at pi; identically -1 for alpha = 2.
    """
    alpha = _check_alpha(alpha)
    om = np.asarray(omega, dtype=float)
    if np.any(om < -1e-12) or np.any(om > math.pi + 1e-12):
        raise ValueError("omega must lie in [0, pi]")
    l1, l0, lm1 = _lambdas(alpha)
    base = (alpha / 2.0) * (om - math.pi)
    val = l1 * np.cos(base - om) + l0 * np.cos(base) + lm1 * np.cos(base + om)
    return val if val.ndim else float(val)


def symbol_f(alpha: float, theta: float, L: int) -> tuple[float, float]:
    """Operator symbol at scaled frequency theta = h k in [0, pi].

    Returns (closed_form, series): the closed form
    (2 sin(theta/2))^alpha / cos(alpha pi / 2) * h(alpha, theta) and the
    L-term cosine series 1/cos(alpha pi/2) * sum_l w_l cos((l-1) theta).
    The truncation gap decays like L^(-alpha).
    """
    alpha = _check_alpha(alpha)
    theta = float(theta)
    if not (-1e-12 <= theta <= math.pi + 1e-12):
        raise ValueError("theta must lie in [0, pi]")
    cos_half = math.cos(alpha * math.pi / 2.0)
    closed = (2.0 * math.sin(theta / 2.0)) ** alpha / cos_half * h_function(alpha, theta)
    w = wsgd_weights(alpha, L).w
    l = np.arange(L + 1, dtype=float)
    series = float(np.dot(w, np.cos((l - 1.0) * theta))) / cos_half
    return closed, series


def c_alpha(alpha: float) -> float:
    """Lower spectral-equivalence constant 2^alpha (1-alpha^2) / (3 pi^alpha cos(alpha pi/2)).

    Strictly positive on (1, 2]: both 1 - alpha^2 and cos(alpha pi / 2) are
    negative there.
    """
    alpha = _check_alpha(alpha)
    return 2.0**alpha * (1.0 - alpha * alpha) / (3.0 * math.pi**alpha * math.cos(alpha * math.pi / 2.0))
