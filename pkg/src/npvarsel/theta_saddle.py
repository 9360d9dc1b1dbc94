"""
Jacobi theta function on (0, 1), the saddle point of log h(z) - gamma log z,
and the lattice-count asymptotics and regime constants built on it.

The saddle equation is solved in ``y = -log z``, where

    phi(y) = sum_k k^2 e^{-y k^2} / sum_k e^{-y k^2}     (k over Z)

is strictly decreasing from +inf to 0, so every gamma > 0 has exactly one
root.  Its derivative is minus the variance of k^2 under the weights
``e^{-y k^2}``, computed analytically.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .conditions import ALPHA_MAX, consistency_conditions, hyp1_lhs, prop2_lhs
from .lattice_count import count_exact, radius_sq_from_gamma
from .params import ModelParams

__all__ = [
    "SaddlePointError",
    "GammaStarWarning",
    "SaddlePoint",
    "AsymptoticCount",
    "RegimeReport",
    "theta_h",
    "phi",
    "phi_prime",
    "solve_saddle",
    "asymptotic_counts",
    "figure_curves",
    "find_gamma_star",
    "regime_constants",
]

DEFAULT_TOL = 1e-15


class SaddlePointError(RuntimeError):
    """Raised when the saddle-point iteration cannot reach its tolerance."""


class GammaStarWarning(UserWarning):
    """No admissible gamma_star exists; the growing-sparsity bound is undefined."""


def theta_h(z: float, tol: float = DEFAULT_TOL) -> float:
    """
    h(z) = sum_{r in Z} z^{r^2} for real 0 <= z < 1.

    The series is cut when the next term drops below ``tol`` times the
    partial sum.
    """
    if not (0.0 <= z < 1.0):
        raise ValueError(f"z must lie in [0, 1), got {z}")
    if z == 0.0:
        return 1.0
    logz = math.log(z)
    total = 1.0
    j = 1
    while True:
        term = 2.0 * math.exp(j * j * logz)
        if term < tol * total:
            break
        total += term
        j += 1
    return total


def _moments(y: float):
    """(sum_k w_k, E[k^2], E[k^4]) for w_k = exp(-y k^2), k over Z."""
    if not (y > 0.0) or not math.isfinite(y):
        raise ValueError(f"y must be positive and finite, got {y}")
    # beyond y K^2 = 60 the weights are below 1e-26 of the k = 0 term
    kmax = max(2, int(math.ceil(math.sqrt(60.0 / y))))
    k2 = np.arange(1, kmax + 1, dtype=np.float64) ** 2
    w = np.exp(-y * k2)
    s0 = 1.0 + 2.0 * w.sum()
    m2 = 2.0 * np.dot(k2, w) / s0
    m4 = 2.0 * np.dot(k2 * k2, w) / s0
    return float(s0), float(m2), float(m4)


def phi(y: float) -> float:
    """Mean of k^2 under weights exp(-y k^2); equals z h'(z)/h(z) at z = e^{-y}."""
    return _moments(y)[1]


def phi_prime(y: float) -> float:
    """Derivative of phi: minus the variance of k^2.  Strictly negative."""
    _, m2, m4 = _moments(y)
    return -(m4 - m2 * m2)


@dataclass(frozen=True)
class SaddlePoint:
    """Root z_gamma of l'_gamma on (0, 1) with the quantities evaluated there."""

    gamma: float
    y_gamma: float
    z_gamma: float
    h_val: float
    l_val: float
    l_pp: float
    tol: float

    @property
    def log_h(self) -> float:
        return math.log(self.h_val)


def solve_saddle(gamma: float, tol: float = 1e-12, max_iter: int = 400) -> SaddlePoint:
    """
    Solve phi(y) = gamma and return the saddle point z = e^{-y}.

    A bracket is grown from [1e-8, 1], narrowed by geometric bisection and
    finished with safeguarded Newton steps.  Raises ``SaddlePointError`` when
    ``|phi(y) - gamma| <= tol`` is not reached within ``max_iter`` steps.
    """
    if not (gamma > 0.0) or not math.isfinite(gamma):
        raise ValueError(f"gamma must be positive and finite, got {gamma}")
    if not tol > 0:
        raise ValueError("tol must be positive")

    lo, hi = 1e-8, 1.0
    budget = max_iter
    while phi(hi) >= gamma:
        hi *= 2.0
        budget -= 1
        if budget <= 0 or hi > 1e4:
            raise SaddlePointError(f"cannot bracket the root for gamma={gamma}")
    while phi(lo) <= gamma:
        lo *= 0.5
        budget -= 1
        if budget <= 0 or lo < 1e-300:
            raise SaddlePointError(f"cannot bracket the root for gamma={gamma}")

    # geometric bisection until the bracket is within a factor 1.01
    while hi / lo > 1.01 and budget > 0:
        mid = math.sqrt(lo * hi)
        if phi(mid) > gamma:
            lo = mid
        else:
            hi = mid
        budget -= 1

    y = 0.5 * (lo + hi)
    resid = phi(y) - gamma
    while abs(resid) > tol:
        if budget <= 0:
            raise SaddlePointError(
                f"saddle solve for gamma={gamma} stalled at residual {abs(resid):.3e} > tol={tol:.1e}"
            )
        budget -= 1
        if resid > 0:
            lo = y
        else:
            hi = y
        dphi = phi_prime(y)
        y_new = y - resid / dphi
        if not (lo < y_new < hi):
            y_new = 0.5 * (lo + hi)
        if y_new == y:
            # no representable progress left
            raise SaddlePointError(
                f"saddle solve for gamma={gamma} stuck at residual {abs(resid):.3e} > tol={tol:.1e}"
            )
        y = y_new
        resid = phi(y) - gamma

    s0, _, _ = _moments(y)
    z = math.exp(-y)
    h_val = s0
    l_val = math.log(h_val) + gamma * y
    l_pp = -phi_prime(y) * math.exp(2.0 * y)
    return SaddlePoint(gamma, y, z, h_val, l_val, l_pp, abs(resid))


@dataclass(frozen=True)
class AsymptoticCount:
    """Log-equivalents of N1, N2 and N1 - N2 with the o(1) remainders dropped."""

    d_star: int
    gamma: float
    log_n1_asym: float
    log_n2_asym: float
    log_n_diff_asym: float
    saddle: SaddlePoint = field(repr=False, compare=False)


def _log_prefactor(sp: SaddlePoint) -> float:
    """log of z (1 - z) (2 pi l'')^{1/2}."""
    z = sp.z_gamma
    return math.log(z) + math.log1p(-z) + 0.5 * math.log(2.0 * math.pi * sp.l_pp)


def asymptotic_counts(d_star: int, gamma: float, tol: float = 1e-13) -> AsymptoticCount:
    """
    Saddle-point approximations of log N1, log N2 and log(N1 - N2).

    Faithful comparison with exact counts needs ``gamma * d_star`` integer;
    this is documented, not enforced.
    """
    if d_star < 1:
        raise ValueError("d_star must be positive")
    sp = solve_saddle(gamma, tol=tol)
    log_pref = _log_prefactor(sp)
    log_n1 = d_star * sp.l_val - log_pref - 0.5 * math.log(d_star)
    log_n2 = log_n1 - sp.log_h
    log_diff = (
        d_star * sp.l_val
        - 0.5 * math.log(d_star)
        - (sp.log_h + log_pref - math.log(sp.h_val - 1.0))
    )
    return AsymptoticCount(d_star, gamma, log_n1, log_n2, log_diff, sp)


def figure_curves(gamma_grid: Sequence[float], tol: float = 1e-12) -> np.ndarray:
    """
    Rows ``(gamma, z_gamma, l_gamma(z_gamma))`` for an increasing positive grid.
    """
    grid = np.asarray(gamma_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("gamma_grid must be a nonempty 1-d sequence")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("gamma_grid must be positive and strictly increasing")
    rows = np.empty((grid.size, 3))
    for i, g in enumerate(grid):
        sp = solve_saddle(float(g), tol=tol)
        rows[i] = (g, sp.z_gamma, sp.l_val)
    return rows


def find_gamma_star(d_star: int, L: float, tol: float = 1e-12) -> SaddlePoint:
    """
    Largest gamma = j / d_star, j >= 1, with L >= gamma (1 + 1/(2 z_gamma)).

    The inequality is checked for each candidate from j = floor(L d_star)
    downwards.  Raises ``ValueError`` if no candidate qualifies.
    """
    j = radius_sq_from_gamma(L, d_star)
    while j >= 1:
        gamma = j / d_star
        sp = solve_saddle(gamma, tol=tol)
        if L >= gamma * (1.0 + 1.0 / (2.0 * sp.z_gamma)):
            return sp
        j -= 1
    raise ValueError(f"no admissible gamma_star >= 1/d_star for L={L}, d_star={d_star}")


@dataclass
class RegimeReport:
    c_star_lower: float
    c_star_upper: float
    c1_lower: float
    c2_lower: float
    c1_upper: Optional[float]
    c2_upper: Optional[float]
    gamma_star: Optional[float]
    flags: Dict[str, Optional[bool]]
    c2_lower_terms: Dict[str, float] = field(default_factory=dict)
    details: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def regime_constants(params: ModelParams, n: int, alpha: float = 0.2) -> RegimeReport:
    """
    Regime constants for fixed and growing sparsity, plus condition flags.

    The fixed-sparsity constants are

        c_lower = min(L2^2 / (2 d* Linf^2), kappa g_min^2 / (2^8 (sigma + L2)^2 d* N(d*, 2L/kappa)))
        c_upper = 2 log 3 / (d* log(3/2))

    which reduce to the usual statement at sigma = kappa = 1.  ``c2_lower`` is
    grouped as 2 [log g_min - log(17 (sigma + L2))] + log{h z (1 - z)
    (2 pi l'')^{1/2} / (h - 1)} at gamma = 2L/kappa; each piece is also
    reported in ``c2_lower_terms``.

    When no admissible gamma_star exists a ``GammaStarWarning`` is issued and
    the fields that depend on it (c1_upper, c2_upper, gamma_star and the
    thm2_hyp1 flag) are None.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    d_star = params.d_star
    d = params.d

    gamma_low = 2.0 * params.L / params.kappa
    counts_low = count_exact(d_star, radius_sq_from_gamma(gamma_low, d_star))
    c_star_lower = min(
        params.L2 ** 2 / (2.0 * d_star * params.L_inf ** 2),
        params.kappa * params.g_min ** 2
        / (2.0 ** 8 * (params.sigma + params.L2) ** 2 * d_star * counts_low.n_diff),
    )
    c_star_upper = 2.0 * math.log(3.0) / (d_star * math.log(1.5))

    sp_low = solve_saddle(gamma_low)
    log_saddle_low = sp_low.log_h + _log_prefactor(sp_low) - math.log(sp_low.h_val - 1.0)
    terms = {
        "log_g_min": math.log(params.g_min),
        "log_17_sigma_L2": math.log(17.0 * (params.sigma + params.L2)),
        "log_saddle_factor": log_saddle_low,
    }
    c2_lower = 2.0 * (terms["log_g_min"] - terms["log_17_sigma_L2"]) + terms["log_saddle_factor"]

    try:
        sp_star = find_gamma_star(d_star, params.L)
    except ValueError as exc:
        warnings.warn(str(exc), GammaStarWarning, stacklevel=2)
        sp_star = None
    c1_upper = c2_upper = hyp1_val = None
    if sp_star is not None:
        h = sp_star.h_val
        c1_upper = sp_star.l_val
        c2_upper = (
            2.0 * sp_star.log_h + _log_prefactor(sp_star) - 2.0 * math.log(h - 1.0)
            + math.log(math.log(1.5)) - math.log(5.0) - math.log(math.log(3.0))
        )
        counts_star = count_exact(d_star, radius_sq_from_gamma(sp_star.gamma, d_star))
        hyp1_val = hyp1_lhs(counts_star, d, d_star, n)

    cond_a, cond_b = consistency_conditions(params, n)
    prop2_val = prop2_lhs(d, d_star, n)
    if alpha >= ALPHA_MAX:
        warnings.warn(
            f"alpha={alpha} is not below {ALPHA_MAX:.4f}; impossibility flags lose their meaning",
            stacklevel=2,
        )
    flags = {
        "thm1_cond_a": bool(cond_a),
        "thm1_cond_b": bool(cond_b),
        "thm2_hyp1": None if hyp1_val is None else bool(hyp1_val >= alpha / 5.0),
        "prop2_impossible": bool(prop2_val >= 1.0 / alpha),
    }
    details = {
        "n": n,
        "alpha": alpha,
        "z_2L": sp_low.z_gamma,
        "z_gamma_star": None if sp_star is None else sp_star.z_gamma,
        "N_2L": counts_low.n_diff,
        "hyp1_lhs": hyp1_val,
        "prop2_lhs": prop2_val,
    }
    return RegimeReport(
        c_star_lower=c_star_lower,
        c_star_upper=c_star_upper,
        c1_lower=sp_low.l_val,
        c2_lower=c2_lower,
        c1_upper=c1_upper,
        c2_upper=c2_upper,
        gamma_star=None if sp_star is None else sp_star.gamma,
        flags=flags,
        c2_lower_terms=terms,
        details=details,
    )
