"""Closed-form consistency and impossibility conditions."""

from __future__ import annotations

import math

from .lattice_count import CountResult, count_exact, radius_sq_from_gamma
from .params import ModelParams

__all__ = [
    "log_binomial",
    "consistency_lhs",
    "consistency_conditions",
    "hyp1_lhs",
    "prop2_lhs",
    "ALPHA_MAX",
]

# admissible Fano level: alpha < (log 3 - log 2) / log 3
ALPHA_MAX = (math.log(3.0) - math.log(2.0)) / math.log(3.0)


def log_binomial(d: float, k: int) -> float:
    """log C(d, k) for real d >= k, through log-gamma for the factorial part."""
    if k < 0 or k > d:
        raise ValueError(f"need 0 <= k <= d, got d={d}, k={k}")
    if k == 0:
        return 0.0
    if k <= 4096:
        # a direct falling product keeps precision when d is huge
        return math.fsum(math.log(d - i) for i in range(k)) - math.lgamma(k + 1)
    return math.lgamma(d + 1) - math.lgamma(k + 1) - math.lgamma(d - k + 1)


def consistency_lhs(params: ModelParams, n: int) -> tuple[float, float, CountResult]:
    """
    Left sides of the two sample-size conditions guaranteeing consistency.

    Returns ``(lhs_a, lhs_b, counts)`` where ``lhs_a`` is compared with L2^2,
    ``lhs_b`` with kappa, and ``counts`` holds N(d*, 2L/kappa).
    """
    d_star = params.d_star
    m = math.sqrt(2.0 * params.L * d_star / params.kappa)
    log6md = math.log(6.0 * m * params.d)
    counts = count_exact(d_star, radius_sq_from_gamma(2.0 * params.L / params.kappa, d_star))
    lhs_a = params.L_inf ** 2 * d_star * log6md / n
    lhs_b = (
        128.0 * (params.sigma + params.L2) ** 2 * d_star * counts.n_diff * log6md
        / (n * params.g_min ** 2)
    )
    return lhs_a, lhs_b, counts


def consistency_conditions(params: ModelParams, n: int) -> tuple[bool, bool]:
    lhs_a, lhs_b, _ = consistency_lhs(params, n)
    return lhs_a <= params.L2 ** 2, lhs_b <= params.kappa


def hyp1_lhs(counts: CountResult, d: float, d_star: int, n: int) -> float:
    """(N1 - N2)^2 log C(d, d*) / (n^2 N1), evaluated in log space."""
    log_binom = log_binomial(d, d_star)
    if counts.n_diff == 0 or log_binom <= 0.0:
        return 0.0
    log_val = (
        2.0 * counts.log_n_diff + math.log(log_binom) - 2.0 * math.log(n) - counts.log_n1
    )
    return math.exp(log_val) if log_val < 700 else math.inf


def prop2_lhs(d: float, d_star: int, n: int) -> float:
    """d* (log d - log d*) / n."""
    return d_star * (math.log(d) - math.log(d_star)) / n
