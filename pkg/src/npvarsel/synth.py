"""
Synthetic additive-cosine models, Monte Carlo recovery experiments and
evaluators for the impossibility side (design orthogonality, KL bound,
lower-bound conditions).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .conditions import ALPHA_MAX, hyp1_lhs, prop2_lhs
from .fourier_select import (
    SQRT2,
    TWO_PI,
    SelectionResult,
    TuningParams,
    relevance_Q,
    select,
    tuning,
)
from .lattice_count import ball_level, count_exact, radius_sq_from_gamma, radius_sq_from_m
from .params import ModelParams
from .theta_saddle import find_gamma_star

__all__ = [
    "SparseAdditiveFunction",
    "QuadratureCoefficients",
    "ExperimentConfig",
    "TrialOutcome",
    "TrialError",
    "OrthReport",
    "LowerBoundReport",
    "gen_design",
    "gen_sample",
    "run_trial",
    "mc_error",
    "orth_check",
    "fano_kl_bound",
    "lower_bound_conditions",
]


@dataclass(frozen=True)
class SparseAdditiveFunction:
    """
    f(x) = sum_{j in J} a_j sqrt(2) cos(2 pi x_j), coordinates 1-based.

    Its only nonzero Fourier coefficients are theta_{e_j} = a_j, so
    Q_j = a_j^2, sum_k k_j^2 theta_k^2 = a_j^2, ||f||_2^2 = sum a_j^2 under
    the uniform design and ||f||_inf = sqrt(2) sum |a_j|.
    """

    d: int
    amplitudes: Dict[int, float]

    def __post_init__(self):
        amps = {int(j): float(a) for j, a in dict(self.amplitudes).items()}
        for j, a in amps.items():
            if not 1 <= j <= self.d:
                raise ValueError(f"coordinate {j} outside 1..{self.d}")
            if a == 0:
                raise ValueError(f"amplitude of coordinate {j} is zero")
        object.__setattr__(self, "amplitudes", dict(sorted(amps.items())))

    @property
    def J(self) -> Tuple[int, ...]:
        return tuple(self.amplitudes)

    @property
    def linf(self) -> float:
        return SQRT2 * sum(abs(a) for a in self.amplitudes.values())

    @property
    def l2(self) -> float:
        return math.sqrt(sum(a * a for a in self.amplitudes.values()))

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(X.shape[:-1])
        for j, a in self.amplitudes.items():
            out = out + a * SQRT2 * np.cos(TWO_PI * X[..., j - 1])
        return out

    def check(self, params: ModelParams) -> None:
        """Raise ValueError unless f satisfies the relevance, smoothness and norm bounds."""
        if len(self.J) > params.d_star:
            raise ValueError(f"|J| = {len(self.J)} exceeds d* = {params.d_star}")
        if self.d != params.d:
            raise ValueError(f"function dimension {self.d} != params.d = {params.d}")
        tol = 1e-12
        for j, a in self.amplitudes.items():
            if relevance_Q(self, j) < params.kappa * (1 - tol):
                raise ValueError(f"Q_{j} = {a * a} below kappa = {params.kappa}")
            if a * a > params.L * (1 + tol):
                raise ValueError(f"a_{j}^2 = {a * a} exceeds L = {params.L}")
        if self.linf > params.L_inf * (1 + tol):
            raise ValueError(f"sup norm {self.linf} exceeds L_inf = {params.L_inf}")
        if self.l2 > params.L2 * (1 + tol):
            raise ValueError(f"L2 norm {self.l2} exceeds L2 = {params.L2}")

    @classmethod
    def random(cls, d: int, d_star: int, rng: np.random.Generator,
               kappa: float = 1.0, L: float = 1.0, size: Optional[int] = None):
        """Random pattern of ``size`` (default d_star) coordinates, a_j^2 uniform in [kappa, L]."""
        if L < kappa:
            raise ValueError("need kappa <= L")
        size = d_star if size is None else size
        J = np.sort(rng.choice(d, size=size, replace=False)) + 1
        mags = np.sqrt(rng.uniform(kappa, L, size=size))
        signs = rng.choice([-1.0, 1.0], size=size)
        return cls(d, {int(j): float(s * a) for j, s, a in zip(J, signs, mags)})

    def matching_params(self, d_star: int, kappa: float, L: float,
                        sigma: float = 0.0, g_min: float = 1.0) -> ModelParams:
        """ModelParams whose L2 and L_inf are the norms of this function."""
        return ModelParams(d=self.d, d_star=d_star, g_min=g_min, L=L, kappa=kappa,
                           sigma=sigma, L2=self.l2, L_inf=self.linf)


class QuadratureCoefficients:
    """
    Population coefficients of a SparseAdditiveFunction by product quadrature.

    Each integral over [0, 1]^d factorizes over coordinates; every factor is a
    midpoint rule with ``n_nodes`` points, exact for trigonometric degree
    below ``n_nodes``.  Usable as a coefficient source for ``threshold_search``.
    """

    def __init__(self, f: SparseAdditiveFunction, vmax: int, n_nodes: Optional[int] = None):
        self.f = f
        self.vmax = int(vmax)
        n_nodes = n_nodes or 2 * self.vmax + 4
        if n_nodes <= self.vmax + 1:
            raise ValueError("too few quadrature nodes for the frequency range")
        t = (np.arange(n_nodes) + 0.5) / n_nodes
        v = np.arange(-self.vmax, self.vmax + 1)
        e = np.exp(1j * TWO_PI * v[:, None] * t[None, :])
        self.t0 = e.mean(axis=1)  # int_0^1 e^{2 pi i v t} dt
        self.t1 = (e * np.cos(TWO_PI * t)[None, :]).mean(axis=1)  # with a cos(2 pi t) factor

    def __call__(self, supports: np.ndarray, values: np.ndarray):
        idx = values + self.vmax
        base = self.t0[idx]  # (count, level)
        total = np.zeros(supports.shape[0], dtype=complex)
        zero = self.vmax
        for j, a in self.f.amplitudes.items():
            hit = supports == (j - 1)
            factors = np.where(hit, self.t1[idx], base).prod(axis=1)
            outside = ~hit.any(axis=1)
            factors = np.where(outside, factors * self.t1[zero], factors)
            total += a * SQRT2 * factors
        return SQRT2 * total.real, SQRT2 * total.imag


def gen_design(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform points in [0, 1)^d (design density g = 1)."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    return rng.random((n, d))


def gen_sample(f: Callable, X: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Y = f(X) + sigma * standard normal noise."""
    fx = np.asarray(f(X), dtype=np.float64)
    if sigma == 0:
        return fx
    return fx + sigma * rng.standard_normal(fx.shape[0])


FunctionSpec = Union[SparseAdditiveFunction, Callable[[np.random.Generator], SparseAdditiveFunction]]


@dataclass
class ExperimentConfig:
    """
    One Monte Carlo recovery experiment.

    ``lambda_scale`` replaces the constant 4 of the threshold formula;
    ``lambda_override`` fixes lambda outright.  ``function_spec`` is either a
    fixed function or a rule drawing one from the trial's generator.
    """

    params: ModelParams
    n: int
    trials: int
    base_seed: int
    function_spec: FunctionSpec
    cap_at_d_star: bool = False
    lambda_scale: float = 4.0
    lambda_override: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n < 1:
            raise ValueError("n must be positive")
        if isinstance(self.function_spec, SparseAdditiveFunction):
            self.function_spec.check(self.params)

    def tuning(self) -> TuningParams:
        tune = tuning(self.params, self.n, scale=self.lambda_scale)
        if self.lambda_override is not None:
            tune = TuningParams(tune.m, float(self.lambda_override), tune.radius_sq)
        return tune


@dataclass(frozen=True)
class TrialOutcome:
    trial_index: int
    recovered: bool
    selected_set: Tuple[int, ...]
    seed_used: int


class TrialError(RuntimeError):
    def __init__(self, trial_index: int, cause: BaseException):
        super().__init__(f"trial {trial_index} failed: {cause!r}")
        self.trial_index = trial_index


def _trial_data(config: ExperimentConfig, trial_index: int):
    seed = config.base_seed + trial_index
    rng = np.random.default_rng(seed)
    spec = config.function_spec
    f = spec if isinstance(spec, SparseAdditiveFunction) else spec(rng)
    X = gen_design(config.n, config.params.d_int, rng)
    Y = gen_sample(f, X, config.params.sigma, rng)
    return seed, f, X, Y


def run_trial(config: ExperimentConfig, trial_index: int) -> Tuple[TrialOutcome, SelectionResult]:
    """One replication: fresh design and sample from seed ``base_seed + trial_index``."""
    try:
        seed, f, X, Y = _trial_data(config, trial_index)
        res = select(X, Y, None, config.params, config.tuning(), config.cap_at_d_star)
    except Exception as exc:
        raise TrialError(trial_index, exc) from exc
    chosen = tuple(res.selected_sorted)
    return TrialOutcome(trial_index, chosen == f.J, chosen, seed), res


def mc_error(config: ExperimentConfig, threads: int = 1) -> Tuple[float, List[TrialOutcome]]:
    """
    Fraction of trials with a wrong estimated pattern, and the per-trial outcomes.

    Trials use independent generators, so results do not depend on ``threads``.
    """
    def one(i):
        return run_trial(config, i)[0]

    if threads <= 1:
        outcomes = [one(i) for i in range(config.trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(config.trials)))
    errors = sum(not o.recovered for o in outcomes)
    return errors / config.trials, outcomes


class OrthReport(NamedTuple):
    max_offdiag: float
    bound: float
    satisfied: bool
    max_diag: float
    n_functions: int


def _basis_matrix(X: np.ndarray, radius_sq: int, d_star: int) -> np.ndarray:
    n, d = X.shape
    rows = [np.ones(n)]
    for level in range(1, min(d_star, d) + 1):
        supports, values = ball_level(d, radius_sq, level)
        if supports.shape[0] == 0:
            break
        arg = TWO_PI * (X[:, supports] * values[None, :, :]).sum(axis=2).T
        rows.append(SQRT2 * np.cos(arg))
        rows.append(SQRT2 * np.sin(arg))
    return np.vstack(rows)


def orth_check(X, m: Optional[float], d_star: int, L: float) -> OrthReport:
    """
    Empirical Gram averages of the basis over S_{m, d*}, m = (d* L)^{1/2} by default.

    ``max_offdiag`` is the largest |(1/n) sum_i phi_a(X_i) phi_b(X_i)| over
    distinct basis functions a != b (zero frequency included); the diagonal
    maximum is reported separately.  ``bound = n / N1(d*, L)^2``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    n = X.shape[0]
    if m is None:
        m = math.sqrt(d_star * L)
    B = _basis_matrix(X, radius_sq_from_m(m), d_star)
    if B.shape[0] < 2:
        raise ValueError("frequency set is empty")
    G = (B @ B.T) / n
    diag = np.diag(G).copy()
    np.fill_diagonal(G, 0.0)
    max_off = float(np.abs(G).max())
    n1 = count_exact(d_star, radius_sq_from_gamma(L, d_star)).n1
    bound = n / n1 ** 2
    return OrthReport(max_off, bound, max_off <= bound, float(diag.max()), B.shape[0])


def fano_kl_bound(S_size: int, A: float, n: int, eps: float) -> float:
    """4 |S| A^4 n^2 (1 + |S| eps / (4 n A^2))."""
    if S_size < 1 or n < 1 or not A > 0 or eps < 0:
        raise ValueError("need |S| >= 1, n >= 1, A > 0, eps >= 0")
    return 4.0 * S_size * A ** 4 * n ** 2 * (1.0 + S_size * eps / (4.0 * n * A ** 2))


class LowerBoundReport(NamedTuple):
    hyp1: bool
    prop2: bool
    A_value: float
    priors_in_class: bool
    hyp1_lhs: float
    prop2_lhs: float
    gamma_star: float


def lower_bound_conditions(params: ModelParams, n: int, alpha: float) -> LowerBoundReport:
    """
    Impossibility conditions at gamma_star, from exact lattice counts.

    ``priors_in_class`` checks A^2 N1 < 1 / (2 z_{gamma*}) + 1 with
    A = (N1 - N2)^{-1/2}.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if alpha >= ALPHA_MAX:
        warnings.warn(f"alpha={alpha} is not below {ALPHA_MAX:.4f}", stacklevel=2)
    sp = find_gamma_star(params.d_star, params.L)
    counts = count_exact(params.d_star, radius_sq_from_gamma(sp.gamma, params.d_star))
    h1 = hyp1_lhs(counts, params.d, params.d_star, n)
    p2 = prop2_lhs(params.d, params.d_star, n)
    A = counts.n_diff ** -0.5 if counts.n_diff else math.inf
    in_class = counts.n_diff > 0 and counts.n1 / counts.n_diff < 1.0 / (2.0 * sp.z_gamma) + 1.0
    return LowerBoundReport(
        hyp1=h1 >= alpha / 5.0,
        prop2=p2 >= 1.0 / alpha,
        A_value=A,
        priors_in_class=bool(in_class),
        hyp1_lhs=h1,
        prop2_lhs=p2,
        gamma_star=sp.gamma,
    )
