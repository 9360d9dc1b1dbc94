"""
Sparsity pattern estimation by thresholding empirical Fourier coefficients.

The trigonometric basis on [0, 1]^d is indexed by canonical frequencies ``k``
(first nonzero entry positive): each one carries a cosine and a sine,

    phi_0 = 1,   sqrt(2) cos(2 pi k.x),   sqrt(2) sin(2 pi k.x),

and the sine member plays the role of the frequency ``-k``.  A coordinate j
is declared relevant when some frequency with ``k_j != 0``, ``|k|_2 <= m``
and ``|k|_0 <= d*`` has an empirical coefficient larger than ``lambda`` in
absolute value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Set, Tuple

import numpy as np

from .lattice_count import MultiIndex, ball_level, radius_sq_from_m
from .params import ModelParams

__all__ = [
    "COS",
    "SIN",
    "TuningParams",
    "Record",
    "SelectionResult",
    "uniform_density",
    "basis_eval",
    "empirical_coeff",
    "EmpiricalCoefficients",
    "tuning",
    "threshold_search",
    "select",
    "relevance_Q",
]

COS = "cos"
SIN = "sin"
SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

# (supports, values) -> (cos coefficients, sin coefficients) for one batch of
# canonical frequencies; supports are zero-based
CoefficientSource = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def uniform_density(X: np.ndarray) -> np.ndarray:
    """Density of the uniform design on [0, 1]^d, g = 1."""
    return np.ones(np.asarray(X).shape[0])


@dataclass(frozen=True)
class TuningParams:
    m: float
    lam: float
    radius_sq: int

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


@dataclass(frozen=True)
class Record:
    """A frequency whose empirical coefficient exceeded the threshold."""

    k: MultiIndex
    trig: str
    value: float


@dataclass
class SelectionResult:
    selected: Set[int]
    records: List[Record] = field(default_factory=list)
    levels_visited: int = 0
    stopped_early: bool = False
    lam: float = math.nan
    m: float = math.nan

    @property
    def selected_sorted(self) -> List[int]:
        return sorted(self.selected)


def _check_trig(trig: str):
    if trig not in (COS, SIN):
        raise ValueError(f"trig must be 'cos' or 'sin', got {trig!r}")


def basis_eval(k: MultiIndex, trig: str, x) -> float:
    """Evaluate the basis function of frequency ``k`` and branch ``trig`` at ``x``."""
    _check_trig(trig)
    if k.is_zero:
        if trig != COS:
            raise ValueError("the zero frequency has only the constant (cos) member")
        return 1.0
    if not k.is_canonical:
        raise ValueError(f"frequency {k} is not canonical (first nonzero entry must be positive)")
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != k.dimension:
        raise ValueError(f"x has dimension {x.shape[-1]}, k has {k.dimension}")
    idx = np.asarray(k.support) - 1
    arg = TWO_PI * (x[..., idx] * np.asarray(k.values, dtype=np.float64)).sum(axis=-1)
    out = SQRT2 * (np.cos(arg) if trig == COS else np.sin(arg))
    return float(out) if np.ndim(out) == 0 else out


def _weights(X: np.ndarray, Y: np.ndarray, density_at) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.shape != (X.shape[0],):
        raise ValueError(f"need X of shape (n, d) and Y of shape (n,), got {X.shape} and {Y.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty sample")
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError("design points must lie in [0, 1]^d")
    g = np.asarray((density_at or uniform_density)(X), dtype=np.float64)
    if g.shape != Y.shape:
        raise ValueError("density evaluator returned the wrong shape")
    if not np.all(g > 0):
        raise ValueError(f"design density must be positive, got minimum {g.min()}")
    return Y / g


def empirical_coeff(X, Y, density_at, k: MultiIndex, trig: str) -> float:
    """
    (1/n) sum_i phi_k(X_i) Y_i / g(X_i), summed in index order (pairwise).
    """
    w = _weights(X, Y, density_at)
    X = np.asarray(X, dtype=np.float64)
    if k.is_zero:
        _check_trig(trig)
        vals = w.copy()
    else:
        vals = basis_eval(k, trig, X) * w
    return float(np.sum(vals) / w.shape[0])


class EmpiricalCoefficients:
    """
    Batched empirical coefficients for canonical frequencies.

    Tables ``exp(2 pi i v x_j)`` for ``|v| <= vmax`` are built once; the
    coefficient of a frequency is then a product of table columns, weighted
    and reduced over samples in a fixed order.
    """

    def __init__(self, X, Y, density_at=None, vmax: int = 1, chunk_elems: int = 1 << 19):
        self.w = _weights(X, Y, density_at)
        X = np.asarray(X, dtype=np.float64)
        self.n, self.d = X.shape
        self.vmax = max(int(vmax), 1)
        v = np.arange(-self.vmax, self.vmax + 1, dtype=np.float64)
        # table[v + vmax, j, i] = exp(2 pi i v X[i, j]); wtable carries the weights
        self.table = np.exp(1j * TWO_PI * v[:, None, None] * X.T[None, :, :])
        self.wtable = self.table * self.w[None, None, :]
        self.chunk = max(1, chunk_elems // max(self.n, 1))

    def __call__(self, supports: np.ndarray, values: np.ndarray):
        count, level = supports.shape
        if count and np.abs(values).max() > self.vmax:
            raise ValueError(f"frequency value {np.abs(values).max()} exceeds table size {self.vmax}")
        idx = values + self.vmax
        cos_c = np.empty(count)
        sin_c = np.empty(count)
        for start in range(0, count, self.chunk):
            stop = min(start + self.chunk, count)
            e = self.wtable[idx[start:stop, 0], supports[start:stop, 0]]
            for col in range(1, level):
                e *= self.table[idx[start:stop, col], supports[start:stop, col]]
            cos_c[start:stop] = e.real.sum(axis=1)
            sin_c[start:stop] = e.imag.sum(axis=1)
        scale = SQRT2 / self.n
        return cos_c * scale, sin_c * scale


def tuning(params: ModelParams, n: int, scale: float = 4.0) -> TuningParams:
    """
    Truncation radius and threshold.

        m = (2 L d* / kappa)^{1/2}
        lambda = scale (sigma + L2) (d* log(6 m d) / (n g_min^2))^{1/2}

    ``scale = 4`` is the constant under which the error bound 3 (6 m d)^{-d*}
    is proved; other values keep the same n^{-1/2} shape.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    d_star = params.d_star
    m = math.sqrt(2.0 * params.L * d_star / params.kappa)
    lam = scale * (params.sigma + params.L2) * math.sqrt(
        d_star * math.log(6.0 * m * params.d) / (n * params.g_min ** 2)
    )
    return TuningParams(m=m, lam=lam, radius_sq=radius_sq_from_m(m))


def threshold_search(
    coefficients: CoefficientSource,
    d: int,
    d_star: int,
    tune: TuningParams,
    cap_at_d_star: bool = False,
) -> SelectionResult:
    """
    Level-by-level thresholding over S_{m, d*}.

    Levels ``K = 1..d*`` hold the canonical frequencies with ``|k|_0 = K``.
    Every coordinate in the support of a frequency whose cos or sin
    coefficient exceeds ``lambda`` strictly is selected.  With
    ``cap_at_d_star`` the search stops after the first level at which the
    selected set reaches ``d*`` coordinates.
    """
    result = SelectionResult(selected=set(), lam=tune.lam, m=tune.m)
    for level in range(1, d_star + 1):
        supports, values = ball_level(d, tune.radius_sq, level)
        if supports.shape[0] == 0:
            break
        cos_c, sin_c = coefficients(supports, values)
        result.levels_visited = level
        for trig, coef in ((COS, cos_c), (SIN, sin_c)):
            for i in np.flatnonzero(np.abs(coef) > tune.lam):
                k = MultiIndex(d, tuple(supports[i] + 1), tuple(values[i]))
                result.records.append(Record(k, trig, float(coef[i])))
                result.selected.update(k.support)
        if cap_at_d_star and len(result.selected) >= d_star:
            result.stopped_early = True
            break
    return result


def select(
    X,
    Y,
    density_at=None,
    params: Optional[ModelParams] = None,
    tune: Optional[TuningParams] = None,
    cap_at_d_star: bool = False,
) -> SelectionResult:
    """
    Estimate the sparsity pattern from a sample.

    Parameters
    ----------
    X : array of shape (n, d)
        Design points in [0, 1]^d.
    Y : array of shape (n,)
        Responses.
    density_at : callable, optional
        Design density evaluator ``X -> g(X)``; uniform when omitted.
    params : ModelParams
        Model constants; ``params.d`` must match the design.
    tune : TuningParams, optional
        Defaults to ``tuning(params, n)``.
    cap_at_d_star : bool
        Stop once ``d*`` coordinates are selected.
    """
    if params is None:
        raise ValueError("params is required")
    X = np.asarray(X, dtype=np.float64)
    d = params.d_int
    if X.ndim != 2 or X.shape[1] != d:
        raise ValueError(f"design has shape {X.shape}, expected (n, {d})")
    if tune is None:
        tune = tuning(params, X.shape[0])
    source = EmpiricalCoefficients(X, Y, density_at, vmax=math.isqrt(tune.radius_sq))
    return threshold_search(source, d, params.d_star, tune, cap_at_d_star)


def relevance_Q(f_spec, j: int) -> float:
    """
    Q_j[f] = sum over k with k_j != 0 of theta_k^2.

    For a sum of single-frequency cosines only ``k = e_j`` contributes, so
    the value is a_j^2 on the pattern and 0 elsewhere.
    """
    return float(f_spec.amplitudes.get(j, 0.0)) ** 2
