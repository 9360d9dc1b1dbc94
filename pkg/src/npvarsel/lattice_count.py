"""
Exact lattice-point counting in Euclidean balls.

All counts are exact Python integers.  Radii are always handled through the
integer squared radius ``R``: an integer vector satisfies ``|k|_2 <= m`` iff
``|k|_2^2 <= floor(m^2)``, so no floating point boundary test is ever made.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

__all__ = [
    "MultiIndex",
    "CountResult",
    "RepSeries",
    "representation_numbers",
    "count_exact",
    "enumerate_ball",
    "ball_level",
    "card_bound",
    "radius_sq_from_gamma",
    "radius_sq_from_m",
]


def _log_int(x: int) -> float:
    """Natural log of a nonnegative big integer, -inf at zero."""
    if x == 0:
        return -math.inf
    # math.log handles arbitrary ints without float overflow
    return math.log(x)


@dataclass(frozen=True)
class MultiIndex:
    """
    Sparse integer frequency vector in Z^d.

    Coordinates are 1-based: ``support`` lists the indices of the nonzero
    entries in increasing order and ``values`` their values.
    """

    dimension: int
    support: Tuple[int, ...]
    values: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(s) for s in self.support))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.dimension < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")
        if len(self.support) != len(self.values):
            raise ValueError("support and values must have the same length")
        if any(v == 0 for v in self.values):
            raise ValueError("values must all be nonzero")
        prev = 0
        for s in self.support:
            if s <= prev or s > self.dimension:
                raise ValueError(
                    f"support must be strictly increasing within 1..{self.dimension}, "
                    f"got {self.support}"
                )
            prev = s

    @classmethod
    def from_dense(cls, k: Sequence[int]) -> "MultiIndex":
        support = [i + 1 for i, v in enumerate(k) if v != 0]
        values = [int(k[i - 1]) for i in support]
        return cls(len(k), tuple(support), tuple(values))

    @classmethod
    def zero(cls, dimension: int) -> "MultiIndex":
        return cls(dimension, (), ())

    def to_dense(self) -> List[int]:
        out = [0] * self.dimension
        for s, v in zip(self.support, self.values):
            out[s - 1] = v
        return out

    @property
    def l0(self) -> int:
        return len(self.support)

    @property
    def norm_sq(self) -> int:
        return sum(v * v for v in self.values)

    @property
    def is_zero(self) -> bool:
        return not self.support

    @property
    def is_canonical(self) -> bool:
        """True when the first nonzero entry is positive (the zero index is not)."""
        return bool(self.values) and self.values[0] > 0

    def __str__(self):
        body = ", ".join(f"{s}:{v}" for s, v in zip(self.support, self.values))
        return f"k{{{body}}}"


@dataclass(frozen=True)
class CountResult:
    """Exact counts N1, N2 and N = N1 - N2, with natural-log companions."""

    n1: int
    n2: int
    n_diff: int
    log_n1: float
    log_n2: float
    log_n_diff: float

    @classmethod
    def from_counts(cls, n1: int, n2: int) -> "CountResult":
        if n2 > n1 or n2 < 0:
            raise ValueError(f"invalid counts n1={n1}, n2={n2}")
        diff = n1 - n2
        return cls(n1, n2, diff, _log_int(n1), _log_int(n2), _log_int(diff))


@dataclass(frozen=True)
class RepSeries:
    """Coefficients a_0..a_R of h(z)^dimension, i.e. representation counts."""

    dimension: int
    radius_sq_max: int
    coeffs: Tuple[int, ...]

    def cumulative(self, radius_sq: int | None = None) -> int:
        """Number of points with squared norm at most ``radius_sq``."""
        if radius_sq is None:
            radius_sq = self.radius_sq_max
        if radius_sq > self.radius_sq_max:
            raise ValueError("radius_sq exceeds the computed range")
        return sum(self.coeffs[: radius_sq + 1])


def _theta_series(radius_sq_max: int) -> List[int]:
    base = [0] * (radius_sq_max + 1)
    base[0] = 1
    j = 1
    while j * j <= radius_sq_max:
        base[j * j] = 2
        j += 1
    return base


def _mul_trunc(a: List[int], b: List[int], size: int) -> List[int]:
    out = [0] * size
    nz_b = [(j, bj) for j, bj in enumerate(b) if bj]
    for i, ai in enumerate(a):
        if not ai:
            continue
        lim = size - i
        for j, bj in nz_b:
            if j >= lim:
                break
            out[i + j] += ai * bj
    return out


def _series_power(base: List[int], power: int, size: int) -> List[int]:
    result = [1] + [0] * (size - 1)
    sq = base
    while power:
        if power & 1:
            result = _mul_trunc(result, sq, size)
        power >>= 1
        if power:
            sq = _mul_trunc(sq, sq, size)
    return result


def representation_numbers(dimension: int, radius_sq_max: int) -> RepSeries:
    """
    Number of points of Z^dimension on each sphere of squared radius r <= R.

    Parameters
    ----------
    dimension : int
        Lattice dimension, at least 1.
    radius_sq_max : int
        Largest squared radius R.

    Returns
    -------
    RepSeries
        ``coeffs[r]`` is the number of ``k`` with ``k_1^2 + ... + k_dim^2 = r``.
    """
    if int(dimension) != dimension or dimension < 1:
        raise ValueError(f"dimension must be a positive integer, got {dimension}")
    if int(radius_sq_max) != radius_sq_max or radius_sq_max < 0:
        raise ValueError(f"radius_sq_max must be a nonnegative integer, got {radius_sq_max}")
    dimension, radius_sq_max = int(dimension), int(radius_sq_max)
    size = radius_sq_max + 1
    coeffs = _series_power(_theta_series(radius_sq_max), dimension, size)
    return RepSeries(dimension, radius_sq_max, tuple(coeffs))


def count_exact(d_star: int, radius_sq: int) -> CountResult:
    """
    Exact N1, N2 and N1 - N2 for the ball of squared radius ``radius_sq`` in Z^d_star.

    N1 counts all lattice points in the ball, N2 those with first coordinate
    zero (a ball in one dimension less; the single origin when d_star = 1).
    """
    if int(d_star) != d_star or d_star < 1:
        raise ValueError(f"d_star must be a positive integer, got {d_star}")
    if int(radius_sq) != radius_sq or radius_sq < 0:
        raise ValueError(f"radius_sq must be a nonnegative integer, got {radius_sq}")
    d_star, radius_sq = int(d_star), int(radius_sq)
    n1 = representation_numbers(d_star, radius_sq).cumulative()
    n2 = 1 if d_star == 1 else representation_numbers(d_star - 1, radius_sq).cumulative()
    return CountResult.from_counts(n1, n2)


def radius_sq_from_gamma(gamma: float, d_star: int) -> int:
    """Integer squared radius floor(gamma * d_star), robust to float noise."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    x = gamma * d_star
    r = math.floor(x)
    if x - r > 1 - 1e-9:
        r += 1
    return int(r)


def radius_sq_from_m(m: float) -> int:
    """Integer squared radius floor(m^2), robust to float noise."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return radius_sq_from_gamma(m * m, 1)


def _value_patterns(level: int, radius_sq: int) -> List[Tuple[int, ...]]:
    """Nonzero integer tuples of length ``level``, first entry positive, norm^2 <= R."""
    out: List[Tuple[int, ...]] = []
    vmax = math.isqrt(radius_sq)

    def rec(prefix: List[int], budget: int):
        if len(prefix) == level:
            out.append(tuple(prefix))
            return
        remaining = level - len(prefix) - 1
        lim = math.isqrt(max(budget - remaining, 0))
        first = not prefix
        for v in range(-vmax, vmax + 1):
            if v == 0 or abs(v) > lim or (first and v < 0):
                continue
            prefix.append(v)
            rec(prefix, budget - v * v)
            prefix.pop()

    if radius_sq >= level:
        rec([], radius_sq)
    return out


def ball_level(d: int, radius_sq: int, level: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Canonical frequencies with exactly ``level`` nonzero entries and norm^2 <= R.

    Returns
    -------
    supports : ndarray of int, shape (count, level)
        Zero-based coordinate indices, rows in lexicographic order.
    values : ndarray of int, shape (count, level)
        Matching nonzero values; the first entry of each row is positive.
    """
    if level < 1 or level > d:
        raise ValueError(f"level must lie in 1..{d}, got {level}")
    patterns = _value_patterns(level, radius_sq)
    if not patterns:
        empty = np.zeros((0, level), dtype=np.int64)
        return empty, empty.copy()
    pats = np.asarray(patterns, dtype=np.int64)
    supp = np.asarray(list(itertools.combinations(range(d), level)), dtype=np.int64)
    supports = np.repeat(supp, len(pats), axis=0)
    values = np.tile(pats, (len(supp), 1))
    return supports, values


def enumerate_ball(d: int, m: float, ell: int) -> Iterator[MultiIndex]:
    """
    Stream the canonical nonzero members of S_{m, ell} = {|k|_2 <= m, |k|_0 <= ell}.

    Output is grouped by increasing ``|k|_0``; within a level it is ordered
    lexicographically by (support, values).  Each pair {k, -k} appears once,
    as the member whose first nonzero entry is positive.
    """
    if m <= 0:
        raise ValueError(f"m must be positive, got {m}")
    if ell < 1 or ell > d:
        raise ValueError(f"ell must lie in 1..d={d}, got {ell}")
    radius_sq = radius_sq_from_m(m)
    for level in range(1, ell + 1):
        patterns = _value_patterns(level, radius_sq)
        if not patterns:
            break
        for supp in itertools.combinations(range(1, d + 1), level):
            for vals in patterns:
                yield MultiIndex(d, supp, vals)


def card_bound(m: float, d: int, d_star: int) -> float:
    """Log of the cardinality bound (6 m d)^d_star on S_{m, d_star} plus the origin."""
    x = 6.0 * m * d
    if x <= 1:
        raise ValueError(f"6*m*d must exceed 1, got {x}")
    return d_star * math.log(x)
