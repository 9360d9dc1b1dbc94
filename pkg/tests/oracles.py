"""Independent reference computations used only by the tests."""

import itertools
import math

import numpy as np


def brute_force_norm_counts(dim: int, radius_sq_max: int) -> np.ndarray:
    """counts[r] = #{k in Z^dim : |k|^2 = r}, r <= R, by enumerating the cube."""
    if dim == 0:
        out = np.zeros(radius_sq_max + 1, dtype=np.int64)
        out[0] = 1
        return out
    b = math.isqrt(radius_sq_max)
    sq = np.arange(-b, b + 1) ** 2
    norms = np.zeros(1, dtype=np.int64)
    for _ in range(dim):
        norms = np.add.outer(norms, sq).ravel()
        norms = norms[norms <= radius_sq_max]
    return np.bincount(norms, minlength=radius_sq_max + 1)


def brute_force_count(dim: int, radius_sq: int) -> tuple:
    """(N1, N2) by explicit nested loops over the cube (small cases only)."""
    b = math.isqrt(radius_sq)
    n1 = n2 = 0
    for k in itertools.product(range(-b, b + 1), repeat=dim):
        if sum(v * v for v in k) <= radius_sq:
            n1 += 1
            if k[0] == 0:
                n2 += 1
    return n1, n2


def brute_force_count_table(dim: int, radius_sq_max: int) -> list:
    """[(N1, N2) for R = 0..radius_sq_max] from one nested-loop pass over the cube."""
    b = math.isqrt(radius_sq_max)
    h1 = [0] * (radius_sq_max + 1)
    h2 = [0] * (radius_sq_max + 1)
    for k in itertools.product(range(-b, b + 1), repeat=dim):
        r = sum(v * v for v in k)
        if r <= radius_sq_max:
            h1[r] += 1
            if k[0] == 0:
                h2[r] += 1
    return list(zip(itertools.accumulate(h1), itertools.accumulate(h2)))


def phi_direct(y: float) -> float:
    """sum k^2 e^{-y k^2} / sum e^{-y k^2} over |k| <= K with exact fsum."""
    K = int(math.ceil(math.sqrt(80.0 / y))) + 2
    w = [math.exp(-y * k * k) for k in range(-K, K + 1)]
    num = math.fsum(k * k * wk for k, wk in zip(range(-K, K + 1), w))
    return num / math.fsum(w)


def grid_bisection_root(gamma: float, step: float = 1e-6) -> float:
    """
    Root y of phi(y) = gamma: coarse geometric scan, then a uniform grid with
    spacing ``step`` inside the coarse bracket, then bisection in the grid cell.
    """
    ys = np.geomspace(1e-4, 50.0, 400)
    vals = [phi_direct(float(y)) - gamma for y in ys]
    i = next(i for i in range(len(ys) - 1) if vals[i] > 0 >= vals[i + 1])
    lo, hi = float(ys[i]), float(ys[i + 1])
    grid = np.arange(lo, hi + step, step)
    # phi is decreasing: binary search over grid indices for the sign change
    a, b = 0, len(grid) - 1
    while b - a > 1:
        mid = (a + b) // 2
        if phi_direct(float(grid[mid])) > gamma:
            a = mid
        else:
            b = mid
    lo, hi = float(grid[a]), float(grid[b])
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if phi_direct(mid) > gamma:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gaussian_mixture_kl(a: float, width: float = 1e-3, half_range: float = 10.0) -> float:
    """KL(0.5 N(a,1) + 0.5 N(-a,1) || N(0,1)) by trapezoid quadrature on a uniform grid."""
    y = np.arange(-half_range, half_range + width / 2, width)
    p0 = np.exp(-0.5 * y * y) / math.sqrt(2 * math.pi)
    p1 = 0.5 * (np.exp(-0.5 * (y - a) ** 2) + np.exp(-0.5 * (y + a) ** 2)) / math.sqrt(2 * math.pi)
    integrand = p1 * np.log(p1 / p0)
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return float(trapezoid(integrand, y))


def grid_gram(funcs, n_grid: int = 512) -> np.ndarray:
    """Midpoint-rule Gram matrix on [0,1]^2 of callables f(x1, x2)."""
    t = (np.arange(n_grid) + 0.5) / n_grid
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    vals = [f(x1, x2).ravel() for f in funcs]
    B = np.vstack(vals)
    return B @ B.T / B.shape[1]
