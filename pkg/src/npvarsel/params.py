"""Model constants shared by the selector, the regime analyzer and the simulator."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

__all__ = ["ModelParams", "MODEL_PARAM_KEYS"]


@dataclass(frozen=True)
class ModelParams:
    """
    Constants of the regression model.

    Parameters
    ----------
    d : int or float
        Ambient dimension.  A float is accepted for regime studies where only
        ``log d`` enters; selection and simulation require an integer.
    d_star : int
        Upper bound on the number of relevant covariates.
    g_min : float
        Lower bound of the design density on [0, 1]^d.
    L : float
        Smoothness budget: sum_k k_j^2 theta_k^2 <= L for every j.
    kappa : float
        Relevance level: Q_j[f] >= kappa for every relevant j.
    sigma : float
        Noise scale (sub-Gaussian with unit proxy variance after scaling).
    L2, L_inf : float
        Bounds on the L2(P_X) and sup norms of f.
    """

    d: float
    d_star: int
    g_min: float = 1.0
    L: float = 1.0
    kappa: float = 1.0
    sigma: float = 1.0
    L2: float = 1.0
    L_inf: float = 1.0

    def __post_init__(self):
        if int(self.d_star) != self.d_star or self.d_star < 1:
            raise ValueError(f"d_star must be a positive integer, got {self.d_star}")
        object.__setattr__(self, "d_star", int(self.d_star))
        if isinstance(self.d, float) and self.d.is_integer():
            object.__setattr__(self, "d", int(self.d))
        for name in ("d", "g_min", "L", "kappa", "L2", "L_inf"):
            v = getattr(self, name)
            if not (v > 0) or not math.isfinite(v):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        # sigma = 0 is the noiseless model, used by the simulator
        if not (self.sigma >= 0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.d_star > self.d:
            raise ValueError(f"d_star={self.d_star} exceeds d={self.d}")
        if self.L2 > self.L_inf:
            raise ValueError(f"L2={self.L2} exceeds L_inf={self.L_inf}")

    @property
    def d_int(self) -> int:
        if int(self.d) != self.d:
            raise ValueError(f"an integer ambient dimension is required, got d={self.d}")
        return int(self.d)

    def to_dict(self) -> dict:
        return asdict(self)


MODEL_PARAM_KEYS = tuple(f.name for f in fields(ModelParams))
