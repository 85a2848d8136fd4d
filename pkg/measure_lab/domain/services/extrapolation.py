"""Extrapolation: Richardson fits and growth exponents over refinement ladders."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

logger = logging.getLogger(__name__)

BETA_BOUNDS: Tuple[float, float] = (0.3, 2.0)


@dataclass(frozen=True)
class Extrapolation:
    """Fit a(h) = value + coefficient·h^beta with the raw data alongside."""

    value: float
    coefficient: float
    beta: float
    residual: float
    error: float
    hs: List[float] = field(default_factory=list)
    raw_values: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "beta": self.beta,
            "coefficient": self.coefficient,
            "residual": self.residual,
            "hs": list(self.hs),
            "raw_values": list(self.raw_values),
        }


def _linear_fit(hs: np.ndarray, values: np.ndarray, beta: float) -> Tuple[float, float, float]:
    design = np.column_stack([np.ones_like(hs), hs**beta])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.linalg.norm(design @ coef - values))
    return float(coef[0]), float(coef[1]), residual


def richardson(
    hs: Sequence[float],
    values: Sequence[float],
    beta_bounds: Tuple[float, float] = BETA_BOUNDS,
) -> Extrapolation:
    """Fit a(h) = a0 + C·h^beta with beta searched in beta_bounds.

    For each beta the pair (a0, C) is a linear least-squares fit; beta
    minimizes the fit residual. The error estimate is |a0 - a(h_min)|.

    Raises:
        ValueError: If fewer than two points are given or h is not positive
    """
    h = np.asarray(hs, dtype=float)
    a = np.asarray(values, dtype=float)
    if h.size < 2 or h.size != a.size:
        raise ValueError("richardson needs at least two (h, value) pairs")
    if np.any(h <= 0.0):
        raise ValueError("grid spacings must be positive")
    low, high = beta_bounds
    if h.size == 2:
        beta = 1.0
    else:
        result = minimize_scalar(
            lambda b: _linear_fit(h, a, b)[2], bounds=(low, high), method="bounded"
        )
        beta = float(result.x)
    value, coefficient, residual = _linear_fit(h, a, beta)
    finest = int(np.argmin(h))
    error = abs(value - float(a[finest]))
    logger.info("richardson: a0=%.6g beta=%.3f residual=%.3g", value, beta, residual)
    return Extrapolation(value, coefficient, beta, residual, error, h.tolist(), a.tolist())


def growth_exponent(hs: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(1/h).

    Zero entries are skipped; an all-zero sequence has exponent 0.
    """
    h = np.asarray(hs, dtype=float)
    v = np.asarray(values, dtype=float)
    positive = v > 0.0
    if np.count_nonzero(positive) < 2:
        return 0.0
    slope, _ = np.polyfit(np.log(1.0 / h[positive]), np.log(v[positive]), 1)
    return float(slope)


def relative_increments(values: Sequence[float]) -> List[float]:
    """|v_{k+1} - v_k| / |v_{k+1}| along a ladder (0 where both vanish)."""
    out = []
    for previous, current in zip(values[:-1], values[1:]):
        scale = abs(current)
        if scale == 0.0:
            out.append(0.0 if previous == 0.0 else math.inf)
        else:
            out.append(abs(current - previous) / scale)
    return out
