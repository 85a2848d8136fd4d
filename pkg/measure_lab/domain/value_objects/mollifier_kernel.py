"""Mollifier Kernel Value Object

Discrete radial kernel ρ_n(x) = c·n²·j(n|x|) sampled on a square stencil.
"""

from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

Profile = Callable[[np.ndarray], np.ndarray]


def bump_profile(r: np.ndarray) -> np.ndarray:
    """j(r) = exp(-1/(1 - r²)) for r < 1, else 0."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def cosine_profile(r: np.ndarray) -> np.ndarray:
    """j(r) = (1 + cos(πr))/2 for r < 1, else 0."""
    r = np.asarray(r, dtype=float)
    return np.where(r < 1.0, 0.5 * (1.0 + np.cos(np.pi * np.minimum(r, 1.0))), 0.0)


PROFILES: Dict[str, Profile] = {
    "bump": bump_profile,
    "cosine": cosine_profile,
}


@dataclass(frozen=True, eq=False)
class MollifierKernel:
    """Renormalized mollifier stencil.

    Attributes:
        n: Smoothing index, support radius 1/n
        profile: Name of the radial profile j
        h: Spacing of the grid the stencil was sampled on
        radius_nodes: Stencil half-width ⌈1/(n·h)⌉
        weights: (2·radius_nodes + 1)² nonnegative weights with h²·Σ = 1
        normalization: Analytic constant c = 1/∫₀¹ j(r)·2πr dr
        discrete_normalization: Constant actually applied after renormalization
    """

    n: int
    profile: str
    h: float
    radius_nodes: int
    weights: np.ndarray
    normalization: float
    discrete_normalization: float

    def __post_init__(self) -> None:
        """Validate stencil shape and freeze weights."""
        weights = np.array(self.weights, dtype=float, copy=True)
        size = 2 * self.radius_nodes + 1
        if weights.shape != (size, size):
            raise ValueError(f"weights have shape {weights.shape}, expected {(size, size)}")
        if np.any(weights < 0.0):
            raise ValueError("kernel weights must be nonnegative")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)

    @property
    def support_radius(self) -> float:
        return 1.0 / self.n

    @property
    def support_nodes(self) -> int:
        """Largest offset, in nodes, carrying a non-negligible weight."""
        R = self.radius_nodes
        offsets = np.abs(np.arange(-R, R + 1))
        reach = np.maximum.outer(offsets, offsets)
        significant = self.weights > 1e-14 * self.weights.max()
        return int(reach[significant].max())

    @property
    def is_identity(self) -> bool:
        return self.support_nodes == 0

    @property
    def mass(self) -> float:
        return float(self.h**2 * self.weights.sum())

    @property
    def normalization_gap(self) -> float:
        """Relative gap between the discrete and the analytic constant."""
        return abs(self.discrete_normalization / self.normalization - 1.0)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "profile": self.profile,
            "h": self.h,
            "radius_nodes": self.radius_nodes,
            "normalization": self.normalization,
            "discrete_normalization": self.discrete_normalization,
            "mass": self.mass,
        }
