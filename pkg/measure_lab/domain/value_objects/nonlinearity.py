"""Nonlinearity Value Object

Carathéodory absorption term f(x, u), non-increasing in u, with the derived
forms used by the reduction schemes.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

# f(x, y, u) evaluated elementwise on broadcast arrays.
FieldFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
# g(x, y) evaluated elementwise.
ShiftFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _broadcast(values, u: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(values, dtype=float), np.shape(u)).astype(float)


@dataclass(frozen=True)
class Nonlinearity:
    """Absorption term f(x, u) with an optional analytic ∂_u f.

    Attributes:
        name: Human-readable description, also used in reports
        func: f(x, y, u) on arrays
        derivative: ∂_u f(x, y, u); central differences are used when absent
        flag_b: Declares f(x, u) = 0 for u ≤ 0
    """

    name: str
    func: FieldFunction
    derivative: Optional[FieldFunction] = None
    flag_b: bool = False

    def __post_init__(self) -> None:
        """Validate nonlinearity after initialization."""
        if not self.name:
            raise ValueError("name cannot be empty")
        if not callable(self.func):
            raise ValueError("func must be callable")

    def __call__(self, x: np.ndarray, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return _broadcast(self.func(x, y, u), u)

    def du(self, x: np.ndarray, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        """∂_u f, analytic if available, else central differences."""
        u = np.asarray(u, dtype=float)
        if self.derivative is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                return _broadcast(self.derivative(x, y, u), u)
        step = np.maximum(1e-6, 1e-6 * np.abs(u))
        return (self(x, y, u + step) - self(x, y, u - step)) / (2.0 * step)

    def truncate(self, level: float) -> "Nonlinearity":
        """f ∨ (-level)."""
        floor = -float(level)
        base = self

        def func(x, y, u):
            return np.maximum(base(x, y, u), floor)

        def derivative(x, y, u):
            return np.where(base(x, y, u) > floor, base.du(x, y, u), 0.0)

        return Nonlinearity(f"{self.name} v -{level:g}", func, derivative, self.flag_b)

    def reflect(self) -> "Nonlinearity":
        """f̃(x, u) = -f(x, -u)."""
        base = self

        def func(x, y, u):
            return -base(x, y, -np.asarray(u, dtype=float))

        def derivative(x, y, u):
            return base.du(x, y, -np.asarray(u, dtype=float))

        return Nonlinearity(f"reflect({self.name})", func, derivative, False)

    def positive_part(self) -> "Nonlinearity":
        """f⁺ = max(f, 0)."""
        base = self

        def func(x, y, u):
            return np.maximum(base(x, y, u), 0.0)

        def derivative(x, y, u):
            return np.where(base(x, y, u) > 0.0, base.du(x, y, u), 0.0)

        return Nonlinearity(f"({self.name})+", func, derivative, self.flag_b)

    def negative_part(self) -> "Nonlinearity":
        """-f⁻ = min(f, 0)."""
        base = self

        def func(x, y, u):
            return np.minimum(base(x, y, u), 0.0)

        def derivative(x, y, u):
            return np.where(base(x, y, u) < 0.0, base.du(x, y, u), 0.0)

        return Nonlinearity(f"-({self.name})-", func, derivative, self.flag_b)

    def shifted(self, shift: ShiftFunction, label: str = "g") -> "Nonlinearity":
        """f + g(x) for a bounded x-only perturbation g."""
        base = self

        def func(x, y, u):
            return base(x, y, u) + _broadcast(shift(x, y), u)

        def derivative(x, y, u):
            return base.du(x, y, u)

        return Nonlinearity(f"{self.name} + {label}", func, derivative, False)

    def plus_constant(self, value: float) -> "Nonlinearity":
        return self.shifted(lambda x, y: np.full(np.shape(x), float(value)), f"{value:g}")

    @classmethod
    def zero(cls) -> "Nonlinearity":
        def nothing(x, y, u):
            return np.zeros(np.shape(u))

        return cls("zero", nothing, nothing, True)

    @classmethod
    def linear(cls, c: float = 1.0) -> "Nonlinearity":
        """f = -c·u."""
        if c < 0:
            raise ValueError(f"linear coefficient must be >= 0, got {c}")
        return cls(
            f"linear(c={c:g})",
            lambda x, y, u: -c * np.asarray(u, dtype=float),
            lambda x, y, u: np.full(np.shape(u), -c),
            c == 0,
        )

    @classmethod
    def power(cls, p: float = 3.0) -> "Nonlinearity":
        """f = -(u⁺)^p."""
        if p < 1:
            raise ValueError(f"power exponent must be >= 1, got {p}")

        def func(x, y, u):
            return -np.maximum(u, 0.0) ** p

        def derivative(x, y, u):
            return -p * np.maximum(u, 0.0) ** (p - 1.0) * (np.asarray(u) > 0.0)

        return cls(f"power(p={p:g})", func, derivative, True)

    @classmethod
    def exponential(cls, a: float = 1.0) -> "Nonlinearity":
        """f = -((e^{a·u} - 1)⁺)."""
        if a <= 0:
            raise ValueError(f"exponential rate must be > 0, got {a}")

        def func(x, y, u):
            return -np.maximum(np.expm1(a * np.asarray(u, dtype=float)), 0.0)

        def derivative(x, y, u):
            u = np.asarray(u, dtype=float)
            return np.where(u > 0.0, -a * np.exp(a * np.maximum(u, 0.0)), 0.0)

        return cls(f"exp(a={a:g})", func, derivative, True)
