"""Mollification: kernel construction, R_n(μ) = ρ_n ∗ μ and its structural checks."""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import integrate, signal

from ..entities.results import GreenDomination, MonotonicityCheck
from ..exceptions import PreconditionError
from ..value_objects.grid import Grid, GridFunction
from ..value_objects.measure import Measure
from ..value_objects.mollifier_kernel import PROFILES, MollifierKernel
from .grid_core import apply_stencil
from .measure_model import (
    discretize_rhs,
    restrict_to_interior,
    singular_support_distance,
    total_variation,
)

logger = logging.getLogger(__name__)

_EPS = 1e-12


def sphere_measure(d: int, r: float) -> float:
    """α_d(r) = 2π^{d/2}·r^{d-1}/Γ(d/2)."""
    return 2.0 * math.pi ** (d / 2.0) * r ** (d - 1) / math.gamma(d / 2.0)


def analytic_normalization(profile: str, d: int = 2) -> float:
    """c = 1/∫₀¹ j(r)·α_d(r) dr."""
    j = PROFILES[profile]

    def integrand(r: float) -> float:
        return float(j(np.array([r]))[0]) * sphere_measure(d, r)

    integral, _ = integrate.quad(integrand, 0.0, 1.0)
    return 1.0 / integral


def build_kernel(
    n: int, g: Grid, profile: str = "bump", subcell: bool = False
) -> MollifierKernel:
    """Sample ρ_n = c·n²·j(n|x|) on g and renormalize to unit discrete mass.

    With subcell the two-cell floor is lifted; from 1/n <= h on the sampled
    kernel is the single center weight 1/h².

    Raises:
        PreconditionError: If the kernel is narrower than two cells and subcell is off
        ValueError: For an unknown profile or n < 1
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown mollifier profile {profile!r}; choose from {sorted(PROFILES)}")
    if n < 1:
        raise ValueError(f"mollification index must be >= 1, got {n}")
    h = g.h
    if not subcell and 1.0 / n < 2.0 * h - _EPS:
        raise PreconditionError(f"kernel radius 1/{n} is narrower than 2 cells (h={h:.4g})")
    radius = math.ceil(1.0 / (n * h) - _EPS)
    offsets = np.arange(-radius, radius + 1, dtype=float)
    KX, KY = np.meshgrid(offsets, offsets, indexing="ij")
    c = analytic_normalization(profile)
    raw = c * n**2 * PROFILES[profile](n * h * np.hypot(KX, KY))
    mass = h**2 * raw.sum()
    weights = raw / mass
    return MollifierKernel(
        n=n,
        profile=profile,
        h=h,
        radius_nodes=radius,
        weights=weights,
        normalization=c,
        discrete_normalization=c / mass,
    )


def grid_limit_index(g: Grid) -> int:
    """Smallest n whose kernel collapses to one node on g (1/n <= h)."""
    return math.ceil(1.0 / g.h - _EPS)


def mollify_rhs(rhs: GridFunction, k: MollifierKernel) -> GridFunction:
    """Discrete convolution h²·(rhs ∗ w), kernel truncated at ∂D."""
    if not math.isclose(rhs.grid.h, k.h, rel_tol=1e-12):
        raise PreconditionError("kernel was built on a different grid")
    values = signal.convolve2d(rhs.values, k.weights, mode="same", boundary="fill", fillvalue=0.0)
    return GridFunction(rhs.grid, values * k.h**2)


def mollify_measure(m: Measure, k: MollifierKernel, g: Grid) -> Measure:
    """R_n(m): pure-density measure obtained by convolving μ_h with the kernel."""
    rhs = discretize_rhs(m, g)
    mollified = mollify_rhs(rhs, k)
    before = g.h**2 * rhs.values.sum()
    after = g.h**2 * mollified.values.sum()
    if abs(after - before) > 1e-10 * max(total_variation(m), 1.0):
        logger.warning("mollifier n=%d leaks mass %.3g through ∂D", k.n, before - after)
    return Measure(mollified)


def kernel_average(u: GridFunction, node: Tuple[int, int], k: MollifierKernel) -> float:
    """h²·Σ_y u(y)·ρ_n(x - y) at node x, u extended by zero."""
    R = k.radius_nodes
    padded = np.pad(u.values, R)
    i, j = node
    window = padded[i : i + 2 * R + 1, j : j + 2 * R + 1]
    return float(k.h**2 * (window * k.weights[::-1, ::-1]).sum())


def check_superharmonic_monotonicity(
    u: GridFunction,
    node: Tuple[int, int],
    n: int,
    profile: str = "bump",
    slack_factor: float = 10.0,
) -> MonotonicityCheck:
    """Compare the ρ_n and ρ_{n+1} averages of u at node with u(node).

    For superharmonic u the chain v_n <= v_{n+1} <= u(x) holds up to a
    slack of slack_factor·h²·max|u| over the kernel window.

    Raises:
        PreconditionError: If node is closer than 1/n to ∂D
    """
    g = u.grid
    x, y = g.node_point(*node)
    if g.distance_to_boundary(x, y) < 1.0 / n - _EPS:
        raise PreconditionError(f"node {node} is closer than 1/{n} to the boundary")
    k_n = build_kernel(n, g, profile)
    k_next = build_kernel(n + 1, g, profile)
    v_n = kernel_average(u, node, k_n)
    v_next = kernel_average(u, node, k_next)
    i, j = node
    R = k_n.radius_nodes
    window = u.values[max(i - R, 0) : i + R + 1, max(j - R, 0) : j + R + 1]
    slack = slack_factor * g.h**2 * float(np.abs(window).max())
    superharmonic = bool(np.all(apply_stencil(u.values, g.h) >= -1e-9 * max(u.linf_norm(), 1.0)))
    return MonotonicityCheck(
        v_n=v_n, v_next=v_next, u_x=float(u.values[i, j]), slack=slack, superharmonic=superharmonic
    )


def check_green_domination(
    m: Measure,
    n: int,
    green,
    profile: str = "bump",
    tol: float = 5e-2,
    restrict: bool = False,
) -> GreenDomination:
    """Max over interior nodes of G_h(R_n m)/G_h m.

    Args:
        m: Nonnegative measure supported at distance >= 1/n from ∂D
        n: Mollification index
        green: GreenOperator used for both potentials
        profile: Kernel profile
        tol: Slack on the continuum bound c <= 1
        restrict: Compare the part of m at distance >= 1/n from ∂D instead
            of rejecting a measure whose support comes closer

    Raises:
        PreconditionError: If m is not nonnegative or its support is too close to ∂D
    """
    if not m.is_nonnegative():
        raise PreconditionError("green domination needs a nonnegative measure")
    if restrict:
        m = restrict_to_interior(m, 1.0 / n)
    if m.is_zero():
        return GreenDomination(c_est=None, holds=True)
    g = m.grid
    distance = min(
        singular_support_distance(m),
        _density_support_distance(m),
    )
    if distance < 1.0 / n - _EPS:
        raise PreconditionError(f"support of m is within 1/{n} of the boundary")
    kernel = build_kernel(n, g, profile)
    base = green.apply(m, g).values
    smoothed = green.apply(mollify_measure(m, kernel, g), g).values
    significant = base > 1e-14 * base.max()
    c_est = float((smoothed[significant] / base[significant]).max())
    return GreenDomination(c_est=c_est, holds=c_est <= 1.0 + tol)


def _density_support_distance(m: Measure) -> float:
    support = m.density.values != 0.0
    if not np.any(support):
        return float("inf")
    return float(m.grid.boundary_distance_field()[support].min())


def pairing(m: Measure, eta: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """⟨m, η⟩ = h²·Σ density·η + Σ mass·η(atom)."""
    g = m.grid
    X, Y = g.node_coordinates()
    total = g.h**2 * float((m.density.values * eta(X, Y)).sum())
    for atom in m.atoms:
        total += atom.mass * float(eta(np.array(atom.x), np.array(atom.y)))
    return total


def narrow_pairing_gap(
    m: Measure, k: MollifierKernel, eta: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> float:
    """|⟨R_n m, η⟩ - ⟨m, η⟩| for a continuous test field η."""
    return abs(pairing(mollify_measure(m, k, m.grid), eta) - pairing(m, eta))


def default_schedule(
    m: Measure, g: Grid, n0: Optional[int] = None, max_levels: Optional[int] = None
) -> List[int]:
    """n_k = n0·2^k while 1/n_k >= 2h.

    By default 1/n0 is a quarter of the distance from the atoms to ∂D.
    Atoms closer than four resolvable kernels to ∂D do not set the scale,
    and a measure without such atoms starts from the coarsest kernel, a
    quarter of the half-width of D.

    Raises:
        PreconditionError: If even n0 is not resolvable on g
    """
    if n0 is None:
        interior = restrict_to_interior(Measure.from_atoms(g, m.atoms), 8.0 * g.h)
        if interior.atoms:
            distance = singular_support_distance(interior)
        else:
            distance = 0.5 * min(g.x_max - g.x_min, g.y_max - g.y_min)
        n0 = max(1, math.ceil(4.0 / distance - _EPS))
    schedule: List[int] = []
    n_k = n0
    while 1.0 / n_k >= 2.0 * g.h - _EPS:
        schedule.append(n_k)
        if max_levels is not None and len(schedule) >= max_levels:
            break
        n_k *= 2
    if not schedule:
        raise PreconditionError(f"n0={n0} gives a kernel narrower than 2 cells at h={g.h:.4g}")
    return schedule

