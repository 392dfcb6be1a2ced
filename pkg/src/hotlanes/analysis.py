"""Closed-form predictions and stability checks for the closed loop.

Under constant demand that overloads the corridor, the controlled system
settles at a constant paying share while the GP queue keeps growing: first
exponentially on the congested branch of the triangular diagram, then (with a
flow floor) linearly.  This module provides those closed forms, the
linearized 2x2 loop around the operating point, its eigenvalues, and a
brute-force-checkable characterization of the split of vehicles that
maximizes corridor outflow.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Callable

from .bathtub import BathtubState, density
from .nfd import FdParams, critical_density, flow

__all__ = [
    "A1ViolationError",
    "EquilibriumPrediction",
    "LinearizedSystem",
    "StabilityResult",
    "MaxOutflowAnalysis",
    "check_a1",
    "equilibrium_share",
    "triangular_growth",
    "atfd_growth_rates",
    "linearized_matrix",
    "stability_check",
    "max_outflow_cases",
    "choice_sensitivity",
    "share_from_state",
    "toll_decomposition",
    "gap_sensitivities",
]


class A1ViolationError(ValueError):
    """The demand pattern does not satisfy the overload assumptions."""


def check_a1(
    L1: float,
    rho_c: float,
    u_f: float,
    D: float,
    e1_tilde: float,
    e2_tilde: float,
    L2: float | None = None,
) -> list[str]:
    """Return the list of violated overload conditions (empty when all hold).

    The three conditions: HOV demand alone leaves the managed lanes
    under-used, SOV demand alone overloads the GP lanes, and total demand
    exceeds the joint capacity.  ``L2`` defaults to ``L1``.
    """
    if L2 is None:
        L2 = L1
    cap1 = L1 * rho_c * u_f
    cap2 = L2 * rho_c * u_f
    failures = []
    if not e1_tilde * D < cap1:
        failures.append(
            f"HOV demand saturates the managed lanes: e1*D = {e1_tilde * D:.6g} "
            f">= {cap1:.6g}"
        )
    if not e2_tilde * D > cap2:
        failures.append(
            f"SOV demand does not overload the GP lanes: e2*D = {e2_tilde * D:.6g} "
            f"<= {cap2:.6g}"
        )
    if not (e1_tilde + e2_tilde) * D > cap1 + cap2:
        failures.append(
            f"total demand below joint capacity: {(e1_tilde + e2_tilde) * D:.6g} "
            f"<= {cap1 + cap2:.6g}"
        )
    return failures


def equilibrium_share(
    L1: float,
    rho_c: float,
    u_f: float,
    D: float,
    e1_tilde: float,
    e2_tilde: float,
    L2: float | None = None,
) -> float:
    """Paying share that holds the managed lanes exactly at capacity.

    Raises :class:`A1ViolationError` if the demand overload conditions fail,
    listing the failed inequalities.
    """
    failures = check_a1(L1, rho_c, u_f, D, e1_tilde, e2_tilde, L2)
    if failures:
        raise A1ViolationError("; ".join(failures))
    return (L1 * rho_c * u_f - e1_tilde * D) / (D * e2_tilde)


def triangular_growth(
    delta2_0: float,
    p0: float,
    e2_tilde: float,
    w: float,
    D: float,
    rho_j: float,
    L2: float,
    t: float,
) -> float:
    """Closed-form GP active trips at time t on the congested triangular branch.

    Solves delta2' = e2_tilde (1 - p0) - (w / D)(rho_j L2 - delta2) from the
    initial value ``delta2_0``; callers should cap the result at ``rho_j * L2``
    since jam density is absorbing.
    """
    drain = D * e2_tilde * (1.0 - p0) / w
    coeff = delta2_0 + drain - rho_j * L2
    return coeff * math.exp(w * t / D) - drain + rho_j * L2


@dataclass(frozen=True, slots=True)
class EquilibriumPrediction:
    """Operating point under constant overload demand.

    ``omega0``/``omega1`` describe the travel-time-gap line omega(t) =
    omega0 t + omega1 of the flow-floor regime for a unit-length corridor
    (for a corridor of length L0 the measured gap slope is omega0 / L0;
    the trip-count slope ``delta2_rate`` is geometry-exact either way).
    """

    p0: float
    omega0: float  # gap growth rate [h/length per h]
    omega1: float  # gap intercept [h/length]
    delta2_rate: float  # GP active-trip growth rate on the floor [veh/h]
    regime: str  # "exponential" (no floor) or "linear" (flow floor)


def atfd_growth_rates(
    e2_tilde: float,
    p0: float,
    c: float,
    L2: float,
    D: float,
    delta2_t0: float,
    u_f: float,
) -> EquilibriumPrediction:
    """Growth of the GP queue and of the travel-time gap on the flow floor.

    ``c`` is the total GP flow floor (per-lane floor times lane count)
    [veh/h].  The queue grows at ``omega0 * c`` vehicles per hour once the
    floor is active; the gap line starts from the queue ``delta2_t0`` at the
    moment the floor engages.
    """
    if c <= 0:
        raise ValueError("the flow floor must be positive in the linear regime")
    omega0 = e2_tilde * (1.0 - p0) / c - L2 / D
    omega1 = delta2_t0 / c - 1.0 / u_f
    return EquilibriumPrediction(
        p0=p0,
        omega0=omega0,
        omega1=omega1,
        delta2_rate=omega0 * c,
        regime="linear",
    )


@dataclass(frozen=True, slots=True)
class LinearizedSystem:
    """Linearized (xi, lambda) dynamics around the operating point.

    The state is x = (residual service rate, excess density); the matrix is
    [[(J - K2 L1)/(L1 H), K1 / H], [-1/L1, 0]].
    """

    m11: float
    m12: float
    m21: float
    m22: float
    H: float
    J: float

    @property
    def trace(self) -> float:
        return self.m11 + self.m22

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21


def linearized_matrix(H: float, J: float, K1: float, K2: float, L1: float) -> LinearizedSystem:
    """Build the linearized closed-loop matrix; requires H > 0."""
    if H <= 0:
        raise ValueError("the gap-price sensitivity H must be positive")
    if L1 <= 0:
        raise ValueError("lane length must be positive")
    return LinearizedSystem(
        m11=(J - K2 * L1) / (L1 * H),
        m12=K1 / H,
        m21=-1.0 / L1,
        m22=0.0,
        H=H,
        J=J,
    )


@dataclass(frozen=True, slots=True)
class StabilityResult:
    eigenvalues: tuple[complex, complex]
    stable: bool


def stability_check(sys: LinearizedSystem) -> StabilityResult:
    """Eigenvalues of the 2x2 system and an asymptotic-stability verdict.

    Solved from the characteristic quadratic; stable iff both real parts are
    negative, which for this matrix reduces to trace < 0 (the determinant is
    positive whenever the gains are).
    """
    half_tr = sys.trace / 2.0
    disc = half_tr * half_tr - sys.det
    root = cmath.sqrt(complex(disc, 0.0))
    lam1 = half_tr + root
    lam2 = half_tr - root
    stable = lam1.real < 0 and lam2.real < 0
    return StabilityResult(eigenvalues=(lam1, lam2), stable=stable)


@dataclass(frozen=True, slots=True)
class MaxOutflowAnalysis:
    """Corridor outflow as a function of the HOT-side density split.

    Valid for the plain triangular diagram with equal lane counts.  ``g_c``
    is the outflow with both groups congested; the argmax interval collects
    every split achieving the maximum (its endpoints are the critical-density
    splits).
    """

    rho_tot: float
    g_c: float
    max_outflow: float
    argmax_lo: float
    argmax_hi: float
    feasible_lo: float
    feasible_hi: float
    a1_applicable: bool
    outflow: Callable[[float], float]
    g_a: Callable[[float], float]
    g_b: Callable[[float], float]


def max_outflow_cases(
    rho_tot: float, fd: FdParams, L0: float, lanes: float, D: float
) -> MaxOutflowAnalysis:
    """Characterize the outflow-maximizing density split between lane groups.

    ``rho_tot`` is the combined per-lane density of both groups.  Only the
    triangular diagram (no flow floor) is supported, matching the analytic
    piecewise forms.
    """
    if fd.c != 0.0:
        raise ValueError("outflow characterization assumes a plain triangular diagram")
    rho_c = critical_density(fd)
    scale = L0 * lanes / D
    u_f, w, rho_j = fd.u_f, fd.w, fd.rho_j
    if not 0.0 <= rho_tot <= 2.0 * rho_j:
        raise ValueError("total density outside the physical range")

    def outflow(rho1: float) -> float:
        rho2 = rho_tot - rho1
        return scale * (flow(fd, rho1) + flow(fd, rho2))

    def g_a(rho1: float) -> float:
        # HOT group under-critical
        return scale * (rho1 * (u_f + w) + w * (rho_j - rho_tot))

    def g_b(rho1: float) -> float:
        # GP group under-critical
        return scale * (w * rho_j + u_f * rho_tot - rho1 * (u_f + w))

    g_c = scale * (2.0 * w * rho_j - rho_tot * w)
    feas_lo = max(0.0, rho_tot - rho_j)
    feas_hi = min(rho_j, rho_tot)
    if rho_tot <= 2.0 * rho_c:
        # both groups can run free-flow; the whole free-flow plateau is optimal
        lo = max(feas_lo, rho_tot - rho_c)
        hi = min(feas_hi, rho_c)
        best = scale * u_f * rho_tot
    else:
        # optimum on the both-congested plateau, bounded by the critical splits
        lo = max(feas_lo, rho_c)
        hi = min(feas_hi, rho_tot - rho_c)
        best = g_c
    return MaxOutflowAnalysis(
        rho_tot=rho_tot,
        g_c=g_c,
        max_outflow=best,
        argmax_lo=lo,
        argmax_hi=hi,
        feasible_lo=feas_lo,
        feasible_hi=feas_hi,
        a1_applicable=rho_c < rho_tot < 2.0 * rho_j,
        outflow=outflow,
        g_a=g_a,
        g_b=g_b,
    )


def share_from_state(
    lam: float,
    xi: float,
    fd: FdParams,
    L1: float,
    D: float,
    e1_tilde: float,
    e2_tilde: float,
) -> float:
    """Paying share implied by the plant state: p = (g1(lam) - e1 - xi) / e2."""
    rho = lam + critical_density(fd)
    if rho < 0:
        raise ValueError("state implies a negative density")
    completion = flow(fd, rho) * L1 / D
    return (completion - e1_tilde - xi) / e2_tilde


def choice_sensitivity(
    state: BathtubState,
    fd: FdParams,
    e1_tilde: float,
    e2_tilde: float,
    direction: str,
    xi: float = 0.0,
    step: float = 1e-6,
    side: str = "central",
) -> float:
    """Finite-difference derivative of the implied share in ``lam`` or ``xi``.

    ``side`` selects central, left or right differences; one-sided stencils
    matter at the critical density where the diagram has a kink.
    """
    lam = density(state) - critical_density(fd)

    def p_of(lam_: float, xi_: float) -> float:
        return share_from_state(lam_, xi_, fd, state.lane_length, state.mean_remaining_distance, e1_tilde, e2_tilde)

    if direction == "xi":
        var = xi
        f = lambda v: p_of(lam, v)
    elif direction == "lam":
        var = lam
        f = lambda v: p_of(v, xi)
    else:
        raise ValueError("direction must be 'lam' or 'xi'")
    if side == "central":
        return (f(var + step) - f(var - step)) / (2.0 * step)
    if side == "right":
        return (f(var + step) - f(var)) / step
    if side == "left":
        return (f(var) - f(var - step)) / step
    raise ValueError("side must be 'central', 'left' or 'right'")


def toll_decomposition(choice, p: float, omega_a: float = 0.01, omega_b: float = 0.02) -> tuple[float, float]:
    """Split the inverse toll at share ``p`` into gap-proportional and flat parts.

    Any model whose inverse toll is affine in the gap decomposes exactly as
    u = A * omega + B; A and B are recovered from two gap evaluations.
    """
    u_a = choice.inverse_toll(p, omega_a)
    u_b = choice.inverse_toll(p, omega_b)
    a = (u_b - u_a) / (omega_b - omega_a)
    return a, u_a - a * omega_a


def gap_sensitivities(
    choice,
    fd: FdParams,
    L1: float,
    D: float,
    e1_tilde: float,
    e2_tilde: float,
    lam: float,
    xi: float,
    omega: float,
    step: float = 1e-6,
) -> tuple[float, float]:
    """Numeric H and J for the linearized loop at the given state and gap.

    H bundles the toll sensitivity to the residual service rate, J the
    sensitivity to excess density; both combine the gap-proportional and
    flat toll components, the latter weighted by 1 / omega.
    """

    def ab(lam_: float, xi_: float) -> tuple[float, float]:
        p = share_from_state(lam_, xi_, fd, L1, D, e1_tilde, e2_tilde)
        return toll_decomposition(choice, p)

    a_hi, b_hi = ab(lam, xi + step)
    a_lo, b_lo = ab(lam, xi - step)
    h = (a_hi - a_lo) / (2.0 * step) + (b_hi - b_lo) / (2.0 * step) / omega
    a_hi, b_hi = ab(lam + step, xi)
    a_lo, b_lo = ab(lam - step, xi)
    j = (a_hi - a_lo) / (2.0 * step) + (b_hi - b_lo) / (2.0 * step) / omega
    return h, j
