"""Network fundamental diagram: speed-density and flow-density relations.

The corridor model uses a triangular fundamental diagram, optionally with a
positive flow floor ``c`` at high densities (the floor prevents flow from
collapsing to zero in hypercongestion).  ``c = 0`` recovers the plain
triangular diagram; ``c = capacity`` gives a ramp-shaped diagram.
"""

from dataclasses import dataclass
from enum import Enum

__all__ = [
    "FdParams",
    "Phase",
    "critical_density",
    "capacity",
    "speed",
    "flow",
    "classify_phase",
    "PHASE_TOLERANCE",
]

# Absolute density tolerance used to detect the critical phase.
PHASE_TOLERANCE = 1e-9


class Phase(Enum):
    """Traffic phase relative to the critical density."""

    SUC = "SUC"  # strictly under-critical (free flow)
    C = "C"      # critical (at capacity)
    SOC = "SOC"  # strictly over-critical (hypercongestion)


@dataclass(frozen=True, slots=True)
class FdParams:
    """Fundamental diagram parameters for one lane group.

    Attributes:
        u_f: free-flow speed [length/h].
        w: congestion wave speed [length/h].
        rho_j: per-lane jam density [veh/length/lane].
        c: per-lane flow floor at high densities [veh/h/lane]; 0 disables it.
    """

    u_f: float
    w: float
    rho_j: float
    c: float = 0.0

    def __post_init__(self) -> None:
        if self.u_f <= 0 or self.w <= 0 or self.rho_j <= 0:
            raise ValueError("u_f, w and rho_j must all be positive")
        cap = critical_density(self) * self.u_f
        if not 0.0 <= self.c <= cap + 1e-9 * cap:
            raise ValueError(f"flow floor c={self.c} outside [0, {cap}]")


def critical_density(params: FdParams) -> float:
    """Minimum per-lane density at which capacity flow is attained."""
    return params.w * params.rho_j / (params.u_f + params.w)


def capacity(params: FdParams) -> float:
    """Per-lane capacity flow [veh/h/lane]."""
    return params.u_f * critical_density(params)


def speed(params: FdParams, rho: float) -> float:
    """Per-lane speed at density ``rho``.

    Returns ``u_f`` at zero density (right-limit convention).  With a flow
    floor the speed stays positive at any density; without one it reaches
    zero at the jam density.
    """
    if rho < 0:
        raise ValueError(f"density must be non-negative, got {rho}")
    if rho == 0.0:
        return params.u_f
    congested = params.w * (params.rho_j - rho) / rho
    if params.c > 0.0:
        congested = max(congested, params.c / rho)
    return min(params.u_f, max(congested, 0.0))


def flow(params: FdParams, rho: float) -> float:
    """Per-lane flow ``rho * speed(rho)`` [veh/h/lane]."""
    return rho * speed(params, rho)


def classify_phase(params: FdParams, rho: float, tol: float = PHASE_TOLERANCE) -> Phase:
    """Classify a density as under-critical, critical or over-critical.

    The critical phase is detected within an absolute density tolerance;
    exact float equality would be meaningless.
    """
    if rho < 0:
        raise ValueError(f"density must be non-negative, got {rho}")
    rho_c = critical_density(params)
    if abs(rho - rho_c) <= tol:
        return Phase.C
    return Phase.SUC if rho < rho_c else Phase.SOC
