"""Feedback pricing law for the managed lanes.

The distance-based toll is ``u = a * omega + b`` where ``a`` is an hourly
price and ``b`` a distance price.  Both coefficients are driven by integral
controllers on the two state errors: excess density (price up when the HOT
lanes run over-critical) and residual service rate (price down when unused
service remains).  The reference is (0, 0).
"""

from dataclasses import dataclass, replace
import math

__all__ = ["ControllerState", "toll", "update"]


@dataclass(frozen=True, slots=True)
class ControllerState:
    """Toll coefficients and integral gains.

    Gains must all be positive for the price to move in the corrective
    direction in every phase.  ``toll_ceiling`` is the posted toll when the
    GP lanes are fully jammed and the gap is unbounded.
    """

    a: float = 0.0  # [$/h]
    b: float = 0.0  # [$/length]
    k1: float = 8.0  # [$ length/veh/h^2]
    k2: float = 5.0  # [$/h/veh]
    k3: float = 8.0  # [$/h/veh]
    k4: float = 6.0  # [$/veh/length]
    toll_ceiling: float = 1000.0  # [$/length]

    def __post_init__(self) -> None:
        if min(self.k1, self.k2, self.k3, self.k4) <= 0:
            raise ValueError("all controller gains must be positive")
        if self.toll_ceiling <= 0:
            raise ValueError("toll ceiling must be positive")


def toll(ctrl: ControllerState, omega: float) -> float:
    """Posted distance-based toll, clamped to be non-negative."""
    if omega < 0:
        raise ValueError("travel time gap cannot be negative")
    if math.isinf(omega):
        return ctrl.toll_ceiling
    return max(0.0, ctrl.a * omega + ctrl.b)


def update(ctrl: ControllerState, lam: float, xi: float, dt: float) -> ControllerState:
    """Integrate the coefficient ODEs one step; the coefficients are unclamped."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return replace(
        ctrl,
        a=ctrl.a + dt * (ctrl.k1 * lam - ctrl.k2 * xi),
        b=ctrl.b + dt * (ctrl.k3 * lam - ctrl.k4 * xi),
    )
