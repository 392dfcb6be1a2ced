"""Dynamic distance-based pricing simulator for managed freeway lanes.

Models a corridor as two coupled trip-flow bathtubs (managed and
general-purpose lanes), prices the managed lanes with a feedback toll built
from integral controllers on the excess density and residual service rate,
and ships the analysis tools to check the closed loop's equilibrium and
stability predictions numerically.
"""

from .analysis import (
    A1ViolationError,
    EquilibriumPrediction,
    LinearizedSystem,
    MaxOutflowAnalysis,
    StabilityResult,
    atfd_growth_rates,
    choice_sensitivity,
    equilibrium_share,
    linearized_matrix,
    max_outflow_cases,
    stability_check,
    triangular_growth,
)
from .bathtub import (
    BathtubState,
    CorridorState,
    HotGridlockError,
    Inflows,
    SaturationStats,
    density,
    excess_density,
    exit_rate,
    per_vehicle_toll,
    per_vehicle_travel_time,
    residual_service_rate,
    step,
    travel_time_gap,
)
from .controller import ControllerState, toll, update
from .estimation import (
    EstimationError,
    Observation,
    estimate_cdf_point,
    estimate_logit_vot,
    pool_cdf_points,
)
from .lane_choice import (
    ExponentialVot,
    LogitChoice,
    LogitParams,
    UeChoice,
    UniformVot,
    VotDistribution,
    logit_inverse_toll,
    logit_share,
    split_inflow,
    ue_inverse_toll,
    ue_share,
)
from .nfd import (
    FdParams,
    Phase,
    capacity,
    classify_phase,
    critical_density,
    flow,
    speed,
)
from .presets import PRESETS, load_config, preset
from .scenario import (
    ComparisonResult,
    ConfigError,
    DemandProfile,
    LaneMetrics,
    Metrics,
    ScenarioConfig,
    SimulationRecord,
    compare_hov_hot,
    constant_equilibrium,
    metrics,
    read_csv,
    run,
    write_csv,
)

__version__ = "0.1.0"
