"""Closed-loop scenario orchestration, metrics and the CSV record surface.

A scenario wires the pieces together: per-step it reads the demand profile,
computes lane speeds and the travel-time gap, posts a toll, applies the lane
choice split, advances both bathtubs, then integrates the controller.  Rows
of observables are emitted at a configurable cadence and can be written to
CSV for external tooling.
"""

import bisect
import csv
import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from . import analysis
from .bathtub import (
    BathtubState,
    CorridorState,
    HotGridlockError,
    Inflows,
    SaturationStats,
    density,
    exit_rate,
    step,
    travel_time_gap,
)
from .controller import ControllerState, toll, update
from .lane_choice import (
    ExponentialVot,
    LogitChoice,
    LogitParams,
    UeChoice,
    UniformVot,
    split_inflow,
)
from .nfd import FdParams, classify_phase, critical_density, speed

__all__ = [
    "DemandProfile",
    "ScenarioConfig",
    "SimulationRecord",
    "LaneMetrics",
    "Metrics",
    "ComparisonResult",
    "ConfigError",
    "run",
    "metrics",
    "compare_hov_hot",
    "write_csv",
    "read_csv",
    "records_to_observations",
    "constant_equilibrium",
    "CSV_COLUMNS",
]


class ConfigError(ValueError):
    """Scenario configuration is inconsistent or unparseable."""


@dataclass(frozen=True, slots=True)
class DemandProfile:
    """Trip initiation rates over time for HOVs and SOVs.

    ``kind`` is one of constant, trapezoid, piecewise.  Trapezoids ramp from
    zero at ``t0`` to the peak at ``t1``, hold until ``t2`` and return to
    zero at ``t3``.  Piecewise profiles interpolate linearly between
    breakpoints and hold the end rates outside them.
    """

    kind: str = "constant"
    hov_rate: float = 0.0
    sov_rate: float = 0.0
    t0: float = 0.0
    t1: float = 0.0
    t2: float = 0.0
    t3: float = 0.0
    breakpoints: tuple[float, ...] = ()
    hov_rates: tuple[float, ...] = ()
    sov_rates: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "trapezoid", "piecewise"):
            raise ConfigError(f"unknown demand kind {self.kind!r}")
        if self.hov_rate < 0 or self.sov_rate < 0:
            raise ConfigError("demand rates cannot be negative")
        if self.kind == "trapezoid":
            ts = (self.t0, self.t1, self.t2, self.t3)
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ConfigError("trapezoid breakpoints must be strictly increasing")
        if self.kind == "piecewise":
            if not (len(self.breakpoints) == len(self.hov_rates) == len(self.sov_rates)):
                raise ConfigError("piecewise arrays must have equal length")
            if len(self.breakpoints) < 2:
                raise ConfigError("piecewise profile needs at least two breakpoints")
            if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
                raise ConfigError("piecewise breakpoints must be strictly increasing")
            if min(self.hov_rates) < 0 or min(self.sov_rates) < 0:
                raise ConfigError("demand rates cannot be negative")

    def rates(self, t: float) -> tuple[float, float]:
        """(HOV rate, SOV rate) at time t [veh/h]."""
        if self.kind == "constant":
            return self.hov_rate, self.sov_rate
        if self.kind == "trapezoid":
            if t <= self.t0 or t >= self.t3:
                f = 0.0
            elif t < self.t1:
                f = (t - self.t0) / (self.t1 - self.t0)
            elif t <= self.t2:
                f = 1.0
            else:
                f = (self.t3 - t) / (self.t3 - self.t2)
            return self.hov_rate * f, self.sov_rate * f
        bp = self.breakpoints
        if t <= bp[0]:
            return self.hov_rates[0], self.sov_rates[0]
        if t >= bp[-1]:
            return self.hov_rates[-1], self.sov_rates[-1]
        i = bisect.bisect_right(bp, t)
        f = (t - bp[i - 1]) / (bp[i] - bp[i - 1])
        hov = self.hov_rates[i - 1] + f * (self.hov_rates[i] - self.hov_rates[i - 1])
        sov = self.sov_rates[i - 1] + f * (self.sov_rates[i] - self.sov_rates[i - 1])
        return hov, sov

    def peak_rates(self) -> tuple[float, float]:
        if self.kind == "piecewise":
            return max(self.hov_rates), max(self.sov_rates)
        return self.hov_rate, self.sov_rate


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """Everything needed to run one closed-loop scenario.

    Lengths are in km, times in hours, rates in veh/h, money in dollars;
    any consistent length unit works as long as it is used throughout.
    """

    fd_hot: FdParams
    fd_gp: FdParams
    demand: DemandProfile
    corridor_length: float = 1.0
    hot_lanes: float = 1.0
    gp_lanes: float = 1.0
    mean_trip_distance: float = 5.0
    choice_model: str = "ue"  # "ue" | "logit"
    vot_family: str = "exponential"  # "exponential" | "uniform"
    vot_mean: float = 50.0
    vot_low: float = 0.0
    vot_high: float = 100.0
    logit_vot: float = 50.0
    logit_scale: float = 1.0
    controller: ControllerState = ControllerState()
    control_decimation: int = 1
    dt_s: float = 0.1
    horizon_h: float = 5.0
    output_dt_s: float = 1.0
    mode: str = "hot"  # "hot" | "hov"
    initial_hot_trips: float = 0.0
    initial_gp_trips: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("hot", "hov"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.choice_model not in ("ue", "logit"):
            raise ConfigError(f"unknown choice model {self.choice_model!r}")
        if self.vot_family not in ("exponential", "uniform"):
            raise ConfigError(f"unknown VOT family {self.vot_family!r}")
        if self.dt_s <= 0 or self.horizon_h <= 0:
            raise ConfigError("dt and horizon must be positive")
        if self.output_dt_s < self.dt_s:
            raise ConfigError("output cadence cannot be finer than dt")
        if self.control_decimation < 1:
            raise ConfigError("control decimation must be >= 1")
        if min(self.corridor_length, self.hot_lanes, self.gp_lanes, self.mean_trip_distance) <= 0:
            raise ConfigError("geometry values must be positive")
        if self.initial_hot_trips < 0 or self.initial_gp_trips < 0:
            raise ConfigError("initial trip counts cannot be negative")

    def build_choice(self):
        if self.choice_model == "logit":
            return LogitChoice(LogitParams(pi_star=self.logit_vot, alpha_star=self.logit_scale))
        if self.vot_family == "uniform":
            return UeChoice(UniformVot(self.vot_low, self.vot_high))
        return UeChoice(ExponentialVot(self.vot_mean))

    def a1_warnings(self) -> list[str]:
        hov_peak, sov_peak = self.demand.peak_rates()
        return analysis.check_a1(
            L1=self.hot_lanes * self.corridor_length,
            rho_c=critical_density(self.fd_hot),
            u_f=self.fd_hot.u_f,
            D=self.mean_trip_distance,
            e1_tilde=hov_peak,
            e2_tilde=sov_peak,
            L2=self.gp_lanes * self.corridor_length,
        )


@dataclass(frozen=True, slots=True)
class SimulationRecord:
    """One emitted row of observables; field names match the CSV header."""

    t: float
    delta1: float
    delta2: float
    rho1: float
    rho2: float
    v1: float
    v2: float
    omega: float
    lam: float
    xi: float
    a: float
    b: float
    u: float
    p: float
    e1_tilde: float
    e2_tilde: float
    e21_tilde: float
    g1: float
    g2: float
    E1: float
    E2: float
    G1: float
    G2: float
    phase1: str
    phase2: str
    toll_clamped: int
    hot_clamped: int
    gp_clamped: int


CSV_COLUMNS = tuple(SimulationRecord.__dataclass_fields__)

_FLOAT_COLUMNS = CSV_COLUMNS[: CSV_COLUMNS.index("phase1")]


def run(
    config: ScenarioConfig,
    stats: SaturationStats | None = None,
    stop_at_gp_jam: bool = False,
) -> list[SimulationRecord]:
    """Run the closed loop and return the emitted record rows.

    Raises :class:`HotGridlockError` if the managed lanes reach zero speed.
    ``stop_at_gp_jam`` ends the run once the GP lanes hit jam density
    (useful for gridlock studies under the plain triangular diagram).
    """
    for msg in config.a1_warnings():
        warnings.warn(f"demand assumption violated at peak: {msg}", stacklevel=2)
    if stats is None:
        stats = SaturationStats()
    dt = config.dt_s / 3600.0
    n_steps = max(1, round(config.horizon_h * 3600.0 / config.dt_s))
    record_every = max(1, round(config.output_dt_s / config.dt_s))
    choice = config.build_choice()
    hov_mode = config.mode == "hov"
    ctrl = config.controller
    fd_hot, fd_gp = config.fd_hot, config.fd_gp
    D = config.mean_trip_distance
    corridor = CorridorState(
        hot=BathtubState(config.initial_hot_trips, config.hot_lanes, config.corridor_length, D),
        gp=BathtubState(config.initial_gp_trips, config.gp_lanes, config.corridor_length, D),
    )
    rho_c_hot = critical_density(fd_hot)
    d1_init, d2_init = corridor.hot.delta, corridor.gp.delta
    gp_jam_trips = fd_gp.rho_j * corridor.gp.lane_length
    G1 = G2 = 0.0
    u = 0.0
    records: list[SimulationRecord] = []
    demand_rates = config.demand.rates
    decim = config.control_decimation

    for i in range(n_steps):
        t = i * dt
        e1t, e2t = demand_rates(t)
        hot, gp = corridor.hot, corridor.gp
        rho1, rho2 = density(hot), density(gp)
        v1, v2 = speed(fd_hot, rho1), speed(fd_gp, rho2)
        if v1 <= 0.0:
            raise HotGridlockError(
                f"managed lanes gridlocked at t={t:.4f} h (rho1={rho1:.3f})"
            )
        omega = travel_time_gap(v1, v2)
        # The choice models are defined for a non-negative gap; if the HOT
        # lanes are transiently slower than the GP lanes nobody pays.
        gap = max(omega, 0.0)
        if hov_mode:
            u, p, toll_clamped = 0.0, 0.0, False
        else:
            if i % decim == 0:
                u = toll(ctrl, gap)
            toll_clamped = math.isfinite(gap) and ctrl.a * gap + ctrl.b < 0.0
            p = 0.0 if omega < 0.0 else choice.share(u, gap)
        e21, _ = split_inflow(e2t, p)
        inflows = Inflows(e1t, e2t, e21)
        g1, g2 = exit_rate(hot, fd_hot), exit_rate(gp, fd_gp)
        lam = rho1 - rho_c_hot
        xi = g1 - inflows.hot_inflow

        emit = i % record_every == 0 or i == n_steps - 1
        gp_jammed = stop_at_gp_jam and gp.delta >= gp_jam_trips * (1.0 - 1e-12)
        if emit or gp_jammed:
            records.append(
                SimulationRecord(
                    t=t,
                    delta1=hot.delta,
                    delta2=gp.delta,
                    rho1=rho1,
                    rho2=rho2,
                    v1=v1,
                    v2=v2,
                    omega=omega,
                    lam=lam,
                    xi=xi,
                    a=ctrl.a,
                    b=ctrl.b,
                    u=u,
                    p=p,
                    e1_tilde=e1t,
                    e2_tilde=e2t,
                    e21_tilde=e21,
                    g1=g1,
                    g2=g2,
                    E1=hot.delta - d1_init + G1,
                    E2=gp.delta - d2_init + G2,
                    G1=G1,
                    G2=G2,
                    phase1=classify_phase(fd_hot, rho1).value,
                    phase2=classify_phase(fd_gp, rho2).value,
                    toll_clamped=int(toll_clamped),
                    hot_clamped=int(stats.hot_clamp_steps > 0),
                    gp_clamped=int(stats.gp_clamp_steps > 0),
                )
            )
        if gp_jammed:
            break
        corridor = step(corridor, fd_hot, fd_gp, inflows, dt, stats)
        G1 += dt * g1
        G2 += dt * g2
        if not hov_mode and i % decim == 0:
            ctrl = update(ctrl, lam, xi, dt * decim)
    return records


@dataclass(frozen=True, slots=True)
class LaneMetrics:
    """Aggregates for one lane group over the evaluated window."""

    total_delay: float  # area between cumulative curves [veh h]
    served: float  # completed trips
    initiated: float  # admitted trips
    mean_travel_time: float  # [h]


@dataclass(frozen=True, slots=True)
class Metrics:
    hot: LaneMetrics
    gp: LaneMetrics
    max_omega: float  # [h/length]
    revenue: float  # [$]

    @property
    def total_delay(self) -> float:
        return self.hot.total_delay + self.gp.total_delay


def _trapz(ts: Sequence[float], ys: Sequence[float]) -> float:
    acc = 0.0
    for i in range(1, len(ts)):
        acc += 0.5 * (ys[i] + ys[i - 1]) * (ts[i] - ts[i - 1])
    return acc


def metrics(records: Sequence[SimulationRecord], mean_trip_distance: float) -> Metrics:
    """Aggregate a record stream into per-lane-group and corridor metrics.

    Delay is the area between the cumulative entry and exit curves; revenue
    weights the toll by the paying flux and the mean trip distance.
    """
    if not records:
        raise ValueError("need at least one record")
    ts = [r.t for r in records]

    def lane(e_attr: str, g_attr: str) -> LaneMetrics:
        gap = [getattr(r, e_attr) - getattr(r, g_attr) for r in records]
        delay = _trapz(ts, gap)
        served = getattr(records[-1], g_attr) - getattr(records[0], g_attr)
        initiated = getattr(records[-1], e_attr) - getattr(records[0], e_attr)
        mean_tt = delay / served if served > 0 else 0.0
        return LaneMetrics(delay, served, initiated, mean_tt)

    revenue = _trapz(ts, [r.u * r.e21_tilde * mean_trip_distance for r in records])
    return Metrics(
        hot=lane("E1", "G1"),
        gp=lane("E2", "G2"),
        max_omega=max(r.omega for r in records),
        revenue=revenue,
    )


@dataclass(frozen=True, slots=True)
class ComparisonResult:
    hov: Metrics
    hot: Metrics

    @property
    def delay_saved(self) -> float:
        return self.hov.total_delay - self.hot.total_delay

    @property
    def managed_lane_served_gain(self) -> float:
        return self.hot.hot.served - self.hov.hot.served

    @property
    def peak_gap_ratio(self) -> float:
        if self.hot.max_omega <= 0.0:
            return math.inf
        return self.hov.max_omega / self.hot.max_omega


def compare_hov_hot(config: ScenarioConfig) -> ComparisonResult:
    """Run the scenario twice, with and without pricing, and compare.

    The HOV run forces the paying share to zero; demand, geometry and the
    diagram are identical.  The two runs are independent and execute
    concurrently.
    """
    from concurrent.futures import ThreadPoolExecutor

    cfg_hot = replace(config, mode="hot")
    cfg_hov = replace(config, mode="hov")
    with ThreadPoolExecutor(max_workers=2) as pool:
        fut_hot = pool.submit(run, cfg_hot)
        fut_hov = pool.submit(run, cfg_hov)
        rec_hot, rec_hov = fut_hot.result(), fut_hov.result()
    return ComparisonResult(
        hov=metrics(rec_hov, config.mean_trip_distance),
        hot=metrics(rec_hot, config.mean_trip_distance),
    )


def constant_equilibrium(config: ScenarioConfig) -> analysis.EquilibriumPrediction:
    """Equilibrium prediction for a constant-demand scenario.

    Uses the configured HOT-side demand split and the GP flow floor; raises
    if the demand profile is not constant or violates the overload
    assumptions.
    """
    if config.demand.kind != "constant":
        raise ConfigError("equilibrium predictions need a constant demand profile")
    L1 = config.hot_lanes * config.corridor_length
    L2 = config.gp_lanes * config.corridor_length
    rho_c = critical_density(config.fd_hot)
    p0 = analysis.equilibrium_share(
        L1, rho_c, config.fd_hot.u_f, config.mean_trip_distance,
        config.demand.hov_rate, config.demand.sov_rate, L2,
    )
    if config.fd_gp.c <= 0.0:
        return analysis.EquilibriumPrediction(
            p0=p0, omega0=math.nan, omega1=math.nan,
            delta2_rate=math.nan, regime="exponential",
        )
    floor_total = config.fd_gp.c * config.gp_lanes
    floor_entry_trips = (config.fd_gp.rho_j - config.fd_gp.c / config.fd_gp.w) * L2
    return analysis.atfd_growth_rates(
        e2_tilde=config.demand.sov_rate,
        p0=p0,
        c=floor_total,
        L2=L2,
        D=config.mean_trip_distance,
        delta2_t0=floor_entry_trips,
        u_f=config.fd_gp.u_f,
    )


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def write_csv(records: Iterable[SimulationRecord], path: str) -> None:
    """Write records as UTF-8 CSV with 9 significant digits per float."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    _fmt(getattr(r, c)) if c in _FLOAT_COLUMNS else getattr(r, c)
                    for c in CSV_COLUMNS
                ]
            )


def read_csv(path: str) -> list[SimulationRecord]:
    """Read back a record CSV produced by :func:`write_csv`."""
    out: list[SimulationRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"record file lacks columns: {sorted(missing)}")
        for row in reader:
            kwargs = {}
            for col in CSV_COLUMNS:
                if col in _FLOAT_COLUMNS:
                    kwargs[col] = float(row[col])
                elif col.endswith("_clamped"):
                    kwargs[col] = int(row[col])
                else:
                    kwargs[col] = row[col]
            out.append(SimulationRecord(**kwargs))
    return out


def records_to_observations(records: Sequence[SimulationRecord]):
    """Estimation observations from record rows (import-cycle-free helper)."""
    from .estimation import Observation

    return [
        Observation(time=r.t, u=r.u, omega=r.omega, e2_tilde=r.e2_tilde, e21_tilde=r.e21_tilde)
        for r in records
    ]
