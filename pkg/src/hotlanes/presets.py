"""Built-in scenario presets and the INI config loader.

The presets pin the numerical study defaults: a triangular diagram with
u_f = 100 km/h, w = 20 km/h, jam density 140 veh/km/lane and a flow floor at
80% of capacity, integral gains (8, 5, 8, 6), an exponential VOT with mean
$50/h, and a unit-length corridor with one lane per group.

The demand magnitudes are reconstructed, not published: 200 HOV and 860 SOV
veh/h overload the corridor, leave the managed lanes under-used without
pricing, and put the equilibrium paying share near 0.31.  The unit corridor
keeps the gain magnitudes matched to the state magnitudes; demand scales
with corridor length if you change the geometry.
"""

import configparser
from dataclasses import replace

from .controller import ControllerState
from .nfd import FdParams, capacity
from .scenario import ConfigError, DemandProfile, ScenarioConfig

__all__ = ["PRESETS", "preset", "load_config", "apply_overrides", "section_help"]


def _vi_fd(floor_fraction: float = 0.8) -> FdParams:
    base = FdParams(u_f=100.0, w=20.0, rho_j=140.0, c=0.0)
    return replace(base, c=floor_fraction * capacity(base))


def constant_demand() -> ScenarioConfig:
    """Constant overload demand on the flow-floor diagram, UE choice."""
    return ScenarioConfig(
        fd_hot=_vi_fd(),
        fd_gp=_vi_fd(),
        demand=DemandProfile(kind="constant", hov_rate=200.0, sov_rate=860.0),
        corridor_length=1.0,
        mean_trip_distance=5.0,
        choice_model="ue",
        vot_mean=50.0,
        controller=ControllerState(k1=8.0, k2=5.0, k3=8.0, k4=6.0),
        dt_s=0.1,
        horizon_h=5.0,
    )


def constant_demand_logit() -> ScenarioConfig:
    """Constant demand with the fixed-VOT logit choice model."""
    return replace(constant_demand(), choice_model="logit", logit_vot=50.0, logit_scale=1.0)


def trapezoid_peak() -> ScenarioConfig:
    """A peak-period demand pulse sized for the HOV-vs-HOT comparison.

    The peak keeps total demand just below joint capacity so pricing can
    actually protect the GP lanes; without pricing they hypercongest for the
    whole peak.
    """
    return replace(
        constant_demand(),
        demand=DemandProfile(
            kind="trapezoid",
            hov_rate=200.0,
            sov_rate=700.0,
            t0=0.0,
            t1=0.5,
            t2=4.5,
            t3=5.0,
        ),
        horizon_h=9.0,
    )


def triangular_gridlock() -> ScenarioConfig:
    """Constant overload demand with no flow floor; gridlocks in finite time."""
    fd = FdParams(u_f=100.0, w=20.0, rho_j=140.0, c=0.0)
    return replace(constant_demand(), fd_hot=fd, fd_gp=fd, horizon_h=2.0)


PRESETS = {
    "constant": constant_demand,
    "constant-logit": constant_demand_logit,
    "trapezoid": trapezoid_peak,
    "triangular-gridlock": triangular_gridlock,
}


def preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


_FD_KEYS = ("free_flow_kmh", "wave_kmh", "jam_veh_km", "flow_floor_fraction", "flow_floor_veh_h")

_SCALARS = {
    # (section, key) -> (config attr, type)
    ("geometry", "corridor_km"): ("corridor_length", float),
    ("geometry", "hot_lanes"): ("hot_lanes", float),
    ("geometry", "gp_lanes"): ("gp_lanes", float),
    ("geometry", "mean_trip_km"): ("mean_trip_distance", float),
    ("choice", "model"): ("choice_model", str),
    ("choice", "vot_family"): ("vot_family", str),
    ("choice", "expected_vot"): ("vot_mean", float),
    ("choice", "vot_low"): ("vot_low", float),
    ("choice", "vot_high"): ("vot_high", float),
    ("choice", "logit_vot"): ("logit_vot", float),
    ("choice", "logit_scale"): ("logit_scale", float),
    ("simulation", "dt_s"): ("dt_s", float),
    ("simulation", "horizon_h"): ("horizon_h", float),
    ("simulation", "output_dt_s"): ("output_dt_s", float),
    ("simulation", "mode"): ("mode", str),
    ("simulation", "initial_hot_trips"): ("initial_hot_trips", float),
    ("simulation", "initial_gp_trips"): ("initial_gp_trips", float),
    ("controller", "decimation"): ("control_decimation", int),
}

_CONTROLLER_KEYS = {
    "k1": "k1", "k2": "k2", "k3": "k3", "k4": "k4",
    "a0": "a", "b0": "b", "toll_ceiling": "toll_ceiling",
}


def _parse_fd(sec: configparser.SectionProxy, base: FdParams) -> FdParams:
    fd = FdParams(
        u_f=sec.getfloat("free_flow_kmh", base.u_f),
        w=sec.getfloat("wave_kmh", base.w),
        rho_j=sec.getfloat("jam_veh_km", base.rho_j),
        c=0.0,
    )
    if "flow_floor_veh_h" in sec:
        c = sec.getfloat("flow_floor_veh_h")
    elif "flow_floor_fraction" in sec:
        c = sec.getfloat("flow_floor_fraction") * capacity(fd)
    else:
        c = base.c
    return replace(fd, c=c)


def _parse_demand(sec: configparser.SectionProxy) -> DemandProfile:
    kind = sec.get("kind", "constant")
    if kind == "constant":
        return DemandProfile(
            kind="constant",
            hov_rate=sec.getfloat("hov_veh_h", 0.0),
            sov_rate=sec.getfloat("sov_veh_h", 0.0),
        )
    if kind == "trapezoid":
        return DemandProfile(
            kind="trapezoid",
            hov_rate=sec.getfloat("hov_peak_veh_h", 0.0),
            sov_rate=sec.getfloat("sov_peak_veh_h", 0.0),
            t0=sec.getfloat("ramp_up_start_h", 0.0),
            t1=sec.getfloat("ramp_up_end_h"),
            t2=sec.getfloat("ramp_down_start_h"),
            t3=sec.getfloat("ramp_down_end_h"),
        )
    if kind == "piecewise":
        def floats(key: str) -> tuple[float, ...]:
            return tuple(float(x) for x in sec.get(key, "").split(","))

        return DemandProfile(
            kind="piecewise",
            breakpoints=floats("breakpoints_h"),
            hov_rates=floats("hov_rates_veh_h"),
            sov_rates=floats("sov_rates_veh_h"),
        )
    raise ConfigError(f"unknown demand kind {kind!r}")


def _build_from_parser(cp: configparser.ConfigParser) -> ScenarioConfig:
    base_name = cp.get("scenario", "preset", fallback="constant")
    config = preset(base_name)
    updates: dict[str, object] = {}
    if cp.has_section("fd"):
        fd = _parse_fd(cp["fd"], config.fd_hot)
        updates["fd_hot"] = fd
        updates["fd_gp"] = fd
    for group, attr in (("fd.hot", "fd_hot"), ("fd.gp", "fd_gp")):
        if cp.has_section(group):
            base = updates.get(attr, getattr(config, attr))
            updates[attr] = _parse_fd(cp[group], base)
    if cp.has_section("demand"):
        updates["demand"] = _parse_demand(cp["demand"])
    for (section, key), (attr, typ) in _SCALARS.items():
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                updates[attr] = typ(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
    if cp.has_section("controller"):
        ctrl_kwargs = {}
        for key, attr in _CONTROLLER_KEYS.items():
            if cp.has_option("controller", key):
                ctrl_kwargs[attr] = cp.getfloat("controller", key)
        if ctrl_kwargs:
            base_ctrl = updates.get("controller", config.controller)
            updates["controller"] = replace(base_ctrl, **ctrl_kwargs)
    try:
        return replace(config, **updates)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str) -> ScenarioConfig:
    """Load a scenario from an INI file; unknown keys are rejected."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    _reject_unknown(cp)
    return _build_from_parser(cp)


def apply_overrides(config_or_none, preset_name: str | None, overrides: list[str]) -> ScenarioConfig:
    """Resolve a config from an optional file, preset name and key=value overrides.

    Overrides use ``section.key=value`` with the same keys as the INI format.
    """
    cp = configparser.ConfigParser()
    if preset_name:
        cp["scenario"] = {"preset": preset_name}
    if config_or_none is not None:
        read = cp.read(config_or_none)
        if not read:
            raise ConfigError(f"cannot read config file {config_or_none!r}")
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        dotted, value = item.split("=", 1)
        section, key = dotted.rsplit(".", 1)
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key.strip(), value.strip())
    _reject_unknown(cp)
    return _build_from_parser(cp)


_KNOWN_SECTIONS = {"scenario", "fd", "fd.hot", "fd.gp", "demand", "geometry", "choice", "simulation", "controller"}

_KNOWN_KEYS = {
    "scenario": {"preset"},
    "fd": set(_FD_KEYS),
    "fd.hot": set(_FD_KEYS),
    "fd.gp": set(_FD_KEYS),
    "demand": {
        "kind", "hov_veh_h", "sov_veh_h", "hov_peak_veh_h", "sov_peak_veh_h",
        "ramp_up_start_h", "ramp_up_end_h", "ramp_down_start_h", "ramp_down_end_h",
        "breakpoints_h", "hov_rates_veh_h", "sov_rates_veh_h",
    },
    "geometry": {k for (s, k) in _SCALARS if s == "geometry"},
    "choice": {k for (s, k) in _SCALARS if s == "choice"},
    "simulation": {k for (s, k) in _SCALARS if s == "simulation"},
    "controller": set(_CONTROLLER_KEYS) | {"decimation"},
}


def _reject_unknown(cp: configparser.ConfigParser) -> None:
    for section in cp.sections():
        if section not in _KNOWN_SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in cp[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")


def section_help() -> str:
    lines = ["Config sections and keys:"]
    for section in sorted(_KNOWN_SECTIONS):
        lines.append(f"  [{section}]: {', '.join(sorted(_KNOWN_KEYS[section]))}")
    return "\n".join(lines)
