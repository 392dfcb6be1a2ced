"""Command line interface: run scenarios, analyze equilibria, estimate VOT.

Exit codes: 0 success, 1 configuration error, 2 runtime abort (managed-lane
gridlock), 3 estimation infeasible.
"""

import argparse
import math
import statistics
import sys

from . import analysis, estimation
from .bathtub import HotGridlockError, SaturationStats
from .nfd import capacity, critical_density
from .presets import PRESETS, apply_overrides, section_help
from .scenario import (
    ConfigError,
    compare_hov_hot,
    constant_equilibrium,
    metrics,
    read_csv,
    records_to_observations,
    run,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_ESTIMATION = 3


def _add_config_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="INI scenario file")
    sub.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="named preset used as the base configuration",
    )
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a single config value (repeatable)",
    )


def _resolve_config(args):
    if not args.config and not args.preset:
        raise ConfigError("provide --config and/or --preset")
    return apply_overrides(args.config, args.preset, args.overrides)


def _cmd_run(args) -> int:
    config = _resolve_config(args)
    stats = SaturationStats()
    records = run(config, stats=stats)
    write_csv(records, args.out)
    m = metrics(records, config.mean_trip_distance)
    print(f"wrote {len(records)} records to {args.out}")
    print(
        f"served: managed {m.hot.served:.1f} veh, gp {m.gp.served:.1f} veh; "
        f"delay: managed {m.hot.total_delay:.2f} veh h, gp {m.gp.total_delay:.2f} veh h"
    )
    print(f"max gap {m.max_omega:.6g} h/km, revenue ${m.revenue:.2f}")
    if stats.any_clamped:
        print(
            f"jam clamp engaged: managed {stats.hot_clamp_steps} steps "
            f"({stats.hot_dropped:.1f} veh dropped), gp {stats.gp_clamp_steps} steps "
            f"({stats.gp_dropped:.1f} veh dropped)"
        )
    return EXIT_OK


def _cmd_analyze(args) -> int:
    config = _resolve_config(args)
    rho_c = critical_density(config.fd_hot)
    cap = capacity(config.fd_hot)
    print(f"critical density: {rho_c:.6g} veh/km/lane, capacity: {cap:.6g} veh/h/lane")
    warnings_ = config.a1_warnings()
    for msg in warnings_:
        print(f"warning: {msg}")
    if config.demand.kind != "constant":
        print("demand profile is time-varying; equilibrium analysis needs constant demand")
        return EXIT_OK
    try:
        pred = constant_equilibrium(config)
    except analysis.A1ViolationError as exc:
        print(f"no equilibrium: {exc}")
        return EXIT_OK
    print(f"equilibrium paying share p0 = {pred.p0:.6g}")
    if pred.regime == "linear":
        print(
            f"gp queue growth {pred.delta2_rate:.6g} veh/h on the flow floor; "
            f"unit-corridor gap line omega(t) = {pred.omega0:.6g} t + {pred.omega1:.6g}"
        )
    else:
        print("no flow floor: gp lanes gridlock in finite time under constant overload")
    choice = config.build_choice()
    L1 = config.hot_lanes * config.corridor_length
    omega = pred.omega0 * args.at_time + pred.omega1 if pred.regime == "linear" else args.at_time
    hov, sov = config.demand.hov_rate, config.demand.sov_rate
    for label, lam in (("under-critical", -args.phase_offset), ("over-critical", args.phase_offset)):
        h, j = analysis.gap_sensitivities(
            choice, config.fd_hot, L1, config.mean_trip_distance, hov, sov,
            lam=lam, xi=0.0, omega=omega,
        )
        sysm = analysis.linearized_matrix(h, j, config.controller.k1, config.controller.k2, L1)
        res = analysis.stability_check(sysm)
        eig = ", ".join(f"{z.real:.4g}{z.imag:+.4g}j" for z in res.eigenvalues)
        verdict = "stable" if res.stable else "unstable"
        print(f"{label} (lam={lam:+.3g}): H={h:.6g}, J={j:.6g}, eigenvalues [{eig}] -> {verdict}")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    records = read_csv(args.records)
    observations = records_to_observations(records)
    if args.model == "ue":
        points = []
        for obs in observations:
            try:
                points.append(estimation.estimate_cdf_point(obs))
            except estimation.EstimationError:
                continue
        if not points:
            print("no estimable observations (need positive gap and SOV demand)")
            return EXIT_ESTIMATION
        pooled = estimation.pool_cdf_points(points, num_bins=args.bins)
        print("vot_dollars_per_h,cdf_estimate,count")
        for x, f_hat, count in pooled:
            print(f"{x:.9g},{f_hat:.9g},{count}")
        return EXIT_OK
    votes = []
    for obs in observations:
        try:
            votes.append(estimation.estimate_logit_vot(obs, alpha_star=args.alpha_star))
        except estimation.EstimationError:
            continue
    if not votes:
        print("no estimable observations (need an interior paying share)")
        return EXIT_ESTIMATION
    mean = statistics.fmean(votes)
    spread = statistics.pstdev(votes) if len(votes) > 1 else 0.0
    print(f"common VOT estimate: {mean:.6g} $/h over {len(votes)} observations (sd {spread:.3g})")
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = _resolve_config(args)
    result = compare_hov_hot(config)
    for label, m in (("HOV (no pricing)", result.hov), ("HOT (priced)", result.hot)):
        print(
            f"{label}: total delay {m.total_delay:.2f} veh h, managed served "
            f"{m.hot.served:.1f} veh, gp served {m.gp.served:.1f} veh, "
            f"max gap {m.max_omega:.6g} h/km, revenue ${m.revenue:.2f}"
        )
    ratio = result.peak_gap_ratio
    ratio_s = "inf" if math.isinf(ratio) else f"{ratio:.3g}"
    print(
        f"pricing saves {result.delay_saved:.2f} veh h of delay, serves "
        f"{result.managed_lane_served_gain:.1f} more trips in the managed lanes, "
        f"peak gap ratio (HOV/HOT) {ratio_s}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotlanes",
        description="Managed-lane dynamic pricing simulator",
        epilog=section_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write a record CSV")
    _add_config_args(p_run)
    p_run.add_argument("--out", required=True, help="output CSV path")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="equilibrium and stability predictions")
    _add_config_args(p_an)
    p_an.add_argument(
        "--at-time", type=float, default=2.0,
        help="evaluation time [h] for the gap-dependent sensitivities",
    )
    p_an.add_argument(
        "--phase-offset", type=float, default=1.0,
        help="excess density magnitude used for the per-phase sensitivities",
    )
    p_an.set_defaults(func=_cmd_analyze)

    p_est = sub.add_parser("estimate", help="recover VOT information from a record CSV")
    p_est.add_argument("--records", required=True, help="CSV produced by the run command")
    p_est.add_argument("--model", choices=("ue", "logit"), required=True)
    p_est.add_argument("--alpha-star", type=float, default=1.0, help="logit scale parameter")
    p_est.add_argument("--bins", type=int, default=40, help="abscissa bins for CDF pooling")
    p_est.set_defaults(func=_cmd_estimate)

    p_cmp = sub.add_parser("compare", help="run HOV and HOT modes and compare metrics")
    _add_config_args(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except analysis.A1ViolationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HotGridlockError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
