"""
Command-line entry point.

Exit status: 0 on success, 1 for input or configuration problems, 2 for
numerical failures (integrator undershoot, divergent quadrature).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, io
from .dynamics import IntegratorConfig, RecoveryMode, classical_sir, simulate
from .exceptions import (ConfigurationError, DivergenceError, DomainError, InputError,
                         ShapeError, StiffnessError)
from .network import (QuarantineIntervention, SeedStrategy, apply_quarantine,
                      generate_random_network, quarantined_locations, select_seed)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _floats(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list must not be empty")
    return vals


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _metrics_dict(m: analysis.SummaryMetrics):
    return {
        "peak_infected_fraction": m.peak_infected_fraction,
        "peak_day": m.peak_day,
        "attack_rate": m.attack_rate,
    }


def cmd_simulate(args):
    cfg = io.load_scenario(args.config)
    net = cfg.build_network()
    initial = cfg.initial_state(net)
    run_net = apply_quarantine(net, cfg.quarantine)
    traj = simulate(run_net, cfg.params, initial, cfg.integrator)
    out = _out_dir(args.out)

    if "trajectory.csv" in cfg.outputs:
        io.write_trajectory(traj, out / "trajectory.csv")
    if "aggregate.csv" in cfg.outputs:
        io.write_aggregate(traj, out / "aggregate.csv")

    metrics = _metrics_dict(analysis.summarize(traj))
    metrics["network_fingerprint"] = traj.network_fingerprint
    metrics["quarantined"] = quarantined_locations(net, cfg.quarantine)
    if isinstance(cfg.seed, SeedStrategy):
        metrics["seed_location"] = select_seed(net, cfg.seed)

    if cfg.classical_reference or args.classical_reference:
        if cfg.params.recovery_mode is not RecoveryMode.COUNT:
            raise ConfigurationError("classical reference requires recovery_mode 'count'")
        N = net.populations
        c = classical_sir(initial.S / N, initial.I / N, initial.R / N,
                          cfg.params.beta, cfg.params.mu, cfg.integrator)
        ref = np.stack((c.S, c.I, c.R))
        frac = np.stack(traj.fractions())
        ref_traj = replace(traj, S=ref[0] * N, I=ref[1] * N, R=ref[2] * N,
                           network_fingerprint="classical")
        io.write_trajectory(ref_traj, out / "classical_trajectory.csv")
        metrics["classical_max_abs_diff"] = float(np.abs(frac - ref).max())
        metrics["classical_max_abs_diff_counts"] = float(
            np.abs(np.stack((traj.S, traj.I, traj.R)) - ref * N).max())
        print(f"max |model - classical| (fractions): {metrics['classical_max_abs_diff']:.3e}")

    if "metrics.json" in cfg.outputs:
        io.write_json(metrics, out / "metrics.json")
    return EXIT_OK


def cmd_sweep(args):
    cfg = io.load_scenario(args.config)
    if not isinstance(cfg.seed, SeedStrategy):
        raise ConfigurationError("sweep needs a seed strategy, not explicit initial counts")
    net = cfg.build_network()
    alphas = args.alphas if args.alphas is not None else [cfg.params.alpha]
    percentiles = args.percentiles if args.percentiles is not None else [cfg.quarantine.percentile]
    res = analysis.sweep(net, cfg.params, alphas, percentiles, cfg.seed, cfg.integrator, cfg.seed_fraction)
    out = _out_dir(args.out)
    io.write_sweep(res, out / "sweep.csv")
    io.write_peak_days(res, out / "peak_days.csv")
    for a, p, m in res:
        flag = "  (worse than baseline)" if m.reduction_vs_baseline < 0 else ""
        print(f"alpha={a:g} X={p:g}: peak={m.peak_infected_fraction:.6f} "
              f"day={m.peak_day:g} attack={m.attack_rate:.6f} "
              f"reduction={m.reduction_vs_baseline:.2f}%{flag}")
    return EXIT_OK


def cmd_r0(args):
    hp = analysis.HomogeneousParams(args.beta, args.mu, args.alpha, args.k, args.n)
    print(format(analysis.reproduction_number(hp), ".9g"))
    return EXIT_OK


def cmd_final_size(args):
    print(format(analysis.final_size(args.r0, args.tol), ".9g"))
    return EXIT_OK


def cmd_gen_network(args):
    net = generate_random_network(args.n, (args.pop_min, args.pop_max), args.flow_fraction, args.seed)
    out = _out_dir(args.out)
    io.write_network(net, out / "od.csv", out / "population.csv")
    print(f"wrote {net.n} locations to {out}")
    return EXIT_OK


def cmd_case_study(args):
    net = io.load_network(args.od, args.pop)
    initial = io.load_initial_cases(args.cases, args.cutoff, net)
    base = io.params_from_r0(args.r0, args.mu)
    integ = IntegratorConfig("rk4", args.dt, args.horizon)
    cutoff = _dt.date.fromisoformat(args.cutoff)
    days = np.arange(int(np.floor(args.horizon + 1e-9)) + 1)

    curves = {}
    summary = {"params": {"beta": base.beta, "mu": base.mu, "r0": args.r0}, "runs": []}
    for a in args.alphas:
        percentile = round((1.0 - a) * 100.0, 10)
        q = QuarantineIntervention(percentile)
        traj = simulate(apply_quarantine(net, q), replace(base, alpha=a), initial, integ)
        idx = np.minimum(np.rint(days / args.dt).astype(int), len(traj) - 1)
        series = traj.I.sum(axis=1) if args.active else traj.cumulative_cases()
        curves[a] = series[idx]
        summary["runs"].append({"alpha": a, "percentile": percentile,
                                "quarantined": [net.names[k] for k in quarantined_locations(net, q)],
                                "final_cases": float(curves[a][-1]),
                                **_metrics_dict(analysis.summarize(traj))})

    actual = {(d - cutoff).days: total for d, total in io.load_case_series(args.cases)}
    summary["initial_infected"] = {nm: float(v) for nm, v in zip(net.names, initial.I) if v > 0}

    out = _out_dir(args.out)
    with io.atomic_open(out / "case_study.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "date", "actual"] + [f"alpha_{io.fmt(a)}" for a in args.alphas])
        for d in days:
            date = cutoff + _dt.timedelta(days=int(d))
            w.writerow([int(d), date.isoformat(), actual.get(int(d), "")]
                       + [io.fmt(curves[a][d]) for a in args.alphas])
    io.write_json(summary, out / "metrics.json")
    for run in summary["runs"]:
        print(f"alpha={run['alpha']:g} X={run['percentile']:g}: cases at day {days[-1]} = "
              f"{run['final_cases']:.1f}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="mobsir", description="Mobility-coupled SIR experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario")
    s.add_argument("--config", required=True, help="scenario.json")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--classical-reference", action="store_true",
                   help="also integrate independent per-location classical SIR and report the difference")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="grid over alpha and quarantine percentile")
    s.add_argument("--config", required=True, help="scenario.json supplying network, rates, seed, integrator")
    s.add_argument("--alphas", type=_floats, help="comma-separated alphas (default: config alpha)")
    s.add_argument("--percentiles", type=_floats,
                   help="comma-separated quarantine percentiles (default: config percentile)")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("r0", help="reproduction number of the homogeneous network")
    s.add_argument("--beta", type=float, required=True, help="local transmission rate")
    s.add_argument("--mu", type=float, required=True, help="recovery rate")
    s.add_argument("--alpha", type=float, default=1.0, help="social connectivity (default 1)")
    s.add_argument("--k", type=int, default=0, help="number of connected locations (default 0)")
    s.add_argument("--n", type=float, default=0.0, help="summed mobility fraction (default 0)")
    s.set_defaults(func=cmd_r0)

    s = sub.add_parser("final-size", help="solve r = 1 - exp(-R0 r)")
    s.add_argument("--r0", type=float, required=True, help="reproduction number")
    s.add_argument("--tol", type=float, default=1e-9, help="bisection tolerance (default 1e-9)")
    s.set_defaults(func=cmd_final_size)

    s = sub.add_parser("gen-network", help="write a random synthetic network")
    s.add_argument("--n", type=int, required=True, help="number of locations")
    s.add_argument("--pop-min", type=float, default=1e4, help="minimum population")
    s.add_argument("--pop-max", type=float, default=1e6, help="maximum population")
    s.add_argument("--flow-fraction", type=float, default=0.01,
                   help="max daily flow as a share of the origin population")
    s.add_argument("--seed", type=int, default=0, help="RNG seed")
    s.add_argument("--out", required=True, help="output directory for od.csv and population.csv")
    s.set_defaults(func=cmd_gen_network)

    s = sub.add_parser("case-study", help="forecast from reported cases for several alpha levels")
    s.add_argument("--od", default=str(io.fixture_path("estonia_od.csv")), help="od.csv (default: bundled)")
    s.add_argument("--pop", default=str(io.fixture_path("estonia_population.csv")),
                   help="population.csv (default: bundled)")
    s.add_argument("--cases", default=str(io.fixture_path("estonia_cases_2020-03-11.csv")),
                   help="cases.csv (default: bundled)")
    s.add_argument("--cutoff", default="2020-03-11", help="ISO date of the initial condition")
    s.add_argument("--r0", type=float, default=2.5, help="local reproduction number beta/mu")
    s.add_argument("--mu", type=float, default=0.1, help="recovery rate per day")
    s.add_argument("--alphas", type=_floats, default=[1.0, 0.95, 0.9, 0.8, 0.7],
                   help="alphas; each also quarantines the top (1-alpha)*100 percent")
    s.add_argument("--horizon", type=float, default=30.0, help="days after cutoff")
    s.add_argument("--dt", type=float, default=0.1, help="time step in days")
    s.add_argument("--active", action="store_true", help="report active infections instead of I+R")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_case_study)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (StiffnessError, DivergenceError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, InputError, DomainError, ShapeError, ZeroDivisionError,
            FileNotFoundError, ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
