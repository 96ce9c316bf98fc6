"""Experiment runner.

Subcommands:
  simulate-continuous   run the slow-fast continuation scheme
  optimize-discrete     run the act-and-wait golden/Newton scheme
  oracle                print the ground-truth optimum for a config
  plot-data             extract plot-ready columns from a trajectory CSV

Exit codes: 0 ok, 2 config error, 3 numerical abort, 4 settle timeout.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, oracle
from ._backend import backend_name
from .config import ConfigError, ExperimentConfig, load
from .engine import ActAndWaitHarness, NumericalAbort, SettleTimeout, integrate
from .optimizer import OptimizeSchedule, optimize
from .plotdata import KINDS, emit_plot_data


def _load_config(args):
    cfg = load(args.config) if args.config else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "t_end", None) is not None:
        cfg = replace(cfg, t_end=args.t_end)
    if getattr(args, "out", None) is not None:
        cfg = replace(cfg, out_dir=args.out)
    return cfg


def _write_summary(out_dir, name, summary):
    path = Path(out_dir) / name
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def run_continuous(cfg, compare_std=None, write_trajectory=True):
    """One continuous-scheme run; returns the summary dict."""
    params = cfg.plant()
    traj = integrate(params, cfg.ic(), cfg.seeker(), cfg.sim(), cfg.noise())
    n = len(traj)
    tail = slice(int(0.9 * n), n)
    yhat = float(np.mean(traj.sbar[tail]))
    sbar_std = float(np.std(traj.sbar[tail]))
    s_star, phi_star = oracle.phi_opt(params)
    summary = {
        "scheme": "continuous",
        "backend": backend_name(),
        "seed": cfg.seed,
        "noise_kind": cfg.noise_kind,
        "epsilon": cfg.epsilon,
        "delay_tau": cfg.delay_tau,
        "t_end": cfg.t_end,
        "yhat_star": yhat,
        "Dbar_mean": float(np.mean(traj.Dbar[tail])),
        "sbar_final_std": sbar_std,
        "s_star": s_star,
        "phi_star": phi_star,
        "abs_err": abs(yhat - s_star),
    }
    if compare_std is not None:
        summary["reference_std"] = compare_std
        summary["oscillation_flag"] = bool(sbar_std > 5.0 * compare_std)
    if write_trajectory:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        traj.to_csv(out / "trajectory.csv")
        _write_summary(out, "summary.json", summary)
    return summary


def run_discrete(cfg, write_outputs=True):
    """One act-and-wait optimization run; returns the summary dict."""
    params = cfg.plant()
    harness = ActAndWaitHarness(
        params, cfg.ic(), cfg.G1, cfg.D_min, cfg.D_max, cfg.dt, cfg.noise(),
        cfg.settle_criterion(), cfg.sample_every, record=write_outputs,
    )
    sched = OptimizeSchedule(
        tol=cfg.tol, newton_h=cfg.h, window_golden=cfg.t_inc_golden,
        window_newton=cfg.t_inc_newton, newton_iters=cfg.newton_iters,
    )
    try:
        result = optimize(harness, cfg.v1, cfg.v3, sched)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    s_star, phi_star = oracle.phi_opt(params)
    last = result.log[-1]
    summary = {
        "scheme": "discrete",
        "backend": backend_name(),
        "seed": cfg.seed,
        "noise_kind": cfg.noise_kind,
        "golden_evals": len(result.evals("golden")),
        "newton_evals": len(result.evals("newton")),
        "final_evals": len(result.evals("final")),
        "bracket_width": result.golden_state.width,
        "vbar_final": result.vbar_star,
        "s_eq_estimate": last.s_ss,
        "F_estimate": result.F_star,
        "newton_concave": result.newton_concave,
        "s_star": s_star,
        "phi_star": phi_star,
        "abs_err": abs(last.s_ss - s_star),
        "t_total": last.t_end,
    }
    if write_outputs:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.trajectory.to_csv(out / "trajectory.csv")
        with open(out / "evaluations.csv", "w") as fh:
            fh.write("phase,vbar,F,t_start,t_end,windows_used\n")
            for r in result.log:
                fh.write(f"{r.phase},{r.vbar:.17g},{r.F:.17g},"
                         f"{r.t_start:.17g},{r.t_end:.17g},{r.windows}\n")
        _write_summary(out, "summary.json", summary)
    return summary


def _repeat(run_one, cfg, n, keep_outputs=False):
    """Fan independent seeded runs out across worker threads."""
    configs = []
    for i in range(n):
        c = replace(cfg, seed=cfg.seed + i)
        if keep_outputs:
            c = replace(c, out_dir=str(Path(cfg.out_dir) / f"seed_{c.seed}"))
        configs.append(c)
    with ThreadPoolExecutor(max_workers=min(n, 8)) as pool:
        summaries = list(pool.map(run_one, configs))
    errs = np.array([s["abs_err"] for s in summaries])
    aggregate = {
        "runs": n,
        "seed_base": cfg.seed,
        "median_abs_err": float(np.median(errs)),
        "max_abs_err": float(errs.max()),
        "n_within_0.05": int((errs <= 0.05).sum()),
        "summaries": summaries,
    }
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_summary(out, "aggregate.json", aggregate)
    return aggregate


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="chemoseek",
        description="Extremum-seeking control of the chemostat",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("simulate-continuous", "optimize-discrete"):
        sp = sub.add_parser(name)
        sp.add_argument("-c", "--config", help="config file (INI)")
        sp.add_argument("--seed", type=int, help="override noise seed")
        sp.add_argument("--t-end", type=float, dest="t_end")
        sp.add_argument("--out", help="override output directory")
        sp.add_argument("--repeat", type=int, default=1,
                        help="run N seeded repetitions and aggregate")
        sp.add_argument("--keep-trajectories", action="store_true",
                        help="write per-run trajectories when repeating")
        if name == "simulate-continuous":
            sp.add_argument("--compare-std", type=float, default=None,
                            help="flag oscillation vs a reference sbar std")

    sp = sub.add_parser("oracle")
    sp.add_argument("-c", "--config", help="config file (INI)")

    sp = sub.add_parser("plot-data")
    sp.add_argument("trajectory", help="trajectory CSV to extract from")
    sp.add_argument("--kind", required=True, choices=KINDS)
    sp.add_argument("--out", required=True, help="output CSV path")
    sp.add_argument("-c", "--config", help="config for the oracle overlay")
    sp.add_argument("--every", type=int, default=1, help="row decimation")

    args = parser.parse_args(argv)

    try:
        if args.command == "simulate-continuous":
            cfg = _load_config(args)
            if args.repeat > 1:
                agg = _repeat(
                    lambda c: run_continuous(c, write_trajectory=args.keep_trajectories),
                    cfg, args.repeat, args.keep_trajectories)
                print(f"{args.repeat} runs: median |yhat-s*| = "
                      f"{agg['median_abs_err']:.4g}, max = {agg['max_abs_err']:.4g}, "
                      f"within 0.05: {agg['n_within_0.05']}/{args.repeat}")
            else:
                s = run_continuous(cfg, compare_std=args.compare_std)
                print(f"yhat* = {s['yhat_star']:.6g}  Dbar = {s['Dbar_mean']:.6g}  "
                      f"sbar std = {s['sbar_final_std']:.3g}")
                print(f"s* = {s['s_star']:.6g}  |yhat*-s*| = {s['abs_err']:.4g}")
                if "oscillation_flag" in s:
                    print(f"oscillation: {s['oscillation_flag']}")
        elif args.command == "optimize-discrete":
            cfg = _load_config(args)
            if args.repeat > 1:
                agg = _repeat(
                    lambda c: run_discrete(c, write_outputs=args.keep_trajectories),
                    cfg, args.repeat, args.keep_trajectories)
                print(f"{args.repeat} runs: median |s_eq-s*| = "
                      f"{agg['median_abs_err']:.4g}, max = {agg['max_abs_err']:.4g}, "
                      f"within 0.05: {agg['n_within_0.05']}/{args.repeat}")
            else:
                s = run_discrete(cfg)
                print(f"evaluations: {s['golden_evals']} golden + "
                      f"{s['newton_evals']} newton + {s['final_evals']} final")
                print(f"vbar = {s['vbar_final']:.6g}  s_eq = {s['s_eq_estimate']:.6g}  "
                      f"F = {s['F_estimate']:.6g}")
                print(f"s* = {s['s_star']:.6g}  |s_eq-s*| = {s['abs_err']:.4g}")
        elif args.command == "oracle":
            cfg = _load_config(args)
            params = cfg.plant()
            s_star, phi_star = oracle.phi_opt(params)
            g1_min = oracle.min_stabilizing_gain(params.growth, params.s_in)
            print(f"s* = {s_star:.10g}")
            print(f"phi* = {phi_star:.10g}")
            print(f"mu(s*) = {params.growth.mu(s_star):.10g}")
            print(f"min stabilizing gain G1 > {g1_min:.10g}")
        elif args.command == "plot-data":
            params = _load_config(args).plant() if args.config else \
                ExperimentConfig().plant()
            written = emit_plot_data(args.trajectory, args.kind, args.out,
                                     params, args.every)
            for path in written:
                print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except SettleTimeout as exc:
        print(f"settle timeout: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
