"""Command-line front end: ``python -m consensus_bounds <command> ...``.

Opinion vectors are read from text files holding one value per line (or
whitespace separated).  Plans are CSV with header ``agent,u``.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .bounds import solve_bounds
from .control import STRATEGIES, ControlProblem, AllocationPlan, allocate, evaluate_allocation
from .dynamics import GammaSpec, simulate
from .harness import PRESETS, ScenarioConfig, preset, run_bounds_scenario, run_control_experiment
from .netgraph import format_network, load_network, random_network, save_network
from .spectral import left_null_eigenvector


def _opinions(path) -> np.ndarray:
    return np.atleast_1d(np.loadtxt(path, dtype=float, ndmin=1))


def _write_csv(header, rows, out=None):
    w = csv.writer(out or sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _fmt(v) -> str:
    return repr(float(v))


def cmd_gen_network(args):
    net = random_network(args.n, args.m, args.remove, args.seed)
    if args.out:
        save_network(net, args.out)
    else:
        sys.stdout.write(format_network(net))
    return 0


def cmd_centrality(args):
    net = load_network(args.net)
    nu = left_null_eigenvector(net).nu
    _write_csv(["agent", "nu"], [(i, _fmt(v)) for i, v in enumerate(nu)])
    return 0


def cmd_simulate(args):
    net = load_network(args.net)
    x0 = _opinions(args.x0)
    spec = GammaSpec(args.wlow, args.whigh, args.model)
    res = solve_bounds(net, x0, spec)
    rec = simulate(net, x0, spec, res.nu_under, res.nu_over, tol=args.tol,
                   rng=np.random.default_rng(args.seed), raise_on_fail=False)
    header = (["step"] + [f"x_{i + 1}" for i in range(net.n)]
              + ["theta_under", "theta_over", "flag_low", "flag_high"])
    rows = []
    for k, x in enumerate(rec.states):
        flags = rec.flags[k] if k < len(rec.flags) else (True, True)
        rows.append([k] + [_fmt(v) for v in x]
                    + [_fmt(rec.theta_under[k]), _fmt(rec.theta_over[k]),
                       int(flags[0]), int(flags[1])])
    _write_csv(header, rows)
    if not rec.converged:
        print(f"not converged after {rec.steps} steps (spread {rec.spread:.3e})", file=sys.stderr)
        return 1
    return 0


def cmd_bounds(args):
    net = load_network(args.net)
    x0 = _opinions(args.x0)
    res = solve_bounds(net, x0, GammaSpec(args.wlow, args.whigh))
    _write_csv(["alpha_min", "alpha_max", "gap", "conservative_gap"],
               [[_fmt(res.alpha_min), _fmt(res.alpha_max), _fmt(res.gap),
                 _fmt(res.conservative_gap)]])
    print()
    _write_csv(["agent", "gamma_under", "gamma_over"],
               [(i, _fmt(a), _fmt(b))
                for i, (a, b) in enumerate(zip(res.gamma_star_low, res.gamma_star_high))])
    return 0


def _problem(args) -> ControlProblem:
    net = load_network(args.net)
    x0 = _opinions(args.x0)
    spec = GammaSpec(args.wlow, args.whigh, args.model)
    return ControlProblem(net, x0, args.d, args.umax, spec, n_b=args.nb)


def cmd_allocate(args):
    p = _problem(args)
    kwargs = {}
    if args.strategy == "cor1":
        kwargs = dict(exact_ucap=args.exact_ucap, formulation=args.formulation)
    plan = allocate(p, args.strategy, **kwargs)
    print(f"# strategy={plan.strategy} predicted_bound={plan.predicted_bound!r}")
    _write_csv(["agent", "u"], [(i, _fmt(u)) for i, u in enumerate(plan.u)])
    return 0


def read_plan(path, n: int, u_max: float) -> AllocationPlan:
    u = np.zeros(n)
    with open(path) as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in rows:
            u[int(row["agent"])] = float(row["u"])
    return AllocationPlan(u, float("nan"), "file", u_max)


def cmd_evaluate(args):
    p = _problem(args)
    plan = read_plan(args.plan, p.net.n, p.u_max)
    if plan.budget_used > p.budget + 1e-9 or np.any(plan.u > p.u_max + 1e-12):
        print("plan exceeds the budget or the per-agent cap", file=sys.stderr)
        return 2
    plan.predicted_bound = p.bound_after(plan.u)
    rec = evaluate_allocation(p, plan, args.trials, np.random.default_rng(args.seed), tol=args.tol)
    row = rec.as_row()
    _write_csv(list(row), [[_fmt(v) if isinstance(v, float) else v for v in row.values()]])
    return 0


def _campaign_config(args, name) -> ScenarioConfig:
    overrides = dict(trials=getattr(args, "trials", None), seed=args.seed)
    if args.config:
        return ScenarioConfig.from_file(args.config, base=PRESETS[name], scenario=name, **overrides)
    return preset(name, **overrides)


def cmd_campaign(args):
    name = args.command
    cfg = _campaign_config(args, name)
    if name.startswith("scenario"):
        stats = run_bounds_scenario(cfg, args.out_dir, workers=args.workers)
    else:
        stats = run_control_experiment(cfg, args.out_dir, workers=args.workers)
    for key, value in stats.summary.items():
        print(f"{key},{value!r}" if isinstance(value, float) else f"{key},{value}")
    failed = stats.summary.get("failed", 0)
    if failed:
        print(f"{failed} work items failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="consensus_bounds")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-network", help="random directed BA network")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--remove", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen_network)

    c = sub.add_parser("centrality", help="left null vector of the Laplacian")
    c.add_argument("--net", required=True)
    c.set_defaults(func=cmd_centrality)

    s = sub.add_parser("simulate", help="CSV trace of one run")
    s.add_argument("--net", required=True)
    s.add_argument("--x0", required=True)
    s.add_argument("--model", choices=["stubborn", "uniform"], default="stubborn")
    s.add_argument("--wlow", type=float, default=0.09)
    s.add_argument("--whigh", type=float, default=0.25)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bounds", help="consensus bounds and extremal gains")
    b.add_argument("--net", required=True)
    b.add_argument("--x0", required=True)
    b.add_argument("--wlow", type=float, default=0.09)
    b.add_argument("--whigh", type=float, default=0.25)
    b.set_defaults(func=cmd_bounds)

    def control_args(p):
        p.add_argument("--net", required=True)
        p.add_argument("--x0", required=True)
        p.add_argument("--d", type=int, choices=[0, 1], default=1)
        p.add_argument("--umax", type=float, default=0.2)
        p.add_argument("--nb", type=int, default=3)
        p.add_argument("--model", choices=["stubborn", "uniform"], default="uniform")
        p.add_argument("--wlow", type=float, default=0.03)
        p.add_argument("--whigh", type=float, default=0.25)

    a = sub.add_parser("allocate", help="budget allocation plan")
    control_args(a)
    a.add_argument("--strategy", choices=sorted(STRATEGIES), default="cor1")
    cap = a.add_mutually_exclusive_group()
    cap.add_argument("--exact-ucap", dest="exact_ucap", action="store_true", default=True)
    cap.add_argument("--printed-ucap", dest="exact_ucap", action="store_false")
    a.add_argument("--formulation", choices=["joint", "maxmin"], default="joint")
    a.set_defaults(func=cmd_allocate)

    e = sub.add_parser("evaluate", help="simulate a plan and compare with its bounds")
    control_args(e)
    e.add_argument("--plan", required=True)
    e.add_argument("--trials", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--tol", type=float, default=1e-9)
    e.set_defaults(func=cmd_evaluate)

    for name in ("scenario1", "scenario2", "scenario3", "control-small", "control-large"):
        p = sub.add_parser(name, help=f"run the {name} campaign")
        if name != "control-large":
            p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--config")
        p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=cmd_campaign)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
