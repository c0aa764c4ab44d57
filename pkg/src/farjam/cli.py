"""Command-line entry points: `run` one experiment, `sweep` an axis, or
`reproduce` one of the shipped study targets. Any feasibility violation found
while auditing emitted schedules makes the process exit nonzero."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import experiments
from .experiments import (PROFILES, RESULT_FIELDS, VARIANTS, WEIGHT_SETTINGS,
                          aggregate, audit_feasibility, emit_results, run_trials,
                          variant_config)
from .model import dump_schedule_rows
from .scenario import Scenario, default_scenario, toy_scenario

_BUILTIN_CONFIGS = {"network3x12": default_scenario, "toy2x3": toy_scenario}


def _load_scenario(spec: str) -> Scenario:
    if spec in _BUILTIN_CONFIGS:
        return _BUILTIN_CONFIGS[spec]()
    path = Path(spec)
    if not path.exists():
        raise SystemExit(f"no such config: {spec!r} (built-ins: "
                         f"{sorted(_BUILTIN_CONFIGS)})")
    return Scenario.from_file(path)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default="network3x12",
                   help="scenario config path or built-in name")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None,
                   help="override the profile's trial count")
    p.add_argument("--jobs", type=int, default=1, help="parallel trial workers")


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=VARIANTS, default="PROPOSED")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--setting", type=int, choices=sorted(WEIGHT_SETTINGS), default=None,
                   help="threat-weight preset (three-radar network only)")
    p.add_argument("--cost-factor", type=float, default=None)
    p.add_argument("--error-std", type=float, default=0.0,
                   help="working-bandwidth estimation error std (fraction)")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--t-max", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--population-size", type=int, default=6)


def _prepared(args) -> tuple[Scenario, "experiments.Profile"]:
    scenario = _load_scenario(args.config)
    if getattr(args, "setting", None):
        scenario = scenario.with_weights(WEIGHT_SETTINGS[args.setting])
    if getattr(args, "cost_factor", None) is not None:
        scenario = scenario.with_cost_factor(args.cost_factor)
    return scenario, PROFILES[args.profile]


def _labels(args, cfg) -> dict:
    return {"experiment": "cli", "setting": args.setting or 1,
            "cost_factor": args.cost_factor or 0.0, "error_std": args.error_std,
            "budget": cfg.budget, "alpha": cfg.shrink_factor,
            "population_size": cfg.population_size}


def _cmd_run(args) -> int:
    scenario, profile = _prepared(args)
    cfg = variant_config(args.variant, profile, population_size=args.population_size,
                         alpha=args.alpha, budget=args.budget, t_max=args.t_max)
    frames = args.frames or profile.frames
    trials = args.trials or profile.trials
    start = time.perf_counter()
    audits: list[str] = []
    schedules: list[dict] = []

    def keep(i, results):
        audits.extend(audit_feasibility(results, scenario))
        if i == 0:
            for r in results:
                schedules.extend(dump_schedule_rows(r.assignment, r.allocation))

    rows = run_trials(args.variant, scenario, frames, trials, args.seed, cfg,
                      error_std=args.error_std, jobs=args.jobs,
                      labels=_labels(args, cfg), keep=keep)
    agg = aggregate(rows, ["variant", "frame"],
                    value="scored_utility" if args.error_std else "utility")
    tables = {"runs": (RESULT_FIELDS, rows),
              "summary": (list(agg[0].keys()), agg),
              "schedule_trial0": (["frame", "uav", "task", "bandwidth_hz"], schedules)}
    emit_results(tables, args.out, scenario=scenario, seed=args.seed,
                 profile=profile.name, command=" ".join(sys.argv),
                 elapsed=time.perf_counter() - start)
    return _report(args.out, audits)


_SWEEPABLE = ("cost_factor", "error_std", "budget", "alpha", "population_size", "setting")


def _cmd_sweep(args) -> int:
    if args.axis not in _SWEEPABLE:
        raise SystemExit(f"--axis must be one of {_SWEEPABLE}")
    base_scenario, profile = _prepared(args)
    values = [float(v) for v in args.values.split(",")]
    start = time.perf_counter()
    rows, audits = [], []
    for value in values:
        scenario = base_scenario
        kwargs = dict(population_size=args.population_size, alpha=args.alpha,
                      budget=args.budget, t_max=args.t_max)
        error_std = args.error_std
        if args.axis == "cost_factor":
            scenario = scenario.with_cost_factor(value)
        elif args.axis == "setting":
            scenario = scenario.with_weights(WEIGHT_SETTINGS[int(value)])
        elif args.axis == "error_std":
            error_std = value
        elif args.axis == "budget":
            kwargs["budget"] = int(value)
        elif args.axis == "alpha":
            kwargs["alpha"] = value
        elif args.axis == "population_size":
            kwargs["population_size"] = int(value)
        cfg = variant_config(args.variant, profile, **kwargs)
        labels = _labels(args, cfg)
        labels[args.axis] = value
        labels["experiment"] = f"sweep_{args.axis}"
        rows += run_trials(args.variant, scenario, args.frames or profile.frames,
                           args.trials or profile.trials, args.seed, cfg,
                           error_std=error_std, jobs=args.jobs, labels=labels,
                           keep=lambda i, res, s=scenario: audits.extend(
                               audit_feasibility(res, s)))
    agg = aggregate(rows, [args.axis, "frame"],
                    value="scored_utility" if args.axis == "error_std" else "utility")
    tables = {"sweep_runs": (RESULT_FIELDS, rows),
              "sweep_summary": (list(agg[0].keys()), agg)}
    emit_results(tables, args.out, scenario=base_scenario, seed=args.seed,
                 profile=profile.name, command=" ".join(sys.argv),
                 elapsed=time.perf_counter() - start)
    return _report(args.out, audits)


def _cmd_reproduce(args) -> int:
    scenario, profile = _prepared(args)
    written, audits = experiments.reproduce(
        args.target, scenario, args.out, profile=profile, seed=args.seed,
        trials=args.trials, jobs=args.jobs, command=" ".join(sys.argv))
    for name, path in sorted(written.items()):
        print(f"wrote {name}: {path}")
    return _report(args.out, audits)


def _report(outdir, audits: list[str]) -> int:
    if audits:
        print(f"FEASIBILITY VIOLATIONS ({len(audits)}):", file=sys.stderr)
        for a in audits:
            print(f"  {a}", file=sys.stderr)
        return 1
    print(f"done; results in {outdir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="farjam",
                                     description="jamming-swarm schedule optimiser")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment spec")
    _common_flags(p_run)
    _experiment_flags(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one axis of an experiment")
    _common_flags(p_sweep)
    _experiment_flags(p_sweep)
    p_sweep.add_argument("--axis", required=True, help=f"one of {_SWEEPABLE}")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="rebuild one shipped study")
    p_rep.add_argument("target", choices=sorted(experiments.REPRODUCERS))
    _common_flags(p_rep)
    p_rep.set_defaults(fn=_cmd_reproduce)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
