"""Reproduction harness: baselines, sweeps, seeded batch runs, CSV emission.

Trial i of any experiment uses seed base_seed + i, and the target trajectory
is derived from the trial seed alone, so every algorithm variant inside a
trial sees the same moving target (paired comparison). Two profiles ship:
`desk` (budget 1e6, 100 outer iterations, 20 trials) for routine runs and
`full` (budget 1e8, 400 iterations, 100 trials) for release-scale studies.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .ibaa import InnerConfig
from .model import (TaskAssignment, dump_schedule_rows, validate_bandwidth)
from .otaa import (BudgetAccountant, FrameResult, OuterConfig, make_equal_split_evaluator,
                   make_ibaa_evaluator, run_scenario, _TRAJECTORY_TAG)
from .scenario import Scenario, TargetState
from .utility import scored_total_utility

_ERROR_TAG = 104

VARIANTS = ("PROPOSED", "AWKM", "AWMR", "TABE", "TFBA", "TFBE")

#: threat-weight presets for the three-radar network
WEIGHT_SETTINGS = {
    1: (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
    2: (1.0 / 8.0, 1.0 / 8.0, 3.0 / 4.0),
    3: (7.0 / 16.0, 7.0 / 16.0, 1.0 / 8.0),
}

RESULT_FIELDS = ["experiment", "variant", "setting", "cost_factor", "error_std",
                 "budget", "alpha", "population_size", "trial", "seed", "frame",
                 "utility", "scored_utility", "violation", "feasible", "truncated",
                 "evaluations", "ibaa_runs"]


@dataclass(frozen=True)
class Profile:
    name: str
    budget: int
    t_max: int
    trials: int
    frames: int


DESK = Profile("desk", 1_000_000, 100, 20, 10)
FULL = Profile("full", 100_000_000, 400, 100, 10)
PROFILES = {p.name: p for p in (DESK, FULL)}


def variant_config(variant: str, profile: Profile, *, population_size: int = 6,
                   alpha: float = 0.3, budget: int | None = None,
                   t_max: int | None = None,
                   inner: InnerConfig | None = None) -> OuterConfig:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return OuterConfig(population_size=population_size,
                       t_max=profile.t_max if t_max is None else t_max,
                       shrink_factor=alpha,
                       budget=profile.budget if budget is None else budget,
                       inner=inner if inner is not None else InnerConfig(),
                       surrogate=variant != "AWKM",
                       dynamic_modules=variant != "AWMR")


def trial_trajectory(scenario: Scenario, frames: int, seed: int) -> list[TargetState]:
    rng = np.random.default_rng(np.random.SeedSequence([_TRAJECTORY_TAG, seed]))
    return scenario.target_trajectory(frames, rng)


def fixed_nearest_assignment(scenario: Scenario) -> tuple[int, ...]:
    """Distance-based fixed split: the closer half of the swarm jams radar 1,
    the rest jam radar 2."""
    radar = scenario.radars[0]
    d = [math.hypot(u.position[0] - radar.position[0], u.position[1] - radar.position[1])
         for u in scenario.uavs]
    order = np.argsort(d, kind="stable")
    tasks = np.full(scenario.n_uavs, 2, dtype=int)
    tasks[order[:scenario.n_uavs // 2]] = 1
    return tuple(int(t) for t in tasks)


def _run_fixed_variant(variant: str, scenario: Scenario, frames: int, seed: int,
                       cfg: OuterConfig) -> list[FrameResult]:
    tasks = fixed_nearest_assignment(scenario)
    trajectory = trial_trajectory(scenario, frames, seed)
    if variant == "TFBA":
        evaluator = make_ibaa_evaluator(scenario, cfg.inner, seed)
    else:
        evaluator = make_equal_split_evaluator(scenario)
    results = []
    for k in range(1, frames + 1):
        start = time.perf_counter()
        budget = BudgetAccountant(cfg.budget)
        target = trajectory[k - 1]
        point = evaluator(tasks, k, target, scenario.jsr_table(target), budget)
        assignment = TaskAssignment.from_tasks(tasks, scenario.n_radars, k)
        from .model import BandwidthAllocation
        allocation = BandwidthAllocation(np.array(point.bandwidth, dtype=float), k)
        results.append(FrameResult(k, assignment, allocation, point.utility,
                                   point.violation, point.feasible, point.truncated,
                                   budget.consumed, 1, [point.utility],
                                   time.perf_counter() - start))
    return results


def run_variant(variant: str, scenario: Scenario, frames: int, seed: int,
                cfg: OuterConfig) -> list[FrameResult]:
    """One seeded run of one algorithm variant over K frames."""
    if variant in ("PROPOSED", "AWKM", "AWMR"):
        return run_scenario(scenario, cfg, frames, seed)
    if variant == "TABE":
        return run_scenario(scenario, cfg, frames, seed,
                            evaluator=make_equal_split_evaluator(scenario))
    if variant in ("TFBA", "TFBE"):
        return _run_fixed_variant(variant, scenario, frames, seed, cfg)
    raise ValueError(f"unknown variant {variant!r}")


def frame_rows(results: Sequence[FrameResult], **labels) -> list[dict]:
    rows = []
    for r in results:
        row = {f: "" for f in RESULT_FIELDS}
        row.update(labels)
        row.update(frame=r.frame, utility=r.utility, scored_utility=r.utility,
                   violation=r.violation, feasible=int(r.feasible),
                   truncated=int(r.truncated), evaluations=r.evaluations,
                   ibaa_runs=r.ibaa_runs)
        rows.append(row)
    return rows


def run_error_trial(scenario: Scenario, frames: int, seed: int, cfg: OuterConfig,
                    error_std: float) -> tuple[list[FrameResult], list[float], list[float]]:
    """Optimise against per-radar bandwidths mis-estimated once per run, then
    score the resulting schedules against the true bandwidths.

    Returns (results, believed bandwidths, per-frame scored utilities).
    """
    rng = np.random.default_rng(np.random.SeedSequence([_ERROR_TAG, seed]))
    factors = 1.0 + rng.normal(0.0, error_std, scenario.n_radars)
    factors = np.maximum(factors, 0.05)       # a band estimate cannot go negative
    believed_bm = scenario.working_bandwidths * factors
    believed = scenario.with_bandwidths(believed_bm)
    results = run_scenario(believed, cfg, frames, seed)
    trajectory = trial_trajectory(scenario, frames, seed)
    scored = [scored_total_utility(r.assignment, r.allocation, scenario,
                                   trajectory[r.frame - 1], believed_bm).total
              for r in results]
    return results, [float(b) for b in believed_bm], scored


def aggregate(rows: Iterable[dict], keys: Sequence[str],
              value: str = "utility") -> list[dict]:
    """Mean/std/n of `value` grouped by `keys`, in sorted group order."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        groups.setdefault(tuple(row[k] for k in keys), []).append(float(row[value]))
    try:
        ordered = sorted(groups)
    except TypeError:          # mixed-type keys fall back to string order
        ordered = sorted(groups, key=lambda g: tuple(str(v) for v in g))
    out = []
    for group in ordered:
        vals = np.array(groups[group])
        rec = dict(zip(keys, group))
        rec.update({f"mean_{value}": float(vals.mean()),
                    f"std_{value}": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
                    "n": len(vals)})
        out.append(rec)
    return out


# -- emission -----------------------------------------------------------------


def _git_revision() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True,
                             text=True, timeout=10)
        return out.stdout.strip() if out.returncode == 0 else "unknown"
    except OSError:
        return "unknown"


def emit_results(tables: dict[str, tuple[Sequence[str], Sequence[dict]]],
                 outdir, *, scenario: Scenario, seed: int, profile: str,
                 command: str = "", elapsed: float = 0.0) -> dict[str, Path]:
    """Write one CSV per table plus a run manifest sidecar.

    CSV content is a pure function of the rows, so identical seeds reproduce
    byte-identical files; volatile facts (wall time, git revision) live only
    in the manifest.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    for name, (fields, rows) in tables.items():
        path = outdir / f"{name}.csv"
        try:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(fields))
                writer.writeheader()
                writer.writerows(rows)
        except OSError as exc:
            raise OSError(f"could not write results table to {path}: {exc}") from exc
        written[name] = path
    config_json = json.dumps(scenario.to_dict(), sort_keys=True)
    manifest = {
        "schema_version": 1,
        "seed": seed,
        "profile": profile,
        "command": command,
        "config_sha256": hashlib.sha256(config_json.encode()).hexdigest(),
        "git_revision": _git_revision(),
        "wall_time_s": round(elapsed, 3),
        "tables": sorted(tables),
    }
    manifest_path = outdir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    written["manifest"] = manifest_path
    return written


def audit_feasibility(results: Sequence[FrameResult], scenario: Scenario) -> list[str]:
    """Check the cover equality on every non-truncated final schedule.

    Truncated runs legitimately report infeasible schedules (that is the
    signal budget studies look for); converged ones must be exact.
    """
    problems = []
    for r in results:
        if r.truncated:
            continue
        report = validate_bandwidth(r.assignment, r.allocation, scenario.radars)
        if not report.feasible:
            worst = max(report.per_radar, key=lambda x: x.sum_error + x.box_violation)
            problems.append(f"frame {r.frame}: radar {worst.radar} off by "
                            f"{worst.sum_error + worst.box_violation:.3e} Hz")
        if not r.feasible:
            problems.append(f"frame {r.frame}: converged run flagged infeasible "
                            f"(violation {r.violation:.3e})")
    return problems


# -- trial batches -------------------------------------------------------------


def _trial_task(args: tuple) -> tuple[int, list[FrameResult], list[float] | None]:
    variant, scenario, frames, seed, cfg, error_std = args
    if error_std:
        results, _, scored = run_error_trial(scenario, frames, seed, cfg, error_std)
        return seed, results, scored
    return seed, run_variant(variant, scenario, frames, seed, cfg), None


def run_trials(variant: str, scenario: Scenario, frames: int, trials: int,
               base_seed: int, cfg: OuterConfig, *, error_std: float = 0.0,
               jobs: int = 1, labels: dict | None = None,
               keep: Callable[[int, list[FrameResult]], None] | None = None) -> list[dict]:
    """Run `trials` seeded runs of one variant and flatten to result rows."""
    tasks = [(variant, scenario, frames, base_seed + i, cfg, error_std)
             for i in range(trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_trial_task, tasks))
    else:
        outcomes = [_trial_task(t) for t in tasks]
    rows: list[dict] = []
    for i, (seed, results, scored) in enumerate(outcomes):
        if keep is not None:
            keep(i, results)
        trial_rows = frame_rows(results, variant=variant, trial=i, seed=seed,
                                **(labels or {}))
        if scored is not None:
            for row, s in zip(trial_rows, scored):
                row["scored_utility"] = s
        rows.extend(trial_rows)
    return rows


# -- reproduction targets -------------------------------------------------------


def reproduce_table2(scenario: Scenario, profile: Profile, seed: int,
                     trials: int | None = None, jobs: int = 1):
    """Frame-1 utility versus initial surrogate population size."""
    trials = trials or profile.trials
    sizes = (2, 6, 10, 20) if profile.name == "full" else (2, 6)
    rows, audits = [], []
    for p in sizes:
        cfg = variant_config("PROPOSED", profile, population_size=p)
        rows += run_trials("PROPOSED", scenario, 1, trials, seed, cfg, jobs=jobs,
                           labels={"experiment": "table2", "population_size": p,
                                   "setting": 1, "cost_factor": 0.0,
                                   "budget": cfg.budget, "alpha": cfg.shrink_factor},
                           keep=lambda i, res: audits.extend(
                               audit_feasibility(res, scenario)))
    agg = aggregate(rows, ["population_size"])
    return {"table2_runs": (RESULT_FIELDS, rows),
            "table2_summary": (list(agg[0].keys()), agg)}, audits


def reproduce_table3(scenario: Scenario, profile: Profile, seed: int,
                     trials: int | None = None, jobs: int = 1):
    """Utility under mis-estimated working bandwidths (sweep of the error std)."""
    trials = trials or profile.trials
    frames = profile.frames if profile.name == "full" else 3
    rows, audits = [], []
    for sigma in (0.0, 0.1, 0.3, 0.5):
        cfg = variant_config("PROPOSED", profile)
        rows += run_trials("PROPOSED", scenario, frames, trials, seed, cfg,
                           error_std=sigma, jobs=jobs,
                           labels={"experiment": "table3", "error_std": sigma,
                                   "setting": 1, "cost_factor": 0.0,
                                   "population_size": cfg.population_size,
                                   "budget": cfg.budget, "alpha": cfg.shrink_factor})
    agg = aggregate(rows, ["error_std", "frame"], value="scored_utility")
    base = {row["frame"]: row["mean_scored_utility"] for row in agg
            if row["error_std"] == 0.0}
    for row in agg:
        row["decline_pct"] = 100.0 * (1.0 - row["mean_scored_utility"] / base[row["frame"]])
    return {"table3_runs": (RESULT_FIELDS, rows),
            "table3_summary": (list(agg[0].keys()), agg)}, audits


def reproduce_fig5(scenario: Scenario, profile: Profile, seed: int,
                   trials: int | None = None, jobs: int = 1):
    """Surrogate value (budget study, frame 1) and dynamics value (alpha study)."""
    trials = trials or profile.trials
    scale = profile.budget / FULL.budget
    budgets = [round(5e7 * scale), round(1e8 * scale)]
    rows, audits, traces = [], [], []
    for variant in ("PROPOSED", "AWKM"):
        for budget in budgets:
            cfg = variant_config(variant, profile, budget=budget)

            def keep(i, res, variant=variant, budget=budget):
                audits.extend(audit_feasibility(res, scenario))
                for t, u in enumerate(res[0].best_trace):
                    traces.append({"variant": variant, "budget": budget,
                                   "trial": i, "iteration": t, "utility": u})

            rows += run_trials(variant, scenario, 1, trials, seed, cfg, jobs=jobs,
                               labels={"experiment": "fig5", "budget": budget,
                                       "setting": 1, "cost_factor": 0.0,
                                       "population_size": cfg.population_size,
                                       "alpha": cfg.shrink_factor},
                               keep=keep)
    dyn_rows = []
    for variant, alpha in (("PROPOSED", 0.3), ("PROPOSED", 1.0), ("AWMR", 0.3)):
        cfg = variant_config(variant, profile, alpha=alpha)
        dyn_rows += run_trials(variant, scenario, profile.frames, trials, seed, cfg,
                               jobs=jobs,
                               labels={"experiment": "fig5_dynamics", "alpha": alpha,
                                       "setting": 1, "cost_factor": 0.0,
                                       "population_size": cfg.population_size,
                                       "budget": cfg.budget},
                               keep=lambda i, res: audits.extend(
                                   audit_feasibility(res, scenario)))
    conv = aggregate(traces, ["variant", "budget", "iteration"])
    dyn = aggregate(dyn_rows, ["variant", "alpha", "frame"])
    return {"fig5_runs": (RESULT_FIELDS, rows + dyn_rows),
            "fig5_convergence": (list(conv[0].keys()), conv),
            "fig5_dynamics": (list(dyn[0].keys()), dyn)}, audits


def reproduce_fig6(scenario: Scenario, profile: Profile, seed: int,
                   trials: int | None = None, jobs: int = 1):
    """Per-frame utility of the four schedulers under three weight settings."""
    if scenario.n_radars != len(next(iter(WEIGHT_SETTINGS.values()))):
        raise ValueError("weight settings are defined for the three-radar network")
    trials = trials or profile.trials
    rows, audits = [], []
    for setting, weights in WEIGHT_SETTINGS.items():
        weighted = scenario.with_weights(weights)
        for variant in ("PROPOSED", "TABE", "TFBA", "TFBE"):
            cfg = variant_config(variant, profile)
            rows += run_trials(variant, weighted, profile.frames, trials, seed, cfg,
                               jobs=jobs,
                               labels={"experiment": "fig6", "setting": setting,
                                       "cost_factor": 0.0,
                                       "population_size": cfg.population_size,
                                       "budget": cfg.budget, "alpha": cfg.shrink_factor},
                               keep=lambda i, res, w=weighted: audits.extend(
                                   audit_feasibility(res, w)))
    agg = aggregate(rows, ["setting", "variant", "frame"])
    return {"fig6_runs": (RESULT_FIELDS, rows),
            "fig6_settings": (list(agg[0].keys()), agg)}, audits


def reproduce_fig9(scenario: Scenario, profile: Profile, seed: int,
                   trials: int | None = None, jobs: int = 1):
    """Cost-factor sweep: utility, assignment histograms, and idle counts."""
    trials = trials or profile.trials
    rows, audits, counts = [], [], []
    for lam in (0.0, 0.1, 0.3):
        cfg = variant_config("PROPOSED", profile)
        costed = scenario.with_cost_factor(lam)

        def keep(i, res, lam=lam):
            audits.extend(audit_feasibility(res, costed))
            for r in res:
                tally = np.bincount(r.assignment.as_array(),
                                    minlength=scenario.n_radars + 1)
                for task, c in enumerate(tally):
                    counts.append({"cost_factor": lam, "trial": i, "frame": r.frame,
                                   "task": task, "count": int(c)})

        rows += run_trials("PROPOSED", costed, profile.frames, trials, seed, cfg,
                           jobs=jobs,
                           labels={"experiment": "fig9", "cost_factor": lam,
                                   "setting": 1,
                                   "population_size": cfg.population_size,
                                   "budget": cfg.budget, "alpha": cfg.shrink_factor},
                           keep=keep)
    util = aggregate(rows, ["cost_factor", "frame"])
    count_agg = aggregate(counts, ["cost_factor", "frame", "task"], value="count")
    return {"fig9_runs": (RESULT_FIELDS, rows),
            "fig9_utility": (list(util[0].keys()), util),
            "fig9_uav_counts": (list(count_agg[0].keys()), count_agg)}, audits


def reproduce_fig10(scenario: Scenario, profile: Profile, seed: int,
                    trials: int | None = None, jobs: int = 1):
    """Per-frame bandwidth schedules of one representative trial per cost factor."""
    rows, audits = [], []
    for lam in (0.0, 0.3):
        cfg = variant_config("PROPOSED", profile)
        costed = scenario.with_cost_factor(lam)
        results = run_variant("PROPOSED", costed, profile.frames, seed, cfg)
        audits.extend(audit_feasibility(results, costed))
        for r in results:
            for rec in dump_schedule_rows(r.assignment, r.allocation):
                rec["cost_factor"] = lam
                rows.append(rec)
    fields = ["cost_factor", "frame", "uav", "task", "bandwidth_hz"]
    return {"fig10_bandwidth": (fields, rows)}, audits


REPRODUCERS = {"table2": reproduce_table2, "table3": reproduce_table3,
               "fig5": reproduce_fig5, "fig6": reproduce_fig6,
               "fig9": reproduce_fig9, "fig10": reproduce_fig10}


def reproduce(target: str, scenario: Scenario, outdir, *, profile: Profile = DESK,
              seed: int = 0, trials: int | None = None, jobs: int = 1,
              command: str = "") -> tuple[dict[str, Path], list[str]]:
    """Run one reproduction target and write its CSVs plus a manifest."""
    if target not in REPRODUCERS:
        raise ValueError(f"unknown target {target!r}; expected one of "
                         f"{sorted(REPRODUCERS)}")
    start = time.perf_counter()
    tables, audits = REPRODUCERS[target](scenario, profile, seed, trials, jobs)
    written = emit_results(tables, outdir, scenario=scenario, seed=seed,
                           profile=profile.name, command=command,
                           elapsed=time.perf_counter() - start)
    return written, audits
