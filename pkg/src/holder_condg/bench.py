"""Benchmark harness: seeded multistart runs, summaries, metrics and profile data."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .metrics import FrontApproximation, metric_reports, performance_profile
from .nonsmooth import IndicatorModel, SupportFunctionModel, sample_support_model
from .problems import BENCHMARK_PROBLEMS, PROBLEM_NAMES, construct_problem
from .solvers import SOLVERS, IterationRecord, RunResult, RunStatus, SolverConfig
from .theory import theory_report

log = logging.getLogger(__name__)

CASES = ("case_i", "case_ii")
SEED_ENV = "HOLDER_CONDG_SEED"
SUMMARY_HEADER = ["problem", "case", "solver", "median_iter", "median_feval", "median_cpu_s", "n_failed"]
METRICS_HEADER = ["problem", "case", "solver", "purity", "gamma", "delta", "n_points"]
PROFILES_HEADER = ["metric", "solver", "tau", "rho"]
PROFILE_METRICS = ("purity", "gamma", "delta")


class ConfigError(ValueError):
    pass


class OutputError(OSError):
    pass


@dataclass
class ExperimentConfig:
    problems: list = field(default_factory=lambda: list(BENCHMARK_PROBLEMS))
    cases: list = field(default_factory=lambda: ["case_i"])
    solvers: list = field(default_factory=lambda: ["pgm", "fgm"])
    n_starts: int = 100
    seed: int = 0
    solver_cfg: SolverConfig = field(default_factory=SolverConfig)
    output_dir: str = "results"
    fixed_model: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.n_starts < 1:
            raise ConfigError("n_starts must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        for name in self.problems:
            if name not in PROBLEM_NAMES:
                raise ConfigError(f"unknown problem {name!r}")
        for c in self.cases:
            if c not in CASES:
                raise ConfigError(f"unknown case {c!r}")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ConfigError(f"unknown solver {s!r}")

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("output_dir")
        d.pop("jobs")
        return d


_LIST_KEYS = {"problems", "cases", "solvers"}
_INT_KEYS = {"n_starts", "seed", "jobs"}
_SOLVER_KEYS = {f.name: f.type for f in dataclasses.fields(SolverConfig)}


def _parse_bool(key, v):
    if v.lower() in ("1", "true", "yes", "on"):
        return True
    if v.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {v!r}")


def parse_config(text: str) -> ExperimentConfig:
    """Parse flat ``key = value`` lines; '#' starts a comment, unknown keys are errors."""
    kw, solver_kw = {}, {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                items = [v.strip() for v in value.split(",") if v.strip()]
                if key == "problems" and items == ["all"]:
                    items = list(BENCHMARK_PROBLEMS)
                kw[key] = items
            elif key in _INT_KEYS:
                kw[key] = int(value)
            elif key == "output_dir":
                kw[key] = value
            elif key == "fixed_model":
                kw[key] = _parse_bool(key, value)
            elif key in _SOLVER_KEYS:
                solver_kw[key] = int(value) if key in ("max_outer", "max_inner") else float(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    try:
        kw["solver_cfg"] = SolverConfig(**solver_kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kw)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


# ---------------------------------------------------------------------------
# task generation
# ---------------------------------------------------------------------------

@dataclass
class Task:
    problem: str
    case: str
    solver: str
    start: int
    x0: np.ndarray
    model: dict = None  # serialized support model for case_ii


def _stream(seed: int, problem: str, case: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, zlib.crc32(problem.encode()), CASES.index(case)])


def make_tasks(cfg: ExperimentConfig) -> list:
    """All (problem, case, solver, start) runs; both solvers share x0 and the model."""
    tasks = []
    for name in cfg.problems:
        p = construct_problem(name)
        for case in cfg.cases:
            children = _stream(cfg.seed, name, case).spawn(cfg.n_starts + 1)
            shared = None
            if case == "case_ii" and cfg.fixed_model:
                shared = sample_support_model(p.n, p.m, p.box, np.random.default_rng(children[-1])).to_dict()
            for j in range(cfg.n_starts):
                rng = np.random.default_rng(children[j])
                x0 = p.box.sample(rng, 1)[0]
                model = None
                if case == "case_ii":
                    model = shared if shared is not None else \
                        sample_support_model(p.n, p.m, p.box, rng).to_dict()
                for solver in cfg.solvers:
                    tasks.append(Task(name, case, solver, j, x0, model))
    return tasks


def _model_for(p, case: str, model_dict):
    if case == "case_i":
        return IndicatorModel(p.box)
    return SupportFunctionModel.from_dict(model_dict)


def _floats(a):
    return [float(v) for v in np.ravel(a)]


def _opt(v):
    return None if v is None else float(v)


def run_task(task: Task, solver_cfg: SolverConfig, echo: dict) -> dict:
    p = construct_problem(task.problem)
    model = _model_for(p, task.case, task.model)
    run = SOLVERS[task.solver](p, model, task.x0, solver_cfg)
    recs = run.records
    return {
        "problem": task.problem, "case": task.case, "solver": task.solver, "start": task.start,
        "status": run.status.value, "message": run.message,
        "iter": run.counters["iter"], "feval": run.counters["feval"],
        "counters": dict(run.counters), "cpu_s": run.wall_time, "l_init": run.l_init,
        "x0": _floats(task.x0), "final_x": _floats(run.final_x),
        "final_F": _floats(recs[-1].F_x) if recs else None,
        "final_theta": float(run.final_theta),
        "trace": {
            "F": [_floats(r.F_x) for r in recs],
            "theta": [float(r.theta) for r in recs],
            "norm": [float(r.direction_norm) for r in recs],
            "step": [_opt(r.step) for r in recs],
            "l_k": [_opt(r.l_k) for r in recs],
            "trials": [r.inner_trials for r in recs],
        },
        "model": task.model,
        "theory": theory_report(run, p, model, solver_cfg.max_inner, solver_cfg.descent_slack),
        "config": echo,
    }


def run_from_record(rec: dict) -> RunResult:
    """Rebuild a RunResult (without iterates) from a runs.jsonl record."""
    t = rec["trace"]
    records = [IterationRecord(k, None, np.array(F), th, nm, st, lk, tr)
               for k, (F, th, nm, st, lk, tr) in enumerate(
                   zip(t["F"], t["theta"], t["norm"], t["step"], t["l_k"], t["trials"]))]
    return RunResult(solver=rec["solver"], status=RunStatus(rec["status"]), records=records,
                     final_x=np.array(rec["final_x"]), counters=rec["counters"],
                     wall_time=rec["cpu_s"], l_init=rec.get("l_init", 1.0), message=rec["message"])


def check_record(rec: dict) -> dict:
    solver_cfg = SolverConfig(**rec["config"]["solver_cfg"])
    p = construct_problem(rec["problem"])
    model = _model_for(p, rec["case"], rec["model"])
    return theory_report(run_from_record(rec), p, model, solver_cfg.max_inner, solver_cfg.descent_slack)


def _sort_key(rec):
    return (rec["problem"], rec["case"], rec["solver"], rec["start"])


def _worker(args):
    return run_task(*args)


def run_experiment(cfg: ExperimentConfig) -> list:
    tasks = make_tasks(cfg)
    echo = cfg.echo()
    jobs = [(t, cfg.solver_cfg, echo) for t in tasks]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_worker, jobs, chunksize=4))
    else:
        records = [_worker(j) for j in jobs]
    return sorted(records, key=_sort_key)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------

def _groups(records):
    out = {}
    for r in records:
        out.setdefault((r["problem"], r["case"], r["solver"]), []).append(r)
    return out


def summary_rows(records) -> list:
    rows = []
    for (prob, case, solver), rs in sorted(_groups(records).items()):
        rows.append({
            "problem": prob, "case": case, "solver": solver,
            "median_iter": float(np.median([r["iter"] for r in rs])),
            "median_feval": float(np.median([r["feval"] for r in rs])),
            "median_cpu_s": float(np.median([r["cpu_s"] for r in rs])),
            "n_failed": sum(r["status"] != RunStatus.CONVERGED.value for r in rs),
        })
    return rows


def metric_rows(records) -> list:
    """Front metrics per (problem, case, solver), from the final F of converged runs."""
    by_pc = {}
    for (prob, case, solver), rs in _groups(records).items():
        pts = [r["final_F"] for r in rs if r["status"] == RunStatus.CONVERGED.value]
        m = len(rs[0]["final_F"]) if rs[0]["final_F"] else 0
        pts = np.array(pts, dtype=float).reshape(-1, m)
        by_pc.setdefault((prob, case), []).append(FrontApproximation(pts, solver))
    rows = []
    for (prob, case), fronts in sorted(by_pc.items()):
        reports = metric_reports(fronts)
        for solver in sorted(reports):
            rep = reports[solver]
            rows.append({"problem": prob, "case": case, "solver": solver, "purity": rep.purity,
                         "gamma": rep.gamma, "delta": rep.delta, "n_points": rep.n_points})
    return rows


def profile_rows(metrics) -> list:
    """Profile breakpoints per '<case>:<metric>' and solver; purity is profiled as 1/purity."""
    rows = []
    for case in sorted({r["case"] for r in metrics}):
        sub = [r for r in metrics if r["case"] == case]
        solvers = sorted({r["solver"] for r in sub})
        problems = sorted({r["problem"] for r in sub})
        lookup = {(r["solver"], r["problem"]): r for r in sub}
        for metric in PROFILE_METRICS:
            C = np.full((len(solvers), len(problems)), np.nan)
            for i, s in enumerate(solvers):
                for j, pr in enumerate(problems):
                    r = lookup.get((s, pr))
                    v = None if r is None else r[metric]
                    if v is not None and np.isfinite(v) and r["n_points"] > 0:
                        C[i, j] = v
            for s, steps in zip(solvers, performance_profile(C, larger_is_better=metric == "purity")):
                for tau, rho in steps:
                    rows.append({"metric": f"{case}:{metric}", "solver": s, "tau": tau, "rho": rho})
    return rows


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r[h]) for h in header])
    return buf.getvalue()


def _write_all(out_dir: Path, files: dict):
    """Write every file via a temporary name, then rename; clean up on failure."""
    tmp = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out_dir / (name + ".tmp")
            tmp.append(path)
            path.write_text(text)
        for name in files:
            os.replace(out_dir / (name + ".tmp"), out_dir / name)
    except (OSError, TypeError, ValueError) as exc:
        for path in tmp:
            try:
                path.unlink()
            except OSError:
                pass
        raise OutputError(f"failed writing outputs to {out_dir}: {exc}") from exc


def aggregate_files(records) -> dict:
    metrics = metric_rows(records)
    return {
        "summary.csv": _csv_text(SUMMARY_HEADER, summary_rows(records)),
        "metrics.csv": _csv_text(METRICS_HEADER, metrics),
        "profiles.csv": _csv_text(PROFILES_HEADER, profile_rows(metrics)),
    }


def emit_outputs(records, out_dir) -> None:
    files = {"runs.jsonl": "".join(json.dumps(r) + "\n" for r in records)}
    files.update(aggregate_files(records))
    _write_all(Path(out_dir), files)


def emit_reports(records, out_dir) -> None:
    _write_all(Path(out_dir), aggregate_files(records))


def read_runs(path) -> list:
    path = Path(path)
    if path.is_dir():
        path = path / "runs.jsonl"
    try:
        with path.open() as fh:
            return [json.loads(line) for line in fh if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise OutputError(f"cannot read runs from {path}: {exc}") from exc
