"""Generalized conditional gradient methods for F = G + H.

``run_pgm`` uses the step size built from the Hölder data (nu, M_nu);
``run_fgm`` needs neither and finds a curvature estimate L_k by doubling
until a quadratic upper model holds along the step.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .gap import GapResult, solve_gap
from .lp import LpError
from .nonsmooth import IndicatorModel, NonsmoothModel, domain_of, evaluate_G
from .problems import HolderParams, ProblemInstance

log = logging.getLogger(__name__)


class RunStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER_REACHED = "Failed"
    ERROR = "error"


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-4
    max_outer: int = 1000
    l_init: float = 1.0
    max_inner: int = 60
    descent_slack: float = 1e-10

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be at least 1")
        if not self.l_init > 0:
            raise ValueError("l_init must be positive")


@dataclass
class IterationRecord:
    """State at iterate k.

    ``step``, ``l_k`` and ``inner_trials`` describe the move from x^k to
    x^{k+1}; they are None on the final record, where the run stopped.
    """
    k: int
    x: np.ndarray
    F_x: np.ndarray
    theta: float
    direction_norm: float
    step: Optional[float] = None
    l_k: Optional[float] = None
    inner_trials: Optional[int] = None
    fevals_so_far: int = 0


@dataclass
class RunResult:
    solver: str
    status: RunStatus
    records: list
    final_x: np.ndarray
    counters: dict
    wall_time: float
    l_init: float = 1.0
    message: str = ""

    @property
    def iterations(self) -> int:
        return self.counters["iter"]

    @property
    def final_theta(self) -> float:
        return self.records[-1].theta if self.records else np.nan

    def trace(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


class LineSearchError(RuntimeError):
    pass


def pgm_step_size(theta: float, s_minus_x_norm: float, holder: HolderParams) -> float:
    """min{1, (|theta| / (M_nu |s - x|^(1+nu)))^(1/nu)}."""
    if not theta < 0:
        raise ValueError("step size needs theta < 0")
    if not s_minus_x_norm > 0:
        raise ValueError("step size needs s(x) != x")
    nu, M = holder.nu, holder.m_nu
    ratio = abs(theta) / (M * s_minus_x_norm ** (1.0 + nu))
    if ratio >= 1.0:
        return 1.0
    return ratio ** (1.0 / nu)


def evaluate_F(p: ProblemInstance, model: NonsmoothModel, x) -> np.ndarray:
    return p.value(x) + evaluate_G(model, x, p.m)


@dataclass
class LineSearchResult:
    l_k: float
    t_k: float
    x_next: np.ndarray
    F_next: np.ndarray
    trials: int
    fevals: int


def fgm_line_search(p: ProblemInstance, model: NonsmoothModel, x, F_x, gap: GapResult,
                    l_prev: float, cfg: SolverConfig) -> LineSearchResult:
    """Doubling search L = 2^(l-1) L_prev until the quadratic upper model holds."""
    d = gap.s - x
    # squared from the norm so that replaying the test from recorded norms is exact
    dd = float(np.linalg.norm(d)) ** 2
    abs_theta = abs(gap.theta)
    box = domain_of(model)
    for ell in range(cfg.max_inner):
        L = 2.0 ** (ell - 1) * l_prev
        t = min(1.0, abs_theta / (2.0 * L * dd))
        x_try = box.project(x + t * d)
        F_try = evaluate_F(p, model, x_try)
        bound = F_x + (-0.5 * t * abs_theta + 0.5 * L * t * t * dd)
        if np.all(F_try <= bound):
            return LineSearchResult(L, t, x_try, F_try, ell + 1, ell + 1)
    raise LineSearchError(f"line search exceeded {cfg.max_inner} trials")


def _run(solver: str, p: ProblemInstance, model: NonsmoothModel, x0, cfg: SolverConfig) -> RunResult:
    start = time.perf_counter()
    box = domain_of(model)
    x = np.asarray(x0, dtype=float)
    if not box.contains(x):
        log.warning("starting point outside dom(G); projecting onto the box")
    x = box.project(x)

    counters = {"iter": 0, "feval": 0, "jeval": 0, "lp_solves": 0, "geval": 0}
    records = []
    status, message = RunStatus.MAX_ITER_REACHED, ""
    L = cfg.l_init
    F_x = None
    k = 0
    try:
        while True:
            gap = solve_gap(p, model, x)
            counters["jeval"] += 1
            counters["lp_solves"] += gap.lp_solves
            counters["geval"] += gap.fevals_charged
            F_here = p.value(x) + (gap.g_x if not isinstance(model, IndicatorModel) else 0.0)
            if F_x is not None and np.any(F_here > F_x + cfg.descent_slack):
                records.append(IterationRecord(k, x, F_here, gap.theta, 0.0,
                                               fevals_so_far=counters["feval"]))
                status = RunStatus.ERROR
                message = f"monotone descent violated at k={k}"
                break
            F_x = F_here
            d = gap.s - x
            norm = float(np.linalg.norm(d))
            rec = IterationRecord(k, x, F_x, gap.theta, norm, fevals_so_far=counters["feval"])
            records.append(rec)

            if abs(gap.theta) <= cfg.epsilon:
                status = RunStatus.CONVERGED
                break
            if norm == 0.0:
                log.warning("theta=%g below -epsilon with s(x) == x; stopping", gap.theta)
                status, message = RunStatus.CONVERGED, "zero direction with nonzero theta"
                break
            if k >= cfg.max_outer:
                status = RunStatus.MAX_ITER_REACHED
                break

            if solver == "pgm":
                t = pgm_step_size(gap.theta, norm, p.holder)
                x = box.project(x + t * d)
                rec.step = t
            else:
                ls = fgm_line_search(p, model, x, F_x, gap, L, cfg)
                counters["feval"] += ls.fevals
                counters["lp_solves"] += ls.fevals * (0 if isinstance(model, IndicatorModel) else p.m)
                L = ls.l_k
                rec.step, rec.l_k, rec.inner_trials = ls.t_k, ls.l_k, ls.trials
                x = ls.x_next
            k += 1
            counters["iter"] = k
    except (LpError, LineSearchError) as exc:
        status, message = RunStatus.ERROR, str(exc)

    return RunResult(solver=solver, status=status, records=records, final_x=x,
                     counters=counters, wall_time=time.perf_counter() - start,
                     l_init=cfg.l_init, message=message)


def run_pgm(p: ProblemInstance, model: NonsmoothModel, x0, cfg: SolverConfig = SolverConfig()) -> RunResult:
    return _run("pgm", p, model, x0, cfg)


def run_fgm(p: ProblemInstance, model: NonsmoothModel, x0, cfg: SolverConfig = SolverConfig()) -> RunResult:
    return _run("fgm", p, model, x0, cfg)


SOLVERS = {"pgm": run_pgm, "fgm": run_fgm}
