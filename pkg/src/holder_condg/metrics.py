"""Front quality metrics (purity, Gamma and Delta spread) and performance profiles."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

log = logging.getLogger(__name__)

MATCH_TOL = 1e-8


def _as_points(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, arr.shape[-1] if arr.ndim == 2 else 0)
    return np.atleast_2d(arr)


def deduplicate(points, tol: float = MATCH_TOL) -> np.ndarray:
    """Drop points lying within ``tol`` (max norm) of an earlier point."""
    P = _as_points(points)
    keep = []
    for p in P:
        if not any(np.max(np.abs(p - q)) <= tol for q in keep):
            keep.append(p)
    return np.array(keep).reshape(-1, P.shape[1]) if len(P) else P


@dataclass
class FrontApproximation:
    points: np.ndarray
    solver_tag: str = ""

    def __post_init__(self):
        self.points = deduplicate(self.points)

    def __len__(self):
        return len(self.points)


@dataclass
class MetricReport:
    purity: float
    gamma: float
    delta: Optional[float]
    n_points: int


def dominates(u, v) -> bool:
    return bool(np.all(u <= v) and np.any(u < v))


def nondominated_filter_pairwise(points) -> np.ndarray:
    """O(N^2) reference implementation."""
    P = _as_points(points)
    keep = [i for i in range(len(P))
            if not any(dominates(P[j], P[i]) for j in range(len(P)) if j != i)]
    return P[keep]


def nondominated_filter(points) -> np.ndarray:
    """Points not dominated by any other input point, in input order.

    Sort lexicographically, then a point can only be dominated by points that
    precede it; each point is tested against the current survivors.
    """
    P = _as_points(points)
    if len(P) <= 1:
        return P.copy()
    order = np.lexsort(P.T[::-1])
    survivors = []
    for i in order:
        p = P[i]
        if survivors:
            S = P[survivors]
            if np.any(np.all(S <= p, axis=1) & np.any(S < p, axis=1)):
                continue
        survivors.append(i)
    return P[np.sort(survivors)]


def _matches(p, ref: np.ndarray, tol: float) -> bool:
    return len(ref) > 0 and bool(np.any(np.max(np.abs(ref - p), axis=1) <= tol))


def purity(front: FrontApproximation, reference, tol: float = MATCH_TOL) -> float:
    ref = _as_points(reference)
    if len(front) == 0:
        return 1.0 if len(ref) == 0 else 0.0
    hits = sum(_matches(p, ref, tol) for p in front.points)
    return hits / len(front)


def spread_gamma(front: FrontApproximation) -> float:
    if len(front) == 0:
        raise ValueError("Gamma spread needs at least one point")
    if len(front) == 1:
        return 0.0
    gaps = np.diff(np.sort(front.points, axis=0), axis=0)
    return float(gaps.max())


def _delta_1d(values: np.ndarray, lo: float, hi: float) -> float:
    v = np.sort(values)
    d0, dN = abs(v[0] - lo), abs(hi - v[-1])
    inner = np.diff(v)
    mean = inner.mean()
    num = d0 + dN + np.abs(inner - mean).sum()
    den = d0 + dN + len(inner) * mean
    if den == 0.0:
        return 0.0
    return float(num / den)


def spread_delta(front: FrontApproximation, extremes) -> Optional[float]:
    """max_j Delta_j, with ``extremes`` an (m, 2) array of per-objective (min, max).

    Returns None for fronts with fewer than two points.
    """
    if len(front) < 2:
        return None
    ext = np.asarray(extremes, dtype=float)
    return max(_delta_1d(front.points[:, j], ext[j, 0], ext[j, 1])
               for j in range(front.points.shape[1]))


def front_extremes(reference) -> np.ndarray:
    ref = _as_points(reference)
    return np.column_stack([ref.min(axis=0), ref.max(axis=0)])


def combined_reference(fronts) -> np.ndarray:
    pts = [f.points for f in fronts if len(f)]
    if not pts:
        return np.empty((0, 0))
    return deduplicate(nondominated_filter(np.vstack(pts)))


def metric_reports(fronts) -> dict:
    """Purity against the combined reference plus both spreads, per solver tag."""
    ref = combined_reference(fronts)
    ext = front_extremes(ref) if len(ref) else None
    out = {}
    for f in fronts:
        nd = FrontApproximation(nondominated_filter(f.points), f.solver_tag) if len(f) else f
        out[f.solver_tag] = MetricReport(
            purity=purity(nd, ref),
            gamma=spread_gamma(nd) if len(nd) else float("nan"),
            delta=spread_delta(nd, ext) if ext is not None else None,
            n_points=len(nd),
        )
    return out


def performance_profile(costs, larger_is_better: bool = False) -> list:
    """Dolan-More profile of a (solvers x problems) cost matrix.

    NaN marks an absent entry. Returns, per solver, a list of (tau, rho)
    breakpoints sorted by tau; rho at the last breakpoint is the fraction of
    problems the solver has a finite ratio on. With ``larger_is_better`` the
    values are inverted first, mapping 0 to an absent entry.
    """
    C = np.array(costs, dtype=float)
    if larger_is_better:
        with np.errstate(divide="ignore"):
            C = np.where(C > 0, 1.0 / C, np.nan)
    C = np.where(np.isfinite(C), C, np.nan)
    solved = ~np.all(np.isnan(C), axis=0)
    if not solved.all():
        log.warning("dropping %d problem column(s) with no finite cost", int((~solved).sum()))
    C = C[:, solved]
    n_s, n_p = C.shape
    if n_p == 0:
        return [[] for _ in range(n_s)]
    best = np.nanmin(C, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        R = C / best
    # a zero best cost: zero costs tie at ratio 1, positive costs are infinitely worse
    zero = best == 0
    R[:, zero] = np.where(C[:, zero] == 0, 1.0, np.inf)
    R = np.where(np.isnan(R), np.inf, R)

    profiles = []
    for r in R:
        finite = np.sort(r[np.isfinite(r)])
        taus = np.unique(finite)
        steps = [(float(t), float(np.sum(finite <= t) / n_p)) for t in taus]
        if not steps or steps[0][0] > 1.0:
            steps.insert(0, (1.0, 0.0))
        profiles.append(steps)
    return profiles
