"""Dense linear programming: a two-phase tableau simplex and a vertex-enumeration oracle.

Problems are stated as::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lower <= x <= upper

Bounds may be infinite. The default bounds are ``0 <= x < inf``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-9

_COST_TOL = 1e-10
_PIVOT_TOL = 1e-9
_DEGENERATE_LIMIT = 1000

BRUTE_FORCE_MAX_VARS = 6
BRUTE_FORCE_MAX_CONSTRAINTS = 20


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


class LpError(RuntimeError):
    """Raised by callers that require an optimal LP and did not get one."""


def _as_matrix(A, n):
    if A is None:
        return np.zeros((0, n))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return np.zeros((0, n))
    return A


def _as_vector(b, size):
    if b is None:
        return np.zeros(size)
    return np.asarray(b, dtype=float).reshape(-1)


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.size
        A_ub = _as_matrix(self.A_ub, n)
        A_eq = _as_matrix(self.A_eq, n)
        b_ub = _as_vector(self.b_ub, A_ub.shape[0])
        b_eq = _as_vector(self.b_eq, A_eq.shape[0])
        lower = np.zeros(n) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (n,)).copy()
        upper = np.full(n, np.inf) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (n,)).copy()

        if A_ub.shape[1] != n or A_eq.shape[1] != n:
            raise ValueError("constraint matrices must have one column per variable")
        if b_ub.size != A_ub.shape[0] or b_eq.size != A_eq.shape[0]:
            raise ValueError("right-hand sides do not match constraint rows")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")

        for name, value in [("c", c), ("A_ub", A_ub), ("b_ub", b_ub), ("A_eq", A_eq),
                            ("b_eq", b_eq), ("lower", lower), ("upper", upper)]:
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_constraints(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]

    def residuals(self, x):
        """Return (equality, inequality, bound) worst-case violations at ``x``."""
        eq = np.max(np.abs(self.A_eq @ x - self.b_eq), initial=0.0)
        ub = np.max(self.A_ub @ x - self.b_ub, initial=0.0)
        bnd = max(np.max(self.lower - x, initial=0.0), np.max(x - self.upper, initial=0.0))
        return float(eq), float(max(ub, 0.0)), float(max(bnd, 0.0))


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective_value: float = np.nan
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status is LpStatus.OPTIMAL


# ---------------------------------------------------------------------------
# standard form
# ---------------------------------------------------------------------------

@dataclass
class _StandardForm:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    # x = T @ y + shift recovers the original variables from the first n_struct columns
    T: np.ndarray
    shift: np.ndarray
    n_struct: int
    slack_row: np.ndarray  # slack column of each row, or -1


def _standard_form(lp: LinearProgram) -> _StandardForm:
    n = lp.n_vars
    lo, up = lp.lower, lp.upper
    cols = []  # (original index, sign)
    shift = np.zeros(n)
    bound_rows = []  # (struct column, width)
    for j in range(n):
        if np.isfinite(lo[j]):
            shift[j] = lo[j]
            cols.append((j, 1.0))
            if np.isfinite(up[j]):
                bound_rows.append((len(cols) - 1, up[j] - lo[j]))
        elif np.isfinite(up[j]):
            shift[j] = up[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))

    n_struct = len(cols)
    T = np.zeros((n, n_struct))
    for k, (j, sgn) in enumerate(cols):
        T[j, k] = sgn

    A_ub = lp.A_ub @ T
    b_ub = lp.b_ub - lp.A_ub @ shift
    A_eq = lp.A_eq @ T
    b_eq = lp.b_eq - lp.A_eq @ shift

    n_bnd = len(bound_rows)
    B = np.zeros((n_bnd, n_struct))
    b_bnd = np.zeros(n_bnd)
    for r, (k, width) in enumerate(bound_rows):
        B[r, k] = 1.0
        b_bnd[r] = width

    G = np.vstack([A_ub, B])
    h = np.concatenate([b_ub, b_bnd])
    n_ineq = G.shape[0]
    n_eq = A_eq.shape[0]
    n_cols = n_struct + n_ineq

    A = np.zeros((n_ineq + n_eq, n_cols))
    A[:n_ineq, :n_struct] = G
    A[:n_ineq, n_struct:] = np.eye(n_ineq)
    A[n_ineq:, :n_struct] = A_eq
    b = np.concatenate([h, b_eq])
    c = np.concatenate([lp.c @ T, np.zeros(n_ineq)])

    slack_row = np.full(n_ineq + n_eq, -1)
    slack_row[:n_ineq] = n_struct + np.arange(n_ineq)
    return _StandardForm(A=A, b=b, c=c, T=T, shift=shift, n_struct=n_struct, slack_row=slack_row)


# ---------------------------------------------------------------------------
# tableau simplex
# ---------------------------------------------------------------------------

def _pivot(T, i, j):
    T[i] /= T[i, j]
    col = T[:, j].copy()
    col[i] = 0.0
    T -= np.outer(col, T[i])


def _simplex(T, basis, allowed, max_iter, state):
    """Minimize the objective stored in the last tableau row, in place."""
    m = T.shape[0] - 1
    while True:
        if state["iters"] >= max_iter:
            return LpStatus.NUMERICAL_FAILURE
        cost = T[-1, :-1]
        cand = allowed & (cost < -_COST_TOL)
        if not cand.any():
            return LpStatus.OPTIMAL
        if state["bland"]:
            j = int(np.flatnonzero(cand)[0])
        else:
            j = int(np.argmin(np.where(cand, cost, np.inf)))

        col = T[:m, j]
        pos = col > _PIVOT_TOL
        if not pos.any():
            return LpStatus.UNBOUNDED
        rhs = T[:m, -1]
        ratios = np.full(m, np.inf)
        ratios[pos] = rhs[pos] / col[pos]
        rmin = ratios.min()
        ties = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + abs(rmin)))
        if ties.size == 1:
            i = int(ties[0])
        elif state["bland"]:
            i = int(ties[np.argmin(basis[ties])])
        else:
            i = int(ties[np.argmax(col[ties])])

        _pivot(T, i, j)
        basis[i] = j
        state["iters"] += 1
        if rmin <= 1e-12:
            state["degenerate"] += 1
            if state["degenerate"] > _DEGENERATE_LIMIT:
                state["bland"] = True


def solve_lp(lp: LinearProgram, feas_tol: float = FEAS_TOL) -> LpSolution:
    """Solve ``lp`` with a two-phase dense simplex.

    Dantzig pricing is used until 1000 degenerate pivots have been taken, after
    which Bland's rule takes over. The pivot budget is 50 * (columns + rows) of
    the internal standard form; exhausting it returns ``numerical_failure``.
    """
    sf = _standard_form(lp)
    A, b = sf.A.copy(), sf.b.copy()
    m, N = A.shape
    max_iter = 50 * (N + m)
    state = {"iters": 0, "degenerate": 0, "bland": False}

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # rows whose own slack keeps a +1 coefficient start with that slack basic
    basis = np.where(neg, -1, sf.slack_row)
    art_rows = np.flatnonzero(basis < 0)
    n_art = art_rows.size

    T = np.zeros((m + 1, N + n_art + 1))
    T[:m, :N] = A
    T[:m, -1] = b
    for k, r in enumerate(art_rows):
        T[r, N + k] = 1.0
        basis[r] = N + k

    scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))
    if n_art:
        T[-1, :N] = -A[art_rows].sum(axis=0)
        T[-1, -1] = -b[art_rows].sum()
        allowed = np.ones(N + n_art, dtype=bool)
        status = _simplex(T, basis, allowed, max_iter, state)
        if status is LpStatus.NUMERICAL_FAILURE:
            return LpSolution(LpStatus.NUMERICAL_FAILURE, iterations=state["iters"])
        if -T[-1, -1] > feas_tol * scale:
            return LpSolution(LpStatus.INFEASIBLE, iterations=state["iters"])

        # drive remaining artificials out of the basis, dropping redundant rows
        keep = np.ones(m + 1, dtype=bool)
        for r in range(m):
            if basis[r] >= N:
                row = T[r, :N]
                cand = np.flatnonzero(np.abs(row) > _PIVOT_TOL)
                if cand.size:
                    j = int(cand[np.argmax(np.abs(row[cand]))])
                    _pivot(T, r, j)
                    basis[r] = j
                else:
                    keep[r] = False
        T = np.delete(T[keep], np.s_[N:N + n_art], axis=1)
        basis = basis[keep[:m]]
        A, b = A[keep[:m]], b[keep[:m]]
        m = basis.size

    cB = sf.c[basis]
    T[-1, :N] = sf.c - cB @ T[:m, :N]
    T[-1, -1] = -cB @ T[:m, -1]
    status = _simplex(T, basis, np.ones(N, dtype=bool), max_iter, state)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=state["iters"])

    y = np.zeros(N)
    y[basis] = T[:m, -1]
    # re-solve the basic system from the original data to shed accumulated pivot error
    try:
        yB = np.linalg.solve(A[:, basis], b)
        if np.all(np.isfinite(yB)):
            y[basis] = yB
    except np.linalg.LinAlgError:
        pass
    y = np.maximum(y, 0.0)

    x = sf.T @ y[:sf.n_struct] + sf.shift
    x = np.clip(x, lp.lower, lp.upper)
    if max(lp.residuals(x)) > feas_tol:
        return LpSolution(LpStatus.NUMERICAL_FAILURE, x=x, iterations=state["iters"])
    return LpSolution(LpStatus.OPTIMAL, x=x, objective_value=float(lp.c @ x),
                      iterations=state["iters"])


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def _inequality_rows(lp: LinearProgram):
    rows, rhs = [lp.A_ub], [lp.b_ub]
    n = lp.n_vars
    eye = np.eye(n)
    fin_lo = np.isfinite(lp.lower)
    fin_up = np.isfinite(lp.upper)
    rows += [-eye[fin_lo], eye[fin_up]]
    rhs += [-lp.lower[fin_lo], lp.upper[fin_up]]
    return np.vstack(rows), np.concatenate(rhs)


def _best_vertex(G, h, E, f, c, tol):
    n = c.size
    best_val, best_x = np.inf, None
    n_free = n - np.linalg.matrix_rank(E) if E.shape[0] else n
    if n_free < 0:
        return best_val, best_x
    for active in itertools.combinations(range(G.shape[0]), n_free):
        M = np.vstack([E, G[list(active)]])
        rhs = np.concatenate([f, h[list(active)]])
        if np.linalg.matrix_rank(M) < n:
            continue
        x = np.linalg.lstsq(M, rhs, rcond=None)[0]
        if np.max(np.abs(M @ x - rhs)) > tol:
            continue
        if G.shape[0] and np.max(G @ x - h) > tol:
            continue
        if E.shape[0] and np.max(np.abs(E @ x - f)) > tol:
            continue
        val = c @ x
        if val < best_val - 1e-14:
            best_val, best_x = val, x
    return best_val, best_x


def brute_force_lp(lp: LinearProgram, tol: float = 1e-9) -> LpSolution:
    """Solve a small LP exactly by enumerating every vertex of its feasible set.

    Only meant as a test oracle. Requires the full constraint system to have
    rank ``n`` (a pointed feasible set); unboundedness is detected by the same
    enumeration applied to the recession cone cut by the unit box.
    """
    n = lp.n_vars
    G, h = _inequality_rows(lp)
    E, f = lp.A_eq, lp.b_eq
    if n > BRUTE_FORCE_MAX_VARS or G.shape[0] + E.shape[0] > BRUTE_FORCE_MAX_CONSTRAINTS:
        raise ValueError("instance too large for vertex enumeration")
    if np.linalg.matrix_rank(np.vstack([G, E])) < n:
        raise ValueError("feasible set has a lineality space; vertex enumeration undefined")

    val, x = _best_vertex(G, h, E, f, lp.c, tol)
    if x is None:
        return LpSolution(LpStatus.INFEASIBLE)

    if np.all(np.isfinite(lp.lower)) and np.all(np.isfinite(lp.upper)):
        return LpSolution(LpStatus.OPTIMAL, x=x, objective_value=float(lp.c @ x))
    # recession directions d: G d <= 0, E d = 0, |d| <= 1
    Gd = np.vstack([G, np.eye(n), -np.eye(n)])
    hd = np.concatenate([np.zeros(G.shape[0]), np.ones(2 * n)])
    dval, _ = _best_vertex(Gd, hd, E, np.zeros(E.shape[0]), lp.c, tol)
    if dval < -tol:
        return LpSolution(LpStatus.UNBOUNDED)
    return LpSolution(LpStatus.OPTIMAL, x=x, objective_value=float(lp.c @ x))
