"""The gap function theta(x) and its minimizer s(x).

theta(x) = min_u max_i { g_i(u) - g_i(x) + <grad h_i(x), u - x> }

is computed as a linear program in both nonsmooth cases. ``brute_force_gap``
evaluates the same min-max over a grid and exists for testing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lp import LinearProgram, LpError, solve_lp
from .nonsmooth import (IndicatorModel, NonsmoothModel, SupportFunctionModel, domain_of,
                        evaluate_g)
from .problems import ProblemInstance

ENCODING_TOL = 1e-7
BRUTE_FORCE_MAX_DIM = 3


@dataclass
class GapResult:
    theta: float
    s: np.ndarray
    per_objective: np.ndarray
    fevals_charged: int = 0
    # g_i(x) for every objective (zeros in the indicator case)
    g_x: np.ndarray = None
    lp_solves: int = 0


def _require(sol, what):
    if not sol.ok:
        raise LpError(f"{what} LP returned {sol.status.value}")
    return sol


def solve_gap_case_i(p: ProblemInstance, model: IndicatorModel, x) -> GapResult:
    """Gap subproblem for G = indicator of a box; variables (u, tau)."""
    x = np.asarray(x, dtype=float)
    J = p.jacobian(x)
    n, m = p.n, p.m
    box = model.box
    lp = LinearProgram(
        c=np.r_[np.zeros(n), 1.0],
        A_ub=np.hstack([J, -np.ones((m, 1))]),
        b_ub=J @ x,
        lower=np.r_[box.lower, -np.inf],
        upper=np.r_[box.upper, np.inf],
    )
    sol = _require(solve_lp(lp), "gap (indicator)")
    s = sol.x[:n]
    per_obj = J @ (s - x)
    theta = min(float(sol.x[n]), 0.0)
    return GapResult(theta=theta, s=s, per_objective=per_obj, fevals_charged=0,
                     g_x=np.zeros(m), lp_solves=1)


def solve_gap_case_ii(p: ProblemInstance, model: SupportFunctionModel, x) -> GapResult:
    """Gap subproblem for support-function g_i, using the LP dual of each g_i(u).

    Variables are ordered (u, tau, w_1, ..., w_m) with w_i >= 0 of length 2n.
    """
    x = np.asarray(x, dtype=float)
    n, m = p.n, p.m
    if model.m != m:
        raise ValueError("model and problem disagree on the number of objectives")
    J = p.jacobian(x)
    g_x = np.array([evaluate_g(model, i, x) for i in range(m)])

    nw = 2 * n
    nv = n + 1 + m * nw
    A_ub = np.zeros((m, nv))
    A_ub[:, :n] = J
    A_ub[:, n] = -1.0
    A_eq = np.zeros((m * n, nv))
    for i in range(m):
        cols = slice(n + 1 + i * nw, n + 1 + (i + 1) * nw)
        A_ub[i, cols] = model.b(i)
        A_eq[i * n:(i + 1) * n, :n] = -np.eye(n)
        A_eq[i * n:(i + 1) * n, cols] = model.C(i).T
    b_ub = g_x + J @ x
    dom = model.domain
    lp = LinearProgram(
        c=np.r_[np.zeros(n), 1.0, np.zeros(m * nw)],
        A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.zeros(m * n),
        lower=np.r_[dom.lower, -np.inf, np.zeros(m * nw)],
        upper=np.r_[dom.upper, np.inf, np.full(m * nw, np.inf)],
    )
    sol = _require(solve_lp(lp), "gap (support function)")
    s = sol.x[:n]
    g_s = np.empty(m)
    for i in range(m):
        w = sol.x[n + 1 + i * nw:n + 1 + (i + 1) * nw]
        if np.max(np.abs(model.C(i).T @ w - s)) > ENCODING_TOL:
            raise LpError("dual encoding violated: C_i^T w_i != u")
        g_s[i] = evaluate_g(model, i, s)
        if g_s[i] > model.b(i) @ w + ENCODING_TOL:
            raise LpError("dual encoding violated: g_i(u) > <b_i, w_i>")
    per_obj = g_s - g_x + J @ (s - x)
    theta = min(float(sol.x[n]), 0.0)
    return GapResult(theta=theta, s=s, per_objective=per_obj, fevals_charged=m,
                     g_x=g_x, lp_solves=1 + 2 * m)


def solve_gap(p: ProblemInstance, model: NonsmoothModel, x) -> GapResult:
    if isinstance(model, IndicatorModel):
        return solve_gap_case_i(p, model, x)
    return solve_gap_case_ii(p, model, x)


def support_values_by_vertices(model: SupportFunctionModel, i: int, U) -> np.ndarray:
    """g_i at each row of U, maximizing over the 2^n vertices B_i^{-1}(+-delta)."""
    n = model.n
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    verts = np.linalg.solve(model.B[i], model.delta * signs.T).T  # (2^n, n)
    return np.max(np.atleast_2d(U) @ verts.T, axis=1)


def brute_force_gap(p: ProblemInstance, model: NonsmoothModel, x, grid_per_dim: int) -> GapResult:
    """Minimize the linearized max over a uniform grid of the domain box."""
    if p.n > BRUTE_FORCE_MAX_DIM:
        raise ValueError("grid oracle limited to n <= 3")
    x = np.asarray(x, dtype=float)
    box = domain_of(model)
    axes = [np.linspace(lo, up, grid_per_dim) for lo, up in zip(box.lower, box.upper)]
    U = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.n)
    J = p.jacobian(x)
    vals = (U - x) @ J.T  # (N, m)
    if isinstance(model, SupportFunctionModel):
        g_x = np.array([support_values_by_vertices(model, i, x)[0] for i in range(p.m)])
        for i in range(p.m):
            vals[:, i] += support_values_by_vertices(model, i, U) - g_x[i]
    else:
        g_x = np.zeros(p.m)
    worst = vals.max(axis=1)
    k = int(np.argmin(worst))
    return GapResult(theta=min(float(worst[k]), 0.0), s=U[k], per_objective=vals[k],
                     fevals_charged=0, g_x=g_x)
