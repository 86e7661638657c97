"""Theoretical constants and bounds, plus replay checks over recorded runs.

The calculators are plain formulas. The ``check_*`` functions take a
:class:`RunResult` and return a list of human-readable violations (empty
when the run is consistent with the corresponding guarantee).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nonsmooth import NonsmoothModel, domain_of
from .problems import HolderParams, ProblemInstance
from .solvers import RunResult, evaluate_F

REL_TOL = 1e-12


@dataclass(frozen=True)
class RateInputs:
    D: float
    f0_max: float
    f_inf: float
    nu: float
    m_nu: float

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError("diameter must be positive")
        if self.f0_max < self.f_inf:
            raise ValueError("f0_max must be >= f_inf")

    @property
    def gap(self) -> float:
        return self.f0_max - self.f_inf


@dataclass(frozen=True)
class RecurrenceParams:
    c: float
    alpha: float
    A: float
    gamma0: float

    def __post_init__(self):
        if not 0 < self.c < 1:
            raise ValueError("c must lie in (0, 1)")
        if not (self.alpha > 0 and self.A > 0 and self.gamma0 >= 0):
            raise ValueError("need alpha > 0, A > 0, gamma0 >= 0")


def smoothing_constant(nu: float, m_nu: float, eps: float) -> float:
    """Curvature L(eps) of the eps-inexact quadratic upper bound for a Hölder gradient."""
    if nu == 1.0:
        return m_nu
    e = (1.0 - nu) / (1.0 + nu)
    return (e / (2.0 * eps)) ** e * m_nu ** (2.0 / (1.0 + nu))


def linesearch_threshold(theta: float, s_minus_x_norm: float, holder: HolderParams) -> float:
    """Curvature above which the line-search acceptance test is guaranteed to pass."""
    nu, M = holder.nu, holder.m_nu
    a = abs(theta)
    first = smoothing_constant(nu, M, a / 2.0)
    second = smoothing_constant(nu, M, a * a / (4.0 * s_minus_x_norm**2)) ** ((1.0 + nu) / (2.0 * nu))
    return max(first, second)


def envelope_L_bar(xi: float, D: float, holder: HolderParams) -> float:
    nu, M = holder.nu, holder.m_nu
    if nu == 1.0:
        return M
    e = (1.0 - nu) / (1.0 + nu)
    first = (e / xi) ** e * M ** (2.0 / (1.0 + nu))
    second = (2.0 * e) ** ((1.0 - nu) / (2.0 * nu)) * M ** (1.0 / nu) * (D / xi) ** ((1.0 - nu) / nu)
    return max(first, second)


def rate_bound_pgm(inputs: RateInputs, k: int) -> float:
    nu = inputs.nu
    base = (1.0 + nu) * inputs.gap / (nu * (k + 1))
    curved = ((1.0 + nu) * inputs.m_nu ** (1.0 / nu) * inputs.D ** ((1.0 + nu) / nu) * inputs.gap
              / (nu * (k + 1))) ** (nu / (1.0 + nu))
    return max(base, curved)


def rate_bound_fgm(inputs: RateInputs, k: int, k_tilde0: int) -> float:
    # second branch read as 2^(2 + 1/nu) * M^(1/nu) * D^((1+nu)/nu) * (f0_max - f_inf)
    if k < k_tilde0:
        raise ValueError("bound only holds for k >= k_tilde0")
    nu = inputs.nu
    span = k + 1 - k_tilde0
    base = 4.0 * inputs.gap / span
    curved = (2.0 ** (2.0 + 1.0 / nu) * inputs.m_nu ** (1.0 / nu) * inputs.D ** ((1.0 + nu) / nu)
              * inputs.gap / span) ** (nu / (1.0 + nu))
    return max(base, curved)


def burn_in_index(l_init: float, l_tilde0: float) -> int:
    """ceil((log2(L_{-1} / L~_0))_+)."""
    return int(math.ceil(max(math.log2(l_init / l_tilde0), 0.0)))


def recurrence_k0(params: RecurrenceParams) -> int:
    c, alpha, A, g0 = params.c, params.alpha, params.A, params.gamma0
    if g0 == 0:
        return 0
    return int(math.ceil(max(math.log(g0 / (c * A ** (1.0 / alpha))), 0.0) / c))


def recurrence_envelope(params: RecurrenceParams, k: int, gamma_k0: float = None):
    """Return (Gamma_k, k0) for the sequence gamma_{k+1} <= gamma_k - c b_k min{1, b_k^alpha / A}.

    ``gamma_k0`` is the sequence value at index k0; when omitted, gamma0 is
    used, which is a valid upper bound for a non-increasing sequence.
    """
    k0 = recurrence_k0(params)
    if k < k0:
        raise ValueError("envelope only defined for k >= k0")
    g = params.gamma0 if gamma_k0 is None else gamma_k0
    if g <= 0:
        return 0.0, k0
    c, alpha, A = params.c, params.alpha, params.A
    return (g ** (-alpha) + c * alpha * (k - k0) / A) ** (-1.0 / alpha), k0


# ---------------------------------------------------------------------------
# trace replay
# ---------------------------------------------------------------------------

def _steps(run: RunResult):
    """Pairs (record k, record k+1) for every completed move."""
    recs = run.records
    return [(recs[j], recs[j + 1]) for j in range(len(recs) - 1) if recs[j].step is not None]


def rate_inputs(run: RunResult, p: ProblemInstance, model: NonsmoothModel) -> RateInputs:
    D = domain_of(model).diameter
    f0_max = float(np.max(run.records[0].F_x))
    return RateInputs(D=D, f0_max=f0_max, f_inf=min(p.h_lower, f0_max), nu=p.holder.nu,
                      m_nu=p.holder.m_nu)


def check_monotone(run: RunResult, slack: float = 1e-10) -> list:
    out = []
    for a, b in zip(run.records, run.records[1:]):
        if np.any(b.F_x > a.F_x + slack):
            out.append(f"k={a.k}: F increased by {np.max(b.F_x - a.F_x):.3e}")
    return out


def check_pgm_decrease(run: RunResult, holder: HolderParams, slack: float = 1e-9) -> list:
    """Per-step decrease at least (nu/(1+nu)) |theta| min{1, (|theta|/(M |s-x|^(1+nu)))^(1/nu)}."""
    nu, M = holder.nu, holder.m_nu
    out = []
    for a, b in _steps(run):
        th = abs(a.theta)
        need = nu / (1 + nu) * th * min(1.0, (th / (M * a.direction_norm ** (1 + nu))) ** (1 / nu))
        got = np.min(a.F_x - b.F_x)
        if got < need - slack:
            out.append(f"k={a.k}: decrease {got:.3e} < guaranteed {need:.3e}")
    return out


def check_fgm_acceptance(run: RunResult) -> list:
    """Re-evaluate the line-search acceptance inequality at every accepted step."""
    out = []
    for a, b in _steps(run):
        t, L, dd = a.step, a.l_k, a.direction_norm**2
        bound = a.F_x + (-0.5 * t * abs(a.theta) + 0.5 * L * t * t * dd)
        if np.any(b.F_x > bound):
            out.append(f"k={a.k}: accepted step violates the quadratic upper model")
    return out


def check_fgm_decrease(run: RunResult, slack: float = 1e-10) -> list:
    """F(x^{k+1}) - F(x^k) <= -(|theta|/4) min{1, |theta| / (2 L_k |s-x|^2)}.

    This is what the acceptance test yields for t_k = min{1, |theta|/(2 L_k |s-x|^2)}.
    """
    out = []
    for a, b in _steps(run):
        th = abs(a.theta)
        need = th / 4.0 * min(1.0, th / (2.0 * a.l_k * a.direction_norm**2))
        if np.any(a.F_x - b.F_x < need - slack):
            out.append(f"k={a.k}: decrease below the guaranteed |theta|/4 bound")
    return out


def l_tilde_trace(run: RunResult, holder: HolderParams) -> np.ndarray:
    return np.array([linesearch_threshold(a.theta, a.direction_norm, holder) for a, _ in _steps(run)])


def check_fgm_l_bound(run: RunResult, holder: HolderParams, max_inner: int = 60) -> list:
    """Inner trials below the cap and L_k <= 2 max_{j<=k} L~_j once k >= k~0."""
    steps = _steps(run)
    if not steps:
        return []
    out = []
    lt = l_tilde_trace(run, holder)
    k_tilde0 = burn_in_index(run.l_init, lt[0])
    running = np.maximum.accumulate(lt)
    for idx, (a, _) in enumerate(steps):
        if a.inner_trials >= max_inner:
            out.append(f"k={a.k}: line search hit the trial cap")
        if a.k >= k_tilde0 and a.l_k > 2.0 * running[idx] * (1 + REL_TOL):
            out.append(f"k={a.k}: L_k={a.l_k:.4g} > 2 max L~_j={2 * running[idx]:.4g}")
    return out


def check_l_envelope(run: RunResult, holder: HolderParams, D: float) -> list:
    out = []
    for a, _ in _steps(run):
        lt = linesearch_threshold(a.theta, a.direction_norm, holder)
        lb = envelope_L_bar(abs(a.theta), D, holder)
        if lt > lb * (1 + 1e-10):
            out.append(f"k={a.k}: L~_k={lt:.4g} exceeds L_bar={lb:.4g}")
    return out


def check_rate_bound(run: RunResult, p: ProblemInstance, model: NonsmoothModel) -> list:
    """min_{j<=k} |theta_j| against the sublinear rate bound of the run's solver."""
    inputs = rate_inputs(run, p, model)
    best = np.minimum.accumulate(np.abs(run.trace("theta")))
    if run.solver == "fgm":
        steps = _steps(run)
        if steps:
            k_tilde0 = burn_in_index(run.l_init, linesearch_threshold(
                steps[0][0].theta, steps[0][0].direction_norm, p.holder))
        else:
            k_tilde0 = 0
    out = []
    for k, b in enumerate(best):
        if run.solver == "pgm":
            bound = rate_bound_pgm(inputs, k)
        elif k >= k_tilde0:
            bound = rate_bound_fgm(inputs, k, k_tilde0)
        else:
            continue
        if b > bound * (1 + REL_TOL):
            out.append(f"k={k}: min |theta| = {b:.4g} exceeds rate bound {bound:.4g}")
    return out


def convex_rate_check(run: RunResult, x_star, p: ProblemInstance, model: NonsmoothModel) -> dict:
    """Check 0 <= delta_k(x*) <= |theta_k| and delta_k <= Gamma envelope for a convex H."""
    F_star = evaluate_F(p, model, np.asarray(x_star, dtype=float))
    F = np.array([r.F_x for r in run.records])
    theta = np.abs(run.trace("theta"))
    report = {"applicable": True, "note": "", "delta_theta_violations": [],
              "envelope_violations": [], "k0": None, "k_tilde0": 0}
    if np.any(F < F_star - 1e-12):
        report.update(applicable=False, note="F(x*) does not minorize the iterates")
        return report

    delta = np.min(F - F_star, axis=1)
    for k, (dk, tk) in enumerate(zip(delta, theta)):
        if dk < -1e-12 or dk > tk * (1 + REL_TOL) + 1e-12:
            report["delta_theta_violations"].append(f"k={k}: delta={dk:.4g}, |theta|={tk:.4g}")

    nu, M = p.holder.nu, p.holder.m_nu
    D = domain_of(model).diameter
    if run.solver == "pgm":
        c, A, shift = nu / (1 + nu), M ** (1 / nu) * D ** ((1 + nu) / nu), 0
    else:
        steps = _steps(run)
        shift = burn_in_index(run.l_init, linesearch_threshold(
            steps[0][0].theta, steps[0][0].direction_norm, p.holder)) if steps else 0
        c, A = 0.25, (2 * M) ** (1 / nu) * D ** ((1 + nu) / nu)
    report["k_tilde0"] = shift
    if shift >= len(delta):
        return report
    params = RecurrenceParams(c=c, alpha=1 / nu, A=A, gamma0=float(delta[shift]))
    k0 = recurrence_k0(params)
    report["k0"] = k0
    if shift + k0 >= len(delta):
        return report
    g_k0 = float(delta[shift + k0])
    for k in range(shift + k0, len(delta)):
        bound, _ = recurrence_envelope(params, k - shift, gamma_k0=g_k0)
        if delta[k] > bound * (1 + 1e-9) + 1e-15:
            report["envelope_violations"].append(f"k={k}: delta={delta[k]:.4g} > Gamma={bound:.4g}")
    return report


def theory_report(run: RunResult, p: ProblemInstance, model: NonsmoothModel,
                  max_inner: int = 60, descent_slack: float = 1e-10) -> dict:
    """All applicable replay checks for one run, keyed by check name."""
    report = {"monotone": check_monotone(run, descent_slack)}
    if run.solver == "pgm":
        report["pgm_decrease"] = check_pgm_decrease(run, p.holder)
    else:
        report["fgm_acceptance"] = check_fgm_acceptance(run)
        report["fgm_decrease"] = check_fgm_decrease(run)
        report["fgm_l_bound"] = check_fgm_l_bound(run, p.holder, max_inner)
        report["l_envelope"] = check_l_envelope(run, p.holder, domain_of(model).diameter)
    report["rate_bound"] = check_rate_bound(run, p, model)
    return report
