"""The two nonsmooth parts G used in the experiments.

* :class:`IndicatorModel` -- every g_i is the indicator of a box.
* :class:`SupportFunctionModel` -- g_i(x) = max { <x, z> : -delta e <= B_i z <= delta e },
  finite on a box domain and +inf outside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .lp import LinearProgram, LpError, LpStatus, solve_lp
from .problems import BoxBounds

DELTA_RANGE = (0.01, 0.1)
MAX_CONDITION = 1e8
MAX_REGENERATIONS = 100
MEMBERSHIP_SLACK = 1e-12


@dataclass(frozen=True)
class IndicatorModel:
    box: BoxBounds

    case = "case_i"


@dataclass(frozen=True)
class SupportFunctionModel:
    B: np.ndarray  # (m, n, n)
    delta: float
    domain: BoxBounds

    case = "case_ii"

    def __post_init__(self):
        B = np.array(self.B, dtype=float)
        if B.ndim != 3 or B.shape[1] != B.shape[2]:
            raise ValueError("B must have shape (m, n, n)")
        if B.shape[2] != self.domain.n:
            raise ValueError("B_i dimension does not match the domain")
        if not DELTA_RANGE[0] <= self.delta <= DELTA_RANGE[1]:
            raise ValueError(f"delta must lie in [{DELTA_RANGE[0]}, {DELTA_RANGE[1]}]")
        for Bi in B:
            if not np.linalg.cond(Bi) <= MAX_CONDITION:
                raise ValueError("B_i is singular or too ill-conditioned")
        B.setflags(write=False)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "delta", float(self.delta))

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def n(self) -> int:
        return self.B.shape[1]

    def C(self, i: int) -> np.ndarray:
        return np.vstack([self.B[i], -self.B[i]])

    def b(self, i: int) -> np.ndarray:
        return np.full(2 * self.n, self.delta)

    def to_dict(self) -> dict:
        return {"B": self.B.tolist(), "delta": self.delta,
                "lower": self.domain.lower.tolist(), "upper": self.domain.upper.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SupportFunctionModel":
        return cls(np.array(d["B"]), d["delta"], BoxBounds(np.array(d["lower"]), np.array(d["upper"])))


NonsmoothModel = Union[IndicatorModel, SupportFunctionModel]


def sample_support_model(n: int, m: int, domain: BoxBounds, seed) -> SupportFunctionModel:
    """Draw B_i with i.i.d. U[0, 1] entries and one shared delta ~ U[0.01, 0.1].

    A B_i whose condition number exceeds 1e8 is redrawn.
    """
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    rng = np.random.default_rng(seed)
    mats = []
    for _ in range(m):
        for _attempt in range(MAX_REGENERATIONS):
            Bi = rng.uniform(0.0, 1.0, size=(n, n))
            if np.linalg.cond(Bi) <= MAX_CONDITION:
                break
        else:
            raise RuntimeError("could not draw a well-conditioned B_i")
        mats.append(Bi)
    delta = rng.uniform(*DELTA_RANGE)
    return SupportFunctionModel(np.array(mats), delta, domain)


def domain_of(model: NonsmoothModel) -> BoxBounds:
    if isinstance(model, IndicatorModel):
        return model.box
    return model.domain


def support_lp(model: SupportFunctionModel, i: int, x) -> LinearProgram:
    """max <x, z> s.t. C_i z <= b_i, posed as a minimization over free z."""
    n = model.n
    return LinearProgram(c=-np.asarray(x, dtype=float), A_ub=model.C(i), b_ub=model.b(i),
                         lower=np.full(n, -np.inf), upper=np.full(n, np.inf))


def evaluate_g(model: NonsmoothModel, i: int, x) -> float:
    x = np.asarray(x, dtype=float)
    if isinstance(model, IndicatorModel):
        if not 0 <= i:
            raise IndexError(i)
        return 0.0 if model.box.contains(x, MEMBERSHIP_SLACK) else np.inf
    if not 0 <= i < model.m:
        raise IndexError(i)
    if not model.domain.contains(x, MEMBERSHIP_SLACK):
        return np.inf
    sol = solve_lp(support_lp(model, i, x))
    if sol.status is LpStatus.UNBOUNDED:
        raise LpError("support-function LP unbounded: Z_i is not compact")
    if not sol.ok:
        raise LpError(f"support-function LP failed: {sol.status.value}")
    return -sol.objective_value


def evaluate_G(model: NonsmoothModel, x, m: int) -> np.ndarray:
    """All m components of G at x."""
    if isinstance(model, IndicatorModel):
        return np.full(m, evaluate_g(model, 0, x))
    return np.array([evaluate_g(model, i, x) for i in range(model.m)])
