"""Smooth parts H of the benchmark problems, with box domains and Hölder data.

Every objective function here accepts a single point of shape ``(n,)`` or a
batch of shape ``(N, n)``; values come back as ``(m,)`` / ``(N, m)`` and
Jacobians as ``(m, n)`` / ``(N, m, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache, partial
from typing import Callable

import numpy as np

PROBLEM_NAMES = (
    "BK1", "IKK1", "IM1", "JOS1", "Lov1", "MAN1", "MAN2", "MAN3",
    "MGH33", "MHHM2", "SP1", "Toi8", "VU1", "VU2", "SHARED-MIN",
)

# problems rows of the benchmark table (SHARED-MIN is a test fixture)
BENCHMARK_PROBLEMS = PROBLEM_NAMES[:-1]

MAN_EXPONENTS = {"MAN1": 1.3, "MAN2": 1.6, "MAN3": 2.0}

HOLDER_SAMPLES = 10_000
HOLDER_SEED = 7
HOLDER_SAFETY = 1.1


@dataclass(frozen=True)
class BoxBounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        if lo.shape != up.shape or np.any(lo > up):
            raise ValueError("box needs matching bounds with lower <= upper")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(up))):
            raise ValueError("box must be bounded")
        lo.setflags(write=False)
        up.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @classmethod
    def cube(cls, lo: float, up: float, n: int) -> "BoxBounds":
        return cls(np.full(n, float(lo)), np.full(n, float(up)))

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x, slack: float = 1e-12) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    def project(self, x):
        return np.clip(x, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, size=None):
        shape = (self.n,) if size is None else (size, self.n)
        return rng.uniform(self.lower, self.upper, size=shape)


@dataclass(frozen=True)
class HolderParams:
    nu: float
    m_nu: float
    provenance: str = "analytic"

    def __post_init__(self):
        if not 0.0 < self.nu <= 1.0:
            raise ValueError(f"Hölder exponent must lie in (0, 1], got {self.nu}")
        if not self.m_nu > 0.0:
            raise ValueError(f"Hölder constant must be positive, got {self.m_nu}")
        if self.provenance not in ("analytic", "estimated"):
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    n: int
    m: int
    value: Callable = field(repr=False)
    jacobian: Callable = field(repr=False)
    box: BoxBounds = field(repr=False)
    holder: HolderParams = None
    # lower bound of min_i inf_box h_i, used by the rate bounds
    h_lower: float = 0.0
    # points known to be Pareto stationary for the box-constrained problem
    stationary_points: tuple = field(default=(), repr=False)
    convex: bool = False


def evaluate_h(p: ProblemInstance, x) -> np.ndarray:
    return p.value(np.asarray(x, dtype=float))


def evaluate_jacobian(p: ProblemInstance, x) -> np.ndarray:
    return p.jacobian(np.asarray(x, dtype=float))


def _stack(*cols):
    return np.stack(cols, axis=-1)


def _jac(rows):
    # rows: list over objectives of gradient arrays shaped (..., n)
    return np.stack(rows, axis=-2)


# --- BK1 -------------------------------------------------------------------

def _bk1(x):
    return _stack(np.sum(x**2, axis=-1), np.sum((x - 5.0) ** 2, axis=-1))


def _bk1_jac(x):
    return _jac([2.0 * x, 2.0 * (x - 5.0)])


# --- IKK1 ------------------------------------------------------------------

def _ikk1(x):
    x1, x2 = x[..., 0], x[..., 1]
    return _stack(x1**2, (x1 - 20.0) ** 2, x2**2)


def _ikk1_jac(x):
    x1, x2 = x[..., 0], x[..., 1]
    z = np.zeros_like(x1)
    return _jac([_stack(2 * x1, z), _stack(2 * (x1 - 20.0), z), _stack(z, 2 * x2)])


# --- IM1 -------------------------------------------------------------------

def _im1(x):
    x1, x2 = x[..., 0], x[..., 1]
    return _stack(2.0 * np.sqrt(x1), x1 * (1.0 - x2) + 5.0)


def _im1_jac(x):
    x1, x2 = x[..., 0], x[..., 1]
    z = np.zeros_like(x1)
    return _jac([_stack(1.0 / np.sqrt(x1), z), _stack(1.0 - x2, -x1)])


# --- JOS1 ------------------------------------------------------------------

def _jos1(x):
    n = x.shape[-1]
    return _stack(np.sum(x**2, axis=-1) / n, np.sum((x - 2.0) ** 2, axis=-1) / n)


def _jos1_jac(x):
    n = x.shape[-1]
    return _jac([2.0 * x / n, 2.0 * (x - 2.0) / n])


# --- Lov1 ------------------------------------------------------------------

def _lov1(x):
    x1, x2 = x[..., 0], x[..., 1]
    return _stack(1.05 * x1**2 + 0.98 * x2**2,
                  0.99 * (x1 - 3.0) ** 2 + 1.03 * (x2 - 2.5) ** 2)


def _lov1_jac(x):
    x1, x2 = x[..., 0], x[..., 1]
    return _jac([_stack(2.1 * x1, 1.96 * x2),
                 _stack(1.98 * (x1 - 3.0), 2.06 * (x2 - 2.5))])


# --- MAN -------------------------------------------------------------------

_MAN_B = (np.array([-0.6, -0.6]), np.array([-0.5, -0.5]))


def _man(x, p):
    return _stack(*[np.sum(np.abs(x - b) ** p, axis=-1) / p for b in _MAN_B])


def _man_jac(x, p):
    # Q_i = I, so row i is phi(x - b_i) with phi(t) = sign(t)|t|^(p-1)
    return _jac([np.sign(x - b) * np.abs(x - b) ** (p - 1.0) for b in _MAN_B])


# --- MGH33 -----------------------------------------------------------------

_MGH33_N = 10


def _mgh33(x):
    a = np.arange(1, x.shape[-1] + 1, dtype=float)
    ax = x @ a
    i = np.arange(1, _MGH33_N + 1, dtype=float)
    return (i * ax[..., None] - 1.0) ** 2


def _mgh33_jac(x):
    a = np.arange(1, x.shape[-1] + 1, dtype=float)
    ax = x @ a
    i = np.arange(1, _MGH33_N + 1, dtype=float)
    coef = 2.0 * (i * ax[..., None] - 1.0) * i
    return coef[..., :, None] * a


# --- MHHM2 -----------------------------------------------------------------

_MHHM2_CENTERS = np.array([[0.8, 0.6], [0.85, 0.7], [0.75, 0.85]])


def _mhhm2(x):
    return np.sum((x[..., None, :] - _MHHM2_CENTERS) ** 2, axis=-1)


def _mhhm2_jac(x):
    return 2.0 * (x[..., None, :] - _MHHM2_CENTERS)


# --- SP1 -------------------------------------------------------------------

def _sp1(x):
    x1, x2 = x[..., 0], x[..., 1]
    d = (x1 - x2) ** 2
    return _stack((x1 - 1.0) ** 2 + d, (x2 - 3.0) ** 2 + d)


def _sp1_jac(x):
    x1, x2 = x[..., 0], x[..., 1]
    d = x1 - x2
    return _jac([_stack(2 * (x1 - 1.0) + 2 * d, -2 * d),
                 _stack(2 * d, 2 * (x2 - 3.0) - 2 * d)])


# --- Toi8 ------------------------------------------------------------------

def _toi8(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    return _stack((2 * x1 - 1.0) ** 2, 2.0 * (2 * x1 - x2) ** 2, 3.0 * (2 * x2 - x3) ** 2)


def _toi8_jac(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    z = np.zeros_like(x1)
    r1, r2, r3 = 2 * x1 - 1.0, 2 * x1 - x2, 2 * x2 - x3
    return _jac([_stack(4 * r1, z, z),
                 _stack(8 * r2, -4 * r2, z),
                 _stack(z, 12 * r3, -6 * r3)])


# --- VU1 / VU2 -------------------------------------------------------------

def _vu1(x):
    x1, x2 = x[..., 0], x[..., 1]
    return _stack(1.0 / (x1**2 + x2**2 + 1.0), x1**2 + 3.0 * x2**2 + 1.0)


def _vu1_jac(x):
    x1, x2 = x[..., 0], x[..., 1]
    q = -2.0 / (x1**2 + x2**2 + 1.0) ** 2
    return _jac([_stack(q * x1, q * x2), _stack(2 * x1, 6 * x2)])


def _vu2(x):
    x1, x2 = x[..., 0], x[..., 1]
    return _stack(x1 + x2 + 1.0, x1**2 + 2.0 * x2 - 1.0)


def _vu2_jac(x):
    x1 = x[..., 0]
    one = np.ones_like(x1)
    return _jac([_stack(one, one), _stack(2 * x1, 2 * one)])


# --- SHARED-MIN ------------------------------------------------------------

_SHARED_WEIGHTS = np.array([1.0, 2.0])


def _shared(x):
    return _SHARED_WEIGHTS * np.sum(x**2, axis=-1)[..., None]


def _shared_jac(x):
    return 2.0 * _SHARED_WEIGHTS[:, None] * x[..., None, :]


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

# name: (n, m, value, jacobian, box lower, box upper, Lipschitz constant, h lower bound,
#        stationary points, convex)
_TABLE = {
    "BK1": (2, 2, _bk1, _bk1_jac, -5, 10, 2.0, 0.0, [(0.0, 0.0), (5.0, 5.0), (2.0, 2.0)], True),
    "IKK1": (2, 3, _ikk1, _ikk1_jac, -50, 50, 2.0, 0.0, [(0.0, 0.0), (10.0, 0.0)], True),
    # within [1,4]x[1,2]: |f1''| <= 1/2 and the Hessian of f2 has norm 1
    "IM1": (2, 2, _im1, _im1_jac, (1, 1), (4, 2), 1.0, 1.0, [(1.0, 1.5), (1.0, 1.0)], False),
    "JOS1": (10, 2, _jos1, _jos1_jac, -100, 100, 0.2, 0.0, [tuple([1.0] * 10)], True),
    "Lov1": (2, 2, _lov1, _lov1_jac, -10, 10, 2.1, 0.0, [(0.0, 0.0)], True),
    "MGH33": (10, 10, _mgh33, _mgh33_jac, -1, 1, 2.0 * 100 * 385, 0.0, [tuple([0.5 / 55] * 10)], True),
    "MHHM2": (2, 3, _mhhm2, _mhhm2_jac, 0, 1, 2.0, 0.0, [(0.8, 0.6)], True),
    # Hessians of both objectives have eigenvalues 3 +/- sqrt(5)
    "SP1": (2, 2, _sp1, _sp1_jac, -100, 100, 3.0 + 5.0**0.5, 0.0, [(1.0, 1.0)], True),
    # largest Hessian eigenvalue: 3 * 2 * |(2, -1)|^2 = 30
    "Toi8": (3, 3, _toi8, _toi8_jac, -1, 1, 30.0, 0.0, [(0.5, 1.0, 0.5)], True),
    # |Hess f1| <= 2 everywhere, Hess f2 = diag(2, 6)
    "VU1": (2, 2, _vu1, _vu1_jac, -3, 3, 6.0, 1.0 / 19.0, [(0.0, 0.0)], False),
    "VU2": (2, 2, _vu2, _vu2_jac, -3, 3, 2.0, -7.0, [(0.0, -3.0), (-3.0, -3.0)], True),
    "SHARED-MIN": (2, 2, _shared, _shared_jac, -1, 1, 4.0, 0.0, [(0.0, 0.0)], True),
}


def _box(n, lo, up):
    return BoxBounds(np.broadcast_to(np.asarray(lo, dtype=float), (n,)).copy(),
                     np.broadcast_to(np.asarray(up, dtype=float), (n,)).copy())


def estimate_holder_constant(p: ProblemInstance, nu: float, samples: int = HOLDER_SAMPLES,
                             seed: int = HOLDER_SEED, safety: float = HOLDER_SAFETY) -> float:
    """Sampled Hölder modulus of the gradients over the box, inflated by ``safety``.

    Returns ``safety * max_{pairs, i} |grad h_i(x) - grad h_i(y)| / |x - y|^nu``.
    A zero result (constant objective) is returned as is; HolderParams rejects it.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must lie in (0, 1]")
    if samples < 1:
        raise ValueError("need at least one sample pair")
    rng = np.random.default_rng(seed)
    X = p.box.sample(rng, samples)
    Y = p.box.sample(rng, samples)
    dist = np.linalg.norm(X - Y, axis=1)
    ok = dist > 0
    num = np.linalg.norm(p.jacobian(X) - p.jacobian(Y), axis=2)  # (samples, m)
    ratio = num[ok] / dist[ok, None] ** nu
    return safety * float(np.max(ratio, initial=0.0))


@lru_cache(maxsize=None)
def construct_problem(name: str) -> ProblemInstance:
    if name in MAN_EXPONENTS:
        return _construct_man(name)
    try:
        n, m, f, jac, lo, up, lip, h_lower, stat, convex = _TABLE[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}") from None
    return ProblemInstance(
        name=name, n=n, m=m, value=f, jacobian=jac, box=_box(n, lo, up),
        holder=HolderParams(1.0, lip), h_lower=h_lower,
        stationary_points=tuple(np.array(s) for s in stat), convex=convex,
    )


def _construct_man(name: str) -> ProblemInstance:
    p_exp = MAN_EXPONENTS[name]
    base = ProblemInstance(
        name=name, n=2, m=2, value=partial(_man, p=p_exp), jacobian=partial(_man_jac, p=p_exp),
        box=_box(2, -1, 1), h_lower=0.0,
        stationary_points=(np.array([-0.6, -0.6]), np.array([-0.55, -0.55])), convex=True,
    )
    if p_exp == 2.0:
        holder = HolderParams(1.0, 1.0)
    else:
        nu = p_exp - 1.0
        holder = HolderParams(nu, estimate_holder_constant(base, nu), provenance="estimated")
    return ProblemInstance(**{**base.__dict__, "holder": holder})
