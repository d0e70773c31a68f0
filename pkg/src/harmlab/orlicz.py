"""Young functions and the Orlicz averages built on them.

Three parametric families are provided (``Power``, ``LLogL``, ``ExpL``) plus
``Complement``, a numerical Legendre transform used to build exactly
complementary pairs.  All norms are normalized averages over an interval:
``||f||_{B,Q} = inf{lam > 0 : mean_Q B(|f|/lam) <= 1}``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import DomainError
from .grid import GridFunction, Interval, _check_same_grid

__all__ = [
    "YoungFunction", "Power", "LLogL", "ExpL", "Complement", "PHI", "PSI",
    "ComplementaryPair", "PHI_PSI", "young_eval", "young_inverse",
    "log_plus", "phi", "luxemburg_norm", "rao_ren_norm", "generalized_holder",
    "luxemburg_of_values",
]


def log_plus(t):
    """``max(log t, 0)`` with ``log_plus(0) = 0``."""
    t = np.asarray(t, dtype=float)
    return np.log(np.maximum(t, 1.0))


def phi(t):
    """``t (1 + log+ t)``."""
    t = np.asarray(t, dtype=float)
    return t * (1.0 + log_plus(t))


def _nonneg(t, what="argument"):
    a = np.asarray(t, dtype=float)
    if np.any(a < 0) or np.any(np.isnan(a)):
        raise DomainError(f"Young function {what} must be non-negative")
    return a


def _bisect_increasing(fn, target, lo, hi, iters=200):
    """Vectorized ``inf{t : fn(t) > target}`` on brackets that already straddle it."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        above = fn(mid) > target
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(hi, 1e-300)):
            break
    return hi


class YoungFunction:
    """Convex increasing ``B`` on ``[0, inf)`` with ``B(0) = 0``.

    Subclasses implement ``_eval`` and ``_slope`` (right derivative) on
    non-negative arrays; ``inverse`` defaults to ``inf{t : B(t) > s}``.
    """

    #: (kind, parameter) understood by the compiled kernels, or None
    code: Optional[tuple[int, float]] = None

    def __call__(self, t):
        a = _nonneg(t)
        out = self._eval(a)
        return float(out) if np.ndim(t) == 0 else out

    def slope(self, t):
        a = _nonneg(t)
        out = self._slope(a)
        return float(out) if np.ndim(t) == 0 else out

    def inverse(self, s):
        a = _nonneg(s, "inverse argument")
        out = self._inverse(np.atleast_1d(a)).reshape(a.shape)
        return float(out) if np.ndim(s) == 0 else out

    def _inverse(self, s):
        hi = np.maximum(s, 1.0)
        with np.errstate(over="ignore"):
            while True:
                short = self._eval(hi) <= s
                if not np.any(short):
                    break
                hi = np.where(short, 2.0 * hi, hi)
        return _bisect_increasing(self._eval, s, np.zeros_like(hi), hi)

    def _eval(self, t):
        raise NotImplementedError

    def _slope(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class Power(YoungFunction):
    """``t^r`` with ``r >= 1``."""

    r: float

    def __post_init__(self):
        if not self.r >= 1:
            raise DomainError(f"Power needs r >= 1, got {self.r}")

    @property
    def code(self):
        return (_kernels.POWER, float(self.r))

    def _eval(self, t):
        return t ** self.r

    def _slope(self, t):
        return self.r * t ** (self.r - 1.0)

    def _inverse(self, s):
        return s ** (1.0 / self.r)


@dataclass(frozen=True)
class LLogL(YoungFunction):
    """``t (1 + log+ t)^alpha``; ``alpha = 1`` is ``phi``."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 0:
            raise DomainError(f"LLogL needs alpha >= 0, got {self.alpha}")

    @property
    def code(self):
        return (_kernels.LLOGL, float(self.alpha))

    def _eval(self, t):
        return t * (1.0 + log_plus(t)) ** self.alpha

    def _slope(self, t):
        g = 1.0 + log_plus(t)
        big = g ** self.alpha + self.alpha * g ** (self.alpha - 1.0)
        return np.where(t > 1.0, big, 1.0)

    def _inverse(self, s):
        # B(t) = t on [0, 1] and B(t) >= t beyond, so the root lies in [1, s]
        out = s.copy()
        big = s > 1.0
        if np.any(big):
            out[big] = _bisect_increasing(self._eval, s[big], np.ones(big.sum()), s[big])
        return out


@dataclass(frozen=True)
class ExpL(YoungFunction):
    """``e^t - 1``."""

    @property
    def code(self):
        return (_kernels.EXPL, 0.0)

    def _eval(self, t):
        return np.expm1(t)

    def _slope(self, t):
        return np.exp(t)

    def _inverse(self, s):
        return np.log1p(s)


@dataclass(frozen=True)
class Complement(YoungFunction):
    """Legendre transform ``sup_t (s t - A(t))`` of a Young function ``A``.

    The sup sits at ``t* = inf{t : A'(t) >= s}``, found by bisection on the
    slope, so only ``A`` and its right derivative are needed.
    """

    base: YoungFunction

    def _argmax(self, s):
        s = np.atleast_1d(s)
        flat = self.base._slope(np.zeros_like(s)) >= s
        # bisect on log2 t over the whole positive float range
        lo = np.full(s.shape, -1074.0)
        hi = np.full(s.shape, 1023.0)
        with np.errstate(over="ignore"):
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                above = self.base._slope(np.exp2(mid)) >= s
                hi = np.where(above, mid, hi)
                lo = np.where(above, lo, mid)
            t = np.exp2(hi)
            t = np.where(self.base._slope(t) >= s, t, np.inf)
        return np.where(flat, 0.0, t)

    def _eval(self, s):
        shape = np.shape(s)
        s = np.atleast_1d(s)
        t = self._argmax(s)
        with np.errstate(over="ignore", invalid="ignore"):
            v = np.where(np.isinf(t), np.inf, s * t - self.base._eval(t))
        return np.maximum(v, 0.0).reshape(shape)

    def _slope(self, s):
        return self._argmax(s).reshape(np.shape(s))


PHI = LLogL(1.0)
PSI = ExpL()


@dataclass(frozen=True)
class ComplementaryPair:
    """Two Young functions used together in a Hölder-type bound."""

    A: YoungFunction
    Abar: YoungFunction

    def inverse_products(self, t):
        """``A^{-1}(t) * Abar^{-1}(t)``; equals ``t`` up to a factor in [1, 2] for exact complements."""
        t = np.asarray(t, dtype=float)
        return self.A.inverse(t) * self.Abar.inverse(t)

    @classmethod
    def exact(cls, A: YoungFunction) -> "ComplementaryPair":
        return cls(A, Complement(A))


#: L log L against exp L; Psi dominates the true complement of Phi, so
#: Hölder with constant 2 still holds for this pair
PHI_PSI = ComplementaryPair(PHI, PSI)


def young_eval(B: YoungFunction, t):
    return B(t)


def young_inverse(B: YoungFunction, s):
    return B.inverse(s)


@functools.lru_cache(maxsize=4096)
def _scalar_inverse(B: YoungFunction, s: float) -> float:
    return B.inverse(s)


def _mean_young(B, a, lam):
    with np.errstate(over="ignore"):
        return float(np.mean(B._eval(a / lam)))


def luxemburg_of_values(a: np.ndarray, B: YoungFunction) -> float:
    """Luxemburg norm of the cell values ``a`` under the normalized counting measure."""
    a = np.abs(np.asarray(a, dtype=float))
    if not np.all(np.isfinite(a)):
        raise DomainError("Luxemburg norm needs finite values")
    top = float(np.max(a)) if a.size else 0.0
    if top == 0.0:
        return 0.0
    n = a.size
    # one cell alone forces lam >= top/B^{-1}(n); lam = top/B^{-1}(1) is always feasible
    lo = top / _scalar_inverse(B, float(n))
    hi = top / _scalar_inverse(B, 1.0)
    g = lambda lam: _mean_young(B, a, lam) - 1.0
    while g(lo) < 0:
        lo /= 2.0
    while g(hi) > 0:
        hi *= 2.0
    if g(lo) == 0:
        return lo
    lam = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    # land on the feasible side of the constraint
    while g(lam) > 0:
        lam = math.nextafter(lam, math.inf)
    return lam


def luxemburg_norm(f: GridFunction, B: YoungFunction, Q: Optional[Interval] = None) -> float:
    """``inf{lam > 0 : mean_Q B(|f|/lam) <= 1}``; 0 when f vanishes on Q."""
    Q = f.grid.whole() if Q is None else Q
    return luxemburg_of_values(f.restrict(Q), B)


def rao_ren_norm(f: GridFunction, B: YoungFunction, Q: Optional[Interval] = None) -> float:
    """``inf_mu (mu + mu * mean_Q B(|f|/mu))``.

    The objective is convex in ``mu`` (a perspective function plus ``mu``)
    and exceeds its value at the Luxemburg norm once ``mu`` passes twice
    that norm, so a bounded scalar search on ``log mu`` suffices.
    """
    Q = f.grid.whole() if Q is None else Q
    a = np.abs(f.restrict(Q))
    lux = luxemburg_of_values(a, B)
    if lux == 0.0:
        return 0.0

    def objective(log_mu):
        mu = math.exp(log_mu)
        v = mu * (1.0 + _mean_young(B, a, mu))
        return v if math.isfinite(v) else 1e300

    hi = math.log(2.0 * lux)
    res = optimize.minimize_scalar(objective, bounds=(math.log(lux) - 28.0, hi),
                                   method="bounded", options={"xatol": 1e-12})
    return min(float(res.fun), objective(math.log(lux)))


def generalized_holder(f: GridFunction, g: GridFunction, pair: ComplementaryPair,
                       Q: Optional[Interval] = None) -> tuple[float, float]:
    """Both sides of ``mean_Q |fg| <= 2 ||f||_{A,Q} ||g||_{Abar,Q}``."""
    _check_same_grid(f.grid, g.grid)
    Q = f.grid.whole() if Q is None else Q
    lhs = float(np.mean(np.abs(f.restrict(Q) * g.restrict(Q))))
    rhs = 2.0 * luxemburg_norm(f, pair.A, Q) * luxemburg_norm(g, pair.Abar, Q)
    return lhs, rhs
