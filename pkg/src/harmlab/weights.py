"""Muckenhoupt constants, weight factories and weighted maximal bounds."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import optimize

from . import _kernels
from .errors import DomainError
from .grid import Grid, GridFunction, conjugate, lp_norm, require_weight, weak_lp_norm
from .maximal import hl_maximal, m_r, m_squared

__all__ = [
    "WeightReport", "RdFConfig", "RdFResult", "a1_constant", "ap_constant",
    "reverse_holder_exponent", "verify_reverse_holder", "weight_report",
    "truncated_power", "maximal_power_weight", "factorized_weight",
    "maximal_operator_norm", "rubio_de_francia", "fefferman_stein_check",
    "buckley_check", "mr_two_weight_ratio",
]


def a1_constant(w: GridFunction) -> float:
    """``max_i (Mw)_i / w_i``."""
    require_weight(w)
    return float(np.max(hl_maximal(w).values / w.values))


def ap_constant(w: GridFunction, p: float) -> float:
    """``sup_Q avg_Q(w) * avg_Q(w^(1-p'))^(p-1)`` over all grid intervals."""
    if not p > 1:
        raise DomainError(f"ap_constant needs p > 1, got {p}")
    require_weight(w)
    return float(_kernels.max_ap_product(w.values, float(p)))


def reverse_holder_exponent(w: GridFunction, n: int = 1, a1: Optional[float] = None) -> float:
    """``1 + 1/(2^(n+1) [w]_A1)``."""
    a1 = a1_constant(w) if a1 is None else a1
    return 1.0 + 1.0 / (2.0 ** (n + 1) * a1)


def verify_reverse_holder(w: GridFunction, n: int = 1, tol: float = 1e-9) -> tuple[bool, float]:
    """Check ``M_{r_w} w <= 2 [w]_A1 w`` cellwise; returns (ok, max ratio)."""
    a1 = a1_constant(w)
    r = reverse_holder_exponent(w, n, a1)
    ratio = float(np.max(m_r(w, r).values / (2.0 * a1 * w.values)))
    return ratio <= 1.0 + tol, ratio


@dataclass(frozen=True)
class WeightReport:
    name: str
    n: int
    a1: float
    ap: dict = field(default_factory=dict)
    rw: float = 1.0
    rh_ok: bool = True
    rh_ratio: float = 0.0

    def csv_header(self) -> list[str]:
        return ["name", "n", "a1"] + [f"ap@{p:g}" for p in self.ap] + ["rw", "rh_ok"]

    def csv_row(self) -> list[str]:
        return ([self.name, str(self.n), f"{self.a1:.17g}"]
                + [f"{v:.17g}" for v in self.ap.values()]
                + [f"{self.rw:.17g}", str(self.rh_ok).lower()])

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(self.csv_header())
        out.writerow(self.csv_row())
        return buf.getvalue()


def weight_report(w: GridFunction, ps: Sequence[float] = (1.5, 2.0, 3.0), n: int = 1,
                  name: str = "w") -> WeightReport:
    a1 = a1_constant(w)
    ok, ratio = verify_reverse_holder(w, n)
    return WeightReport(name=name, n=n, a1=a1, ap={float(p): ap_constant(w, p) for p in ps},
                        rw=reverse_holder_exponent(w, n, a1), rh_ok=ok, rh_ratio=ratio)


# -- weight factories ---------------------------------------------------------

def truncated_power(grid: Grid, exponent: float, center: float = 0.0) -> GridFunction:
    """``max(|x - center|, h)^exponent`` at the cell midpoints."""
    x = grid.midpoints()
    return GridFunction(grid, np.maximum(np.abs(x - center), grid.spacing) ** exponent)


def maximal_power_weight(f: GridFunction, delta: float) -> GridFunction:
    """``(Mf)^delta``, an A1 weight for ``0 < delta < 1`` whenever Mf > 0."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    return require_weight(hl_maximal(f) ** delta)


def factorized_weight(w1: GridFunction, w2: GridFunction, p: float) -> GridFunction:
    """``w1 * w2^(1-p)``, which lies in A_p when both factors are A1."""
    return require_weight(w1) * require_weight(w2) ** (1.0 - p)


# -- Rubio de Francia iteration ---------------------------------------------

def maximal_operator_norm(s: float) -> float:
    """Norm of the uncentered maximal operator on ``L^s(R)``.

    It is the positive root of ``(s-1) x^s - s x^(s-1) - 1`` (``1 + sqrt 2``
    at ``s = 2``).  The grid operator is dominated pointwise by the continuum
    one, so this also bounds it on every grid.
    """
    if not s > 1:
        raise DomainError(f"need s > 1, got {s}")
    g = lambda x: (s - 1.0) * x ** s - s * x ** (s - 1.0) - 1.0
    hi = 2.0 * conjugate(s) + 2.0
    return float(optimize.brentq(g, s / (s - 1.0), hi, xtol=1e-15))


@dataclass(frozen=True)
class RdFConfig:
    s: float
    v: Optional[GridFunction] = None
    truncation: int = 24
    m_norm_estimate: Optional[float] = None

    def __post_init__(self):
        if not self.s > 1:
            raise DomainError(f"RdFConfig needs s > 1, got {self.s}")
        if self.truncation < 1:
            raise DomainError("truncation must be at least 1")
        if self.m_norm_estimate is not None and self.m_norm_estimate < 1:
            raise DomainError("m_norm_estimate must be at least 1")

    @property
    def norm(self) -> float:
        return maximal_operator_norm(self.s) if self.m_norm_estimate is None else self.m_norm_estimate


@dataclass(frozen=True)
class RdFResult:
    function: GridFunction
    terms: int
    truncation_error: float
    growth: float
    divergent: bool


def rubio_de_francia(h: GridFunction, cfg: RdFConfig) -> RdFResult:
    """``Rh = sum_k S^k h / (2 m)^k`` with ``S u = M(u v^(1/s)) / v^(1/s)``.

    ``S`` has the same norm on ``L^s(v)`` as ``M`` on unweighted ``L^s``, so
    ``m`` can be the unweighted norm; with ``v = 1`` this is the plain
    iteration of ``M``.  The series stops after ``cfg.truncation`` terms or
    once a term's sup falls below 1e-14 of the first.  ``truncation_error``
    is the sup of the first omitted term; ``growth`` is the largest observed
    ``||S u||/||u||`` in ``L^s(v)``, and ``divergent`` flags growth beyond
    ``m``.
    """
    if np.any(h.values < 0):
        raise DomainError("Rubio de Francia needs h >= 0")
    if not np.any(h.values > 0):
        raise DomainError("Rubio de Francia needs h not identically zero")
    v = h.grid.constant(1.0) if cfg.v is None else require_weight(cfg.v)
    root = v ** (1.0 / cfg.s)
    m = cfg.norm
    S = lambda u: hl_maximal(u * root) / root

    term = h
    total = h.values.copy()
    first = h.sup_norm()
    growth = 0.0
    k = 0
    while True:
        nxt = S(term)
        growth = max(growth, lp_norm(nxt, cfg.s, v) / lp_norm(term, cfg.s, v))
        nxt = nxt * (1.0 / (2.0 * m))
        if k + 1 > cfg.truncation or nxt.sup_norm() < 1e-14 * first:
            break
        total += nxt.values
        term = nxt
        k += 1
    return RdFResult(h.with_values(total), terms=k + 1, truncation_error=nxt.sup_norm(),
                     growth=growth, divergent=growth > m)


# -- weighted maximal inequalities -------------------------------------------

def fefferman_stein_check(f: GridFunction, p: float, w: GridFunction, weak: bool = False) -> float:
    """Ratio of ``||Mf||_{L^p(w)}`` to ``p' ||f||_{L^p(Mw)}``.

    With ``weak=True`` it is ``||Mf||_{L^{1,inf}(w)} / int |f| Mw`` and ``p``
    is ignored.
    """
    require_weight(w)
    Mf, Mw = hl_maximal(f), hl_maximal(w)
    if weak:
        rhs = float(np.sum(np.abs(f.values) * Mw.values) * f.grid.spacing)
        return weak_lp_norm(Mf, 1.0, w) / rhs if rhs > 0 else 0.0
    rhs = lp_norm(f, p, Mw)
    return lp_norm(Mf, p, w) / (conjugate(p) * rhs) if rhs > 0 else 0.0


def buckley_check(w: GridFunction, p: float, family: Iterable[GridFunction]) -> float:
    """``max ||Mf||_{L^p(w)} / (p' [w]_Ap^(1/(p-1)) ||f||_{L^p(w)})`` over the family."""
    scale = conjugate(p) * ap_constant(w, p) ** (1.0 / (p - 1.0))
    best = 0.0
    for f in family:
        nf = lp_norm(f, p, w)
        if nf > 0:
            best = max(best, lp_norm(hl_maximal(f), p, w) / (scale * nf))
    return best


def mr_two_weight_ratio(f: GridFunction, w: GridFunction, p: float, r: float,
                        iterations: int = 1) -> float:
    """Two-weight bound for ``M`` or ``M^2`` between ``L^p(w^(1-p))`` and ``L^p((M_r w)^(1-p))``.

    The measured ratio is normalized by ``p' (r')^(1/p)`` for ``M`` and by
    ``(p')^2 (r')^(1+1/p)`` for ``M^2``.
    """
    if iterations not in (1, 2):
        raise DomainError("iterations must be 1 or 2")
    require_weight(w)
    target = m_r(w, r) ** (1.0 - p)
    source = w ** (1.0 - p)
    pc, rc = conjugate(p), conjugate(r)
    if iterations == 1:
        lhs, shape = lp_norm(hl_maximal(f), p, target), pc * rc ** (1.0 / p)
    else:
        lhs, shape = lp_norm(m_squared(f), p, target), pc ** 2 * rc ** (1.0 + 1.0 / p)
    rhs = lp_norm(f, p, source)
    return lhs / (shape * rhs) if rhs > 0 else 0.0
