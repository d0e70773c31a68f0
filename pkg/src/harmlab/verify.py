"""Registry of weighted inequalities and the engine that measures them.

Each :class:`InequalitySpec` pairs a left-hand side with the shape of its
bound (the bound with its unspecified constant removed).  Running a spec over
a family records ``lhs / rhs_shape`` per input and sweep point; the largest
ratio is the empirical constant.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, InsufficientDataError, UnknownSpecError
from .families import ExtremalFamily, Instance
from .grid import GridFunction, _weak_sup, conjugate, lp_norm, weak_lp_norm
from .maximal import MaximalKind, m_delta, sharp_maximal_delta
from .orlicz import phi

__all__ = [
    "InequalitySpec", "Row", "VerificationReport", "GrowthFit", "REGISTRY",
    "DEFAULT_SUITE", "DEFAULT_SWEEP", "get_spec", "run_verification",
    "fit_growth_exponent", "weak_endpoint_check", "level_sup",
]

DEFAULT_SWEEP = {"p": (1.25, 1.5, 2.0, 3.0), "r": (1.1, 1.5, 2.0), "eps": (0.5, 0.75)}

# fixed exponents where a statement needs 0 < delta < eps < 1 or a fixed A_q class
DELTA, EPS, Q_CLASS, LLOGL_EXTRA = 0.5, 0.75, 3.0, 0.5


def level_sup(g: np.ndarray, f: np.ndarray, mass_g: np.ndarray, mass_f: np.ndarray) -> tuple[float, float, float]:
    """``sup_lam mass_g(|g| > lam) / sum phi(|f|/lam) mass_f``.

    The numerator only drops at the values ``v`` of ``|g|`` while the
    denominator decreases continuously in ``lam``, so the sup is the limit
    ``lam -> v`` from below: ``mass_g(|g| >= v) / sum phi(|f|/v) mass_f``.
    Returns ``(ratio, level, numerator)`` at the maximizer.
    """
    a = np.abs(g)
    if not np.any(a > 0):
        return 0.0, 0.0, 0.0
    order = np.argsort(-a, kind="stable")
    a_sorted = a[order]
    cum = np.cumsum(mass_g[order])
    last = np.r_[a_sorted[1:] != a_sorted[:-1], True]
    v, num = a_sorted[last], cum[last]
    keep = v > 0
    v, num = v[keep], num[keep]
    # compress f to its distinct values
    fa = np.abs(f)
    vals, inv = np.unique(fa, return_inverse=True)
    wts = np.bincount(inv.ravel(), weights=mass_f)
    nz = vals > 0
    vals, wts = vals[nz], wts[nz]
    den = np.empty(v.size)
    # levels far below |f| overflow to an infinite denominator, i.e. ratio 0
    with np.errstate(over="ignore"):
        for lo in range(0, v.size, 256):
            chunk = v[lo:lo + 256]
            den[lo:lo + 256] = phi(vals[None, :] / chunk[:, None]) @ wts
    ratio = num / den
    k = int(np.argmax(ratio))
    return float(ratio[k]), float(v[k]), float(num[k])


# -- evaluators ---------------------------------------------------------------

def _norm(g, p, w):
    return lp_norm(g, p, w)


def _l1w(inst, f=None, weight=None):
    f = inst.f if f is None else f
    weight = inst.w if weight is None else weight
    return float(np.sum(np.abs(f.values) * weight.values) * inst.grid.spacing)


def _endpoint(inst: Instance, weight_f: GridFunction) -> tuple[float, float]:
    h = inst.grid.spacing
    ratio, _, _ = inst.memo(("endpoint", id(weight_f)), lambda: level_sup(
        inst.Cf.values, inst.f.values, inst.w.values * h, weight_f.values * h))
    return ratio


def _cf_norm(inst, p):
    return inst.memo(("Cf", p), lambda: _norm(inst.Cf, p, inst.w))


def _sharp_d(inst, g_key, g, delta):
    return inst.memo((g_key, "sharp_d", delta), lambda: sharp_maximal_delta(g, delta, MaximalKind.DYADIC))


def _sharp_hl(inst, g_key, g, delta):
    return inst.memo((g_key, "sharp_hl", delta), lambda: sharp_maximal_delta(g, delta, MaximalKind.HL))


@dataclass(frozen=True)
class InequalitySpec:
    """A registered inequality ``lhs <= c * rhs_shape``.

    ``lhs`` and ``rhs_shape`` take ``(instance, point)`` where ``point`` maps
    the names in ``params`` to values.  Both return floats, or cell arrays
    for pointwise statements (the worst cell is reported).  ``raw``, when
    present, is the operator quantity whose growth the sharpness scans fit.
    """

    id: str
    lhs: Callable
    rhs_shape: Callable
    params: tuple = ()
    statement: str = ""
    ceiling: float = math.inf
    needs_symbol: bool = False
    raw: Optional[Callable] = None


def _spec(id, lhs, rhs, params=(), statement="", ceiling=math.inf, needs_symbol=False, raw=None):
    return InequalitySpec(id, lhs, rhs, tuple(params), statement, ceiling, needs_symbol, raw)


def _build_registry() -> dict:
    pc = lambda pt: conjugate(pt["p"])
    rc = lambda pt: conjugate(pt["r"])
    specs = [
        _spec("FS-weak",
              lambda i, pt: weak_lp_norm(i.Mf, 1.0, i.w),
              lambda i, pt: _l1w(i, weight=i.Mw),
              statement="||Mf||_{L^{1,inf}(w)} <= c int |f| Mw", ceiling=4.0),
        _spec("FS-strong",
              lambda i, pt: _norm(i.Mf, pt["p"], i.w),
              lambda i, pt: pc(pt) * _norm(i.f, pt["p"], i.Mw), ("p",),
              "||Mf||_{L^p(w)} <= c p' ||f||_{L^p(Mw)}", 4.0),
        _spec("Buckley",
              lambda i, pt: _norm(i.Mf, pt["p"], i.w),
              lambda i, pt: pc(pt) * i.ap(pt["p"]) ** (1 / (pt["p"] - 1)) * _norm(i.f, pt["p"], i.w), ("p",),
              "||Mf||_{L^p(w)} <= c p' [w]_Ap^{1/(p-1)} ||f||_{L^p(w)}", 4.0),
        _spec("T-linear",
              lambda i, pt: _norm(i.Tf, pt["p"], i.w),
              lambda i, pt: pt["p"] * pc(pt) * i.a1 * _norm(i.f, pt["p"], i.w), ("p",),
              "||Tf||_{L^p(w)} <= c p p' [w]_A1 ||f||_{L^p(w)}", 4.0,
              raw=lambda i, pt: _norm(i.Tf, pt["p"], i.w) / _norm(i.f, pt["p"], i.w)),
        _spec("T-endpoint",
              lambda i, pt: weak_lp_norm(i.Tf, 1.0, i.w),
              lambda i, pt: float(phi(i.a1)) * _l1w(i),
              statement="||Tf||_{L^{1,inf}(w)} <= c Phi([w]_A1) ||f||_{L^1(w)}", ceiling=4.0,
              raw=lambda i, pt: weak_lp_norm(i.Tf, 1.0, i.w) / _l1w(i)),
        _spec("T-two-weight",
              lambda i, pt: _norm(i.Tf, pt["p"], i.w),
              lambda i, pt: pc(pt) * rc(pt) ** (1 / pc(pt)) * _norm(i.f, pt["p"], i.Mrw(pt["r"])), ("p", "r"),
              "||Tf||_{L^p(w)} <= c p' (r')^{1/p'} ||f||_{L^p(M_r w)}", 4.0),
        _spec("T-weak-param",
              lambda i, pt: weak_lp_norm(i.Tf, 1.0, i.w),
              lambda i, pt: pc(pt) ** pt["p"] * rc(pt) ** (pt["p"] - 1) * _l1w(i, weight=i.Mrw(pt["r"])), ("p", "r"),
              "||Tf||_{L^{1,inf}(w)} <= c (p')^p (r')^{p-1} int |f| M_r w", 4.0),
        _spec("M-two-weight",
              lambda i, pt: _norm(i.Mf, pt["p"], i.Mrw(pt["r"]) ** (1 - pt["p"])),
              lambda i, pt: pc(pt) * rc(pt) ** (1 / pt["p"]) * _norm(i.f, pt["p"], i.w ** (1 - pt["p"])), ("p", "r"),
              "||Mf||_{L^p((M_r w)^{1-p})} <= c p' (r')^{1/p} ||f||_{L^p(w^{1-p})}", 4.0),
        _spec("M2-two-weight",
              lambda i, pt: _norm(i.M2f, pt["p"], i.Mrw(pt["r"]) ** (1 - pt["p"])),
              lambda i, pt: pc(pt) ** 2 * rc(pt) ** (1 + 1 / pt["p"]) * _norm(i.f, pt["p"], i.w ** (1 - pt["p"])),
              ("p", "r"), "||M^2 f||_{L^p((M_r w)^{1-p})} <= c (p')^2 (r')^{1+1/p} ||f||_{L^p(w^{1-p})}", 4.0),
        _spec("Msharp-control",
              lambda i, pt: _sharp_hl(i, "Tf", i.Tf, pt["eps"]).values,
              lambda i, pt: i.Mf.values, ("eps",),
              "M^#_eps(Tf) <= c_eps Mf pointwise", 8.0),
        _spec("Lerner-sharp",
              lambda i, pt: _norm(i.f, pt["p"], i.w),
              lambda i, pt: pt["p"] * i.ap(Q_CLASS) * _norm(_sharp_d(i, "f", i.f, DELTA), pt["p"], i.w), ("p",),
              "||f||_{L^p(w)} <= c p [w]_A3 ||M^{#,d}_{1/2} f||_{L^p(w)}", 8.0),
        _spec("Meps-sharp",
              lambda i, pt: _norm(i.memo(("Md_eps",), lambda: m_delta(i.f, EPS, MaximalKind.DYADIC)), pt["p"], i.w),
              lambda i, pt: pt["p"] * i.ap(Q_CLASS) * _norm(_sharp_d(i, "f", i.f, EPS), pt["p"], i.w), ("p",),
              "||M^d_{3/4} f||_{L^p(w)} <= c p [w]_A3 ||M^{#,d}_{3/4} f||_{L^p(w)}", 8.0),
        _spec("Comm-pointwise",
              lambda i, pt: _sharp_hl(i, "Cf", i.Cf, DELTA).values,
              lambda i, pt: i.bmo * (i.memo(("MeTf",), lambda: m_delta(i.Tf, EPS)).values + i.M2f.values),
              statement="M^#_{1/2}([b,T]f) <= c ||b||_BMO (M_{3/4}(Tf) + M^2 f) pointwise",
              ceiling=8.0, needs_symbol=True),
        _spec("Comm-CF",
              lambda i, pt: _cf_norm(i, pt["p"]),
              lambda i, pt: i.bmo * _norm(i.M2f, pt["p"], i.w), ("p",),
              "||[b,T]f||_{L^p(w)} <= c ||b||_BMO ||M^2 f||_{L^p(w)}", 8.0, True),
        _spec("Comm-strong-2w",
              lambda i, pt: _cf_norm(i, pt["p"]),
              lambda i, pt: i.bmo * (pt["p"] * pc(pt)) ** 2 * rc(pt) ** (1 + 1 / pc(pt))
              * _norm(i.f, pt["p"], i.Mrw(pt["r"])), ("p", "r"),
              "||[b,T]f||_{L^p(w)} <= c ||b||_BMO (pp')^2 (r')^{1+1/p'} ||f||_{L^p(M_r w)}", 4.0, True),
        _spec("Comm-strong-A1",
              lambda i, pt: _cf_norm(i, pt["p"]),
              lambda i, pt: i.bmo * (pt["p"] * pc(pt)) ** 2 * i.a1 ** 2 * _norm(i.f, pt["p"], i.w), ("p",),
              "||[b,T]f||_{L^p(w)} <= c ||b||_BMO (pp')^2 [w]_A1^2 ||f||_{L^p(w)}", 4.0, True,
              raw=lambda i, pt: _cf_norm(i, pt["p"]) / _norm(i.f, pt["p"], i.w)),
        _spec("Comm-weak-endpoint",
              lambda i, pt: _endpoint(i, i.w),
              lambda i, pt: float(phi(i.a1)) ** 2,
              statement="w(|[b,T]f| > lam) <= c Phi([w]_A1)^2 int Phi(|f|/lam) w, sup over lam",
              ceiling=4.0, needs_symbol=True,
              raw=lambda i, pt: _endpoint(i, i.w)),
        _spec("Comm-weak-LlogL",
              lambda i, pt: _endpoint(i, i.orlicz_w(1.0 + LLOGL_EXTRA)),
              lambda i, pt: float(phi(i.bmo)),
              statement="w(|[b,T]f| > lam) <= c Phi(||b||_BMO) int Phi(|f|/lam) M_{L(log L)^{3/2}} w, sup over lam",
              ceiling=8.0, needs_symbol=True),
    ]
    return {s.id: s for s in specs}


REGISTRY = _build_registry()

#: specs run by default; Comm-weak-LlogL needs a cubic Orlicz maximal of w and is opt-in
DEFAULT_SUITE = tuple(k for k in REGISTRY if k != "Comm-weak-LlogL")


def get_spec(spec_id: str) -> InequalitySpec:
    try:
        return REGISTRY[spec_id]
    except KeyError:
        raise UnknownSpecError(f"unknown spec id {spec_id!r}") from None


# -- reports ------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    spec_id: str
    param_point: str
    lhs: float
    rhs: float
    ratio: float


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0.0:
        return 0.0
    return lhs / rhs if rhs > 0 else math.inf


@dataclass
class VerificationReport:
    id: str
    trials: int
    max_ratio: float
    ratio_quantiles: dict
    fitted_exponents: dict
    passed: bool
    ceiling: float = math.inf
    rows: list = field(default_factory=list, repr=False)
    extras: dict = field(default_factory=dict)

    @property
    def pass_(self) -> bool:
        return self.passed

    def write_rows(self, out):
        for r in self.rows:
            out.writerow([r.spec_id, r.param_point, f"{r.lhs:.17g}", f"{r.rhs:.17g}", f"{r.ratio:.17g}"])

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["spec_id", "param_point", "lhs", "rhs", "ratio"])
        self.write_rows(out)
        if path is not None:
            Path(path).write_text(buf.getvalue())
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"id: {self.id}", f"trials: {self.trials}", f"max_ratio: {self.max_ratio:.6g}",
                 f"ceiling: {self.ceiling:g}"]
        for q, v in self.ratio_quantiles.items():
            lines.append(f"q{q:g}: {v:.6g}")
        for k, (e, r2) in self.fitted_exponents.items():
            lines.append(f"exponent[{k}]: {e:.4f} (r2 {r2:.3f})")
        for k, v in self.extras.items():
            lines.append(f"{k}: {v}")
        lines.append(f"pass: {str(self.passed).lower()}")
        return "\n".join(lines)


def _points(spec: InequalitySpec, sweep: dict) -> list:
    keys = spec.params
    if not keys:
        return [{}]
    for k in keys:
        if not sweep.get(k):
            raise DomainError(f"sweep for {spec.id} needs values for {k!r}")
    return [dict(zip(keys, combo)) for combo in itertools.product(*(sweep[k] for k in keys))]


def _label(prefix: str, point: dict) -> str:
    parts = [prefix] if prefix else []
    parts += [f"{k}={v:g}" for k, v in point.items()]
    return ";".join(parts)


def _evaluate(spec: InequalitySpec, inst: Instance, point: dict) -> tuple[float, float]:
    lhs = spec.lhs(inst, point)
    rhs = spec.rhs_shape(inst, point)
    if np.ndim(lhs) == 0:
        return float(lhs), float(rhs)
    lhs, rhs = np.asarray(lhs), np.broadcast_to(np.asarray(rhs, dtype=float), np.shape(lhs))
    with np.errstate(divide="ignore", invalid="ignore"):
        cell = np.where(lhs == 0, 0.0, lhs / rhs)
    k = int(np.argmax(cell))
    return float(lhs[k]), float(rhs[k])


def _fit(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, bool]:
    """Least-squares slope of ``log y`` against ``log x``; (slope, r2, degenerate)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 4:
        raise InsufficientDataError(f"growth fit needs at least 4 points, got {x.size}")
    lx = np.log(x)
    if np.ptp(lx) <= 1e-12 * max(1.0, float(np.max(np.abs(lx)))):
        return 0.0, math.nan, True
    if not np.all(np.isfinite(y) & (y > 0)):
        # a zero or infinite ratio has no log-log slope
        return math.nan, math.nan, True
    ly = np.log(y)
    slope, icept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icept)
    tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / tot if tot > 0 else 1.0
    return float(slope), r2, False


def _as_instances(family) -> Iterable[tuple[str, Instance]]:
    if isinstance(family, ExtremalFamily):
        for v in family.values:
            for inst in family.build(v):
                yield f"{family.parameter}={v:g};{inst.name}", inst
    else:
        for inst in family:
            yield inst.name, inst


def run_verification(spec_id: str, family, sweep: Optional[dict] = None,
                     ceiling: Optional[float] = None) -> VerificationReport:
    """Measure ``lhs / rhs_shape`` for one spec over every instance and sweep point."""
    spec = get_spec(spec_id)
    sweep = DEFAULT_SWEEP if sweep is None else {**DEFAULT_SWEEP, **sweep}
    ceiling = spec.ceiling if ceiling is None else ceiling
    points = _points(spec, sweep)
    rows = []
    by_p: dict = {}
    for label, inst in _as_instances(family):
        if spec.needs_symbol and inst.b is None:
            raise DomainError(f"{spec_id} needs a symbol b; instance {inst.name} has none")
        for pt in points:
            lhs, rhs = _evaluate(spec, inst, pt)
            ratio = _ratio(lhs, rhs)
            rows.append(Row(spec_id, _label(label, pt), lhs, rhs, ratio))
            if "p" in pt:
                by_p[pt["p"]] = max(by_p.get(pt["p"], 0.0), ratio)
    if not rows:
        raise InsufficientDataError(f"{spec_id}: empty family")
    ratios = np.array([r.ratio for r in rows])
    max_ratio = float(np.max(ratios))
    quant = {q: float(np.quantile(ratios, q)) for q in (0.5, 0.9, 0.99)}
    fits = {}
    ps = sorted(k for k, v in by_p.items() if v > 0)
    if len(ps) >= 4:
        slope, r2, _ = _fit([p * conjugate(p) for p in ps], [by_p[p] for p in ps])
        fits["p"] = (slope, r2)
    passed = bool(math.isfinite(max_ratio) and max_ratio <= ceiling)
    return VerificationReport(spec_id, len(rows), max_ratio, quant, fits, passed, ceiling, rows)


# -- growth fits --------------------------------------------------------------

@dataclass
class GrowthFit:
    spec_id: str
    parameter: str
    exponent: float
    r2: float
    degenerate: bool
    points: list = field(default_factory=list)

    def scan_rows(self) -> list:
        """Rows for ``scan.csv``: delta, a1, p, lhs_norm_ratio, fitted_exponent, cells."""
        return [[f"{pt['delta']:.17g}", f"{pt['a1']:.17g}", f"{pt['p']:.17g}", f"{pt['ratio']:.17g}",
                 f"{self.exponent:.17g}", str(pt["cells"])] for pt in self.points]


def _raw(spec: InequalitySpec, inst: Instance, point: dict) -> float:
    if spec.raw is not None:
        return float(spec.raw(inst, point))
    lhs, rhs = _evaluate(spec, inst, point)
    return _ratio(lhs, rhs)


def _delta_of(inst: Instance) -> float:
    # w = max(|x|, h)^(delta - 1): read delta back from two cells
    x = np.maximum(np.abs(inst.grid.midpoints()), inst.grid.spacing)
    i, j = int(np.argmin(x)), int(np.argmax(x))
    if x[i] == x[j]:
        return 1.0
    return 1.0 + math.log(inst.w.values[j] / inst.w.values[i]) / math.log(x[j] / x[i])


def fit_growth_exponent(spec_id: str, family: ExtremalFamily, parameter: str = "a1",
                        p: float = 2.0) -> GrowthFit:
    """Slope of ``log(raw quantity)`` against ``log [w]_A1`` or ``log(p p')``.

    At each family value the raw quantity is the largest over the
    instances built for it.  A parameter that does not move gives a
    degenerate fit with exponent 0.
    """
    if parameter not in ("a1", "p"):
        raise DomainError(f"parameter must be 'a1' or 'p', got {parameter!r}")
    spec = get_spec(spec_id)
    if parameter == "p" and family.parameter != "p":
        raise DomainError("a p-fit needs a family swept over p")
    pts = []
    for v in family.values:
        insts = family.build(v)
        pp = float(v) if family.parameter == "p" else p
        point = {"p": pp, "r": DEFAULT_SWEEP["r"][0], "eps": EPS}
        val = max(_raw(spec, inst, point) for inst in insts)
        inst = insts[0]
        pts.append({"value": float(v), "a1": inst.a1, "p": pp, "ratio": val,
                    "delta": _delta_of(inst), "cells": inst.grid.cells})
    xs = [pt["a1"] if parameter == "a1" else pt["p"] * conjugate(pt["p"]) for pt in pts]
    slope, r2, degenerate = _fit(xs, [pt["ratio"] for pt in pts])
    return GrowthFit(spec_id, parameter, slope, r2, degenerate, pts)


def weak_endpoint_check(b: GridFunction, f: GridFunction, w: GridFunction,
                        lambdas: Optional[Sequence[float]] = None, kernel=None) -> VerificationReport:
    """``w(|[b,T]f| > lam)`` against ``Phi([w]_A1)^2 int Phi(|f|/lam) w``.

    With ``lambdas=None`` the sup over all levels is taken exactly (see
    :func:`level_sup`); otherwise one row per given level.  ``extras``
    carries the ratio without the ``Phi([w]_A1)^2`` factor.
    """
    from .singular import commutator, hilbert_kernel
    from .weights import a1_constant

    kernel = hilbert_kernel() if kernel is None else kernel
    cf = commutator(b, kernel, f)
    a1 = a1_constant(w)
    scale = float(phi(a1)) ** 2
    h = f.grid.spacing
    rows = []
    if lambdas is None:
        raw, level, num = level_sup(cf.values, f.values, w.values * h, w.values * h)
        if level > 0:
            den = num / raw if raw > 0 else 0.0
            rows.append(Row("Comm-weak-endpoint", f"lambda={level:.17g}-", num, scale * den, raw / scale))
        best_raw = raw
    else:
        best_raw = 0.0
        for lam in lambdas:
            if not lam > 0:
                raise DomainError(f"levels must be positive, got {lam}")
            num = float(np.sum(w.values[np.abs(cf.values) > lam]) * h)
            den = float(np.sum(phi(np.abs(f.values) / lam) * w.values) * h)
            raw = _ratio(num, den)
            best_raw = max(best_raw, raw)
            rows.append(Row("Comm-weak-endpoint", f"lambda={lam:g}", num, scale * den, _ratio(num, scale * den)))
    ratios = [r.ratio for r in rows] or [0.0]
    max_ratio = float(max(ratios))
    quant = {q: float(np.quantile(ratios, q)) for q in (0.5, 0.9, 0.99)}
    return VerificationReport("Comm-weak-endpoint", len(rows), max_ratio, quant, {},
                              math.isfinite(max_ratio), math.inf, rows,
                              {"a1": a1, "raw_max_ratio": best_raw})
