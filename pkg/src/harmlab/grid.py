"""Uniform 1-D grids, piecewise-constant functions and (weak) Lebesgue norms.

Every function in the package is constant on the cells of a uniform grid, so
integrals, averages and level sets are computed exactly by finite sums.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from .errors import DomainError, GridMismatchError, IntervalRangeError, StructureError

__all__ = [
    "Grid", "GridFunction", "Interval", "DyadicInterval",
    "average", "lp_norm", "weak_lp_norm", "distribution", "integral",
    "conjugate", "require_weight", "dyadic_intervals",
    "read_csv", "write_csv",
]


def conjugate(p: float) -> float:
    """Dual exponent p' = p/(p-1)."""
    if p <= 1:
        raise DomainError(f"conjugate exponent needs p > 1, got {p}")
    return p / (p - 1.0)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Cells ``[origin + i*spacing, origin + (i+1)*spacing)`` for ``i < cells``."""

    origin: float
    spacing: float
    cells: int

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise DomainError(f"grid spacing must be positive, got {self.spacing}")
        if int(self.cells) != self.cells or self.cells < 1:
            raise DomainError(f"grid needs at least one cell, got {self.cells}")
        object.__setattr__(self, "cells", int(self.cells))

    @classmethod
    def on(cls, start: float, stop: float, cells: int) -> "Grid":
        return cls(float(start), (stop - start) / cells, cells)

    @property
    def length(self) -> float:
        return self.spacing * self.cells

    @property
    def end(self) -> float:
        return self.origin + self.length

    @property
    def is_dyadic(self) -> bool:
        return _is_power_of_two(self.cells)

    @property
    def depth(self) -> int:
        """Number of dyadic levels below the root (log2 of the cell count)."""
        self.require_dyadic()
        return self.cells.bit_length() - 1

    def require_dyadic(self):
        if not self.is_dyadic:
            raise StructureError(f"dyadic structure needs a power-of-two cell count, got {self.cells}")

    def midpoints(self) -> np.ndarray:
        return self.origin + (np.arange(self.cells) + 0.5) * self.spacing

    def edges(self) -> np.ndarray:
        return self.origin + np.arange(self.cells + 1) * self.spacing

    def compatible(self, other: "Grid") -> bool:
        if self.cells != other.cells:
            return False
        if not math.isclose(self.spacing, other.spacing, rel_tol=1e-9):
            return False
        return math.isclose(self.origin, other.origin, rel_tol=1e-9, abs_tol=1e-9 * self.spacing)

    def whole(self) -> "Interval":
        return Interval(0, self.cells)

    def function(self, values) -> "GridFunction":
        return GridFunction(self, values)

    def sample(self, fn) -> "GridFunction":
        """Evaluate ``fn`` at the cell midpoints."""
        return GridFunction(self, fn(self.midpoints()))

    def constant(self, c: float = 1.0) -> "GridFunction":
        return GridFunction(self, np.full(self.cells, float(c)))

    def indicator(self, start: float, stop: float) -> "GridFunction":
        """Indicator of the cells whose midpoint lies in ``[start, stop)``."""
        x = self.midpoints()
        return GridFunction(self, ((x >= start) & (x < stop)).astype(float))


def _check_same_grid(a: Grid, b: Grid):
    if a is not b and not a.compatible(b):
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


Operand = Union["GridFunction", float, int, np.ndarray]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real function that is constant on each cell of ``grid``."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.cells,):
            raise GridMismatchError(f"expected {self.grid.cells} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.grid.cells

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _other(self, other: Operand):
        if isinstance(other, GridFunction):
            _check_same_grid(self.grid, other.grid)
            return other.values
        return other

    def __add__(self, other): return self.with_values(self.values + self._other(other))
    __radd__ = __add__
    def __sub__(self, other): return self.with_values(self.values - self._other(other))
    def __rsub__(self, other): return self.with_values(self._other(other) - self.values)
    def __mul__(self, other): return self.with_values(self.values * self._other(other))
    __rmul__ = __mul__
    def __truediv__(self, other): return self.with_values(self.values / self._other(other))
    def __neg__(self): return self.with_values(-self.values)
    def __abs__(self): return self.with_values(np.abs(self.values))
    def __pow__(self, e): return self.with_values(self.values ** e)

    def restrict(self, Q: "Interval") -> np.ndarray:
        Q.check(self.grid)
        return self.values[Q.start:Q.stop]

    def max(self) -> float:
        return float(np.max(self.values))

    def min(self) -> float:
        return float(np.min(self.values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def require_weight(w: GridFunction) -> GridFunction:
    if np.any(w.values <= 0):
        raise DomainError("a weight must be strictly positive on every cell")
    return w


@dataclass(frozen=True)
class Interval:
    """Run of ``count`` consecutive cells starting at cell ``start``."""

    start: int
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise IntervalRangeError(f"interval needs at least one cell, got {self.count}")

    @property
    def stop(self) -> int:
        return self.start + self.count

    def check(self, grid: Grid) -> "Interval":
        if self.start < 0 or self.stop > grid.cells:
            raise IntervalRangeError(f"{self} does not fit in a grid of {grid.cells} cells")
        return self

    def measure(self, grid: Grid) -> float:
        return self.count * grid.spacing

    def contains(self, cell: int) -> bool:
        return self.start <= cell < self.stop

    def cells(self) -> range:
        return range(self.start, self.stop)

    def dilate(self, factor: int, grid: Grid) -> "Interval":
        """Same centre, ``factor`` times the cell count, clipped to the grid."""
        extra = (factor - 1) * self.count
        lo = self.start - extra // 2
        hi = self.stop + extra - extra // 2
        lo, hi = max(lo, 0), min(hi, grid.cells)
        return Interval(lo, hi - lo)


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """Cells ``[index * 2**level, (index+1) * 2**level)``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or self.index < 0:
            raise DomainError(f"invalid dyadic interval {self}")

    @property
    def start(self) -> int:
        return self.index << self.level

    @property
    def count(self) -> int:
        return 1 << self.level

    @property
    def stop(self) -> int:
        return self.start + self.count

    def as_interval(self) -> Interval:
        return Interval(self.start, self.count)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        if self.level == 0:
            raise StructureError("a single cell has no dyadic children")
        return (DyadicInterval(self.level - 1, 2 * self.index),
                DyadicInterval(self.level - 1, 2 * self.index + 1))

    def parent(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, self.index // 2)

    def contains(self, other: "DyadicInterval") -> bool:
        return self.start <= other.start and other.stop <= self.stop

    def disjoint(self, other: "DyadicInterval") -> bool:
        return self.stop <= other.start or other.stop <= self.start


def dyadic_intervals(grid: Grid) -> Iterator[DyadicInterval]:
    """All dyadic intervals of a power-of-two grid, root first."""
    depth = grid.depth
    for level in range(depth, -1, -1):
        for j in range(grid.cells >> level):
            yield DyadicInterval(level, j)


def _weight_values(f: GridFunction, w: Optional[GridFunction]) -> np.ndarray:
    if w is None:
        return np.ones(f.grid.cells)
    _check_same_grid(f.grid, w.grid)
    return require_weight(w).values


def average(f: GridFunction, Q: Interval) -> float:
    """Mean of ``f`` over ``Q`` (cells have equal length)."""
    return float(np.mean(f.restrict(Q)))


def integral(f: GridFunction, w: Optional[GridFunction] = None) -> float:
    return float(np.sum(f.values * _weight_values(f, w)) * f.grid.spacing)


def lp_norm(f: GridFunction, p: float, w: Optional[GridFunction] = None) -> float:
    """``(sum |f_i|^p w_i h)^(1/p)``; ``w=None`` means Lebesgue measure."""
    if not p > 0:
        raise DomainError(f"lp_norm needs p > 0, got {p}")
    wv = _weight_values(f, w)
    return float(np.sum(np.abs(f.values) ** p * wv) * f.grid.spacing) ** (1.0 / p)


def distribution(f: GridFunction, lam: float, w: Optional[GridFunction] = None) -> float:
    """Weighted measure of the strict level set ``{|f| > lam}``."""
    if lam < 0:
        raise DomainError(f"level must be non-negative, got {lam}")
    wv = _weight_values(f, w)
    return float(np.sum(wv[np.abs(f.values) > lam]) * f.grid.spacing)


def weak_lp_norm(f: GridFunction, p: float, w: Optional[GridFunction] = None) -> float:
    """Weak-type quasinorm ``sup_lam lam * w({|f| > lam})^(1/p)``.

    On each gap between consecutive distinct values of |f| the level set is
    constant, so the supremum is the limit from below at one of the values v,
    namely ``v * w({|f| >= v})^(1/p)``.
    """
    if not p > 0:
        raise DomainError(f"weak_lp_norm needs p > 0, got {p}")
    wv = _weight_values(f, w)
    return _weak_sup(np.abs(f.values), wv * f.grid.spacing, p)


def _weak_sup(a: np.ndarray, mass: np.ndarray, p: float) -> float:
    if not np.any(a > 0):
        return 0.0
    order = np.argsort(-a, kind="stable")
    a, cum = a[order], np.cumsum(mass[order])
    # mass of {|f| >= v} is the cumulative mass up to the last index holding v
    last = np.r_[a[1:] != a[:-1], True]
    v, m = a[last], cum[last]
    keep = v > 0
    return float(np.max(v[keep] * m[keep] ** (1.0 / p)))


def write_csv(f: GridFunction, path: Union[str, Path]):
    """Write ``x,value`` rows at cell midpoints with 17 significant digits."""
    x = f.grid.midpoints()
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["x", "value"])
        for xi, vi in zip(x, f.values):
            out.writerow([f"{xi:.17g}", f"{vi:.17g}"])


def read_csv(path: Union[str, Path], spacing: Optional[float] = None) -> GridFunction:
    """Inverse of :func:`write_csv`. A one-row file needs ``spacing``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "value"]:
        raise DomainError(f"{path}: expected header 'x,value'")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    if data.shape[0] == 0:
        raise DomainError(f"{path}: no data rows")
    x, v = data[:, 0], data[:, 1]
    if spacing is None:
        if len(x) < 2:
            raise DomainError(f"{path}: cannot infer spacing from a single row")
        spacing = (x[-1] - x[0]) / (len(x) - 1)
        if not np.allclose(np.diff(x), spacing, rtol=1e-9, atol=0):
            raise DomainError(f"{path}: midpoints are not uniformly spaced")
    return GridFunction(Grid(float(x[0] - spacing / 2), float(spacing), len(x)), v)
