"""Test inputs for the verification engine.

Inputs are described in continuum terms on ``[0, 1)`` (recipes) and sampled
on a grid on demand, so one family can be evaluated at several resolutions.
An :class:`Instance` bundles ``(f, w, b)`` on one grid and memoizes the
operator outputs the inequality evaluators share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .grid import Grid, GridFunction
from .maximal import hl_maximal, m_r, m_squared, orlicz_maximal
from .orlicz import LLogL
from .singular import KernelSpec, apply_kernel_operator, bmo_norm, commutator_kernel_form, hilbert_kernel
from .weights import a1_constant, ap_constant

__all__ = [
    "Recipe", "Indicator", "Steps", "Bump", "HaarAtom", "Constant", "PowerWeight",
    "MaximalWeight", "LogSymbol", "RootSymbol", "Smooth", "Instance",
    "default_family", "constant_symbol_family", "ExtremalFamily",
    "resolution_family", "delta_family", "unit_weight_family",
]


class Recipe:
    """A function on ``[0, 1)`` that can be sampled on any grid."""

    def build(self, grid: Grid) -> GridFunction:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Recipe):
    c: float = 1.0

    def build(self, grid):
        return grid.constant(self.c)


@dataclass(frozen=True)
class Indicator(Recipe):
    start: float
    stop: float
    height: float = 1.0

    def build(self, grid):
        return grid.indicator(self.start, self.stop) * self.height


@dataclass(frozen=True)
class Steps(Recipe):
    """Piecewise constant on ``len(values)`` equal pieces of ``[start, stop)``, zero elsewhere."""

    start: float
    stop: float
    values: tuple
    floor: float = 0.0

    def build(self, grid):
        x = grid.midpoints()
        k = len(self.values)
        idx = np.floor((x - self.start) / (self.stop - self.start) * k).astype(int)
        inside = (idx >= 0) & (idx < k)
        out = np.full(grid.cells, self.floor)
        out[inside] = np.asarray(self.values)[idx[inside]]
        return GridFunction(grid, out)


@dataclass(frozen=True)
class Bump(Recipe):
    center: float
    radius: float

    def build(self, grid):
        u = (grid.midpoints() - self.center) / self.radius
        return GridFunction(grid, np.maximum(1.0 - u * u, 0.0) ** 2)


@dataclass(frozen=True)
class HaarAtom(Recipe):
    start: float
    length: float

    def build(self, grid):
        x = grid.midpoints()
        mid = self.start + self.length / 2
        v = np.where((x >= self.start) & (x < mid), 1.0, 0.0)
        v -= np.where((x >= mid) & (x < self.start + self.length), 1.0, 0.0)
        return GridFunction(grid, v)


@dataclass(frozen=True)
class PowerWeight(Recipe):
    """``max(|x - center|, h)^exponent``."""

    exponent: float
    center: float = 0.0

    def build(self, grid):
        d = np.maximum(np.abs(grid.midpoints() - self.center), grid.spacing)
        return GridFunction(grid, d ** self.exponent)


@dataclass(frozen=True)
class MaximalWeight(Recipe):
    """``(M chi_[start, stop))^delta``."""

    start: float
    stop: float
    delta: float

    def build(self, grid):
        return hl_maximal(grid.indicator(self.start, self.stop)) ** self.delta


@dataclass(frozen=True)
class LogSymbol(Recipe):
    """``log max(|x - center|, h)``."""

    center: float = 0.0

    def build(self, grid):
        return GridFunction(grid, np.log(np.maximum(np.abs(grid.midpoints() - self.center), grid.spacing)))


@dataclass(frozen=True)
class RootSymbol(Recipe):
    center: float

    def build(self, grid):
        return GridFunction(grid, np.sqrt(np.abs(grid.midpoints() - self.center)))


@dataclass(frozen=True)
class Smooth(Recipe):
    frequency: float
    phase: float

    def build(self, grid):
        return GridFunction(grid, np.sin(2 * math.pi * self.frequency * grid.midpoints() + self.phase))


class _Shared:
    """Memo for quantities that depend only on one recipe and the grid."""

    def __init__(self):
        self.store = {}

    def get(self, key, make):
        if key not in self.store:
            self.store[key] = make()
        return self.store[key]


@dataclass(eq=False)
class Instance:
    """One ``(f, w, b)`` triple on a grid, with memoized derived quantities."""

    name: str
    f: GridFunction
    w: GridFunction
    b: Optional[GridFunction] = None
    kernel: KernelSpec = field(default_factory=hilbert_kernel)
    shared: Optional[_Shared] = None
    keys: tuple = ()
    _memo: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.shared is None:
            self.shared = _Shared()
        if not self.keys:
            self.keys = (id(self.w), id(self.b))

    @property
    def grid(self) -> Grid:
        return self.f.grid

    def memo(self, key, make):
        if key not in self._memo:
            self._memo[key] = make()
        return self._memo[key]

    def weight_memo(self, key, make):
        return self.shared.get((self.keys[0], self.grid.cells) + tuple(key), make)

    def symbol_memo(self, key, make):
        return self.shared.get((self.keys[1], self.grid.cells) + tuple(key), make)

    # -- f-side --------------------------------------------------------------
    @property
    def Mf(self):
        return self.memo("Mf", lambda: hl_maximal(self.f))

    @property
    def M2f(self):
        return self.memo("M2f", lambda: m_squared(self.f))

    @property
    def Tf(self):
        return self.memo("Tf", lambda: apply_kernel_operator(self.kernel, self.f))

    @property
    def Cf(self):
        if self.b is None:
            raise DomainError(f"instance {self.name} has no symbol b")
        return self.memo("Cf", lambda: commutator_kernel_form(self.b, self.kernel, self.f))

    # -- w-side --------------------------------------------------------------
    @property
    def a1(self) -> float:
        return self.weight_memo(("a1",), lambda: a1_constant(self.w))

    def ap(self, p: float) -> float:
        return self.weight_memo(("ap", float(p)), lambda: ap_constant(self.w, p))

    @property
    def Mw(self):
        return self.weight_memo(("Mw",), lambda: hl_maximal(self.w))

    def Mrw(self, r: float):
        return self.weight_memo(("Mr", float(r)), lambda: m_r(self.w, r))

    def orlicz_w(self, alpha: float):
        return self.weight_memo(("MA", float(alpha)), lambda: orlicz_maximal(self.w, LLogL(alpha)))

    # -- b-side --------------------------------------------------------------
    @property
    def bmo(self) -> float:
        if self.b is None:
            raise DomainError(f"instance {self.name} has no symbol b")
        return self.symbol_memo(("bmo",), lambda: bmo_norm(self.b, with_exp=False).bmo_norm)


def _lattice(rng, k, lo=0.25, hi=0.75):
    """Two distinct points of the ``1/k`` lattice inside ``[lo, hi]``, sorted."""
    pts = np.arange(math.ceil(lo * k), math.floor(hi * k) + 1) / k
    a, b = np.sort(rng.choice(pts, 2, replace=False))
    return float(a), float(b)


def _f_recipes(rng) -> Recipe:
    kind = rng.integers(4)
    if kind == 0:
        a, b = _lattice(rng, 32)
        return Indicator(a, b)
    if kind == 1:
        a, b = _lattice(rng, 8)
        k = int(rng.integers(2, 7))
        return Steps(a, b, tuple(np.round(rng.uniform(-2, 2, k), 3)))
    if kind == 2:
        return Bump(float(rng.uniform(0.35, 0.65)), float(rng.uniform(0.03, 0.1)))
    level = int(rng.integers(3, 6))
    j = int(rng.integers(2 ** level // 4, 3 * 2 ** level // 4))
    return HaarAtom(j / 2 ** level, 1 / 2 ** level)


def _weight_pool() -> list:
    pool = [Constant(1.0)]
    for alpha in (0.2, 0.5, 0.8):
        for c in (0.5, 0.3):
            pool.append(PowerWeight(-alpha, c))
    for delta in (0.3, 0.6):
        pool.append(MaximalWeight(0.45, 0.5, delta))
    rng = np.random.default_rng(7)
    for _ in range(3):
        pool.append(Steps(0.0, 1.0, tuple(np.round(rng.uniform(0.5, 2.0, 8), 3))))
    return pool


def _symbol_pool() -> list:
    pool = [LogSymbol(0.5), LogSymbol(0.3), LogSymbol(0.6)]
    pool += [Steps(0.0, 1.0, (0.0, 1.0, -0.5, 0.25, 1.5, 0.0, -1.0, 0.5))]
    pool += [Smooth(1.0, 0.3), Smooth(3.0, 1.1)]
    pool += [RootSymbol(0.5), RootSymbol(0.4)]
    return pool


@dataclass(frozen=True)
class Member:
    name: str
    f: Recipe
    w: Recipe
    b: Optional[Recipe]


def default_members(size: int = 200, seed: int = 42) -> list:
    """Seeded list of ``(f, w, b)`` recipes; the same list at every resolution."""
    rng = np.random.default_rng(seed)
    weights, symbols = _weight_pool(), _symbol_pool()
    out = []
    for i in range(size):
        f = _f_recipes(rng)
        w = weights[int(rng.integers(len(weights)))]
        b = symbols[int(rng.integers(len(symbols)))]
        out.append(Member(f"i={i}", f, w, b))
    return out


def instantiate(members: Sequence[Member], cells: int, kernel: Optional[KernelSpec] = None) -> list:
    """Sample every member on ``[0, 1)`` with ``cells`` cells, sharing weight and symbol memos."""
    grid = Grid.on(0.0, 1.0, cells)
    kernel = hilbert_kernel() if kernel is None else kernel
    shared = _Shared()
    built = {}

    def get(r):
        if r is None:
            return None
        if r not in built:
            built[r] = r.build(grid)
        return built[r]

    return [Instance(m.name, get(m.f), get(m.w), get(m.b), kernel, shared, (m.w, m.b)) for m in members]


def default_family(cells: int = 1024, size: int = 200, seed: int = 42,
                   kernel: Optional[KernelSpec] = None) -> list:
    return instantiate(default_members(size, seed), cells, kernel)


def constant_symbol_family(cells: int = 1024, size: int = 20, seed: int = 42) -> list:
    """Default members with ``b`` replaced by a constant, so every commutator vanishes."""
    members = [Member(m.name, m.f, m.w, Constant(2.5)) for m in default_members(size, seed)]
    return instantiate(members, cells)


@dataclass
class ExtremalFamily:
    """Instances indexed by one parameter; ``build(value)`` returns the instances at that value."""

    name: str
    parameter: str
    values: list
    builder: Callable[[float], list]

    def build(self, value) -> list:
        return self.builder(value)


def _singular_instances(cells, delta, lo, supports):
    grid = Grid.on(lo, lo + (1.0 if lo == 0.0 else 2.0), cells)
    ax = np.maximum(np.abs(grid.midpoints()), grid.spacing)
    w = GridFunction(grid, ax ** (delta - 1.0))
    b = GridFunction(grid, np.log(ax))
    shared = _Shared()
    return [Instance(f"t={t:g}", grid.indicator(0.0, t), w, b, hilbert_kernel(), shared, ("w", "b"))
            for t in supports]


def resolution_family(delta: float = 2.0 ** -6, cells=tuple(2 ** k for k in range(4, 13)),
                      supports=(0.5, 1.0)) -> ExtremalFamily:
    """``w = max(x, h)^(delta-1)``, ``b = log max(x, h)``, ``f = chi_[0, t)`` on ``[0, 1)``.

    Refining the grid drives ``[w]_A1`` up (the truncation at ``h`` is what
    keeps it finite), so the cell count is the sweep parameter.
    """
    return ExtremalFamily("resolution", "cells", list(cells),
                          lambda n: _singular_instances(int(n), delta, 0.0, supports))


def delta_family(cells: int = 4096, deltas=tuple(2.0 ** -k for k in range(2, 7))) -> ExtremalFamily:
    """``w = max(|x|, h)^(delta-1)``, ``b = log max(|x|, h)``, ``f = chi_[0, delta)`` on ``[-1, 1)``."""

    def build(d):
        return _singular_instances(cells, d, -1.0, (d,))

    return ExtremalFamily("delta", "delta", list(deltas), build)


def unit_weight_family(cells: int = 1024, ps=(1.05, 1.1, 1.2, 1.5)) -> ExtremalFamily:
    """``w = 1`` with the singular symbol; the sweep parameter is ``p``."""

    def build(p):
        return _singular_instances(cells, 1.0, 0.0, (0.5, 1.0))

    return ExtremalFamily("unit-weight", "p", list(ps), build)
