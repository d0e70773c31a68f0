"""Calderón–Zygmund decomposition on the dyadic tree and the Kolmogorov inequality."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import DomainError, LevelTooLowError
from .grid import DyadicInterval, GridFunction, Interval, average, _weak_sup
from .singular import KernelSpec, apply_kernel_operator

__all__ = [
    "CZDecomposition", "cz_decompose", "kolmogorov_check", "kolmogorov_constant",
    "bad_part_commutator_split",
]


@dataclass(frozen=True, eq=False)
class CZDecomposition:
    """``f = good + sum(bad_parts)`` at level ``level``.

    ``cubes[j]`` carries ``bad_parts[j]`` and ``averages[j]`` (the mean of
    ``|f|`` over it).  ``n`` is the dimension parameter in the ``2^n``
    bound on those averages.
    """

    level: float
    cubes: list
    good: GridFunction
    bad_parts: list
    averages: list = field(default_factory=list)
    n: int = 1

    @property
    def omega(self) -> np.ndarray:
        """Cell mask of the union of the selected cubes."""
        mask = np.zeros(self.good.grid.cells, dtype=bool)
        for Q in self.cubes:
            mask[Q.start:Q.stop] = True
        return mask

    def enlarged(self, factor: int = 3) -> list:
        """Each cube dilated about its centre by ``factor``, clipped to the grid."""
        return [Q.as_interval().dilate(factor, self.good.grid) for Q in self.cubes]

    @property
    def tilde_omega(self) -> np.ndarray:
        mask = np.zeros(self.good.grid.cells, dtype=bool)
        for I in self.enlarged(3):
            mask[I.start:I.stop] = True
        return mask

    def bad(self) -> GridFunction:
        total = np.zeros(self.good.grid.cells)
        for h in self.bad_parts:
            total += h.values
        return self.good.with_values(total)

    def write_csv(self, path: Union[str, Path]):
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["level", "index", "avg"])
            for Q, avg in zip(self.cubes, self.averages):
                out.writerow([Q.level, Q.index, f"{avg:.17g}"])


def cz_decompose(f: GridFunction, lam: float, n: int = 1) -> CZDecomposition:
    """Stopping-time selection: a dyadic cube is taken the first time the mean of |f| on it exceeds lam."""
    if not lam > 0:
        raise DomainError(f"level must be positive, got {lam}")
    depth = f.grid.depth
    a = np.abs(f.values)
    root_avg = float(np.mean(a))
    if root_avg > lam:
        raise LevelTooLowError(f"mean of |f| over the grid is {root_avg:.6g} > level {lam:.6g}")

    cubes, avgs = [], []
    stack = [DyadicInterval(depth, 0)]
    while stack:
        Q = stack.pop()
        avg = float(np.mean(a[Q.start:Q.stop]))
        if avg > lam:
            cubes.append(Q)
            avgs.append(avg)
        elif Q.level > 0:
            left, right = Q.children()
            stack.extend((right, left))
    order = sorted(range(len(cubes)), key=lambda j: cubes[j].start)
    cubes = [cubes[j] for j in order]
    avgs = [avgs[j] for j in order]

    good = f.values.copy()
    bad = []
    for Q in cubes:
        fq = average(f, Q.as_interval())
        h = np.zeros(f.grid.cells)
        h[Q.start:Q.stop] = f.values[Q.start:Q.stop] - fq
        good[Q.start:Q.stop] = fq
        bad.append(f.with_values(h))
    return CZDecomposition(float(lam), cubes, f.with_values(good), bad, avgs, n)


def kolmogorov_constant(p: float, q: float) -> float:
    """``(q/(q-p))^(1/p)``."""
    if not 0 < p < q:
        raise DomainError(f"need 0 < p < q, got p={p}, q={q}")
    return (q / (q - p)) ** (1.0 / p)


def kolmogorov_check(f: GridFunction, Q: Optional[Interval], p: float, q: float) -> tuple[float, float]:
    """``L^p`` and weak ``L^q`` quasinorms of ``f`` on ``Q`` under ``dx/|Q|``."""
    if not 0 < p < q:
        raise DomainError(f"need 0 < p < q, got p={p}, q={q}")
    Q = f.grid.whole() if Q is None else Q
    a = np.abs(f.restrict(Q))
    lhs = float(np.mean(a ** p)) ** (1.0 / p)
    rhs = _weak_sup(a, np.full(a.size, 1.0 / a.size), q)
    return lhs, rhs


def bad_part_commutator_split(b: GridFunction, K: KernelSpec, cz: CZDecomposition) -> GridFunction:
    """``sum_j (b - b_Qj) T h_j - sum_j T((b - b_Qj) h_j)``, which equals ``[b, T] sum_j h_j``."""
    total = np.zeros(b.grid.cells)
    for Q, h in zip(cz.cubes, cz.bad_parts):
        centred = b - average(b, Q.as_interval())
        total += (centred * apply_kernel_operator(K, h)).values
        total -= apply_kernel_operator(K, centred * h).values
    return b.with_values(total)
