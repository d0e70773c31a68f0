"""Maximal operators over grid intervals.

Every operator takes an exact supremum over a finite interval family: all
runs of consecutive cells (``MaximalKind.HL``) or the dyadic blocks of a
power-of-two grid (``MaximalKind.DYADIC``).  The grid is the whole space;
intervals never leave it.
"""

from __future__ import annotations

import enum

import numpy as np

from . import _kernels
from .errors import DomainError
from .grid import GridFunction
from .orlicz import YoungFunction

__all__ = [
    "MaximalKind", "hl_maximal", "dyadic_maximal", "m_delta", "sharp_maximal",
    "sharp_maximal_delta", "m_r", "orlicz_maximal", "m_squared", "maximal",
]


class MaximalKind(enum.Enum):
    HL = "hl"
    DYADIC = "dyadic"


def _kind(kind) -> MaximalKind:
    return kind if isinstance(kind, MaximalKind) else MaximalKind(str(kind).lower())


def _check_delta(delta: float):
    if not delta > 0:
        raise DomainError(f"exponent must be positive, got {delta}")


def _dyadic_sup(values: np.ndarray, stat, depth: int) -> np.ndarray:
    """Per-cell max of ``stat`` over the dyadic blocks containing each cell."""
    n = values.size
    out = np.zeros(n)
    for level in range(depth + 1):
        size = 1 << level
        blocks = values.reshape(n // size, size)
        out = np.maximum(out, np.repeat(stat(blocks), size))
    return out


def _block_mean(blocks):
    return blocks.mean(axis=1)


def _block_oscillation(blocks):
    return np.abs(blocks - blocks.mean(axis=1, keepdims=True)).mean(axis=1)


def hl_maximal(f: GridFunction) -> GridFunction:
    """Uncentered maximal function: sup of ``mean_Q |f|`` over intervals ``Q`` containing each cell."""
    return f.with_values(_kernels.max_average(np.abs(f.values)))


def dyadic_maximal(f: GridFunction) -> GridFunction:
    depth = f.grid.depth
    return f.with_values(_dyadic_sup(np.abs(f.values), _block_mean, depth))


def maximal(f: GridFunction, kind=MaximalKind.HL) -> GridFunction:
    return hl_maximal(f) if _kind(kind) is MaximalKind.HL else dyadic_maximal(f)


def m_delta(f: GridFunction, delta: float, kind=MaximalKind.HL) -> GridFunction:
    """``M(|f|^delta)^(1/delta)``."""
    _check_delta(delta)
    return maximal(abs(f) ** delta, kind) ** (1.0 / delta)


def sharp_maximal(f: GridFunction, kind=MaximalKind.HL) -> GridFunction:
    """Sup of the mean oscillation ``mean_Q |f - f_Q|`` over intervals containing each cell."""
    if _kind(kind) is MaximalKind.HL:
        return f.with_values(_kernels.max_oscillation(np.ascontiguousarray(f.values))[0])
    return f.with_values(_dyadic_sup(f.values, _block_oscillation, f.grid.depth))


def sharp_maximal_delta(f: GridFunction, delta: float, kind=MaximalKind.DYADIC) -> GridFunction:
    """``M^#(|f|^delta)^(1/delta)``; dyadic by default."""
    _check_delta(delta)
    return sharp_maximal(abs(f) ** delta, kind) ** (1.0 / delta)


def m_r(w: GridFunction, r: float) -> GridFunction:
    """``M(w^r)^(1/r)`` for ``r >= 1``."""
    if not r >= 1:
        raise DomainError(f"m_r needs r >= 1, got {r}")
    return hl_maximal(abs(w) ** r) ** (1.0 / r)


def orlicz_maximal(f: GridFunction, B: YoungFunction) -> GridFunction:
    """Sup of the Luxemburg norm ``||f||_{B,Q}`` over intervals containing each cell.

    Cubic in the cell count; keep ``N`` at a few thousand at most.
    """
    if B.code is None:
        raise DomainError(f"orlicz_maximal has no compiled form for {B!r}")
    kind, par = B.code
    a = np.abs(f.values)
    top = float(a.max())
    if top == 0.0:
        return f.with_values(np.zeros_like(a))
    # homogeneity: work at unit scale so subnormal inputs cannot underflow the root finder
    return f.with_values(top * _kernels.max_luxemburg(a / top, kind, par))


def m_squared(f: GridFunction) -> GridFunction:
    return hl_maximal(hl_maximal(f))
