"""Calderón–Zygmund kernels on the grid, commutators with a symbol b, and BMO.

Operators are dense: ``(Tf)_i = sum_{j != i} K(x_i, x_j) f_j h`` over cell
midpoints.  Dropping the diagonal cell is the discrete principal value.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .errors import KernelError
from .grid import Grid, GridFunction, Interval, _check_same_grid, average
from .orlicz import PHI, PSI, luxemburg_norm

__all__ = [
    "KernelSpec", "BmoReport", "hilbert_kernel", "synthetic_cz_kernel",
    "validate_kernel", "kernel_matrix", "apply_kernel_operator", "commutator",
    "commutator_kernel_form", "bmo_norm", "john_nirenberg_llogl_check",
]


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel ``K(x, y)`` (vectorized, x != y) with its declared constants.

    Declared bounds: ``|K(x,y)| <= c_size/|x-y|`` and, whenever
    ``2|x-z| < |x-y|``,
    ``|K(x,y) - K(z,y)| + |K(y,x) - K(y,z)| <= c_reg |x-z|^eps / |x-y|^(1+eps)``.
    """

    name: str
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    c_size: float
    epsilon: float
    c_reg: float

    def __call__(self, x, y):
        return self.evaluate(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def _hilbert(x, y):
    return 1.0 / (math.pi * (x - y))


def hilbert_kernel() -> KernelSpec:
    """``1/(pi (x - y))``; the regularity constant comes from the mean value theorem."""
    return _HILBERT


_HILBERT = KernelSpec("hilbert", _hilbert, c_size=1.0 / math.pi, epsilon=1.0, c_reg=4.0 / math.pi)


def synthetic_cz_kernel(eps: float) -> KernelSpec:
    """``1/(x-y) + (|x|^eps - |y|^eps) / (2 (x-y) |x-y|^eps)``.

    The second term is only ``eps``-Hölder in each variable, so the kernel
    meets the regularity condition with exponent ``eps`` and no better.
    """
    if not 0 < eps <= 1:
        raise KernelError(f"regularity exponent must lie in (0, 1], got {eps}")

    def evaluate(x, y):
        d = x - y
        return 1.0 / d + 0.5 * (np.abs(x) ** eps - np.abs(y) ** eps) / (d * np.abs(d) ** eps)

    c_reg = 2.0 ** (1 + eps) + 1.0 + (1.0 + eps) * 1.5 ** eps * 2.0 ** (1 + 2 * eps)
    return KernelSpec(f"synthetic(eps={eps:g})", evaluate, c_size=1.5, epsilon=eps, c_reg=c_reg)


def validate_kernel(K: KernelSpec, samples: int = 10_000, seed: int = 0,
                    window: float = 4.0) -> KernelSpec:
    """Check the declared size and regularity bounds on seeded random samples.

    Points lie in ``[-window, window]``; separations are log-uniform over
    ``[1e-6, window]`` so both near-diagonal and far pairs are exercised.
    Raises :class:`KernelError` carrying the first violating sample.
    """
    rng = np.random.default_rng(seed)
    slack = 1.0 + 1e-9
    x = rng.uniform(-window, window, samples)
    d = np.exp(rng.uniform(math.log(1e-6), math.log(window), samples)) * rng.choice([-1.0, 1.0], samples)
    y = x + d
    with np.errstate(all="ignore"):
        size = np.abs(K(x, y)) * np.abs(d)
    bad = ~(size <= K.c_size * slack)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise KernelError(f"{K.name}: size bound violated at x={x[i]!r}, y={y[i]!r}",
                          sample=(float(x[i]), float(y[i])))

    # triples with 2|x - z| < |x - y|
    u = rng.uniform(0.0, 1.0, samples) * 0.5 * (1.0 - 1e-12)
    z = x + u * np.abs(d) * rng.choice([-1.0, 1.0], samples)
    with np.errstate(all="ignore"):
        diff = np.abs(K(x, y) - K(z, y)) + np.abs(K(y, x) - K(y, z))
        bound = K.c_reg * np.abs(x - z) ** K.epsilon / np.abs(d) ** (1.0 + K.epsilon)
    bad = ~(diff <= bound * slack + 1e-12 * np.abs(K(x, y)))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise KernelError(f"{K.name}: regularity bound violated at x={x[i]!r}, y={y[i]!r}, z={z[i]!r}",
                          sample=(float(x[i]), float(y[i]), float(z[i])))
    return K


@functools.lru_cache(maxsize=8)
def _validated(K: KernelSpec) -> bool:
    validate_kernel(K)
    return True


@functools.lru_cache(maxsize=4)
def kernel_matrix(K: KernelSpec, grid: Grid) -> np.ndarray:
    """Read-only ``K(x_i, x_j) h`` with a zero diagonal."""
    x = grid.midpoints()
    with np.errstate(divide="ignore", invalid="ignore"):
        mat = K(x[:, None], x[None, :]) * grid.spacing
    np.fill_diagonal(mat, 0.0)
    mat.setflags(write=False)
    return mat


def apply_kernel_operator(K: KernelSpec, f: GridFunction) -> GridFunction:
    _validated(K)
    mat = kernel_matrix(K, f.grid)
    return f.with_values(_kernels.dense_apply(mat, f.values))


def commutator(b: GridFunction, K: KernelSpec, f: GridFunction) -> GridFunction:
    """``b Tf - T(bf)``."""
    _check_same_grid(b.grid, f.grid)
    return b * apply_kernel_operator(K, f) - apply_kernel_operator(K, b * f)


def commutator_kernel_form(b: GridFunction, K: KernelSpec, f: GridFunction) -> GridFunction:
    """``sum_{j != i} (b_i - b_j) K(x_i, x_j) f_j h``; equal to :func:`commutator` up to rounding."""
    _check_same_grid(b.grid, f.grid)
    _validated(K)
    mat = kernel_matrix(K, f.grid)
    return f.with_values(_kernels.dense_commutator(mat, b.values, f.values))


@dataclass(frozen=True)
class BmoReport:
    bmo_norm: float
    worst_interval: Interval
    jn_expL_ratio: float


def bmo_norm(b: GridFunction, with_exp: bool = True) -> BmoReport:
    """Largest mean oscillation over grid intervals.

    ``jn_expL_ratio`` is ``max_Q ||b - b_Q||_{exp L, Q}`` over the BMO norm.
    It costs a cubic sweep, so ``with_exp=False`` skips it (reported as nan).
    """
    _, best, s, e = _kernels.max_oscillation(np.ascontiguousarray(b.values))
    worst = Interval(int(s), int(e - s + 1))
    if best == 0.0:
        return BmoReport(0.0, worst, 0.0)
    ratio = math.nan
    if with_exp:
        kind, par = PSI.code
        ratio = float(_kernels.max_centered_luxemburg(np.ascontiguousarray(b.values), kind, par)) / best
    return BmoReport(float(best), worst, ratio)


def john_nirenberg_llogl_check(b: GridFunction, f: GridFunction, Q: Optional[Interval] = None,
                               bmo: Optional[float] = None) -> tuple[float, float]:
    """``mean_Q |b - b_Q| f`` against ``||b||_BMO ||f||_{L log L, Q}``."""
    _check_same_grid(b.grid, f.grid)
    Q = b.grid.whole() if Q is None else Q
    bq = average(b, Q)
    lhs = float(np.mean(np.abs(b.restrict(Q) - bq) * f.restrict(Q)))
    bmo = bmo_norm(b, with_exp=False).bmo_norm if bmo is None else bmo
    return lhs, bmo * luxemburg_norm(f, PHI, Q)
