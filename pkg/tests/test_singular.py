import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harmlab import (PSI, Grid, KernelError, apply_kernel_operator, bmo_norm, commutator,
                     hilbert_kernel, synthetic_cz_kernel)
from harmlab.singular import (KernelSpec, commutator_kernel_form, john_nirenberg_llogl_check,
                              kernel_matrix, validate_kernel)

from conftest import brute_luxemburg, intervals, value_arrays

H = hilbert_kernel()


def fn(vals, start=0.0, stop=1.0):
    return Grid.on(start, stop, len(vals)).function(vals)


def log_symbol(g):
    return g.function(np.log(np.maximum(np.abs(g.midpoints()), g.spacing)))


def test_kernels_pass_validation():
    assert validate_kernel(H) is H
    assert H.c_size == pytest.approx(1 / math.pi) and H.epsilon == 1.0
    for eps in (0.25, 0.5, 1.0):
        validate_kernel(synthetic_cz_kernel(eps))


def test_understated_constants_are_caught():
    bad = KernelSpec("too-small", H.evaluate, c_size=0.2, epsilon=1.0, c_reg=H.c_reg)
    with pytest.raises(KernelError) as info:
        validate_kernel(bad)
    assert info.value.sample is not None
    # |x-y|^(-3/2) is too singular for any size constant
    rough = KernelSpec("rough", lambda x, y: np.abs(x - y) ** -1.5, 10.0, 1.0, 10.0)
    with pytest.raises(KernelError):
        validate_kernel(rough)


def test_synthetic_kernel_exponent_range():
    with pytest.raises(KernelError):
        synthetic_cz_kernel(1.5)


def test_kernel_matrix_is_read_only_with_zero_diagonal():
    m = kernel_matrix(H, Grid.on(0, 1, 16))
    assert not m.flags.writeable
    assert np.all(np.diag(m) == 0)


def test_hilbert_maps_even_to_odd():
    g = Grid.on(-1, 1, 64)
    x = g.midpoints()
    Tf = apply_kernel_operator(H, g.function(np.exp(-4 * x ** 2))).values
    np.testing.assert_allclose(Tf, -Tf[::-1], atol=1e-13)


@given(value_arrays(), value_arrays(), st.floats(-3, 3), st.floats(-3, 3))
def test_operator_is_linear(x, y, a, b):
    n = min(x.size, y.size)
    f, g = fn(x[:n]), fn(y[:n])
    lhs = apply_kernel_operator(H, f * a + g * b).values
    rhs = a * apply_kernel_operator(H, f).values + b * apply_kernel_operator(H, g).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(lhs).max()))


def test_hilbert_of_indicator_against_closed_form():
    n = 1024
    g = Grid.on(-0.5, 1.5, n)
    x = g.midpoints()
    Tf = apply_kernel_operator(H, g.indicator(0, 1)).values
    exact = np.log(np.abs(x / (x - 1))) / math.pi
    away = (np.abs(x) > 4 * g.spacing) & (np.abs(x - 1) > 4 * g.spacing)
    rel = np.abs(Tf[away] - exact[away]) / np.abs(exact[away])
    assert rel.max() < 0.05


def test_commutator_with_constant_symbol_vanishes():
    g = Grid.on(0, 1, 64)
    f = g.indicator(0.2, 0.6)
    b = g.constant(2.5)
    assert np.all(commutator_kernel_form(b, H, f).values == 0.0)
    np.testing.assert_allclose(commutator(b, H, f).values, 0.0, atol=1e-13)


@given(value_arrays(sizes=st.just(32)), value_arrays(sizes=st.just(32)),
       value_arrays(sizes=st.just(32)), st.floats(-4, 4))
def test_commutator_is_bilinear(b1, b2, f, c):
    b1, b2, f = fn(b1), fn(b2), fn(f)
    scale = 1 + np.abs(commutator(b1, H, f).values).max() * (1 + abs(c))
    np.testing.assert_allclose(commutator(b1, H, f * c).values, c * commutator(b1, H, f).values,
                               atol=1e-11 * scale)
    np.testing.assert_allclose(commutator(b1 + b2, H, f).values,
                               commutator(b1, H, f).values + commutator(b2, H, f).values,
                               atol=1e-11 * (scale + np.abs(commutator(b2, H, f).values).max()))


def test_commutator_dual_formula_identity():
    g = Grid.on(-1, 1, 1024)
    b = log_symbol(g)
    f = g.indicator(0, 0.5)
    diff = np.abs(commutator(b, H, f).values - commutator_kernel_form(b, H, f).values).max()
    assert diff < 1e-12


def brute_bmo(vals):
    return max(np.mean(np.abs(vals[s:e] - vals[s:e].mean())) for s, e in intervals(len(vals)))


def test_bmo_trivial_cases():
    g = Grid.on(0, 1, 32)
    assert bmo_norm(g.constant(3.0)).bmo_norm == 0.0
    b = log_symbol(Grid.on(-1, 1, 32))
    assert bmo_norm(b * -2.0).bmo_norm == pytest.approx(2 * bmo_norm(b).bmo_norm, rel=1e-12)


@given(value_arrays(sizes=st.sampled_from([4, 8, 16])))
def test_bmo_matches_oracle(vals):
    rep = bmo_norm(fn(vals))
    assert rep.bmo_norm == pytest.approx(brute_bmo(vals), rel=1e-9, abs=1e-12)
    Q = rep.worst_interval
    if rep.bmo_norm > 0:
        blk = vals[Q.start:Q.stop]
        assert np.mean(np.abs(blk - blk.mean())) == pytest.approx(rep.bmo_norm, rel=1e-9)


@given(value_arrays(sizes=st.sampled_from([4, 8])))
def test_exp_l_oscillation_matches_oracle(vals):
    rep = bmo_norm(fn(vals))
    if rep.bmo_norm == 0:
        return
    expected = max(brute_luxemburg(vals[s:e] - vals[s:e].mean(), PSI) for s, e in intervals(len(vals)))
    assert rep.jn_expL_ratio * rep.bmo_norm == pytest.approx(expected, rel=1e-9)


def test_bmo_of_log_is_stable_under_refinement():
    a = bmo_norm(log_symbol(Grid.on(-1, 1, 512)), with_exp=False).bmo_norm
    b = bmo_norm(log_symbol(Grid.on(-1, 1, 1024)), with_exp=False).bmo_norm
    assert abs(b - a) <= 0.1 * a
    assert math.isnan(bmo_norm(log_symbol(Grid.on(-1, 1, 64)), with_exp=False).jn_expL_ratio)


def test_john_nirenberg_llogl():
    g = Grid.on(-1, 1, 128)
    b = log_symbol(g)
    lhs, rhs = john_nirenberg_llogl_check(g.constant(1.0), g.indicator(0, 0.5))
    assert lhs == 0.0
    lhs, rhs = john_nirenberg_llogl_check(b, g.constant(1.0))
    assert lhs <= rhs * (1 + 1e-12)
    rng = np.random.default_rng(4)
    bmo = bmo_norm(b, with_exp=False).bmo_norm
    worst = 0.0
    for _ in range(50):
        f = g.function(rng.exponential(size=128) * (rng.random(128) < 0.2))
        lhs, rhs = john_nirenberg_llogl_check(b, f, bmo=bmo)
        if rhs > 0:
            worst = max(worst, lhs / rhs)
    assert worst < 8
