import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from oracles import quad_fourier_coeff
from toeplitz_spectra import symbols as S
from toeplitz_spectra.symbols import (
    C_alpha,
    C_alpha_gamma_alpha,
    FourierSymbol,
    SimpleLoopSymbol,
    fourier_coeffs,
    fractional_difference_coeffs,
    halpha_coeffs,
    halpha_tail_constant,
    invert_simple_loop,
    preset,
    symbol_from_json,
    szego_factorize,
)

ONE = FourierSymbol([1.0], name="one")


def _grid(n):
    return 2 * np.pi * np.arange(n) / n


def test_fourier_coeffs_trig_polynomial():
    th = _grid(64)
    sym = fourier_coeffs(2 - 2 * np.cos(th), 4)
    assert np.allclose(sym.coeffs, [2, -1, 0, 0, 0], atol=1e-15)


def test_fourier_coeffs_constant():
    sym = fourier_coeffs(np.ones(32), 3)
    assert np.allclose(sym.coeffs, [1, 0, 0, 0], atol=1e-15)


def test_fourier_coeffs_singular_against_quadrature():
    n = 1 << 22
    th = _grid(n)
    sym = fourier_coeffs((2 - 2 * np.cos(th)) ** 0.25, 64)
    ref = np.array([quad_fourier_coeff(lambda t: (2 - 2 * math.cos(t)) ** 0.25, u) for u in range(65)])
    assert np.max(np.abs(sym.coeffs - ref)) < 1e-9


def test_fourier_coeffs_rejects_bad_input():
    with pytest.raises(ValueError):
        fourier_coeffs(np.ones(8), 4)
    x = np.ones(64)
    x[3] = np.nan
    with pytest.raises(ValueError):
        fourier_coeffs(x, 4)
    with pytest.warns(UserWarning):
        fourier_coeffs(np.ones(20), 4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=9))
def test_fourier_roundtrip_band_limited(c):
    sym = FourierSymbol(c)
    n = 8 * len(c) + 8
    th = _grid(n)
    back = fourier_coeffs(sym(th), sym.J)
    assert np.allclose(back.coeffs, sym.coeffs, atol=1e-12)
    assert np.allclose(back(th), sym(th), atol=1e-10)


def test_fourier_symbol_invariants():
    sym = preset("ar1", J=64)
    inv = sym.check_invariants(tail_cap=1e-10)
    assert all(inv.values()), inv


def test_halpha_alpha_one_is_tridiagonal():
    sym = halpha_coeffs(1.0, ONE, 6)
    assert np.allclose(sym.coeffs.coeffs, [2, -1, 0, 0, 0, 0, 0], atol=1e-14)


@pytest.mark.parametrize("alpha", [0.25, 0.75])
def test_closed_form_matches_quadrature(alpha):
    delta = fractional_difference_coeffs(alpha, 64)
    ref = [quad_fourier_coeff(lambda t: (2 - 2 * math.cos(t)) ** alpha, u) for u in range(65)]
    assert np.max(np.abs(delta - ref)) < 1e-9


def test_halpha_with_regular_factor_against_quadrature():
    c = preset("halpha:0.25:cos03", J=32).c
    sym = halpha_coeffs(0.25, c, 32)
    ref = quad_fourier_coeff(lambda t: (2 - 2 * math.cos(t)) ** 0.25 * (1 + 0.3 * math.cos(t)), 10)
    assert abs(sym.coeffs.coeffs[10] - ref) < 1e-8


def test_halpha_rejections():
    for a in (0.0, 0.5, 1.2, -0.3):
        with pytest.raises(ValueError):
            halpha_coeffs(a, ONE, 8)
    with pytest.raises(ValueError):
        halpha_coeffs(0.25, FourierSymbol([0.2, 0.5]), 8)


def test_singular_sign_pattern_and_invariants():
    sym = preset("halpha:0.75", J=256)
    inv = sym.check_invariants(U=256)
    assert all(inv.values()), inv


@pytest.mark.parametrize("alpha", [0.25, 0.75])
def test_tail_constant_formula(alpha):
    # classical asymptotics of the binomial-type coefficients
    ref = gamma(2 * alpha + 1) * math.sin(math.pi * alpha) / math.pi
    assert abs(C_alpha(alpha) - ref) < 1e-12


def test_tail_ratio_converges():
    sym = halpha_coeffs(0.25, ONE, 2000)
    devs = [abs(abs(halpha_tail_constant(sym, u)) - C_alpha(0.25)) for u in (500, 1000, 2000)]
    assert devs[0] > devs[1] > devs[2]
    assert halpha_tail_constant(sym, 2000) < 0
    sym75 = halpha_coeffs(0.75, ONE, 1000)
    assert abs(abs(halpha_tail_constant(sym75, 1000)) - C_alpha(0.75)) / C_alpha(0.75) < 0.05


def test_gamma_alpha_constant_misses_the_tail():
    # the variant with |Gamma(alpha)| in the denominator is off by more than 25%
    for a in (0.25, 0.75):
        sym = halpha_coeffs(a, ONE, 2000)
        r = abs(halpha_tail_constant(sym, 2000))
        assert abs(r - C_alpha_gamma_alpha(a)) / C_alpha_gamma_alpha(a) > 0.25


def test_tail_constant_rejects_bad_u():
    sym = halpha_coeffs(0.25, ONE, 16)
    with pytest.raises(ValueError):
        halpha_tail_constant(sym, 0)
    with pytest.raises(ValueError):
        halpha_tail_constant(sym, 17)


def test_szego_constant():
    fac = szego_factorize(FourierSymbol([4.0]), 8)
    assert np.allclose(fac.outer, [2] + [0] * 8, atol=1e-14)
    assert np.allclose(fac.inv_outer, [0.5] + [0] * 8, atol=1e-14)


def test_szego_ma1():
    # |1 - 0.5 e^{i theta}|^2 = 1.25 - cos theta
    fac = szego_factorize(FourierSymbol([1.25, -0.5]), 32)
    assert np.allclose(fac.outer[:3], [1, -0.5, 0], atol=1e-13)
    assert np.allclose(fac.inv_outer, 0.5 ** np.arange(33), atol=1e-13)
    assert fac.recon_error < 1e-8


def test_szego_reconstruction_loop_h():
    fac = szego_factorize(preset("ar1", J=128), 64)
    assert fac.recon_error < 1e-8


def test_szego_rejects_zero():
    with pytest.raises(ValueError):
        szego_factorize(FourierSymbol([2.0, -1.0]), 16)


def test_invert_simple_loop_examples():
    tri, loop = preset("tridiag"), preset("loop1")
    assert invert_simple_loop(tri, 1.0) == pytest.approx(0.5, abs=1e-13)
    assert invert_simple_loop(loop, 1.25) == pytest.approx(1.0, abs=1e-13)
    assert invert_simple_loop(loop, 3.0) == 2.0
    with pytest.raises(ValueError):
        invert_simple_loop(loop, 3.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 3.0))
def test_invert_simple_loop_accuracy(lam):
    loop = preset("loop1")
    x = invert_simple_loop(loop, lam)
    assert abs(loop.f1(x) - lam) <= 1e-13 * max(1, abs(lam))


@pytest.mark.parametrize("name", ["tridiag", "loop1"])
def test_simple_loop_invariants(name):
    inv = preset(name).check_invariants()
    assert all(inv.values()), inv


def test_loop_from_fourier_matches_preset():
    loop = preset("loop1")
    gen = SimpleLoopSymbol.from_fourier(loop.base)
    x = np.linspace(0, 2, 41)
    assert np.allclose(gen.f1(x), loop.f1(x), atol=1e-14)
    assert np.allclose(gen.f1_prime(x), loop.f1_prime(x), atol=1e-13)
    assert np.allclose(gen.quotient(x, 0.7), loop.quotient(x, 0.7), atol=1e-13)
    assert gen.second_derivatives == pytest.approx((1.0, -2.0))


def test_singular_quotient_matches_naive_away_from_the_pole():
    loop = preset("halpha:0.75:cos03", J=64).as_loop()
    x = np.array([0.0, 0.3, 0.9, 1.5, 2.0])
    naive = (loop.f1(x) - loop.f1(1.2)) / (x - 1.2)
    assert np.allclose(loop.quotient(x, 1.2), naive, rtol=1e-12)
    # continuity through the removable point
    q = loop.quotient(np.array([1.2 - 1e-9, 1.2, 1.2 + 1e-9]), 1.2)
    assert np.ptp(q) < 1e-8
    assert q[1] == pytest.approx(float(loop.f1_prime(1.2)), rel=1e-10)


def test_json_roundtrip():
    sym = preset("ar1", J=8)
    back = symbol_from_json(json.dumps(sym.to_json()))
    assert np.allclose(back.coeffs, sym.coeffs)
    sing = preset("halpha:0.75:cos03", J=64)
    back = symbol_from_json(sing.to_json(), J=64)
    assert np.allclose(back.coeffs.coeffs, sing.coeffs.coeffs)


def test_json_rejections():
    with pytest.raises(ValueError):
        symbol_from_json({"kind": "fourier", "coeffs": [[0, 1.0]], "extra": 1})
    with pytest.raises(ValueError):
        symbol_from_json({"kind": "fourier", "coeffs": [[1, 1.0], [-1, 0.5], [0, 3.0]]})
    with pytest.raises(ValueError):
        symbol_from_json({"kind": "singular", "coeffs": [[0, 1.0]]})
    with pytest.raises(ValueError):
        preset("unknown")
