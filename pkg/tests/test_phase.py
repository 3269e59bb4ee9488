import math

import numpy as np
import pytest

from toeplitz_spectra import preset
from toeplitz_spectra.errors import NumericalFailure
from toeplitz_spectra.phase import (
    HFactor, chi_of, h_factor, phase_at, rho_N, rho_limit, tau_N, theta_of,
)
from toeplitz_spectra.symbols import FourierSymbol, SimpleLoopSymbol

SWEEP = np.linspace(0.0, 2.0, 514)[1:-1]


@pytest.fixture(scope="module")
def loop1():
    return preset("loop1")


@pytest.fixture(scope="module")
def singular_loop():
    return preset("halpha:0.75", J=4096).as_loop()


def test_chi_on_unit_circle():
    for lp in (1e-6, 0.3, 1.0, 1.7, 2 - 1e-9):
        chi = chi_of(lp)
        assert abs(abs(chi) - 1) < 1e-14
        assert abs(chi - np.exp(1j * theta_of(lp))) < 1e-14


def test_h_factor_tridiag_constant():
    H = h_factor(preset("tridiag"), 0.7)
    assert np.max(np.abs(H.samples - 2.0)) < 1e-14
    assert abs(H.coeffs[0] - 2.0) < 1e-14 and np.max(np.abs(H.coeffs[1:])) < 1e-14


def test_h_factor_removable_singularity(loop1):
    f = loop1
    assert abs(float(f.quotient(1.0, 1.0)) - 1.5) < 1e-15
    H = h_factor(f, 1.0)
    # theta0 = pi/2 lies on the grid at index L/4
    assert abs(H.samples[H.grid // 4] - 1.5) < 1e-14


def test_h_factor_reconstruction_and_evenness(loop1):
    H = h_factor(loop1, 0.5)
    assert H.reconstruction_error(loop1) < 1e-10
    assert np.min(H.samples) > 0
    assert np.max(np.abs(H.samples[1:] - H.samples[1:][::-1])) == 0.0


def test_h_factor_rejects_endpoints(loop1):
    for lp in (0.0, 2.0, -0.1, 2.5):
        with pytest.raises(ValueError):
            h_factor(loop1, lp)


def test_tau_constant_h():
    H = HFactor.from_function(lambda t: 3.0 + 0 * t, 0.8)
    assert abs(tau_N(H, 10) - 1.0) < 1e-14


def test_tau_ar1_closed_form():
    H = HFactor.from_function(lambda t: 1.0 / (1.25 - np.cos(t)), 1.0)
    expected = ((1 + 0.5j) / (1 - 0.5j)) ** 2
    for N in (4, 16):
        t = tau_N(H, N)
        assert abs(t - expected) < 1e-12
        assert abs(abs(t) - 1) < 1e-14


def test_phase_sample_invariants(loop1):
    for th in (0.2, 1.0, 2.5):
        s = phase_at(loop1, 40, th)
        assert all(s.check_invariants().values())
        assert abs(np.exp(-2j * s.rho_N) - s.tau) < 1e-8


def test_rho_tridiag_identically_zero():
    samples = rho_N(preset("tridiag"), 30, SWEEP)
    assert max(abs(s.rho_N) for s in samples) < 1e-13
    assert max(abs(s.tau - 1) for s in samples) < 1e-13


def test_rho_bounded_across_N(loop1):
    maxima = [max(abs(s.rho_N) for s in rho_N(loop1, N, SWEEP)) for N in (32, 64, 128, 256)]
    assert max(maxima) / min(maxima) <= 1.5
    assert all(np.isfinite(maxima))


def test_rho_anchor_near_zero(loop1):
    # rho_N vanishes linearly in theta0 as lambda' -> 0+
    vals = [abs(phase_at(loop1, 64, theta_of(lp)).rho_N) for lp in (1e-4, 1e-6, 1e-8)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-4 * 0.5
    samples = rho_N(loop1, 64, np.linspace(1e-8, 2e-3, 600))
    assert abs(samples[0].rho_N) < 1e-4


def test_rho_sweep_matches_pointwise(loop1):
    samples = rho_N(loop1, 64, SWEEP)
    dev = max(abs(s.rho_N - phase_at(loop1, 64, s.theta0).rho_N) for s in samples)
    assert dev < 1e-12


def test_rho_sweep_rejects_coarse_and_bad_grids(singular_loop):
    # H = |1 - 0.95 e^{i theta}|^2 has a phase that turns fast near theta = 0
    steep = SimpleLoopSymbol(FourierSymbol([1.0]), f1=lambda x: x, f1_prime=lambda x: 1.0,
                             divided_difference=lambda x, y: 0.0025 + 1.9 * np.asarray(x, dtype=float))
    with pytest.raises(NumericalFailure):
        rho_N(steep, 64, [1e-3, 0.05, 1.0])
    with pytest.raises(ValueError):
        rho_N(singular_loop, 16, [0.5, 0.4])
    with pytest.raises(ValueError):
        rho_N(singular_loop, 16, [0.0, 0.4])


def test_rho_limit_constant_h():
    f = SimpleLoopSymbol(FourierSymbol([2.0, -1.0]), f1=lambda x: 2 * x, f1_prime=lambda x: 2.0)
    assert abs(rho_limit(f, 0.9)) < 1e-15


def test_rho_limit_log_series_oracle():
    # H = |1 - 0.5 e^{i theta}|^2 = 0.25 + x; only the quotient is used
    f = SimpleLoopSymbol(FourierSymbol([1.0]), f1=lambda x: x * x - 0.75 * x,
                         f1_prime=lambda x: 2 * x - 0.75,
                         divided_difference=lambda x, y: 0.25 + np.asarray(x, dtype=float))
    direct = np.angle(1 - 0.5 * np.exp(-0.5j * np.pi)) - np.angle(1 - 0.5 * np.exp(0.5j * np.pi))
    value, tail = rho_limit(f, 1.0, return_tail=True)
    assert abs(value - 2 * math.atan(0.5)) < 1e-14
    assert abs(value - direct) < 1e-14
    assert tail < 1e-14


def test_rho_converges_to_limit(loop1, singular_loop):
    for lp in (0.5, 1.0, 1.5):
        th = theta_of(lp)
        ref = rho_limit(loop1, lp)
        assert abs(phase_at(loop1, 64, th).rho_N - ref) < 1e-13
        ref = rho_limit(singular_loop, lp)
        d64 = abs(phase_at(singular_loop, 64, th).rho_N - ref)
        d256 = abs(phase_at(singular_loop, 256, th).rho_N - ref)
        assert d256 < d64


def test_rho_limit_tail_rejected(singular_loop):
    with pytest.raises(NumericalFailure):
        rho_limit(singular_loop, 1.0, tol=1e-14)
