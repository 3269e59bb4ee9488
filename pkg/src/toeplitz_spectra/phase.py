"""Regular factor H and phase of the characteristic equation.

For a simple-loop symbol f and ``lam' in (0, 2)``,

    f(theta) - f1(lam') = ((1 - cos theta) - lam') H(theta),

with H strictly positive.  Let P be the predictor polynomial of degree N+1
of H, ``chi = exp(i theta0)`` with ``cos theta0 = 1 - lam'``, and

    tau_N = (conj(P(chi)) / P(chi))^2.

The eigenvalues of T_N(f) are ``f1(lam')`` at the roots of

    chi^{2(N+2)} tau_N = 1,  equivalently  (N+2) theta0 - rho_N = k pi,

where ``rho_N(theta0) = 2 arg P(exp(i theta0))`` with the argument taken
continuously along the upper half circle from ``P(1) > 0``.  With this
branch ``exp(-2 i rho_N) = tau_N``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .predictor import PredictorPolynomial, levinson
from .symbols import SimpleLoopSymbol, next_pow2

__all__ = [
    "HFactor",
    "PhaseSample",
    "chi_of",
    "continuous_arg",
    "h_factor",
    "phase_at",
    "rho_N",
    "rho_limit",
    "tau_N",
]


def chi_of(lam_prime):
    # 1 - (lam' - 1)^2 = lam' (2 - lam'), written to avoid cancellation
    return complex(1.0 - lam_prime, math.sqrt(max(0.0, lam_prime * (2.0 - lam_prime))))


def theta_of(lam_prime):
    # arccos(1 - lam') without cancellation near 0
    return 2.0 * math.asin(math.sqrt(min(max(lam_prime / 2.0, 0.0), 1.0)))


def lam_prime_of(theta):
    return 2.0 * math.sin(0.5 * theta) ** 2


@dataclass(frozen=True)
class HFactor:
    """Samples and Fourier coefficients of H on a uniform grid of size L."""

    lambda_prime: float
    theta0: float
    samples: np.ndarray
    coeffs: np.ndarray
    lam: float = float("nan")

    @property
    def grid(self) -> int:
        return self.samples.size

    @property
    def chi(self) -> complex:
        return chi_of(self.lambda_prime)

    @classmethod
    def from_function(cls, H, lam_prime, grid=4096):
        """Wrap an arbitrary positive even function (used for closed-form tests)."""
        theta = 2 * np.pi * np.arange(grid) / grid
        vals = np.asarray(H(theta), dtype=float) * np.ones(grid)
        return cls(lam_prime, theta_of(lam_prime), vals, np.fft.rfft(vals).real / grid)

    def autocov(self, N):
        if N + 1 >= self.coeffs.size:
            raise ValueError(f"H grid {self.grid} too small for order {N + 1}")
        return self.coeffs[: N + 2]

    def predictor(self, N) -> PredictorPolynomial:
        """Predictor polynomial of degree N+1."""
        return levinson(self.autocov(N))

    def reconstruction_error(self, f: SimpleLoopSymbol, min_distance=1e-3):
        theta = 2 * np.pi * np.arange(self.grid) / self.grid
        x = 1.0 - np.cos(theta)
        keep = np.abs(x - self.lambda_prime) > min_distance
        lhs = (x - self.lambda_prime) * self.samples
        rhs = f.f1(x) - f.f1(self.lambda_prime)
        return float(np.max(np.abs(lhs - rhs)[keep]))


def _check_lambda_prime(lam_prime):
    if not (0.0 < lam_prime < 2.0):
        raise ValueError(f"lambda'={lam_prime} must lie in (0, 2)")


def _grid_for(f, N, grid):
    base = max(16 * (N + 2), 4096, getattr(f, "min_grid", 0))
    return next_pow2(max(base, grid or 0))


def h_factor(f: SimpleLoopSymbol, lam_prime, grid=None, N=64) -> HFactor:
    """Sample ``H = (f1(x) - f1(lam')) / (x - lam')``, x = 1 - cos theta.

    The removable singularity at ``x = lam'`` takes the value ``f1'(lam')``.
    """
    _check_lambda_prime(lam_prime)
    return _h_factor(f, lam_prime, _grid_for(f, N, grid))


def _h_factor(f, lam_prime, L):
    theta = 2 * np.pi * np.arange(L // 2 + 1) / L
    x = 2.0 * np.sin(0.5 * theta) ** 2
    half = np.asarray(f.quotient(x, lam_prime), dtype=float) * np.ones_like(x)
    vals = np.concatenate([half, half[-2:0:-1]])
    if np.min(vals) <= 0:
        raise NumericalFailure("H is not positive on the grid", {"lambda_prime": lam_prime, "min": float(vals.min())})
    coeffs = np.fft.rfft(vals).real / L
    return HFactor(lam_prime, theta_of(lam_prime), vals, coeffs, lam=float(f.f1(lam_prime)))


def tau_N(H: HFactor, N: int) -> complex:
    """``(conj P(chi) / P(chi))^2`` for the degree N+1 predictor P of H."""
    P = H.predictor(N)
    p = complex(np.polynomial.polynomial.polyval(H.chi, P.coeffs))
    if abs(p) == 0.0:
        raise NumericalFailure("predictor vanishes at chi", {"lambda_prime": H.lambda_prime})
    t = (p.conjugate() / p) ** 2
    return t / abs(t)


def continuous_arg(P: PredictorPolynomial, theta0, min_grid=64):
    """Argument of ``P(exp(i theta0))`` continued from ``arg P(1) = 0``."""
    p0 = complex(np.polynomial.polynomial.polyval(np.exp(1j * theta0), P.coeffs))
    G = next_pow2(max(8 * (P.degree + 1), min_grid))
    for _ in range(6):
        vals = P.on_circle(G)[: G // 2 + 1]
        raw = np.angle(vals)
        ph = np.unwrap(raw)
        if np.max(np.abs(np.diff(ph)), initial=0.0) < 0.5 * np.pi:
            break
        G *= 4
    else:
        raise NumericalFailure("argument of the predictor could not be tracked", {"grid": G})
    grid = 2 * np.pi * np.arange(G // 2 + 1) / G
    guess = np.interp(theta0, grid, ph - ph[0])
    exact = math.atan2(p0.imag, p0.real)
    return exact + 2 * np.pi * round((guess - exact) / (2 * np.pi)), p0


@dataclass(frozen=True)
class PhaseSample:
    lambda_prime: float
    theta0: float
    chi: complex
    tau: complex
    rho_raw: float
    rho_N: float

    def check_invariants(self):
        chi_ref = chi_of(self.lambda_prime)
        return {
            "chi_unit": abs(abs(self.chi) - 1.0) <= 1e-14 and abs(self.chi - chi_ref) <= 1e-14,
            "tau_unit": abs(abs(self.tau) - 1.0) <= 1e-10,
            "branch": abs(np.exp(-2j * self.rho_N) - self.tau) <= 1e-8,
        }


def phase_at(f: SimpleLoopSymbol, N: int, theta0: float, grid=None) -> PhaseSample:
    """Phase quantities at one angle, with rho_N from the continuous argument."""
    lam_prime = lam_prime_of(theta0)
    H = _h_factor(f, lam_prime, _grid_for(f, N, grid))
    P = H.predictor(N)
    arg, p = continuous_arg(P, theta0)
    t = (p.conjugate() / p) ** 2
    t /= abs(t)
    rho = 2.0 * arg
    return PhaseSample(lam_prime, theta0, complex(np.exp(1j * theta0)), t,
                       float(np.angle(t.conjugate())), rho)


def rho_N(f: SimpleLoopSymbol, N: int, lam_grid, grid=None):
    """rho_N along a sorted lambda' sweep by unwrapping the phase of conj(tau_N).

    This route never evaluates P away from the sweep points, so it needs the
    sweep to be fine enough: neighbouring raw phases must differ by less
    than pi/2 after unwrapping.  The branch is fixed by requiring rho_N to
    be near 0 at the smallest lambda'.
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    if lam_grid.ndim != 1 or lam_grid.size < 2:
        raise ValueError("lambda' grid needs at least two points")
    if np.any(np.diff(lam_grid) <= 0):
        raise ValueError("lambda' grid must be strictly increasing")
    if lam_grid[0] <= 0 or lam_grid[-1] >= 2:
        raise ValueError("lambda' grid must lie inside (0, 2)")
    L = _grid_for(f, N, grid)
    taus = []
    for lp in lam_grid:
        taus.append(tau_N(_h_factor(f, float(lp), L), N))
    taus = np.array(taus)
    raw = np.angle(np.conj(taus))  # = 2 rho_N mod 2 pi
    unwrapped = np.unwrap(raw)
    jumps = np.abs(np.diff(unwrapped))
    if np.max(jumps, initial=0.0) >= 0.5 * np.pi:
        i = int(np.argmax(jumps))
        raise NumericalFailure(
            "lambda' grid too coarse to unwrap the phase; refine the sweep",
            {"at": [float(lam_grid[i]), float(lam_grid[i + 1])], "jump": float(jumps[i])},
        )
    unwrapped -= 2 * np.pi * round(unwrapped[0] / (2 * np.pi))
    out = []
    for lp, t, r, u in zip(lam_grid, taus, raw, unwrapped):
        th = theta_of(float(lp))
        out.append(PhaseSample(float(lp), th, complex(np.exp(1j * th)), complex(t), float(r), float(u / 2)))
    return out


def rho_limit(f: SimpleLoopSymbol, lam_prime, J=None, tol=1e-6, return_tail=False):
    """Limit phase ``-2 sum_{k>=1} Lhat(k) sin(k theta0)``, Lhat the Fourier
    coefficients of ln H.  This is the N -> infinity limit of rho_N.

    The series is summed over the band resolved by the grid (``J`` terms,
    default half the grid); the reported tail is the coefficient mass in the
    upper half of that band, an upper proxy for what lies beyond it.
    """
    _check_lambda_prime(lam_prime)
    L = next_pow2(max(4 * (J or 0), 4096, 4 * getattr(f, "min_grid", 0)))
    H = _h_factor(f, lam_prime, L)
    lc = np.fft.rfft(np.log(H.samples)).real / L
    J = min(J or L // 2 - 1, L // 2 - 1)
    k = np.arange(1, J + 1)
    theta0 = theta_of(lam_prime)
    value = float(-2.0 * np.sum(lc[1: J + 1] * np.sin(k * theta0)))
    tail = float(2.0 * np.sum(np.abs(lc[J // 2 + 1: J + 1])))
    if tail > tol:
        raise NumericalFailure("log-series tail above tolerance; increase J", {"tail": tail, "J": J})
    return (value, tail) if return_tail else value
