"""Predictor polynomials by the Levinson recursion and their two structural
checks: spectral matching of ``1/|K_M|^2`` and convergence of the
coefficients to the Taylor coefficients of ``1/g`` (g the outer factor).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .symbols import SzegoFactor, next_pow2

__all__ = [
    "PredictorPolynomial",
    "levinson",
    "levinson_mp",
    "predictor_vs_szego",
    "predictor_vs_szego_mp",
    "szego_inverse_mp",
    "verify_spectral_match",
]


@dataclass(frozen=True)
class PredictorPolynomial:
    """``K_M(z) = sum_k beta_k z^k`` with ``beta = T_M^{-1} e_1 / sqrt((T_M^{-1})_{11})``."""

    coeffs: np.ndarray
    prediction_error: float
    reflection: np.ndarray

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def on_circle(self, L):
        """Values at ``exp(2 pi i m / L)``, m = 0..L-1, by FFT."""
        if L < self.coeffs.size:
            raise ValueError("grid smaller than the polynomial length")
        pad = np.zeros(L)
        pad[: self.coeffs.size] = self.coeffs
        return np.conj(np.fft.fft(pad))  # fft uses e^{-i...}; coefficients are real

    def zero_free_report(self, L=None):
        L = L or next_pow2(max(64, 16 * self.coeffs.size))
        vals = self.on_circle(L)
        ph = np.unwrap(np.angle(np.concatenate([vals, vals[:1]])))
        winding = int(round((ph[-1] - ph[0]) / (2 * np.pi)))
        return {"min_modulus": float(np.min(np.abs(vals))), "winding": winding,
                "zero_free": bool(np.min(np.abs(vals)) > 0 and winding == 0 and self.coeffs[0] > 0)}


def levinson(autocov) -> PredictorPolynomial:
    """Levinson-Durbin recursion on ``hat h(0..M)``.

    Solves ``T_M a = E e_1`` with ``a_0 = 1``; then ``K_M = a / sqrt(E)`` since
    ``(T_M^{-1})_{11} = 1/E``.
    """
    r = np.asarray(autocov, dtype=float)
    if r.ndim != 1 or r.size < 1:
        raise ValueError("autocov must be a non-empty vector")
    if r[0] <= 0:
        raise ValueError("autocov[0] must be positive")
    M = r.size - 1
    a = np.zeros(M + 1)
    a[0] = 1.0
    E = r[0]
    refl = np.zeros(M)
    for m in range(1, M + 1):
        k = -(r[m] + np.dot(a[1:m], r[m - 1:0:-1])) / E
        if not abs(k) < 1.0:
            raise ValueError(f"reflection coefficient {k} at order {m}: matrix is not positive definite")
        refl[m - 1] = k
        a[: m + 1] = a[: m + 1] + k * a[m::-1]
        E *= 1.0 - k * k
    return PredictorPolynomial(coeffs=a / math.sqrt(E), prediction_error=float(E), reflection=refl)


def levinson_mp(autocov):
    """Same recursion on mpmath numbers at the current working precision.

    Returns ``(coeffs, E)`` as lists of mpf.
    """
    r = [mpmath.mpf(v) for v in autocov]
    M = len(r) - 1
    a = [mpmath.mpf(1)]
    E = r[0]
    for m in range(1, M + 1):
        k = -(r[m] + mpmath.fsum(a[j] * r[m - j] for j in range(1, m))) / E
        if not abs(k) < 1:
            raise ValueError(f"reflection coefficient at order {m} is not below 1")
        a = a + [mpmath.mpf(0)]
        a = [a[j] + k * a[m - j] for j in range(m + 1)]
        E *= 1 - k * k
    s = mpmath.sqrt(E)
    return [x / s for x in a], E


def verify_spectral_match(K: PredictorPolynomial, autocov, grid=None):
    """Deviation between the Fourier coefficients of ``1/|K_M|^2`` and ``autocov``.

    Coefficients come from an FFT quadrature on at least 16*M points.
    """
    autocov = np.asarray(autocov, dtype=float)
    M = K.degree
    L = grid or next_pow2(max(16 * M, 64))
    if L < 16 * M:
        raise ValueError(f"quadrature grid {L} is below 16*M={16 * M}")
    vals = 1.0 / np.abs(K.on_circle(L)) ** 2
    c = np.fft.rfft(vals).real / L
    m = min(M, autocov.size - 1)
    dev = np.abs(c[: m + 1] - autocov[: m + 1])
    return {"M": M, "grid": L, "max_dev": float(dev.max()), "per_j": dev}


def predictor_vs_szego(K: PredictorPolynomial, fac: SzegoFactor, N: int):
    """Distance between the first column of ``T_N^{-1}`` and its outer-factor limit.

    The first column is ``beta_{0,N} beta_{k,N}`` (K is normalized by
    ``sqrt((T_N^{-1})_{11}) = 1/beta_{0,N}``) and tends to
    ``(1/g)^(0) (1/g)^(k)``:

        e(N) = max_k |beta_{0,N} beta_{k,N} - (1/g)^(0) (1/g)^(k)|.

    ``e_normalized`` compares the predictor coefficients themselves with
    ``(1/g)^(k)``; both decay at the same rate.
    """
    if K.degree != N:
        raise ValueError(f"predictor degree {K.degree} != N={N}")
    if fac.inv_outer.size < N + 1:
        raise ValueError("outer factor carries fewer than N+1 coefficients")
    ginv = fac.inv_outer[: N + 1]
    if abs(K.coeffs[0] - ginv[0]) > 0.5 * abs(ginv[0]):
        raise ValueError("predictor and outer factor do not describe the same symbol")
    err = np.abs(K.coeffs[0] * K.coeffs - ginv[0] * ginv)
    return {"N": N, "e": float(err.max()), "argmax": int(err.argmax()),
            "e_normalized": float(np.max(np.abs(K.coeffs - ginv)))}


def szego_inverse_mp(h, J, grid, dps):
    """Taylor coefficients 0..J of ``1/g`` at ``dps`` digits.

    ``h`` is evaluated at mpf angles; ln h goes through an mp DFT on
    ``grid`` points and the exponential series recurrence.
    """
    with mpmath.workdps(dps):
        L = grid
        two_pi = 2 * mpmath.pi
        logs = [mpmath.log(h(two_pi * m / L)) for m in range(L)]
        cosines = [mpmath.cos(two_pi * m / L) for m in range(L)]
        lc = []
        for k in range(J + 1):
            lc.append(mpmath.fsum(logs[m] * cosines[(k * m) % L] for m in range(L)) / L)
        # 1/g = exp(-(L0/2 + sum_k L_k z^k))
        a = [-lc[0] / 2] + [-v for v in lc[1:]]
        b = [mpmath.exp(a[0])]
        for n in range(1, J + 1):
            b.append(mpmath.fsum(k * a[k] * b[n - k] for k in range(1, n + 1)) / n)
        return b


def predictor_vs_szego_mp(autocov, h, N, dps=400, grid=None):
    """Extended-precision ``e(N)`` (see predictor_vs_szego) for symbols whose
    e(N) falls below 1e-16.

    ``autocov`` must hold ``hat h(0..N)`` exactly (e.g. rationals for a
    trigonometric polynomial); ``h`` evaluates the symbol at an mpf angle.
    Returns ``e`` as a float together with its base-10 logarithm, which
    stays finite when ``e`` underflows.
    """
    grid = grid or next_pow2(max(4 * (N + 1), 256))
    with mpmath.workdps(dps):
        coeffs, _ = levinson_mp(list(autocov[: N + 1]) + [0] * max(0, N + 1 - len(autocov)))
        ginv = szego_inverse_mp(h, N, grid, dps)
        e = max(abs(coeffs[0] * coeffs[k] - ginv[0] * ginv[k]) for k in range(N + 1))
        en = max(abs(coeffs[k] - ginv[k]) for k in range(N + 1))
        log10e = float(mpmath.log10(e)) if e > 0 else -math.inf
        return {"N": N, "e": float(e), "log10_e": log10e, "e_normalized": float(en), "dps": dps, "grid": grid}
