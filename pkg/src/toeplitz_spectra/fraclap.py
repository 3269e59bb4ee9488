"""Fractional-Laplacian asymptotics for T_N(h_alpha), h_alpha = (2 - 2 cos)^alpha c.

Eigenvalue approximations with explicit bounds, sampled mode vectors,
eigenvector matching against a dense oracle, and the convergence of the
scaled matrix ``N^{2 alpha} T_N(h_alpha)`` to ``c(0) (-Delta)^alpha`` on (0, 1),
checked against a principal-value quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .symbols import C_alpha, C_alpha_gamma_alpha, FourierSymbol, _check_alpha, halpha_coeffs
from .toeplitz import DenseSpectrum, build, dense_eigh, matvec

__all__ = [
    "FracConstants",
    "FracMode",
    "constants",
    "cutoff_q",
    "discrete_fraclap_apply",
    "eig_approx",
    "fraclap_pv_oracle",
    "match_modes",
    "mode_vector",
    "mu_k",
    "mu_tilde_k",
    "phi_star",
    "phi_star_norm2",
]


def _check_frac_alpha(alpha):
    if not (0.0 < alpha < 1.0) or alpha == 0.5:
        raise ValueError(f"alpha={alpha} must lie in (0, 1) and differ from 1/2")


@dataclass(frozen=True)
class FracConstants:
    alpha: float
    C_alpha: float
    C_alpha_gamma_alpha: float
    C0: float
    C1: float
    C_of_alpha: float
    L_alpha_a: float
    L_alpha_b: float
    L_alpha: float
    L_prime_alpha: float
    K: float
    N: int | None = None

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def constants(alpha, N=None) -> FracConstants:
    """Constants attached to the eigenvalue and eigenvector estimates.

    ``C_of_alpha`` contains a term proportional to ``N^-alpha``; it is dropped
    unless N is given.  ``L_alpha`` has two readings,
    ``(C (2 alpha)^{-3/2})^{1/(2 alpha)}`` (a) and
    ``((2 alpha C)^{-3/2})^{1/(2 alpha)}`` (b); the larger is used.
    """
    _check_frac_alpha(alpha)
    a = alpha
    C0 = 1.5 ** (3 + 2 * a) + 0.75 ** (3 + 2 * a)
    C1 = (4 / math.pi) ** (-2 * a) * C0 * (5 / 3 + 2 ** (1 - 2 * a) + (1 - a) / a)
    inner = a + 2 * math.sqrt(a) / math.pi * C0 + a * math.pi / 16 * 3 ** (a + 2) + a
    if N is not None:
        inner += N ** (-a) * C1 * 2 * a * gamma(2 * a) / math.pi
    C = 4 / math.pi * inner
    La = (C * (2 * a) ** -1.5) ** (1 / (2 * a))
    Lb = ((C * 2 * a) ** -1.5) ** (1 / (2 * a))
    L = max(La, Lb)
    K = 5 / 8 * math.pi ** (2 * a - 1)
    Lp = max(L, (C * 2 ** (2 * a + 2) * a ** -1.5 / (K * math.pi)) ** (1 / (2 * a)))
    return FracConstants(a, C_alpha(a), C_alpha_gamma_alpha(a), C0, C1, C, La, Lb, L, Lp, K, N)


def mu_k(alpha, k):
    return k * math.pi / 2 - (1 - alpha) * math.pi / 4


def mu_tilde_k(alpha, k):
    return 2 ** (2 * alpha) * mu_k(alpha, k) ** (2 * alpha)


def eig_approx(alpha, c0, N, k, consts: FracConstants | None = None):
    """``((k pi - (1-alpha) pi/2)/N)^{2 alpha} c0`` and the bound
    ``2^{2 alpha+1} C(alpha) (1-alpha)/(sqrt(alpha) k) N^{-2 alpha}``.

    Warns when k is below the threshold L_alpha, where no estimate is claimed.
    """
    consts = consts or constants(alpha)
    if k < 1 or k * math.pi >= N * math.pi:
        raise ValueError("need 1 <= k < N")
    if k < consts.L_alpha:
        warnings.warn(f"k={k} is below L_alpha={consts.L_alpha:.3g}", stacklevel=2)
    approx = (k * math.pi / N - (1 - alpha) * math.pi / (2 * N)) ** (2 * alpha) * c0
    bound = 2 ** (2 * alpha + 1) * consts.C_of_alpha * (1 - alpha) / (math.sqrt(alpha) * k) * N ** (-2 * alpha)
    return approx, bound


def phi_star(alpha, k, x):
    """Sampled limit mode on [0, 1]; the branch depends on k mod 4."""
    if k < 1:
        raise ValueError("k must be >= 1")
    arg = mu_k(alpha, k) * (1.0 - 2.0 * np.asarray(x, dtype=float))
    r = k % 4
    if r == 0:
        return -np.sin(arg)
    if r == 1:
        return -np.cos(arg)
    if r == 2:
        return np.sin(arg)
    return np.cos(arg)


def phi_star_norm2(alpha, k):
    """Exact ``int_0^1 phi_star^2``."""
    m = mu_k(alpha, k)
    s = math.sin(2 * m) / (4 * m)
    return 0.5 + s if k % 2 else 0.5 - s


def mode_vector(alpha, c0, N, k, normalized=False):
    """``Z_{m+1} = phi_star(m/N) c0 / sqrt(N)``, m = 0..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    Z = phi_star(alpha, k, np.arange(N + 1) / N) * c0 / math.sqrt(N)
    if normalized:
        return Z / np.linalg.norm(Z)
    return Z


@dataclass(frozen=True)
class FracMode:
    k: int
    mu_k: float
    mu_tilde_k: float
    approx_eig: float
    bound: float
    mode_vector: np.ndarray
    matched_dense_index: int | None = None
    matched_lambda: float | None = None
    eig_gap: float | None = None
    overlap: float | None = None
    flags: tuple = ()

    def as_row(self):
        return {"k": self.k, "mu_k": self.mu_k, "approx": self.approx_eig, "bound": self.bound,
                "matched_lambda": self.matched_lambda, "gap": self.eig_gap, "overlap": self.overlap}


def match_modes(alpha, c: FourierSymbol, N, k_range, dense: DenseSpectrum | None = None, consts=None):
    """Match each k to the dense eigenvalue nearest to the approximation.

    Overlap is ``|<Z/|Z|, y>|`` with y the unit dense eigenvector, so the sign
    of y does not matter.  Two k landing on the same index get the flag
    ``collision``.
    """
    _check_frac_alpha(alpha)
    consts = consts or constants(alpha)
    if dense is None:
        sym = halpha_coeffs(alpha, c, max(N, 1024))
        dense = dense_eigh(build(sym, N))
    c0 = float(c(0.0))
    w, V = dense.eigenvalues, dense.eigenvectors
    modes = []
    for k in k_range:
        if not (1 <= k <= N + 1):
            raise ValueError(f"k={k} outside 1..{N + 1}")
        flags = []
        if k < consts.L_prime_alpha:
            flags.append("below_L_prime")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            approx, bound = eig_approx(alpha, c0, N, k, consts)
        j = int(np.argmin(np.abs(w - approx)))
        Z = mode_vector(alpha, c0, N, k)
        ov = float(abs(np.dot(Z / np.linalg.norm(Z), V[:, j])))
        modes.append(FracMode(k, mu_k(alpha, k), mu_tilde_k(alpha, k), approx, bound, Z, j, float(w[j]),
                              float(abs(w[j] - approx)), ov, tuple(flags)))
    seen = {}
    for m in modes:
        seen.setdefault(m.matched_dense_index, []).append(m.k)
    out = []
    for m in modes:
        if len(seen[m.matched_dense_index]) > 1:
            m = FracMode(**{**m.__dict__, "flags": m.flags + ("collision",)})
        out.append(m)
    return out


def cutoff_q(t):
    """C^1 ramp from 0 (t <= -1/3) to 1 (t >= 1/3) made of two parabolas."""
    t = np.asarray(t, dtype=float)
    out = np.where(t < 0, 4.5 * (t + 1 / 3) ** 2, 1.0 - 4.5 * (t - 1 / 3) ** 2)
    out = np.where(t <= -1 / 3, 0.0, out)
    out = np.where(t >= 1 / 3, 1.0, out)
    return out if out.ndim else float(out)


def _second_derivative(f, x, h=1e-3):
    # fourth-order central difference
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def fraclap_pv_oracle(alpha, f, x, support=(0.0, 1.0), f2=None, eps=1e-4, scheme="split"):
    """``C_alpha P.V. int (f(x) - f(y)) |x - y|^{-1-2 alpha} dy`` for f vanishing
    outside ``support``.

    Folding ``y = x +- t`` gives ``int_0^inf (2 f(x) - f(x+t) - f(x-t)) t^{-1-2 alpha} dt``.

    ``scheme="split"``: Taylor core ``-f''(x) eps^{2-2a}/(2-2a)`` on (0, eps),
    adaptive quadrature on (eps, T) with breaks where x +- t leaves the
    support, analytic tail ``2 f(x) T^{-2a}/(2a)`` beyond T.

    ``scheme="alg"``: algebraic-weight quadrature of
    ``(2 f(x) - f(x+t) - f(x-t))/t^2`` against ``t^{1-2a}`` on (0, T), same tail.

    Returns ``(value, error_estimate)``.
    """
    a, b = support
    if not (a < x < b) and f(x) != 0:
        raise ValueError("x outside the support of f")
    fx = float(f(x))
    T = max(abs(x - a), abs(b - x)) + 1e-12
    tail = 2.0 * fx * T ** (-2 * alpha) / (2 * alpha)
    d2 = f2(x) if f2 is not None else _second_derivative(f, x)

    def num(t):
        return 2.0 * fx - f(x + t) - f(x - t)

    breaks = sorted({abs(x - a), abs(b - x)})
    if scheme == "split":
        core = -d2 * eps ** (2 - 2 * alpha) / (2 - 2 * alpha)
        pts = [p for p in breaks if eps < p < T]
        val, err = integrate.quad(lambda t: num(t) * t ** (-1 - 2 * alpha), eps, T, points=pts or None,
                                  limit=400, epsabs=1e-11, epsrel=1e-10)
        total = core + val + tail
        # next Taylor term is O(eps^{4-2a} f'''')
        err += eps ** (4 - 2 * alpha)
    elif scheme == "alg":
        delta = 1e-4

        def G(t):
            if t < delta:
                return -d2
            return num(t) / (t * t)

        edges = [0.0] + [p for p in breaks if 0 < p < T] + [T]
        total, err = tail, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if lo == 0.0:
                v, e = integrate.quad(G, lo, hi, weight="alg", wvar=(1 - 2 * alpha, 0.0), limit=400,
                                      epsabs=1e-13)
            else:
                v, e = integrate.quad(lambda t: G(t) * t ** (1 - 2 * alpha), lo, hi, limit=400, epsabs=1e-13)
            total += v
            err += e
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return C_alpha(alpha) * total, C_alpha(alpha) * err


def discrete_fraclap_apply(alpha, c: FourierSymbol, N, f_smooth, window=(0.2, 0.8), support=(0.1, 0.9),
                           sym=None):
    """``x_m -> N^{2 alpha} (T_N(h_alpha) f(grid))_m`` for ``x_m = m/N`` in the window.

    Returns ``(x, values)``.
    """
    _check_alpha(alpha)
    x = np.arange(N + 1) / N
    fv = np.asarray(f_smooth(x), dtype=float) * np.ones(N + 1)
    outside = (x < support[0]) | (x > support[1])
    if np.any(np.abs(fv[outside]) >= 1e-14):
        raise ValueError(f"f is not supported inside {support}")
    sym = sym or halpha_coeffs(alpha, c, N)
    y = N ** (2 * alpha) * matvec(build(sym, N), fv)
    keep = (x >= window[0]) & (x <= window[1])
    return x[keep], y[keep]


def bump(x, center=0.5, radius=0.3):
    """``exp(-1/(1 - ((x - center)/radius)^2))`` inside the radius, 0 outside."""
    x = np.asarray(x, dtype=float)
    s = (x - center) / radius
    inside = np.abs(s) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out if out.ndim else float(out)
