"""Symbols: Fourier-coefficient representation, simple-loop views, the
singular family ``|1 - e^{i theta}|^{2 alpha} c(theta)`` and outer (Szego)
factorization.

Conventions
-----------
All symbols are real and even, so only ``hat h(0..J)`` is stored.  The
singular family is normalized as ``(2 - 2 cos theta)^alpha c(theta)``,
i.e. ``|1 - e^{i theta}|^{2 alpha} c``.  Writing it as
``(1 - cos theta)^alpha c`` would scale everything by ``2^-alpha``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.special import gamma, gammaln

__all__ = [
    "FourierSymbol",
    "SimpleLoopSymbol",
    "SingularSymbol",
    "SzegoFactor",
    "fourier_coeffs",
    "fractional_difference_coeffs",
    "halpha_coeffs",
    "halpha_tail_constant",
    "invert_simple_loop",
    "next_pow2",
    "preset",
    "szego_factorize",
    "symbol_from_json",
    "C_alpha",
    "C_alpha_gamma_alpha",
    "cheb_divided_difference",
    "power_divided_difference",
]

ROOT_TOL = 1e-13


def next_pow2(n):
    return 1 << max(0, int(math.ceil(math.log2(max(n, 1)))))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FourierSymbol:
    """Real even symbol stored as ``hat h(0), ..., hat h(J)``.

    ``s`` is the declared weight of the Wiener class the symbol belongs to;
    ``error`` is whatever discretization error the constructor could bound
    (zero for exact coefficient lists).
    """

    coeffs: np.ndarray
    s: float = 0.0
    name: str = "fourier"
    error: float = 0.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d array")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs contain non-finite values")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def J(self) -> int:
        return self.coeffs.size - 1

    def coeff(self, j):
        j = np.abs(np.asarray(j))
        out = np.zeros(j.shape)
        inside = j <= self.J
        out[inside] = self.coeffs[j[inside]]
        return out if out.ndim else float(out)

    @property
    def chebyshev(self) -> np.ndarray:
        # h(theta) = sum_j a_j T_j(cos theta) with a_0 = c_0, a_j = 2 c_j
        a = 2.0 * self.coeffs
        a[0] = self.coeffs[0]
        return a

    def __call__(self, theta):
        return cheb.chebval(np.cos(theta), self.chebyshev)

    def tail_estimate(self) -> float:
        return abs(self.coeffs[-1]) * max(self.J, 1) ** self.s

    def wiener_norm(self) -> float:
        j = np.arange(self.J + 1)
        w = np.abs(self.coeffs) * (j + 1.0) ** self.s
        return float(w[0] + 2.0 * w[1:].sum())

    def check_invariants(self, tail_cap=1e-6, ntheta=257):
        theta = np.linspace(-np.pi, np.pi, ntheta)
        j = np.arange(-self.J, self.J + 1)
        direct = (self.coeff(j)[None, :] * np.exp(1j * np.outer(theta, j))).sum(axis=1)
        partial = np.cumsum(np.abs(self.coeffs) * (np.arange(self.J + 1) + 1.0) ** self.s)
        return {
            "even": True,  # enforced by storage
            "tail_below_cap": bool(self.tail_estimate() <= tail_cap),
            "partial_sums_monotone": bool(np.all(np.diff(partial) >= 0)),
            "evaluator_matches_sum": bool(
                np.max(np.abs(direct.imag)) < 1e-12
                and np.max(np.abs(direct.real - self(theta))) < 1e-10 * max(1.0, self.wiener_norm())
            ),
        }

    def to_json(self):
        j = range(-self.J, self.J + 1)
        return {
            "kind": "fourier",
            "name": self.name,
            "coeffs": [[int(k), float(self.coeffs[abs(k)])] for k in j],
            "s": self.s,
        }


def fourier_coeffs(samples, J, s=0.0, name="sampled") -> FourierSymbol:
    """Fourier coefficients of a real even symbol from uniform samples on [0, 2 pi).

    The returned ``error`` is an aliasing proxy: the largest coefficient in
    the top eighth of the resolved band.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if np.any(np.isnan(samples)):
        raise ValueError("NaN in symbol samples")
    if n < 2 * J + 1:
        raise ValueError(f"grid of {n} points cannot resolve order {J} (need >= {2 * J + 1})")
    if n < 8 * J:
        warnings.warn(f"grid of {n} points is below 8*J={8 * J}; aliasing may be visible", stacklevel=2)
    c = np.fft.fft(samples) / n
    j = np.arange(J + 1)
    coeffs = 0.5 * (c[j].real + c[(-j) % n].real)
    top = np.abs(c[n // 2 - max(1, n // 16): n // 2 + 1])
    return FourierSymbol(coeffs, s=s, name=name, error=float(top.max()))


@dataclass(frozen=True)
class SimpleLoopSymbol:
    """Even symbol written as ``f(theta) = f1(1 - cos theta)`` with f1
    strictly increasing on [0, 2].

    ``f1`` and ``f1_prime`` must accept floats and numpy arrays; presets use
    plain arithmetic so they also accept mpmath numbers.
    """

    base: FourierSymbol
    f1: Callable
    f1_prime: Callable
    name: str = "loop"
    divided_difference: Callable | None = None
    min_grid: int = 0

    @classmethod
    def from_fourier(cls, base: FourierSymbol, name=None):
        a = base.chebyshev
        da = cheb.chebder(a)
        return cls(
            base=base,
            f1=lambda x: cheb.chebval(1.0 - np.asarray(x, dtype=float), a),
            f1_prime=lambda x: -cheb.chebval(1.0 - np.asarray(x, dtype=float), da),
            name=name or base.name,
            divided_difference=lambda x, y: cheb_divided_difference(a, x, y),
        )

    def quotient(self, x, lam_prime):
        """``(f1(x) - f1(lam_prime)) / (x - lam_prime)``, finite at ``x = lam_prime``."""
        if self.divided_difference is not None:
            return self.divided_difference(x, lam_prime)
        x = np.asarray(x, dtype=float)
        d = x - lam_prime
        near = np.abs(d) < 1e-7
        safe = np.where(near, 1.0, d)
        q = (self.f1(x) - self.f1(lam_prime)) / safe
        return np.where(near, self.f1_prime(lam_prime), q)

    def __call__(self, theta):
        return self.f1(1.0 - np.cos(theta))

    def derivative(self, theta):
        return self.f1_prime(1.0 - np.cos(theta)) * np.sin(theta)

    @property
    def value_range(self):
        return float(self.f1(0.0)), float(self.f1(2.0))

    @property
    def second_derivatives(self):
        """(f''(0), f''(pi)) from ``f'' = f1''(x) sin^2 + f1'(x) cos``."""
        return float(self.f1_prime(0.0)), -float(self.f1_prime(2.0))

    def f1_inverse(self, lam):
        return invert_simple_loop(self, lam)

    def is_increasing_on(self, theta1, theta2, n=2049):
        theta = np.linspace(theta1, theta2, n)
        inner = theta[(theta > 0) & (theta < np.pi)]
        return bool(np.all(self.derivative(inner) > 0)) and bool(np.all(np.diff(self(theta)) > 0))

    def check_invariants(self, n=2049):
        theta = np.linspace(0.0, np.pi, n)
        x = np.linspace(0.0, 2.0, 201)
        back = np.array([invert_simple_loop(self, float(self.f1(v))) for v in x])
        d0, dpi = self.second_derivatives
        return {
            "increasing": self.is_increasing_on(0.0, np.pi, n),
            "f1_matches_symbol": bool(np.max(np.abs(self(theta) - self.base(theta))) < 1e-10),
            "inverse_roundtrip": bool(np.max(np.abs(back - x)) < 1e-10),
            "curvature_signs": bool(d0 > 0 and dpi < 0),
        }


def cheb_divided_difference(a, x, y):
    """Divided difference of ``x -> chebval(1 - x, a)`` between x and y.

    Synthetic division by ``(Y - (1 - y))`` in the Chebyshev basis avoids the
    cancellation of the naive quotient near ``x = y``.
    """
    q = cheb.chebdiv(a, [-(1.0 - y), 1.0])[0] if len(a) > 1 else np.zeros(1)
    return -cheb.chebval(1.0 - np.asarray(x, dtype=float), q)


def power_divided_difference(x, y, a):
    """``(x^a - y^a) / (x - y)`` for x >= 0, y > 0 without cancellation."""
    x = np.asarray(x, dtype=float)
    t = (x - y) / y
    small = np.abs(t) < 1e-8
    ts = np.where(small, 1.0, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = np.expm1(a * np.log1p(ts)) / ts
    series = a * (1.0 + 0.5 * (a - 1.0) * t)
    return y ** (a - 1.0) * np.where(small, series, big)


def invert_simple_loop(f: SimpleLoopSymbol, lam) -> float:
    """Solve ``f1(x) = lam`` on [0, 2] by bisection."""
    lo, hi = 0.0, 2.0
    flo, fhi = float(f.f1(lo)), float(f.f1(hi))
    slack = 1e-13 * max(1.0, abs(lam))
    if not (flo - slack <= lam <= fhi + slack):
        raise ValueError(f"lambda={lam} outside the symbol range [{flo}, {fhi}]")
    if lam <= flo:
        return lo
    if lam >= fhi:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if float(f.f1(mid)) < lam:
            lo = mid
        else:
            hi = mid
    return lo if abs(float(f.f1(lo)) - lam) <= abs(float(f.f1(hi)) - lam) else hi


def C_alpha(alpha) -> float:
    """Normalizing constant of the fractional Laplacian of order 2*alpha in 1-d.

    Equals the tail constant of ``(2 - 2 cos)^alpha``:
    ``|hat h(u)| ~ C_alpha u^(-1-2 alpha)``.
    """
    return 2.0 ** (2 * alpha) * gamma(alpha + 0.5) / (math.sqrt(math.pi) * abs(gamma(-alpha)))


def C_alpha_gamma_alpha(alpha) -> float:
    """Same expression with ``|Gamma(alpha)|`` in the denominator.

    Kept for reporting only; it does not match the coefficient tail.
    """
    return 2.0 ** (2 * alpha) * gamma(alpha + 0.5) / (math.sqrt(math.pi) * abs(gamma(alpha)))


def fractional_difference_coeffs(alpha, n) -> np.ndarray:
    """Coefficients ``delta_0..delta_n`` of ``(2 - 2 cos theta)^alpha``.

    ``delta_u = (-1)^u Gamma(2a+1) / (Gamma(a+u+1) Gamma(a-u+1))`` evaluated
    through the ratio ``delta_{u+1}/delta_u = (u - a)/(u + a + 1)``.
    """
    u = np.arange(n)
    ratios = (u - alpha) / (u + alpha + 1.0)
    d0 = math.exp(gammaln(2 * alpha + 1) - 2 * gammaln(alpha + 1))
    return d0 * np.concatenate([[1.0], np.cumprod(ratios)])


def _check_alpha(alpha):
    if not (0.0 < alpha <= 1.0) or alpha == 0.5:
        raise ValueError(f"alpha={alpha} must lie in (0, 1] and differ from 1/2")


@dataclass(frozen=True)
class SingularSymbol:
    """``h(theta) = (2 - 2 cos theta)^alpha c(theta)`` with regular c."""

    alpha: float
    c: FourierSymbol
    coeffs: FourierSymbol
    trunc_error: float = 0.0

    @property
    def J(self):
        return self.coeffs.J

    @property
    def name(self):
        return f"halpha:{self.alpha:g}:{self.c.name}"

    def __call__(self, theta):
        return (2.0 - 2.0 * np.cos(theta)) ** self.alpha * self.c(theta)

    def coeff(self, j):
        return self.coeffs.coeff(j)

    def check_invariants(self, U=64, n=4097):
        theta = np.linspace(-np.pi, np.pi, n)
        out = {
            "c_positive": bool(np.min(self.c(theta)) > 0),
            "symmetric": True,
        }
        if self.c.J == 0:
            cf = self.coeffs.coeffs[: U + 1]
            out["sign_pattern"] = bool(cf[0] > 0 and np.all(cf[1:] < 0))
        return out

    def as_loop(self) -> SimpleLoopSymbol:
        a = self.alpha
        ca = self.c.chebyshev
        dca = cheb.chebder(ca)

        def f1(x):
            x = np.asarray(x, dtype=float)
            return (2.0 * x) ** a * cheb.chebval(1.0 - x, ca)

        def f1_prime(x):
            x = np.asarray(x, dtype=float)
            with np.errstate(divide="ignore"):
                return 2.0 * a * (2.0 * x) ** (a - 1.0) * cheb.chebval(1.0 - x, ca) - (
                    2.0 * x
                ) ** a * cheb.chebval(1.0 - x, dca)

        def dd(x, y):
            x = np.asarray(x, dtype=float)
            return 2.0 ** a * power_divided_difference(x, y, a) * cheb.chebval(1.0 - x, ca) + (
                2.0 * y
            ) ** a * cheb_divided_difference(ca, x, y)

        # H is only Hoelder at theta = 0, so its coefficients decay like
        # u^(-1-2 alpha) and aliasing on a grid of L points is O(L^(-2 alpha))
        return SimpleLoopSymbol(
            base=self.coeffs, f1=f1, f1_prime=f1_prime, name=self.name, divided_difference=dd,
            min_grid=1 << (16 if a > 0.5 else 20),
        )

    def to_json(self):
        return {
            "kind": "singular",
            "name": self.name,
            "alpha": self.alpha,
            "coeffs": [[int(k), float(self.c.coeffs[abs(k)])] for k in range(-self.c.J, self.c.J + 1)],
            "s": self.c.s,
        }


def halpha_coeffs(alpha, c: FourierSymbol, J) -> SingularSymbol:
    """Coefficients of ``(2 - 2 cos)^alpha c`` up to order J.

    The pure part comes from the Gamma-ratio closed form; c enters through a
    discrete convolution, exact up to the truncation of c itself.
    """
    _check_alpha(alpha)
    if c.J >= 1 or c.coeffs[0] != 0:
        theta = np.linspace(0, 2 * np.pi, 1025)
        if np.min(c(theta)) <= 0:
            raise ValueError("c must be strictly positive")
    Jc = c.J
    delta = fractional_difference_coeffs(alpha, J + Jc)
    delta_full = np.concatenate([delta[:0:-1], delta])  # index i <-> u = i - (J + Jc)
    c_full = np.concatenate([c.coeffs[:0:-1], c.coeffs])  # index i <-> j = i - Jc
    conv = np.convolve(delta_full, c_full)  # index i <-> u = i - (J + 2 Jc)
    h = conv[J + 2 * Jc: 2 * J + 2 * Jc + 1]
    trunc = c.error + abs(c.coeffs[-1]) * abs(delta[min(J, delta.size - 1)]) if Jc else c.error
    s = min(c.s, 2 * alpha + 1) if c.s else 2 * alpha + 0.5
    coeffs = FourierSymbol(h, s=s, name=f"halpha:{alpha:g}:{c.name}", error=float(trunc))
    return SingularSymbol(alpha=float(alpha), c=c, coeffs=coeffs, trunc_error=float(trunc))


def halpha_tail_constant(sym: SingularSymbol, u) -> float:
    """Signed ratio ``hat h(u) u^{2 alpha + 1} / c(0)``.

    For large u its absolute value tends to ``C_alpha``; the sign is negative
    for ``alpha`` in (0, 1).
    """
    if u < 1:
        raise ValueError("u must be >= 1")
    if u > sym.J:
        raise ValueError(f"u={u} exceeds truncation order {sym.J}")
    return float(sym.coeffs.coeffs[u] * u ** (2 * sym.alpha + 1) / sym.c(0.0))


@dataclass(frozen=True)
class SzegoFactor:
    """``h = g conj(g)`` with g and 1/g analytic in the unit disc.

    ``outer`` and ``inv_outer`` hold the (nonnegative-index) Taylor
    coefficients of g and 1/g; ``log_coeffs`` those of ln h.
    """

    log_coeffs: np.ndarray
    outer: np.ndarray
    inv_outer: np.ndarray
    recon_error: float = field(default=0.0)

    def g(self, theta):
        z = np.exp(1j * np.asarray(theta))
        return np.polynomial.polynomial.polyval(z, self.outer)

    def g_inv(self, theta):
        z = np.exp(1j * np.asarray(theta))
        return np.polynomial.polynomial.polyval(z, self.inv_outer)


def exp_series(a, n):
    """Taylor coefficients 0..n of ``exp(sum_k a_k z^k)``."""
    a = np.asarray(a, dtype=float)
    a = np.concatenate([a, np.zeros(max(0, n + 1 - a.size))])[: n + 1]
    ka = np.arange(n + 1) * a
    b = np.zeros(n + 1)
    b[0] = math.exp(a[0])
    for m in range(1, n + 1):
        b[m] = np.dot(ka[1: m + 1], b[m - 1:: -1][:m]) / m
    return b


def szego_factorize(h, J, grid=None) -> SzegoFactor:
    """Outer factorization from the Fourier series of ln h.

    ``g = exp(L(0)/2 + sum_{k>=1} L(k) z^k)`` where ``L(k)`` are the
    coefficients of ln h, computed on a grid of at least 8*J points.
    """
    L = next_pow2(max(8 * J, grid or 0, 64))
    theta = 2 * np.pi * np.arange(L) / L
    vals = np.asarray(h(theta), dtype=float)
    scale = np.max(np.abs(vals))
    if np.min(vals) <= 1e-14 * scale:
        raise ValueError("symbol is not strictly positive; outer factorization undefined")
    logc = np.fft.rfft(np.log(vals)).real / L
    logc = logc[: J + 1]
    half = logc.copy()
    half[0] *= 0.5
    g = exp_series(half, J)
    ginv = exp_series(-half, J)
    theta_chk = 2 * np.pi * np.arange(4 * J + 4) / (4 * J + 4)
    zc = np.exp(1j * theta_chk)
    recon = np.abs(np.polynomial.polynomial.polyval(zc, g)) ** 2
    err = float(np.max(np.abs(recon - h(theta_chk))))
    return SzegoFactor(log_coeffs=logc, outer=g, inv_outer=ginv, recon_error=err)


# ----------------------------------------------------------------------------
# presets and JSON

_C_PRESETS = {
    "one": [1.0],
    "cos03": [1.0, 0.15],
}


def _loop_preset(name):
    if name == "tridiag":
        base = FourierSymbol([2.0, -1.0], s=4.0, name="tridiag")
        return SimpleLoopSymbol(
            base, f1=lambda x: 2 * x, f1_prime=lambda x: 2.0 + 0 * x, name="tridiag",
            divided_difference=lambda x, y: 2.0 + 0 * np.asarray(x, dtype=float),
        )
    if name == "loop1":
        # f1(x) = x + x^2/4  ->  11/8 - 3/2 cos + 1/8 cos 2theta
        base = FourierSymbol([1.375, -0.75, 0.0625], s=4.0, name="loop1")
        return SimpleLoopSymbol(
            base, f1=lambda x: x + x * x / 4, f1_prime=lambda x: 1 + x / 2, name="loop1",
            divided_difference=lambda x, y: 1 + (x + y) / 4,
        )
    raise KeyError(name)


def preset(spec: str, J=None):
    """Build a builtin symbol.

    ``tridiag``      2 - 2 cos theta (simple loop)
    ``loop1``        f1(x) = x + x^2/4 (simple loop)
    ``ar1``          1/|1 - 0.5 e^{i theta}|^2, truncated at J (default 128)
    ``const``        1
    ``halpha:a[:c]`` (2 - 2 cos)^a c with c in {one, cos03}; J defaults to 4096
    """
    parts = spec.split(":")
    kind = parts[0]
    if kind in ("tridiag", "loop1"):
        return _loop_preset(kind)
    if kind == "ar1":
        J = J or 128
        k = np.arange(J + 1)
        return FourierSymbol(4.0 / 3.0 * 0.5 ** k, s=4.0, name="ar1", error=4.0 / 3.0 * 0.5 ** (J + 1))
    if kind == "const":
        return FourierSymbol([1.0], s=4.0, name="const")
    if kind == "halpha":
        if len(parts) < 2:
            raise ValueError("halpha preset needs an exponent, e.g. halpha:0.75")
        alpha = float(parts[1])
        cname = parts[2] if len(parts) > 2 else "one"
        if cname not in _C_PRESETS:
            raise ValueError(f"unknown c preset {cname!r}; choose from {sorted(_C_PRESETS)}")
        c = FourierSymbol(_C_PRESETS[cname], s=4.0, name=cname)
        return halpha_coeffs(alpha, c, J or 4096)
    raise ValueError(f"unknown preset {spec!r}")


def symbol_from_json(doc, J=None):
    """Parse ``{"kind": "fourier"|"singular", "alpha", "coeffs": [[j, v], ...], "s"}``.

    For ``singular`` documents the coefficient list describes the regular
    factor c.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    allowed = {"kind", "alpha", "coeffs", "s", "name"}
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown symbol keys: {sorted(unknown)}")
    kind = doc.get("kind")
    pairs = doc.get("coeffs")
    if kind not in ("fourier", "singular") or not pairs:
        raise ValueError("symbol document needs kind in {fourier, singular} and a coeffs list")
    table = {}
    for j, v in pairs:
        j = int(j)
        table[j] = float(v)
    for j, v in table.items():
        if -j in table and abs(table[-j] - v) > 1e-12 * max(1.0, abs(v)):
            raise ValueError(f"coefficients are not even at j={j}")
    Jmax = max(abs(j) for j in table)
    coeffs = np.array([table.get(j, table.get(-j, 0.0)) for j in range(Jmax + 1)])
    s = float(doc.get("s", 0.0))
    name = doc.get("name", kind)
    base = FourierSymbol(coeffs, s=s, name=name)
    if kind == "fourier":
        return base
    if "alpha" not in doc:
        raise ValueError("singular symbol needs alpha")
    return halpha_coeffs(float(doc["alpha"]), base, J or 4096)
