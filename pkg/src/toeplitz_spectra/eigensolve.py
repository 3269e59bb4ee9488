"""Eigenvalues of T_N(f) from the characteristic equation.

For each k = 1..N+1 the eigenvalue is ``f1(lam')`` where ``theta0`` solves

    G_k(theta0) = (N+2) theta0 - rho_N(theta0) - k pi = 0,
    lam' = 1 - cos theta0.

Roots are bracketed from one shared sweep of rho_N over (0, pi) and then
polished with Brent's method.
"""
from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalFailure
from .phase import _grid_for, _h_factor, chi_of, lam_prime_of, phase_at, theta_of
from .symbols import SimpleLoopSymbol
from .toeplitz import DenseSpectrum, build, dense_eigh

__all__ = [
    "EigenRecord",
    "SpectrumReport",
    "full_spectrum",
    "gamma_from_dense",
    "invert_entry_11",
    "local_spectrum",
    "solve_k",
]

XTOL = 1e-15


@dataclass(frozen=True)
class EigenRecord:
    k: int
    lambda_prime: float
    lam: float
    gamma: float
    residual: float
    bracket: tuple
    iterations: int
    theta0: float = float("nan")
    flags: tuple = ()

    def as_dict(self):
        return {"k": self.k, "lambda": self.lam, "lambda_prime": self.lambda_prime, "theta0": self.theta0,
                "gamma": self.gamma, "residual": self.residual, "flags": list(self.flags)}


@dataclass
class SpectrumReport:
    N: int
    records: list
    dense_comparison: np.ndarray | None = None
    dense_max_dev: float | None = None
    timing: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)
    bijection: dict | None = None

    @property
    def eigenvalues(self):
        return np.array([r.lam for r in self.records])

    @property
    def gammas(self):
        return np.array([r.gamma for r in self.records])

    def check_invariants(self, f: SimpleLoopSymbol, full=True):
        lo, hi = f.value_range
        lam = self.eigenvalues
        out = {
            "increasing": bool(np.all(np.diff(lam) > 0)),
            "inside_range": bool(np.all((lam > lo + 1e-12) & (lam < hi - 1e-12))),
            "residuals": bool(all(r.residual <= 1e-12 for r in self.records)),
        }
        if full:
            out["count"] = len(self.records) == self.N + 1
        return out

    def as_dict(self):
        d = {"N": self.N, "records": [r.as_dict() for r in self.records]}
        if self.dense_max_dev is not None:
            d["dense_max_dev"] = self.dense_max_dev
        if self.missing:
            d["missing"] = self.missing
        if self.bijection is not None:
            d["bijection"] = self.bijection
        return d


def _residual(N, k, rho, lam_prime):
    # 1 - cos(t) written as 2 sin^2(t/2) to keep relative accuracy near 0
    return abs(2.0 * math.sin(0.5 * (rho + k * math.pi) / (N + 2)) ** 2 - lam_prime)


class _Phase:
    """phase_at for one (f, N) with a call counter."""

    def __init__(self, f, N, grid=None):
        self.f, self.N = f, N
        self.L = _grid_for(f, N, grid)
        self.calls = 0

    def rho(self, theta):
        self.calls += 1
        return phase_at(self.f, self.N, theta, grid=self.L).rho_N

    def G(self, theta, k):
        return (self.N + 2) * theta - self.rho(theta) - k * math.pi


def _polish(ph: _Phase, k, a, b, ga=None, gb=None):
    count = [0]

    def g(t):
        count[0] += 1
        return ph.G(t, k)

    if ga is not None and ga == 0.0:
        theta = a
    elif gb is not None and gb == 0.0:
        theta = b
    else:
        theta = brentq(g, a, b, xtol=XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
    rho = ph.rho(theta)
    lp = lam_prime_of(theta)
    return theta, rho, lp, count[0]


def _record(ph, k, theta, rho, lp, bracket, its, flags=()):
    N = ph.N
    return EigenRecord(k=k, lambda_prime=lp, lam=float(ph.f.f1(lp)), gamma=rho,
                       residual=_residual(N, k, rho, lp), bracket=tuple(bracket), iterations=its,
                       theta0=theta, flags=tuple(flags))


def _roots_from_sweep(ph, k, thetas, rhos):
    """Solve G_k on every sign change of the sampled G_k; keep smallest |gamma|."""
    G = (ph.N + 2) * thetas - rhos - k * math.pi
    s = np.sign(G)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    zeros = np.nonzero(s == 0)[0]
    if idx.size == 0 and zeros.size == 0:
        return None, G
    found = []
    for i in idx:
        theta, rho, lp, its = _polish(ph, k, thetas[i], thetas[i + 1], G[i], G[i + 1])
        found.append((abs(rho), theta, rho, lp, (thetas[i], thetas[i + 1]), its))
    for i in zeros:
        # a sweep node that is already an exact root
        found.append((abs(rhos[i]), thetas[i], rhos[i], lam_prime_of(thetas[i]), (thetas[i], thetas[i]), 0))
    found.sort(key=lambda t: t[0])
    _, theta, rho, lp, br, its = found[0]
    rho = float(rho)
    flags = ("multiple_roots",) if len(found) > 1 else ()
    return _record(ph, k, theta, rho, lp, br, its, flags), G


def solve_k(f: SimpleLoopSymbol, N: int, k: int, bracket=None, scan=64, grid=None) -> EigenRecord:
    """Root of the characteristic equation for index k.

    ``bracket`` is an interval in lambda'; by default it covers
    ``theta0 in [(k-1) pi/(N+2), (k+1) pi/(N+2)]``.  The bracket is scanned on
    ``scan`` points before polishing.
    """
    if not (1 <= k <= N + 1):
        raise ValueError(f"k={k} outside 1..{N + 1}")
    if bracket is None:
        t_lo = max((k - 1) * math.pi / (N + 2), 0.0)
        t_hi = min((k + 1) * math.pi / (N + 2), math.pi)
    else:
        lo, hi = bracket
        if not (0.0 <= lo < hi <= 2.0):
            raise ValueError("bracket must satisfy 0 <= lo < hi <= 2")
        t_lo, t_hi = theta_of(lo), theta_of(hi)
    ph = _Phase(f, N, grid)
    thetas = np.linspace(t_lo, t_hi, max(scan, 64) + 1)
    rhos = np.array([0.0 if t in (0.0, math.pi) else ph.rho(t) for t in thetas])
    rec, G = _roots_from_sweep(ph, k, thetas, rhos)
    if rec is None:
        raise NumericalFailure(f"no sign change for k={k}", {
            "k": k, "N": N, "theta": thetas.tolist(), "G": G.tolist()})
    return rec


def _workers():
    try:
        return max(1, int(os.environ.get("TOEPLITZ_SPECTRA_THREADS", "1")))
    except ValueError:
        return 1


def _sweep(ph: _Phase, t_lo, t_hi, n, workers):
    thetas = np.linspace(t_lo, t_hi, n)

    def one(t):
        if t <= 0.0 or t >= math.pi:
            return 0.0  # arg P(1) = arg P(-1) = 0 for a zero-free real P
        return ph.rho(t)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rhos = np.array(list(ex.map(one, thetas)))
    else:
        rhos = np.array([one(t) for t in thetas])
    return thetas, rhos


def _solve_many(ph, ks, thetas, rhos, workers):
    def one(k):
        return k, _roots_from_sweep(ph, k, thetas, rhos)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, ks))
    return [one(k) for k in ks]


def full_spectrum(f: SimpleLoopSymbol, N: int, dense_check=False, sweep=None, grid=None,
                  workers=None) -> SpectrumReport:
    """All N+1 eigenvalues of T_N(f) from the characteristic equation."""
    if N < 1:
        raise ValueError("N must be >= 1")
    workers = workers or _workers()
    ph = _Phase(f, N, grid)
    t0 = time.perf_counter()
    n = sweep or max(512, 4 * (N + 2))
    thetas, rhos = _sweep(ph, 0.0, math.pi, n + 1, workers)
    t1 = time.perf_counter()
    records, missing = [], []
    for k, (rec, G) in _solve_many(ph, range(1, N + 2), thetas, rhos, workers):
        if rec is None:
            missing.append(k)
        else:
            records.append(rec)
    t2 = time.perf_counter()
    report = SpectrumReport(N=N, records=records, missing=missing,
                            timing={"sweep": t1 - t0, "roots": t2 - t1, "phase_calls": ph.calls})
    if missing:
        raise NumericalFailure(f"no sign change for k in {missing[:10]}", {
            "N": N, "missing": missing, "partial": report.as_dict(),
            "max_abs_rho_sweep": float(np.max(np.abs(rhos)))})
    if dense_check:
        t3 = time.perf_counter()
        dense = dense_eigh(build(f, N))
        report.dense_comparison = np.abs(report.eigenvalues - dense.eigenvalues)
        report.dense_max_dev = float(report.dense_comparison.max())
        report.timing["dense"] = time.perf_counter() - t3
    return report


def local_spectrum(f: SimpleLoopSymbol, N: int, theta1: float, theta2: float, dense_check=False,
                   dense_symbol=None, sweep=None, grid=None, tol=1e-5) -> SpectrumReport:
    """Eigenvalues generated by the indices k with ``k pi/(N+2)`` in (theta1, theta2).

    f only needs to be increasing on [theta1, theta2].  With ``dense_check``
    every dense eigenvalue inside ``(f(theta1), f(theta2))`` must be matched
    by exactly one record within ``tol``.
    """
    if not (0.0 < theta1 < theta2 <= math.pi):
        raise ValueError("need 0 < theta1 < theta2 <= pi")
    if not f.is_increasing_on(theta1, theta2):
        raise ValueError("symbol is not increasing on the interval")
    ks = [k for k in range(1, N + 2) if theta1 < k * math.pi / (N + 2) < theta2]
    report = SpectrumReport(N=N, records=[])
    if ks:
        ph = _Phase(f, N, grid)
        n = sweep or max(64, 4 * (len(ks) + 2))
        t0 = time.perf_counter()
        thetas, rhos = _sweep(ph, theta1, theta2, n + 1, _workers())
        for k, (rec, _) in _solve_many(ph, ks, thetas, rhos, 1):
            if rec is None:
                # the root may sit just outside the interval; widen to (0, pi)
                wide = np.linspace(max(theta1 - 2 * math.pi / (N + 2), 0.0),
                                   min(theta2 + 2 * math.pi / (N + 2), math.pi), 65)
                wr = np.array([0.0 if t in (0.0, math.pi) else ph.rho(t) for t in wide])
                rec, _ = _roots_from_sweep(ph, k, wide, wr)
            if rec is None:
                report.missing.append(k)
            else:
                report.records.append(rec)
        report.timing["roots"] = time.perf_counter() - t0
    if dense_check:
        sym = dense_symbol if dense_symbol is not None else f
        dense = dense_eigh(build(sym, N))
        report.bijection = _bijection(report, dense, float(f(theta1)), float(f(theta2)), tol)
        report.dense_max_dev = report.bijection["max_gap"]
    return report


def _bijection(report, dense: DenseSpectrum, lo, hi, tol):
    w = dense.eigenvalues
    inside = np.nonzero((w > lo) & (w < hi))[0]
    matched = []
    gaps = []
    for r in report.records:
        j = int(np.argmin(np.abs(w - r.lam)))
        matched.append(j)
        gaps.append(abs(w[j] - r.lam))
    injective = len(set(matched)) == len(matched)
    covered = set(inside.tolist()) <= set(matched)
    max_gap = float(max(gaps)) if gaps else 0.0
    return {
        "n_records": len(report.records),
        "n_dense_inside": int(inside.size),
        "injective": injective,
        "covers_dense": covered,
        "max_gap": max_gap,
        "ok": bool(injective and covered and max_gap <= tol and not report.missing),
        "index_is_k_minus_1": all(j == r.k - 1 for j, r in zip(matched, report.records)),
    }


def gamma_from_dense(f: SimpleLoopSymbol, N: int, dense: DenseSpectrum):
    """``gamma_N(k) = (N+2) theta_k - k pi`` with ``f(theta_k) = lambda^(k)``."""
    lo, hi = f.value_range
    lam = np.asarray(dense.eigenvalues)
    if lam.size != N + 1:
        raise ValueError("dense spectrum does not match N")
    if np.any(lam < lo) or np.any(lam > hi):
        warnings.warn("dense eigenvalues outside the symbol range were clamped", stacklevel=2)
        lam = np.clip(lam, lo, hi)
    theta = np.array([theta_of(f.f1_inverse(float(v))) for v in lam])
    k = np.arange(1, N + 2)
    return (N + 2) * theta - k * math.pi


def invert_entry_11(f: SimpleLoopSymbol, N: int, lam_prime: float, grid=None, pole_tol=1e-10):
    """``((T_N(f) - lambda I)^{-1})_{11}`` with ``lambda = f1(lam')``, in closed form.

    With P the degree N+1 predictor of H, ``beta0 = P(0)``, ``chi0 = chi_{lam'}``
    and ``u = chi0^{2(N+2)} tau_N``:

        entry = 2 beta0^2 (chi0 - u conj(chi0)) / (1 - u).

    The factor 2 comes from ``(1 - cos theta) - lam' =
    (1/2) chi0 (1 - conj(chi0) e^{i theta})(1 - conj(chi0) e^{-i theta})``.
    Returns a dict with the value and the pole distance ``|1 - u|``.
    """
    if not (0.0 < lam_prime < 2.0):
        raise ValueError("lambda' must lie in (0, 2)")
    H = _h_factor(f, lam_prime, _grid_for(f, N, grid))
    P = H.predictor(N)
    chi0 = chi_of(lam_prime)
    p = complex(np.polynomial.polynomial.polyval(chi0, P.coeffs))
    tau = (p.conjugate() / p) ** 2
    tau /= abs(tau)
    u = chi0 ** (2 * (N + 2)) * tau
    if abs(1.0 - u) < pole_tol:
        raise ValueError(f"lambda = f1({lam_prime}) is (numerically) an eigenvalue: |1 - u| = {abs(1 - u):.2e}")
    beta0 = P.coeffs[0]
    B2 = beta0 ** 2 * chi0
    B1 = beta0 ** 2 * u * (chi0.conjugate() - chi0)
    entry = 2.0 * (B2 - B1 / (1.0 - u))
    return {"value": float(entry.real), "imag": float(entry.imag), "pole_distance": float(abs(1.0 - u)),
            "lambda": float(f.f1(lam_prime)), "B1": B1, "B2": B2, "tau": tau}
