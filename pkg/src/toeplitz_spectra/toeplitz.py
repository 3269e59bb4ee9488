"""Symmetric Toeplitz matrices T_N(h): construction, products, dense oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .symbols import FourierSymbol, SimpleLoopSymbol, SingularSymbol, next_pow2

__all__ = [
    "DENSE_CAP",
    "DenseSpectrum",
    "ToeplitzMatrix",
    "build",
    "dense_eigh",
    "householder_tridiagonalize",
    "implicit_ql",
    "inverse_entry_dense",
    "matvec",
]

DENSE_CAP = 4096


@dataclass(frozen=True)
class ToeplitzMatrix:
    """T_N(h) of size N+1, stored by its first column ``hat h(0..N)``."""

    first_column: np.ndarray
    symbol_ref: str = ""

    def __post_init__(self):
        c = np.array(self.first_column, dtype=float)
        if c.ndim != 1 or c.size < 2:
            raise ValueError("first column must have length N+1 >= 2")
        c.setflags(write=False)
        object.__setattr__(self, "first_column", c)

    @property
    def N(self) -> int:
        return self.first_column.size - 1

    @property
    def size(self) -> int:
        return self.first_column.size

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_column)

    def norm_inf(self) -> float:
        # row sums of |T| peak in the middle row
        c = np.abs(self.first_column)
        n = c.size
        m = n // 2
        return float(c[: m + 1].sum() + c[1: n - m].sum())

    def entry(self, k, l):
        return float(self.first_column[abs(k - l)])

    def save_csv(self, path):
        np.savetxt(path, self.dense(), delimiter=",")


def _coefficient_source(sym):
    if isinstance(sym, SimpleLoopSymbol):
        return sym.base, True
    if isinstance(sym, SingularSymbol):
        return sym.coeffs, False
    if isinstance(sym, FourierSymbol):
        return sym, sym.error == 0.0
    raise TypeError(f"cannot build a Toeplitz matrix from {type(sym).__name__}")


def build(sym, N: int) -> ToeplitzMatrix:
    """T_N(h) with entries ``hat h(k - l)``, k, l = 0..N.

    Exact trigonometric polynomials are zero-padded; truncated series must
    carry coefficients through index N.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    src, exact = _coefficient_source(sym)
    if src.J < N and not exact:
        raise ValueError(f"symbol truncated at order {src.J} < N={N}; rebuild with J >= N")
    col = np.zeros(N + 1)
    m = min(N, src.J)
    col[: m + 1] = src.coeffs[: m + 1]
    return ToeplitzMatrix(col, symbol_ref=getattr(sym, "name", ""))


def _check_vector(T, x):
    x = np.asarray(x)
    if x.shape[0] != T.size:
        raise ValueError(f"vector of length {x.shape[0]} does not match matrix size {T.size}")
    return x


def matvec(T: ToeplitzMatrix, x, mode="fft"):
    """``T x`` either by the dense product or by circulant embedding.

    ``x`` may be a vector or a 2-d array whose columns are multiplied.
    """
    x = _check_vector(T, x)
    if mode == "naive":
        return T.dense() @ x
    if mode != "fft":
        raise ValueError(f"unknown matvec mode {mode!r}")
    n = T.size
    L = next_pow2(2 * n)
    c = T.first_column
    # first column of the circulant: c_0..c_{n-1}, zeros, c_{n-1}..c_1
    circ = np.zeros(L)
    circ[:n] = c
    circ[L - n + 1:] = c[:0:-1]
    spec = np.fft.rfft(circ)
    xs = x if x.ndim > 1 else x[:, None]
    pad = np.zeros((L, xs.shape[1]))
    pad[:n] = xs
    y = np.fft.irfft(spec[:, None] * np.fft.rfft(pad, axis=0), n=L, axis=0)[:n]
    return y if x.ndim > 1 else y[:, 0]


@dataclass(frozen=True)
class DenseSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual_norm: float
    method: str = "lapack"

    def check_invariants(self, T: ToeplitzMatrix, strict_simple=False):
        V = self.eigenvectors
        G = V.T @ V
        off = float(np.max(np.abs(G - np.eye(G.shape[0]))))
        out = {
            "orthonormal": off <= 1e-10,
            "residual": self.residual_norm <= 1e-8 * max(T.norm_inf(), 1.0),
            "sorted": bool(np.all(np.diff(self.eigenvalues) >= 0)),
        }
        if strict_simple:
            out["simple"] = bool(np.all(np.diff(self.eigenvalues) > 0))
        return out


def householder_tridiagonalize(A):
    """Return (d, e, Q) with ``Q^T A Q`` tridiagonal: diagonal d, off-diagonal e."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1:, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        alpha = -math.copysign(nx, x[0])
        v = x.copy()
        v[0] -= alpha
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        v /= nv
        # two-sided reflection on the trailing block and its border
        A[k + 1:, k:] -= 2.0 * np.outer(v, v @ A[k + 1:, k:])
        A[:, k + 1:] -= 2.0 * np.outer(A[:, k + 1:] @ v, v)
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v)
    return np.diag(A).copy(), np.diag(A, -1).copy(), Q


def implicit_ql(d, e, Z=None, max_iter=60):
    """Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL
    with Wilkinson-type shifts.  Rotations are accumulated into Z."""
    d = np.array(d, dtype=float)
    n = d.size
    e = np.concatenate([np.asarray(e, dtype=float), [0.0]])
    Z = np.eye(n) if Z is None else np.array(Z, dtype=float)
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise np.linalg.LinAlgError("implicit QL did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = Z[:, i + 1].copy()
                Z[:, i + 1] = s * Z[:, i] + c * zi1
                Z[:, i] = c * Z[:, i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    order = np.argsort(d)
    return d[order], Z[:, order]


def dense_eigh(T: ToeplitzMatrix, method="lapack", cap=DENSE_CAP) -> DenseSpectrum:
    """Full eigendecomposition of T.

    ``method="lapack"`` delegates to LAPACK's symmetric driver;
    ``method="ql"`` runs the in-repo Householder + implicit QL pair (slow in
    pure Python beyond a few hundred rows).
    """
    if T.size > cap:
        raise ValueError(
            f"matrix size {T.size} exceeds dense cap {cap}; use the characteristic-equation solver instead"
        )
    A = T.dense()
    if method == "lapack":
        w, V = scipy.linalg.eigh(A)
    elif method == "ql":
        d, e, Q = householder_tridiagonalize(A)
        w, V = implicit_ql(d, e, Q)
    else:
        raise ValueError(f"unknown method {method!r}")
    res = np.linalg.norm(A @ V - V * w, axis=0)
    return DenseSpectrum(eigenvalues=w, eigenvectors=V, residual_norm=float(res.max()), method=method)


def inverse_entry_dense(T: ToeplitzMatrix, i: int, j: int, shift=0.0) -> float:
    """Entry (i, j) (0-based) of ``(T - shift I)^{-1}`` by a dense solve."""
    A = T.dense() - shift * np.eye(T.size)
    w = scipy.linalg.eigvalsh(A)
    if np.min(np.abs(w)) <= 1e-12 * max(np.max(np.abs(w)), 1e-300):
        raise ValueError("matrix is numerically singular")
    rhs = np.zeros(T.size)
    rhs[j] = 1.0
    return float(scipy.linalg.solve(A, rhs, assume_a="sym")[i])
