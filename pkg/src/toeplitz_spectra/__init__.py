"""Eigenvalues of Hermitian Toeplitz matrices with simple-loop and
fractional-Laplacian-type symbols.

The package solves the characteristic equation that generates the spectrum of
``T_N(f)`` for simple-loop symbols, evaluates closed-form asymptotics for the
symbols ``|1 - e^{i theta}|^{2 alpha} c(theta)``, and checks every result
against brute-force oracles (dense eigensolvers, quadrature, closed forms).
"""

__version__ = "0.1.0"

from .symbols import (
    FourierSymbol,
    SimpleLoopSymbol,
    SingularSymbol,
    SzegoFactor,
    fourier_coeffs,
    halpha_coeffs,
    halpha_tail_constant,
    invert_simple_loop,
    preset,
    szego_factorize,
)
from .toeplitz import ToeplitzMatrix, DenseSpectrum, build, dense_eigh, inverse_entry_dense, matvec

from .predictor import PredictorPolynomial, levinson, predictor_vs_szego, verify_spectral_match
from .phase import HFactor, PhaseSample, h_factor, rho_N, rho_limit, tau_N
from .eigensolve import (
    EigenRecord,
    SpectrumReport,
    full_spectrum,
    gamma_from_dense,
    invert_entry_11,
    local_spectrum,
    solve_k,
)
from .fraclap import (
    FracConstants,
    FracMode,
    constants,
    cutoff_q,
    discrete_fraclap_apply,
    eig_approx,
    fraclap_pv_oracle,
    match_modes,
    mode_vector,
    phi_star,
)
