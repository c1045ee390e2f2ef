"""Quantum Fisher information of single-mode Gaussian families and its time derivative.

For a family (σ, σ′, r′) with purity μ = (Det σ)^(-1/2) the QFI is

    I = ½ Tr[(σ⁻¹σ′)²]/(1 + μ²) + 2μ′²/(1 - μ⁴) + 2 r′ᵀσ⁻¹r′,   μ′ = -(μ/2) Tr[σ⁻¹σ′],

and under the thermal attenuator its exact rate of change is a closed expression
in the same traces plus Tr[σ⁻¹], Tr[σ⁻²σ′] and r′ᵀσ⁻²r′.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import StateFamily, ThermalChannel
from .errors import NoInformation, SingularPurityTerm
from .symplectic import PAULI_X, GaussianState, NormalForm, cm_from_normal_form, rotation

# μ >= 1 - PURE_TOL is treated as a pure state
PURE_TOL = 1e-12
_TRACE_TOL = 1e-9


@dataclass(frozen=True)
class QfiReport:
    qfi: float
    term_cov: float
    term_purity: float
    term_mean: float

    def crb_stddev(self, n: int) -> float:
        """Quantum Cramér-Rao bound on the standard deviation after ``n`` repetitions."""
        return crb(self.qfi, n)


def angle_family(y: float, nu: float = 1.0, theta_bar: float = 0.0) -> StateFamily:
    """Squeezed thermal state whose squeezing angle is the unknown parameter.

    σ = ν R_θ̄ diag(y², 1/y²) R_{-θ̄} and σ′ = ν (1/y² - y²) R_θ̄ σ_x R_{-θ̄}.
    """
    sigma = cm_from_normal_form(NormalForm(nu, y, theta_bar))
    rot = rotation(theta_bar)
    d_cov = nu * (1.0 / (y * y) - y * y) * rot @ PAULI_X @ rot.T
    return StateFamily(GaussianState(np.zeros(2), sigma), d_cov, np.zeros(2), label="angle")


def strength_family(r_param: float, nu: float = 1.0) -> StateFamily:
    """Squeezed thermal state σ = ν exp(r σ_z) with the strength r as the parameter.

    In this chart y² = e^r, so the derivative is σ′ = σ σ_z.
    """
    e = math.exp(r_param)
    sigma = nu * np.diag([e, 1.0 / e])
    d_cov = nu * np.diag([e, -1.0 / e])
    return StateFamily(GaussianState(np.zeros(2), sigma), d_cov, np.zeros(2), label="strength")


def _inv2(sig: np.ndarray):
    a, b = sig[..., 0, 0], sig[..., 0, 1]
    c, d = sig[..., 1, 0], sig[..., 1, 1]
    det = a * d - b * c
    inv = np.empty_like(sig)
    inv[..., 0, 0] = d / det
    inv[..., 0, 1] = -b / det
    inv[..., 1, 0] = -c / det
    inv[..., 1, 1] = a / det
    return inv, det


def _tr(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] + m[..., 1, 1]


def _fro(m: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(m * m, axis=(-2, -1)))


def rate_from_moments(cov, d_cov, d_mean, N: float) -> np.ndarray:
    """Vectorised dI/dt over arrays of shape (..., 2, 2) / (..., 2).

    Entries where the purity term is singular (pure state with Tr[σ⁻¹σ′] ≠ 0)
    come back as NaN.

    For a pure state with Tr[σ⁻¹σ′] = 0 the two purity contributions are 0/0;
    the value returned is their forward-in-time limit along the flow,
    N² Tr[σ⁻²σ′]² / (4 (N Tr σ⁻¹ - 2)), which vanishes whenever μ′ stays zero.
    """
    sig = np.asarray(cov, dtype=float)
    dsig = np.asarray(d_cov, dtype=float)
    dmean = np.asarray(d_mean, dtype=float)
    inv, det = _inv2(sig)
    A = inv @ dsig
    AA = A @ A
    inv2 = inv @ inv
    B = inv2 @ dsig

    T = _tr(inv)
    tau = _tr(A)
    X2 = _tr(AA)
    X2S = _tr(AA @ inv)
    T2 = _tr(B)
    mean_term = -2.0 * N * np.einsum("...i,...ij,...j->...", dmean, inv2, dmean)

    mu2 = 1.0 / det
    pure = mu2 >= (1.0 - PURE_TOL) ** 2
    mu2 = np.where(pure, 1.0, mu2)
    K = N * T - 2.0

    first = mu2 * X2 * K / (2.0 * (1.0 + mu2) ** 2) - N * X2S / (1.0 + mu2)

    with np.errstate(divide="ignore", invalid="ignore"):
        d4 = 1.0 - mu2 * mu2
        mixed = -mu2 * tau * (K * tau + 2.0 * N * T2) / (2.0 * d4)
        mixed = mixed - mu2**3 / d4**2 * tau**2 * K
        t2_zero = np.abs(T2) <= _TRACE_TOL * (1.0 + _fro(B))
        limit = np.where(t2_zero, 0.0, N * N * T2 * T2 / (4.0 * K))

    tau_zero = np.abs(tau) <= _TRACE_TOL * (1.0 + _fro(A))
    purity_part = np.where(pure, np.where(tau_zero, limit, np.nan), mixed)
    return first + purity_part + mean_term


def gaussian_qfi(f: StateFamily) -> QfiReport:
    """QFI of a single-mode Gaussian family, split into its three contributions.

    Raises:
        SingularPurityTerm: for a pure state with Tr[σ⁻¹σ′] ≠ 0.
    """
    inv, det = _inv2(f.cov)
    A = inv @ f.d_cov
    mu2 = 1.0 / det
    tau = float(np.trace(A))
    term_cov = 0.5 * float(np.trace(A @ A)) / (1.0 + min(mu2, 1.0))
    if mu2 >= (1.0 - PURE_TOL) ** 2:
        if abs(tau) > _TRACE_TOL * (1.0 + float(_fro(A))):
            raise SingularPurityTerm(
                f"pure state with Tr[σ⁻¹σ′] = {tau:.3e}; the purity term diverges"
            )
        term_purity = 0.0
    else:
        # 2μ′²/(1 - μ⁴) with μ′² = μ²τ²/4
        term_purity = 0.5 * mu2 * tau * tau / (1.0 - mu2 * mu2)
    term_mean = 2.0 * float(f.d_mean @ inv @ f.d_mean)
    return QfiReport(term_cov + term_purity + term_mean, term_cov, term_purity, term_mean)


def qfi_rate(f: StateFamily, ch: ThermalChannel) -> float:
    """Exact dI/dt of the family under the thermal attenuator.

    Raises:
        SingularPurityTerm: for a pure state with Tr[σ⁻¹σ′] ≠ 0.
    """
    value = float(rate_from_moments(f.cov, f.d_cov, f.d_mean, ch.N))
    if math.isnan(value):
        raise SingularPurityTerm("pure state with Tr[σ⁻¹σ′] ≠ 0; the rate diverges")
    return value


def reduced_rate_strength(nu: float, N: float, sigma_inv_trace: float) -> float:
    """Rate for a controlled family with σ⁻¹σ′ similar to σ_z.

    -(2ν² + N ν⁴ Tr σ⁻¹) / (ν² + 1)²
    """
    nu2 = nu * nu
    return -(2.0 * nu2 + N * nu2 * nu2 * sigma_inv_trace) / (nu2 + 1.0) ** 2


def reduced_rate_angle(y: float, nu: float, N: float, sigma_inv_trace: float) -> float:
    """Rate for a controlled squeezing-angle family: (1/y² - y²)² times the strength rate."""
    c = 1.0 / (y * y) - y * y
    return c * c * reduced_rate_strength(nu, N, sigma_inv_trace)


def crb(qfi: float, n: int) -> float:
    """1/√(n·I).

    Raises:
        NoInformation: if ``qfi <= 0``.
    """
    if n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n}")
    if not (qfi > 0.0):
        raise NoInformation(f"Fisher information must be positive, got {qfi}")
    return 1.0 / math.sqrt(n * qfi)
