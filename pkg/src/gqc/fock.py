"""Brute-force checks in a truncated Fock basis.

Gaussian states are built as S·ρ_thermal·S† with S a Fock-space unitary whose
phase-space action is fixed by the target covariance matrix. Rotations are
exp(-iα n̂), which maps σ to R_α σ R_αᵀ; squeezing is exp(½ s (a² - a†²)), which
maps σ to diag(e^{-s}, e^{s}) σ diag(e^{-s}, e^{s}). Unitaries are generated in a
padded space and the result is cropped back, so truncation artefacts stay far
from the levels that carry population.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .dynamics import ThermalChannel
from .errors import InvalidState, InvalidTime, TruncationTooSmall
from .symplectic import GaussianState, decompose_symplectic, normal_form

log = logging.getLogger(__name__)

DEFAULT_DIM = 60
MAX_DIM = 200
TAIL_FRACTION = 0.1
TAIL_TOL = 1e-6
# parameter box inside which the truncation may be raised automatically
AUTO_Y_MAX = 2.5
AUTO_NU_MAX = 2.0


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)


def tail_mass(matrix: np.ndarray) -> float:
    dim = matrix.shape[0]
    k = max(1, int(math.ceil(TAIL_FRACTION * dim)))
    return float(np.real(np.trace(matrix[-k:, -k:])))


@dataclass(frozen=True, eq=False)
class FockDensityMatrix:
    """Density matrix of one mode truncated to ``dim`` Fock levels."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def validate(self, check_tail: bool = True) -> "FockDensityMatrix":
        """Check Hermiticity, normalisation, positivity and (optionally) the tail guard."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise InvalidState("density matrix is not Hermitian")
        tr = self.trace
        if not (1.0 - 1e-8 <= tr <= 1.0 + 1e-12):
            raise InvalidState(f"density matrix trace {tr!r} outside [1 - 1e-8, 1]")
        if np.min(np.linalg.eigvalsh(m)) < -1e-9:
            raise InvalidState("density matrix has negative eigenvalues")
        if check_tail and tail_mass(m) > TAIL_TOL:
            raise TruncationTooSmall(
                f"population {tail_mass(m):.2e} in the top levels of a D={self.dim} truncation"
            )
        return self

    @classmethod
    def fock(cls, n: int, dim: int = DEFAULT_DIM) -> "FockDensityMatrix":
        m = np.zeros((dim, dim), dtype=complex)
        m[n, n] = 1.0
        return cls(m)

    @classmethod
    def thermal(cls, nbar: float, dim: int = DEFAULT_DIM) -> "FockDensityMatrix":
        return cls(np.diag(_thermal_populations(nbar, dim)).astype(complex))


def _thermal_populations(nbar: float, dim: int) -> np.ndarray:
    n = np.arange(dim, dtype=float)
    if nbar == 0.0:
        p = np.zeros(dim)
        p[0] = 1.0
        return p
    return (nbar / (nbar + 1.0)) ** n / (nbar + 1.0)


def rotation_unitary(alpha: float, dim: int) -> np.ndarray:
    """exp(-iα n̂)."""
    return np.diag(np.exp(-1j * alpha * np.arange(dim)))


def squeeze_unitary(z: float, dim: int) -> np.ndarray:
    """Unitary whose phase-space action is diag(z, 1/z)."""
    s = -math.log(z)
    a = annihilation(dim)
    a2 = a @ a
    return expm(0.5 * s * (a2 - a2.T))


def _work_dim(dim: int) -> int:
    return max(2 * dim, dim + 60)


def _embed(matrix: np.ndarray, big: int) -> np.ndarray:
    out = np.zeros((big, big), dtype=complex)
    d = matrix.shape[0]
    out[:d, :d] = matrix
    return out


def _symplectic_unitary(S, big: int) -> np.ndarray:
    c = decompose_symplectic(S)
    U = rotation_unitary(c.phi, big)
    if c.z != 1.0:
        U = squeeze_unitary(c.z, big) @ U
    return rotation_unitary(c.chi, big) @ U


def apply_symplectic_fock(rho: FockDensityMatrix, S) -> FockDensityMatrix:
    """Conjugate ``rho`` by the Gaussian unitary with phase-space action ``S``."""
    big = _work_dim(rho.dim)
    U = _symplectic_unitary(S, big)
    return _crop(U @ _embed(rho.matrix, big) @ U.conj().T, rho.dim)


def _crop(matrix: np.ndarray, dim: int) -> FockDensityMatrix:
    out = matrix[:dim, :dim]
    lost = 1.0 - float(np.real(np.trace(out)))
    if lost > 1e-8:
        raise TruncationTooSmall(f"cropping to D={dim} discards population {lost:.2e}")
    return FockDensityMatrix(out).validate()


def _build(sigma: np.ndarray, dim: int) -> FockDensityMatrix:
    nf = normal_form(sigma)
    big = _work_dim(dim)
    rho = np.diag(_thermal_populations(0.5 * (nf.nu - 1.0), big)).astype(complex)
    # σ = ν R_θ diag(y, 1/y) diag(y, 1/y) R_θᵀ: squeeze by y, then rotate by θ
    U = rotation_unitary(nf.theta, big)
    if nf.y != 1.0:
        U = U @ squeeze_unitary(nf.y, big)
    return _crop(U @ rho @ U.conj().T, dim)


def gaussian_to_fock(
    state: GaussianState, dim: int = DEFAULT_DIM, auto_raise: bool = True
) -> FockDensityMatrix:
    """Zero-mean Gaussian state as a truncated density matrix.

    When the tail guard trips and the state lies inside the box y <= 2.5,
    ν <= 2, the truncation is doubled (up to D = 200); otherwise the error
    propagates.

    Raises:
        ValueError: for a non-zero mean.
        TruncationTooSmall: if the tail guard cannot be satisfied.
    """
    if np.any(state.mean != 0.0):
        raise ValueError("the Fock oracle only handles zero-mean states")
    nf = normal_form(state.cov)
    in_box = nf.y <= AUTO_Y_MAX and nf.nu <= AUTO_NU_MAX
    while True:
        try:
            return _build(state.cov, dim)
        except TruncationTooSmall:
            if not (auto_raise and in_box) or dim >= MAX_DIM:
                raise
            dim = min(2 * dim, MAX_DIM)
            log.info("raising Fock truncation to D=%d", dim)


def cm_from_density(rho: FockDensityMatrix):
    """First moments and covariance matrix of a truncated density matrix.

    Returns:
        (mean, cov) with x = (a + a†)/√2, p = (a - a†)/(i√2).
    """
    m = rho.matrix
    dim = rho.dim
    a = annihilation(dim)
    ea = np.trace(m @ a)
    ea2 = np.trace(m @ a @ a)
    en = float(np.real(np.trace(m * np.arange(dim)[None, :])))
    x = math.sqrt(2.0) * ea.real
    p = math.sqrt(2.0) * ea.imag
    # <x²> = (2Re<a²> + 2<n> + 1)/2, <p²> = (-2Re<a²> + 2<n> + 1)/2, <xp+px> = 2Im<a²>
    sxx = 2.0 * ea2.real + 2.0 * en + 1.0 - 2.0 * x * x
    spp = -2.0 * ea2.real + 2.0 * en + 1.0 - 2.0 * p * p
    sxp = 2.0 * ea2.imag - 2.0 * x * p
    return np.array([x, p]), np.array([[sxx, sxp], [sxp, spp]])


def lindblad_evolve(
    rho: FockDensityMatrix, t: float, ch: ThermalChannel, dt: float = 2e-3
) -> FockDensityMatrix:
    """RK4 integration of the thermal-loss master equation.

    ρ̇ = (N̄+1)(aρa† - ½{a†a, ρ}) + N̄(a†ρa - ½{aa†, ρ}). Both anticommutators use
    the truncated ladder operators, which keeps the trace exact.
    """
    if not (t >= 0.0):
        raise InvalidTime(f"evolution time must be non-negative, got {t}")
    if not (dt > 0.0):
        raise ValueError(f"step size must be positive, got {dt}")
    if t == 0.0:
        return rho
    dim = rho.dim
    a = annihilation(dim)
    ad = a.T
    nbar = ch.nbar
    n_op = np.arange(dim, dtype=float)  # diagonal of a†a
    m_op = np.diag(a @ ad)  # diagonal of aa† (last entry truncated to 0)
    decay = 0.5 * ((nbar + 1.0) * n_op + nbar * m_op)

    def rhs(r):
        out = (nbar + 1.0) * (a @ r @ ad)
        if nbar:
            out += nbar * (ad @ r @ a)
        out -= decay[:, None] * r + r * decay[None, :]
        return out

    steps = max(1, math.ceil(t / dt - 1e-9))
    h = t / steps
    r = rho.matrix.copy()
    for k in range(steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * h * k1)
        k3 = rhs(r + 0.5 * h * k2)
        k4 = rhs(r + h * k3)
        r = r + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k == steps // 2 and tail_mass(r) > TAIL_TOL:
            raise TruncationTooSmall("tail guard tripped during Lindblad evolution")
    r = 0.5 * (r + r.conj().T)
    return FockDensityMatrix(r).validate()


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    if w.min() < -1e-9:
        raise InvalidState(f"matrix is not positive semidefinite (min eigenvalue {w.min():.2e})")
    clipped = np.clip(w, 0.0, None)
    if w.min() < 0.0:
        log.debug("clamped eigenvalues of magnitude up to %.2e", -w.min())
    return (v * np.sqrt(clipped)) @ v.conj().T


def fidelity(rho: FockDensityMatrix, tau: FockDensityMatrix) -> float:
    """Root fidelity F = ‖√ρ √τ‖₁, in [0, 1]."""
    if rho.dim != tau.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {tau.dim}")
    prod = _psd_sqrt(rho.matrix) @ _psd_sqrt(tau.matrix)
    value = float(np.sum(np.linalg.svd(prod, compute_uv=False)))
    return min(value, 1.0)


def fidelity_qfi(
    family_builder: Callable[[float], FockDensityMatrix],
    theta_bar: float,
    eps: float | None = None,
    richardson: bool = True,
) -> float:
    """QFI as the limit 8(1 - F[ρ_θ̄, ρ_{θ̄+ε}])/ε².

    ``eps`` defaults to 1e-3, or 1e-2 when ρ_θ̄ is pure (1 - F would otherwise be
    lost in roundoff). With ``richardson`` the O(ε²) error is removed using the
    estimates at ε and ε/2.
    """
    base = family_builder(theta_bar)
    if eps is None:
        eps = 1e-2 if base.purity > 1.0 - 1e-9 else 1e-3

    def estimate(e: float) -> float:
        return 8.0 * (1.0 - fidelity(base, family_builder(theta_bar + e))) / (e * e)

    coarse = estimate(eps)
    if not richardson:
        return coarse
    fine = estimate(0.5 * eps)
    return (4.0 * fine - coarse) / 3.0
