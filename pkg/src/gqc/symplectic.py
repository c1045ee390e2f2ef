"""Single-mode Gaussian states, the group Sp(2, R) and its canonical decompositions.

Conventions: quadratures r = (x, p) with ħ = 1, covariance matrices normalised so
that the vacuum is the identity, and rotations

    R_θ = [[cos θ, sin θ], [-sin θ, cos θ]],

so that R_{π/2} equals the symplectic form Ω.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidControl, InvalidMatrix, UnphysicalState

TWO_PI = 2.0 * math.pi

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])

SYMMETRY_TOL = 1e-12
DET_TOL = 1e-9
SYMPLECTIC_TOL = 1e-9
# below this relative distance from 1 the singular values are treated as degenerate
_DEGENERATE_Z = 1e-12


def _wrap(angle: float) -> float:
    a = math.fmod(float(angle), TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod can return exactly 2π after the shift for tiny negative inputs
    return 0.0 if a >= TWO_PI else a


def rotation(theta: float) -> np.ndarray:
    """Phase-space rotation R_θ; commutes with Ω and is orthogonal."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeezer(z: float) -> np.ndarray:
    """diag(z, 1/z)."""
    return np.array([[z, 0.0], [0.0, 1.0 / z]])


def _rotation_angle(rot: np.ndarray) -> float:
    return _wrap(math.atan2(rot[0, 1], rot[0, 0]))


@dataclass(frozen=True)
class SymplecticControl:
    """Euler-decomposed instantaneous Gaussian unitary.

    The matrix is ``R_chi @ diag(z, 1/z) @ R_phi``: ``phi`` rotates the state
    first, then the squeezing acts, and ``chi`` is a final rotation that no
    trace-based figure of merit can see.

    Attributes:
        phi: first rotation angle, stored in [0, 2π).
        z: squeezing value, any z > 0 (z < 1 squeezes the x quadrature).
        chi: last rotation angle, stored in [0, 2π).
    """

    phi: float = 0.0
    z: float = 1.0
    chi: float = 0.0

    def __post_init__(self) -> None:
        if not (self.z > 0.0) or not math.isfinite(self.z):
            raise InvalidControl(f"squeezing value must be positive and finite, got z={self.z}")
        object.__setattr__(self, "phi", _wrap(self.phi))
        object.__setattr__(self, "chi", _wrap(self.chi))
        object.__setattr__(self, "z", float(self.z))

    @classmethod
    def identity(cls) -> "SymplecticControl":
        return cls(0.0, 1.0, 0.0)

    def matrix(self) -> np.ndarray:
        return compose_control(self)


@dataclass(frozen=True)
class NormalForm:
    """Rotated, squeezed thermal parametrisation σ = ν R_θ diag(y², 1/y²) R_{-θ}."""

    nu: float
    y: float
    theta: float


@dataclass(frozen=True, eq=False)
class GaussianState:
    """First moments and covariance matrix of one bosonic mode.

    The covariance is symmetrised on construction and, when its determinant sits
    within ``DET_TOL`` below 1, rescaled onto the pure-state boundary.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", validate_cm(self.cov))

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(np.zeros(2), np.eye(2))

    @classmethod
    def thermal(cls, nu: float) -> "GaussianState":
        return cls(np.zeros(2), nu * np.eye(2))

    @classmethod
    def from_cov(cls, cov) -> "GaussianState":
        return cls(np.zeros(2), cov)

    @property
    def nu(self) -> float:
        return symplectic_eigenvalue(self.cov)

    @property
    def purity(self) -> float:
        return purity(self.cov)

    def __repr__(self) -> str:
        return f"GaussianState(mean={self.mean.tolist()}, cov={self.cov.tolist()})"


def validate_cm(cov) -> np.ndarray:
    """Return a symmetric, physical copy of ``cov`` or raise.

    Raises:
        InvalidMatrix: wrong shape, non-finite entries or asymmetry above 1e-12.
        UnphysicalState: Det σ < 1 - 1e-9 or Tr σ <= 0.
    """
    cov = np.array(cov, dtype=float)
    if cov.shape != (2, 2) or not np.all(np.isfinite(cov)):
        raise InvalidMatrix(f"covariance matrix must be a finite 2x2 array, got {cov!r}")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if abs(cov[0, 1] - cov[1, 0]) > SYMMETRY_TOL * scale:
        raise InvalidMatrix(f"covariance matrix is not symmetric: {cov.tolist()}")
    off = 0.5 * (cov[0, 1] + cov[1, 0])
    cov[0, 1] = cov[1, 0] = off
    det = cov[0, 0] * cov[1, 1] - off * off
    if np.trace(cov) <= 0.0 or det < 1.0 - DET_TOL:
        raise UnphysicalState(f"covariance matrix violates σ >= iΩ (det={det!r})")
    if det < 1.0:
        cov /= math.sqrt(det)
    return cov


def symplectic_eigenvalue(sigma: np.ndarray) -> float:
    det = float(np.linalg.det(sigma))
    return math.sqrt(max(det, 1.0))


def purity(sigma) -> float:
    """μ = (Det σ)^(-1/2); values drifting above 1 by roundoff are clamped."""
    sigma = validate_cm(sigma)
    return 1.0 / symplectic_eigenvalue(sigma)


def is_symplectic(S, tol: float = SYMPLECTIC_TOL) -> bool:
    S = np.asarray(S, dtype=float)
    if S.shape != (2, 2) or not np.all(np.isfinite(S)):
        return False
    return bool(np.max(np.abs(S @ OMEGA @ S.T - OMEGA)) <= tol)


def _require_symplectic(S) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S):
        raise InvalidMatrix(f"matrix is not symplectic: {S.tolist()}")
    return S


def compose_control(c: SymplecticControl) -> np.ndarray:
    """Symplectic matrix R_χ · diag(z, 1/z) · R_φ of a control."""
    return rotation(c.chi) @ squeezer(c.z) @ rotation(c.phi)


def decompose_symplectic(S) -> SymplecticControl:
    """Invert :func:`compose_control` on the canonical branch.

    The branch has z >= 1 and φ in [0, π) (the pair (φ, χ) and (φ + π, χ + π)
    describe the same matrix). At z = 1 only φ + χ is defined and χ is set to 0.

    Raises:
        InvalidMatrix: if ``S`` is not symplectic within 1e-9.
    """
    S = _require_symplectic(S)
    u, s, vt = np.linalg.svd(S)
    if np.linalg.det(u) < 0.0:
        # det S > 0, so U and V^T flip together
        u[:, 1] *= -1.0
        vt[1, :] *= -1.0
    z = float(s[0])
    if z - 1.0 <= _DEGENERATE_Z:
        return SymplecticControl(_rotation_angle(S), 1.0, 0.0)
    phi = _rotation_angle(vt)
    chi = _rotation_angle(u)
    if phi >= math.pi:
        phi -= math.pi
        chi += math.pi
    return SymplecticControl(phi, z, chi)


def cm_from_normal_form(nf: NormalForm) -> np.ndarray:
    """σ = ν R_θ diag(y², 1/y²) R_{-θ}.

    Raises:
        UnphysicalState: if ν < 1 or y <= 0.
    """
    if nf.nu < 1.0 - DET_TOL or not (nf.y > 0.0):
        raise UnphysicalState(f"need nu >= 1 and y > 0, got nu={nf.nu}, y={nf.y}")
    rot = rotation(nf.theta)
    y2 = nf.y * nf.y
    return nf.nu * rot @ np.diag([y2, 1.0 / y2]) @ rot.T


def normal_form(sigma) -> NormalForm:
    """Decompose a covariance matrix into (ν, y >= 1, θ in [0, π)).

    θ is set to 0 for rotation-invariant matrices.
    """
    sigma = validate_cm(sigma)
    nu = symplectic_eigenvalue(sigma)
    evals, evecs = np.linalg.eigh(sigma / nu)
    y2 = float(evals[1])
    y = math.sqrt(max(y2, 1.0))
    if y2 - 1.0 <= 1e-14:
        return NormalForm(nu, 1.0, 0.0)
    v = evecs[:, 1]
    # first column of R_θ is (cos θ, -sin θ)
    theta = math.fmod(math.atan2(-v[1], v[0]), math.pi)
    if theta < 0.0:
        theta += math.pi
    if theta >= math.pi:
        theta = 0.0
    return NormalForm(nu, y, theta)


def apply_symplectic(state: GaussianState, S) -> GaussianState:
    """σ ↦ SσSᵀ, r ↦ Sr."""
    S = _require_symplectic(S)
    return GaussianState(S @ state.mean, S @ state.cov @ S.T)
