"""Propagation of Gaussian moments and their parameter derivatives under thermal loss.

The channel is the Markovian attenuator σ̇ = -σ + N𝟙, ṙ = -r/2 with time in units
of the inverse loss rate. Parameter derivatives obey the homogeneous part,
σ̇′ = -σ′ and ṙ′ = -r′/2. The master equation is taken with the usual ½ in the
dissipator, which is the normalisation consistent with these moment equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidMatrix, InvalidStep, InvalidTime, UnphysicalState
from .symplectic import (
    SYMMETRY_TOL,
    GaussianState,
    SymplecticControl,
    _require_symplectic,
    compose_control,
)

DEFAULT_DT = 1e-3


@dataclass(frozen=True)
class ThermalChannel:
    """Thermal attenuator with noise parameter N = 2N̄ + 1 >= 1."""

    N: float = 1.0

    def __post_init__(self) -> None:
        if not (self.N >= 1.0) or not math.isfinite(self.N):
            raise UnphysicalState(f"thermal noise parameter must satisfy N >= 1, got {self.N}")

    @classmethod
    def from_mean_photons(cls, nbar: float) -> "ThermalChannel":
        return cls(2.0 * nbar + 1.0)

    @property
    def nbar(self) -> float:
        return 0.5 * (self.N - 1.0)


@dataclass(frozen=True, eq=False)
class StateFamily:
    """A Gaussian state at the true parameter value together with its tangent.

    Attributes:
        state: the Gaussian state at θ̄.
        d_cov: σ′ = ∂σ/∂θ at θ̄ (symmetric).
        d_mean: r′ = ∂r/∂θ at θ̄.
        label: ``"angle"``, ``"strength"`` or ``"custom"``.
    """

    state: GaussianState
    d_cov: np.ndarray
    d_mean: np.ndarray
    label: str = "custom"

    def __post_init__(self) -> None:
        d_cov = np.array(self.d_cov, dtype=float)
        if d_cov.shape != (2, 2) or not np.all(np.isfinite(d_cov)):
            raise InvalidMatrix("d_cov must be a finite 2x2 array")
        scale = max(1.0, float(np.max(np.abs(d_cov))))
        if abs(d_cov[0, 1] - d_cov[1, 0]) > SYMMETRY_TOL * scale:
            raise InvalidMatrix(f"d_cov is not symmetric: {d_cov.tolist()}")
        d_cov[0, 1] = d_cov[1, 0] = 0.5 * (d_cov[0, 1] + d_cov[1, 0])
        object.__setattr__(self, "d_cov", d_cov)
        object.__setattr__(self, "d_mean", np.asarray(self.d_mean, dtype=float).reshape(2))

    @property
    def cov(self) -> np.ndarray:
        return self.state.cov

    @property
    def mean(self) -> np.ndarray:
        return self.state.mean

    @property
    def purity(self) -> float:
        return self.state.purity

    @classmethod
    def custom(cls, cov, d_cov, mean=(0.0, 0.0), d_mean=(0.0, 0.0)) -> "StateFamily":
        return cls(GaussianState(np.asarray(mean, float), cov), d_cov, d_mean)


def _check_time(t: float) -> float:
    t = float(t)
    if not (t >= 0.0):
        raise InvalidTime(f"evolution time must be non-negative, got {t}")
    return t


def evolve_cm(sigma, t: float, ch: ThermalChannel) -> np.ndarray:
    """Closed-form solution e^{-t}σ + (1 - e^{-t})N𝟙."""
    t = _check_time(t)
    sigma = np.asarray(sigma, dtype=float)
    if t == 0.0:
        return sigma.copy()
    fixed = ch.N * np.eye(2)
    # written around the fixed point so that N𝟙 is reproduced bit-for-bit
    return fixed + math.exp(-t) * (sigma - fixed)


def evolve_mean(r, t: float, ch: ThermalChannel) -> np.ndarray:
    t = _check_time(t)
    return math.exp(-0.5 * t) * np.asarray(r, dtype=float)


def transform_family(f: StateFamily, S) -> StateFamily:
    """Covariant action of a symplectic S on a family: σ, σ′ ↦ S·Sᵀ, r, r′ ↦ S·."""
    S = _require_symplectic(S)
    state = GaussianState(S @ f.mean, S @ f.cov @ S.T)
    return replace(f, state=state, d_cov=S @ f.d_cov @ S.T, d_mean=S @ f.d_mean)


def evolve_family(f: StateFamily, t: float, ch: ThermalChannel) -> StateFamily:
    t = _check_time(t)
    state = GaussianState(evolve_mean(f.mean, t, ch), evolve_cm(f.cov, t, ch))
    return replace(
        f,
        state=state,
        d_cov=math.exp(-t) * f.d_cov,
        d_mean=math.exp(-0.5 * t) * f.d_mean,
    )


def apply_control_then_evolve(
    f: StateFamily, c: SymplecticControl, t_after: float, ch: ThermalChannel
) -> StateFamily:
    """Apply the instantaneous control ``c`` and let the channel act for ``t_after``."""
    return evolve_family(transform_family(f, compose_control(c)), t_after, ch)


def ode_integrate(sigma, r, t: float, ch: ThermalChannel, dt: float = DEFAULT_DT):
    """Classical RK4 integration of the moment equations (test oracle only).

    The interval is split into ceil(t/dt) equal steps.

    Returns:
        (sigma_t, r_t) as numpy arrays.
    """
    if not (dt > 0.0):
        raise InvalidStep(f"step size must be positive, got {dt}")
    t = _check_time(t)
    sigma = np.array(sigma, dtype=float)
    r = np.array(r, dtype=float)
    if t == 0.0:
        return sigma, r
    n = max(1, math.ceil(t / dt - 1e-9))
    h = t / n
    drive = ch.N * np.eye(2)

    def rhs(s, m):
        return drive - s, -0.5 * m

    for _ in range(n):
        k1s, k1r = rhs(sigma, r)
        k2s, k2r = rhs(sigma + 0.5 * h * k1s, r + 0.5 * h * k1r)
        k3s, k3r = rhs(sigma + 0.5 * h * k2s, r + 0.5 * h * k2r)
        k4s, k4r = rhs(sigma + h * k3s, r + h * k3r)
        sigma = sigma + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        r = r + (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
    return sigma, r
