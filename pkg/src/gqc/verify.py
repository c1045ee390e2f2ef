"""Seeded verification suites shared by the ``verify`` command and the test-suite."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .control import ControlProtocol, thermalizing_control
from .dynamics import StateFamily, ThermalChannel, evolve_cm, evolve_family, ode_integrate
from .fock import (
    FockDensityMatrix,
    apply_symplectic_fock,
    cm_from_density,
    fidelity_qfi,
    gaussian_to_fock,
    lindblad_evolve,
)
from .qfi import angle_family, gaussian_qfi, qfi_rate, strength_family
from .symplectic import GaussianState, NormalForm, cm_from_normal_form, compose_control

SUITES = ("dynamics", "qfi-derivative", "oracle")

ORACLE_Y = (1.2, 1.5, 2.0)
ORACLE_NU = (1.0, 1.2)
ORACLE_N = (1.0, 2.0)
ORACLE_T = (0.0, 0.3, 0.6)
ORACLE_THETA = 0.3


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("GQC_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"{tag} {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e}{extra}"


def random_cm(rng: np.random.Generator, nu_range=(1.0, 3.0), y_max: float = 3.0) -> np.ndarray:
    nf = NormalForm(rng.uniform(*nu_range), rng.uniform(1.0, y_max), rng.uniform(0.0, 2 * math.pi))
    return cm_from_normal_form(nf)


def random_family(rng: np.random.Generator, max_purity: float = 0.99) -> StateFamily:
    """Mixed state (μ <= ``max_purity``) with random symmetric σ′ and random r′."""
    sigma = random_cm(rng, nu_range=(1.0 / max_purity, 4.0))
    g = rng.normal(size=(2, 2))
    return StateFamily.custom(sigma, g + g.T, mean=rng.normal(size=2), d_mean=rng.normal(size=2))


def check_dynamics(seed: int = 0, samples: int = 200, dt: float = 1e-3) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_semigroup = 0.0
    for _ in range(samples):
        sigma = random_cm(rng)
        r = rng.normal(size=2)
        ch = ThermalChannel(rng.uniform(1.0, 5.0))
        t = rng.uniform(0.0, 3.0)
        s_rk, r_rk = ode_integrate(sigma, r, t, ch, dt)
        s_cf = evolve_cm(sigma, t, ch)
        r_cf = math.exp(-0.5 * t) * r
        worst = max(worst, float(np.max(np.abs(s_rk - s_cf))), float(np.max(np.abs(r_rk - r_cf))))
        t1, t2 = rng.uniform(0.0, 1.5, size=2)
        two_step = evolve_cm(evolve_cm(sigma, t1, ch), t2, ch)
        one_step = evolve_cm(sigma, t1 + t2, ch)
        worst_semigroup = max(worst_semigroup, float(np.max(np.abs(two_step - one_step))))
    return [
        CheckResult("dynamics closed form vs RK4", worst <= 1e-8, worst, 1e-8, f"{samples} cases, dt={dt}"),
        CheckResult("dynamics semigroup", worst_semigroup <= 1e-12, worst_semigroup, 1e-12),
    ]


def qfi_derivative_errors(seed: int = 0, samples: int = 500, delta: float = 1e-5) -> np.ndarray:
    """Relative error between the exact rate and a centred difference of the QFI.

    Each family is first moved forward by ``delta`` so that the stencil
    {0, 2·delta} only needs forward evolution.
    """
    rng = np.random.default_rng(seed)
    errs = np.empty(samples)
    for k in range(samples):
        f = random_family(rng)
        ch = ThermalChannel(rng.uniform(1.0, 4.0))
        mid = evolve_family(f, delta, ch)
        fd = (gaussian_qfi(evolve_family(f, 2 * delta, ch)).qfi - gaussian_qfi(f).qfi) / (2 * delta)
        exact = qfi_rate(mid, ch)
        errs[k] = abs(exact - fd) / abs(exact)
    return errs


def check_qfi_derivative(seed: int = 0, samples: int = 500, delta: float = 1e-5) -> list[CheckResult]:
    errs = qfi_derivative_errors(seed, samples, delta)
    ok = int(np.sum(errs <= 1e-6))
    return [
        CheckResult(
            "qfi rate vs finite difference",
            ok == samples,
            float(errs.max()),
            1e-6,
            f"{ok}/{samples} agreements, delta={delta}",
        )
    ]


def family_cm(family: str, nu: float, y: float, theta: float) -> np.ndarray:
    """Covariance matrix of the canonical family at parameter value ``theta``."""
    if family == "angle":
        return cm_from_normal_form(NormalForm(nu, y, theta))
    return nu * np.diag([math.exp(theta), math.exp(-theta)])


def canonical_family(family: str, nu: float, y: float) -> tuple[StateFamily, float]:
    """Gaussian family and its true parameter value for the oracle box."""
    if family == "angle":
        return angle_family(y, nu, ORACLE_THETA), ORACLE_THETA
    r = 2.0 * math.log(y)
    return strength_family(r, nu), r


def fock_family_builder(family: str, nu: float, y: float, t: float, ch: ThermalChannel, dim: int = 60):
    def build(theta: float) -> FockDensityMatrix:
        rho = gaussian_to_fock(GaussianState.from_cov(family_cm(family, nu, y, theta)), dim)
        return lindblad_evolve(rho, t, ch)

    return build


def fock_protocol_builder(p: ControlProtocol, t: float, dim: int = 60):
    """Fock-space version of a control protocol evaluated at time ``t``.

    The control matrix is computed once from the Gaussian state at θ̄, as an
    experimentalist would, and then applied to every member of the family.
    """
    ch = p.channel
    f0 = p.initial_family()
    theta_bar = p.theta_bar if p.family == "angle" else 2.0 * math.log(p.y)
    S = None
    if math.isfinite(p.t_c) and t >= p.t_c:
        at_control = evolve_family(f0, p.t_c, ch)
        c = p.control if p.control is not None else thermalizing_control(at_control.cov)
        S = compose_control(c)

    def build(theta: float) -> FockDensityMatrix:
        rho = gaussian_to_fock(GaussianState.from_cov(family_cm(p.family, 1.0, p.y, theta)), dim)
        if S is None:
            return lindblad_evolve(rho, t, ch)
        rho = apply_symplectic_fock(lindblad_evolve(rho, p.t_c, ch), S)
        return lindblad_evolve(rho, t - p.t_c, ch)

    return build, theta_bar


def _oracle_case(args):
    family, y, nu, N, t, dim = args
    ch = ThermalChannel(N)
    f, theta_bar = canonical_family(family, nu, y)
    rho = lindblad_evolve(gaussian_to_fock(f.state, dim), t, ch)
    cm_err = float(np.max(np.abs(cm_from_density(rho)[1] - evolve_cm(f.cov, t, ch))))
    q_fock = fidelity_qfi(fock_family_builder(family, nu, y, t, ch, dim), theta_bar)
    q_gauss = gaussian_qfi(evolve_family(f, t, ch)).qfi
    return cm_err, abs(q_fock - q_gauss) / q_gauss


def oracle_box(dim: int = 60):
    return list(
        itertools.product(("angle", "strength"), ORACLE_Y, ORACLE_NU, ORACLE_N, ORACLE_T, (dim,))
    )


def check_oracle(dim: int = 60) -> list[CheckResult]:
    cases = oracle_box(dim)
    with ThreadPoolExecutor(worker_count()) as pool:
        results = list(pool.map(_oracle_case, cases))
    cm_err = max(r[0] for r in results)
    q_err = max(r[1] for r in results)
    return [
        CheckResult("oracle evolved CM", cm_err <= 1e-5, cm_err, 1e-5, f"{len(cases)} cases, D={dim}"),
        CheckResult("oracle fidelity QFI vs Gaussian QFI", q_err <= 1e-3, q_err, 1e-3, f"{len(cases)} cases"),
    ]


def run_suite(suite: str, seed: int = 0, samples: int | None = None) -> list[CheckResult]:
    if suite == "all":
        out: list[CheckResult] = []
        for name in SUITES:
            out.extend(run_suite(name, seed, samples))
        return out
    if suite == "dynamics":
        return check_dynamics(seed, samples or 200)
    if suite == "qfi-derivative":
        return check_qfi_derivative(seed, samples or 500)
    if suite == "oracle":
        return check_oracle()
    raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
