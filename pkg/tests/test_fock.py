import math

import numpy as np
import pytest

from gqc.dynamics import ThermalChannel, evolve_cm, evolve_family
from gqc.errors import InvalidState, InvalidTime, TruncationTooSmall
from gqc.fock import (
    FockDensityMatrix,
    annihilation,
    apply_symplectic_fock,
    cm_from_density,
    fidelity,
    fidelity_qfi,
    gaussian_to_fock,
    lindblad_evolve,
)
from gqc.qfi import angle_family, gaussian_qfi, strength_family
from gqc.symplectic import GaussianState, NormalForm, SymplecticControl, cm_from_normal_form, compose_control
from gqc.verify import fock_family_builder


def test_ladder_operator():
    a = annihilation(4)
    np.testing.assert_allclose(np.diag(a.T @ a), [0, 1, 2, 3])


def test_basis_states_and_validation():
    rho = FockDensityMatrix.fock(2, 10).validate()
    assert rho.purity == 1.0 and rho.trace == 1.0
    _, cov = cm_from_density(rho)
    np.testing.assert_allclose(cov, 5 * np.eye(2), atol=1e-14)
    with pytest.raises(InvalidState):
        FockDensityMatrix(np.ones((2, 3)))
    with pytest.raises(InvalidState):
        FockDensityMatrix(np.array([[1.0, 1j], [0.0, 0.0]])).validate()
    with pytest.raises(InvalidState):
        FockDensityMatrix(np.diag([0.6, 0.6])).validate(check_tail=False)
    with pytest.raises(TruncationTooSmall):
        FockDensityMatrix.fock(9, 10).validate()


def test_thermal_state_moments():
    rho = FockDensityMatrix.thermal(0.5, 60)
    _, cov = cm_from_density(rho)
    np.testing.assert_allclose(cov, 2 * np.eye(2), atol=1e-9)


@pytest.mark.parametrize("nu,y,theta", [(1.0, 1.0, 0.0), (1.0, 2.0, 0.3), (1.2, 1.5, 2.0), (2.0, 2.0, -0.7)])
def test_gaussian_round_trip(nu, y, theta):
    sigma = cm_from_normal_form(NormalForm(nu, y, theta))
    rho = gaussian_to_fock(GaussianState.from_cov(sigma), 60)
    mean, cov = cm_from_density(rho)
    np.testing.assert_allclose(mean, 0.0, atol=1e-12)
    np.testing.assert_allclose(cov, sigma, atol=1e-8)


def test_truncation_is_raised_inside_the_box_only():
    sigma = cm_from_normal_form(NormalForm(1.0, 2.5, 0.0))
    rho = gaussian_to_fock(GaussianState.from_cov(sigma), 20)
    assert rho.dim > 20
    with pytest.raises(TruncationTooSmall):
        gaussian_to_fock(GaussianState.from_cov(sigma), 20, auto_raise=False)
    with pytest.raises(TruncationTooSmall):
        gaussian_to_fock(GaussianState.from_cov(3.0 * np.eye(2)), 20)


def test_nonzero_mean_is_rejected():
    with pytest.raises(ValueError):
        gaussian_to_fock(GaussianState(np.array([1.0, 0.0]), np.eye(2)))


def test_symplectic_action_matches_phase_space():
    sigma = cm_from_normal_form(NormalForm(1.1, 1.4, 0.5))
    S = compose_control(SymplecticControl(0.4, 0.7, 1.9))
    rho = apply_symplectic_fock(gaussian_to_fock(GaussianState.from_cov(sigma), 60), S)
    np.testing.assert_allclose(cm_from_density(rho)[1], S @ sigma @ S.T, atol=1e-8)


@pytest.mark.parametrize("N", [1.0, 2.0])
def test_lindblad_matches_closed_form(N):
    sigma = cm_from_normal_form(NormalForm(1.0, 1.8, 0.6))
    ch = ThermalChannel(N)
    rho = lindblad_evolve(gaussian_to_fock(GaussianState.from_cov(sigma), 60), 0.5, ch)
    np.testing.assert_allclose(cm_from_density(rho)[1], evolve_cm(sigma, 0.5, ch), atol=1e-8)
    with pytest.raises(InvalidTime):
        lindblad_evolve(rho, -1.0, ch)


def test_fidelity_examples():
    vac = FockDensityMatrix.fock(0, 40)
    th = FockDensityMatrix.thermal(1.0, 40)
    assert fidelity(vac, th) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    assert fidelity(th, th) == pytest.approx(1.0, abs=1e-10)
    assert fidelity(vac, FockDensityMatrix.fock(1, 40)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("family", ["angle", "strength"])
@pytest.mark.parametrize("nu,t", [(1.0, 0.0), (1.2, 0.3)])
def test_fidelity_qfi_matches_gaussian_qfi(family, nu, t):
    y, ch = 1.5, ThermalChannel(1.0)
    theta_bar = 0.3 if family == "angle" else 2 * math.log(y)
    f = angle_family(y, nu, theta_bar) if family == "angle" else strength_family(theta_bar, nu)
    exact = gaussian_qfi(evolve_family(f, t, ch)).qfi
    oracle = fidelity_qfi(fock_family_builder(family, nu, y, t, ch, 50), theta_bar)
    assert oracle == pytest.approx(exact, rel=1e-3)


def test_fidelity_qfi_is_the_limit_at_a_pure_fixed_point():
    # Control to the vacuum under N = 1 keeps ρ_θ̄ pure while its neighbours mix at
    # O(ε²). The fidelity QFI then equals the limit of the Gaussian formula taken
    # off the point, not its value at the point.
    from gqc.control import ControlProtocol, simulate_protocol, thermalizing_control
    from gqc.dynamics import transform_family
    from gqc.verify import fock_protocol_builder

    p = ControlProtocol("angle", 1.5, 1.0, 0.0)
    build, theta_bar = fock_protocol_builder(p, 0.5, 50)
    oracle = fidelity_qfi(build, theta_bar)
    S = compose_control(thermalizing_control(p.initial_family().cov))
    nearby = transform_family(angle_family(1.5, 1.0, 1e-4), S)
    limit = gaussian_qfi(evolve_family(nearby, 0.5, ThermalChannel(1.0))).qfi
    assert oracle == pytest.approx(limit, rel=1e-4)
    pointwise = simulate_protocol(p, [0.5])[0, 1]
    assert pointwise < 0.5 * oracle
