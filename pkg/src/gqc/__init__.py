"""Time-local control of the quantum Fisher information of single-mode Gaussian states."""

from .control import (
    ControlProtocol,
    closed_form_curve,
    controlled_qfi_angle,
    controlled_qfi_strength,
    optimize_control,
    simulate_protocol,
    single_control_suffices_check,
    thermalizing_control,
)
from .dynamics import StateFamily, ThermalChannel, evolve_cm, evolve_family, ode_integrate
from .errors import GQCError
from .qfi import angle_family, gaussian_qfi, qfi_rate, reduced_rate_angle, reduced_rate_strength, strength_family
from .symplectic import (
    GaussianState,
    NormalForm,
    SymplecticControl,
    compose_control,
    decompose_symplectic,
    normal_form,
)

__version__ = "0.1.0"

__all__ = [
    "ControlProtocol",
    "GaussianState",
    "GQCError",
    "NormalForm",
    "StateFamily",
    "SymplecticControl",
    "ThermalChannel",
    "angle_family",
    "closed_form_curve",
    "compose_control",
    "controlled_qfi_angle",
    "controlled_qfi_strength",
    "decompose_symplectic",
    "evolve_cm",
    "evolve_family",
    "gaussian_qfi",
    "normal_form",
    "ode_integrate",
    "optimize_control",
    "qfi_rate",
    "reduced_rate_angle",
    "reduced_rate_strength",
    "simulate_protocol",
    "single_control_suffices_check",
    "strength_family",
    "thermalizing_control",
]
