"""Exception hierarchy shared by all gqc modules."""


class GQCError(Exception):
    """Base class for every error raised by gqc."""


class InvalidControl(GQCError, ValueError):
    pass


class InvalidMatrix(GQCError, ValueError):
    """A matrix expected to be symplectic (or otherwise structured) is not."""


class UnphysicalState(GQCError, ValueError):
    """A covariance matrix violates the uncertainty relation."""


class InvalidTime(GQCError, ValueError):
    pass


class InvalidStep(GQCError, ValueError):
    pass


class SingularPurityTerm(GQCError, ArithmeticError):
    """The purity-derivative term diverges for a pure state with Tr[σ⁻¹σ′] ≠ 0."""


class NoInformation(GQCError, ValueError):
    """The Cramér-Rao bound is undefined because the Fisher information vanishes."""


class TruncationTooSmall(GQCError, RuntimeError):
    """Fock-space truncation leaves too much population in the top levels."""


class InvalidState(GQCError, ValueError):
    """A density matrix is not Hermitian, normalised or positive."""
