"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, numerical contract
violations -> 3, CausticError -> 4.
"""


class GaborFioError(Exception):
    """Base class for all package errors."""


class ConfigError(GaborFioError):
    """Invalid experiment configuration (bad names, unparsable file)."""


class ContractViolation(GaborFioError):
    """An operation was called outside its stated preconditions."""


class AliasingError(ContractViolation):
    """Input has too much spectral mass at the band edge for the quadrature."""


class NotAFrameError(ContractViolation):
    """Frame operator numerically singular: lower bound below 1e-10 * upper."""


class NewtonError(GaborFioError):
    """Newton iteration for the canonical map failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConditionViolation(GaborFioError):
    """Phase condition (nondegeneracy / derivative bound) violated."""


class CausticError(GaborFioError):
    """Symplectic matrix has singular upper-left block: no generating phase.

    Carries det(M11) so callers can report how degenerate the block is.
    """

    def __init__(self, message, det_block=None):
        super().__init__(message)
        self.det_block = det_block


class NonRepresentableDilation(ContractViolation):
    """Dilation matrix cannot be applied exactly on this grid."""
