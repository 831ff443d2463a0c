"""Exception hierarchy shared by all modules."""


class ThermalArealawError(Exception):
    """Base class for library errors."""


class ResourceError(ThermalArealawError):
    """A window exceeds the dense-matrix dimension cap."""


class PreconditionError(ThermalArealawError, ValueError):
    """Input violates an operation precondition (overlapping supports, region outside window, ...)."""


class ContractError(ThermalArealawError, ValueError):
    """Input violates a typed contract (mixed parity, non-Hermitian perturbation, ...)."""


class DomainError(ThermalArealawError, ValueError):
    """Numerical domain violation (non-positive beta, non-faithful state, ...)."""


class UnsupportedExtensionError(ThermalArealawError):
    """A fermionic product extension was requested for non-even states."""


class UnsupportedModelError(ThermalArealawError):
    """A potential is not quadratic and cannot be handled by the Gaussian path."""


class InvariantViolation(ThermalArealawError, RuntimeError):
    """A mathematical invariant failed beyond its slack; signals a bug or truncation artifact."""
