"""Exception hierarchy.

The CLI maps these onto exit codes: capability/capacity problems exit 3,
numerical-contract violations exit 4.
"""

from __future__ import annotations


class AsymnetError(Exception):
    """Base class for all package errors."""


class CapabilityError(AsymnetError):
    """The requested scenario/operation combination is not supported."""


class CapacityError(CapabilityError):
    """A dimension or enumeration size exceeds the configured maximum."""


class UnsupportedStateError(CapabilityError):
    """A pure-state-only operation received a mixed state."""


class ContractError(AsymnetError):
    """A numerical pre- or post-condition was violated."""


class ShapeError(ContractError, ValueError):
    """Operand dimensions do not match."""


class DomainError(ContractError, ValueError):
    """A scalar argument lies outside its admissible range."""


class DegenerateCombinationError(ContractError):
    """A combination operator annihilates the state (zero norm)."""


class ConstraintError(ContractError):
    """An operator identity required at the optimum does not hold."""


class ConvergenceError(ContractError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message: str, last_gap: float):
        super().__init__(f"{message} (last gap {last_gap:.3e})")
        self.last_gap = last_gap
