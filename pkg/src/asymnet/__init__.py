"""Nonlinear Bell functionals on star networks of independent sources.

Evaluate bilocal and trilocal functionals at matrix level, compute classical
network bounds, verify sum-of-squares optimality certificates and study
robustness to white noise.
"""

from .errors import AsymnetError, CapabilityError, CapacityError, ContractError
from .schemes import KINDS, ScenarioSpec

__all__ = ["KINDS", "AsymnetError", "CapabilityError", "CapacityError", "ContractError", "ScenarioSpec"]
__version__ = "0.1.0"
