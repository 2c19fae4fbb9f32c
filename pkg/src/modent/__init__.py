"""Relative entropy and modular theory for finite-dimensional quantum systems."""

from .numkit import InvariantError
from .modular import PreconditionError

__version__ = "0.1.0"

__all__ = ["InvariantError", "PreconditionError", "__version__"]
