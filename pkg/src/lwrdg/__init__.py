"""Runge-Kutta discontinuous Galerkin solver for LWR traffic on road networks."""

from . import kernels
from .errors import ConfigError, DomainError, IntegrityError

__version__ = "0.1.0"
