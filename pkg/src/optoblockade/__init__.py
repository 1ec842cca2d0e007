"""Photon blockade in a mechanically pumped optomechanical cavity."""

__version__ = "0.1.0"

from .params import FIG2, DerivedScalars, SystemParams, derived_scalars  # noqa: E402,F401
from .fock import Truncation  # noqa: E402,F401
