"""Geometry and mechanics on the dual k-jet bundle with jet-based automatic differentiation."""

from .catalog import KINDS, Space, SpaceError, build_space
from .jetpoint import BundleShape, JetPoint, make_rng
from .suites import SUITES, run_suite

__version__ = "0.1.0"

__all__ = ["KINDS", "Space", "SpaceError", "build_space", "BundleShape", "JetPoint", "make_rng",
           "SUITES", "run_suite", "__version__"]
