"""Coalescing particles on the checkerboard lattice.

Empty-interval probabilities and correlation functions computed three
ways: exact rational oracles, Pfaffians of crossing-probability kernels,
and seeded Monte Carlo.
"""

from .errors import CheckerboardError
from .forests import EVENTS, IntervalSpec
from .kernels import KernelSpec
from .lattice import LatticeVertex, WeightField
from .pfaffian import empty_interval_probability, pfaffian
from .pointprocess import SiteSet, correlation_mobius, correlation_pfaffian, gap_probability

__version__ = "0.1.0"

__all__ = [
    "CheckerboardError",
    "EVENTS",
    "IntervalSpec",
    "KernelSpec",
    "LatticeVertex",
    "SiteSet",
    "WeightField",
    "correlation_mobius",
    "correlation_pfaffian",
    "empty_interval_probability",
    "gap_probability",
    "pfaffian",
    "__version__",
]
