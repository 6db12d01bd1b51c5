"""phasequant: log-domain phase-space numerics.

STFT, Wigner and Weyl quantisation plus localisation-operator evaluation
for window families with super-exponential decay and symbol families with
super-exponential growth, all computed in (log magnitude, phase) form.
"""

from ._kernels import BACKEND
from .numerics import (
    Grid1D,
    LogComplex,
    PhaseGrid,
    SampledFunction,
    finite_diff,
    from_linear,
    logc_mul,
    logc_sum,
    quad,
    to_linear,
    wrap_phase,
)
from .weights import (
    AssociatedFunction,
    RSequence,
    WeightSequence,
    assoc_eval,
    assoc_subadd_check,
    check_conditions,
    gevrey_sequence,
    nrp_eval,
    ultrapoly_growth_check,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Grid1D",
    "LogComplex",
    "PhaseGrid",
    "SampledFunction",
    "finite_diff",
    "from_linear",
    "logc_mul",
    "logc_sum",
    "quad",
    "to_linear",
    "wrap_phase",
    "AssociatedFunction",
    "RSequence",
    "WeightSequence",
    "assoc_eval",
    "assoc_subadd_check",
    "check_conditions",
    "gevrey_sequence",
    "nrp_eval",
    "ultrapoly_growth_check",
    "__version__",
]
