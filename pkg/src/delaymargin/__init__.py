"""Stability and small-delay robustness analysis of linear delay systems.

The library decides exponential stability and hyperbolicity of
u'(t) = B u(t) + Phi u_t through resolvent-norm sufficient conditions on a
vertical line, computes robustness margins kappa for delayed feedback
u'(t) = B u(t) + C u(t - tau), and cross-validates everything with two
independent oracles: characteristic roots (pseudospectral + argument
principle) and time-domain integration.
"""

import os as _os

# DELAYMARGIN_THREADS caps BLAS parallelism; must land before numpy loads.
_threads = _os.environ.get("DELAYMARGIN_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from . import errors
from .charroots import (
    RootSet,
    abscissa_only,
    critical_delay,
    refine_root,
    spectral_abscissa,
    window_count,
)
from .criteria import (
    LineSupEstimate,
    SeriesTestResult,
    StabilityReport,
    a_n_sequence,
    commuting_radius_test,
    hyperbolicity_test,
    line_sup_resolvent,
    stability_test,
)
from .io import load_system_spec, parse_system_spec, system_spec_doc
from .model import DelayOperatorSpec, HistoryGrid, KernelTerm, SystemSpec
from .resolvent import char_matrix, in_resolvent_set, resolvent_blocks
from .simulate import Trajectory, aligned_step, decay_rate, integrate
from .smalldelay import (
    RobustnessMargin,
    compact_commuting_margin,
    destabilizing_sequence,
    robustness_margin,
    scalar_exact_boundary,
    shifted_unstable_root,
    transformed_system,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "RootSet", "abscissa_only", "critical_delay", "refine_root",
    "spectral_abscissa", "window_count",
    "LineSupEstimate", "SeriesTestResult", "StabilityReport",
    "a_n_sequence", "commuting_radius_test", "hyperbolicity_test",
    "line_sup_resolvent", "stability_test",
    "load_system_spec", "parse_system_spec", "system_spec_doc",
    "DelayOperatorSpec", "HistoryGrid", "KernelTerm", "SystemSpec",
    "char_matrix", "in_resolvent_set", "resolvent_blocks",
    "Trajectory", "aligned_step", "decay_rate", "integrate",
    "RobustnessMargin", "compact_commuting_margin", "destabilizing_sequence",
    "robustness_margin", "scalar_exact_boundary", "shifted_unstable_root",
    "transformed_system",
]
