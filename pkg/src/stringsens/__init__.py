"""stringsens: fundamental sensitivity limits for string networks.

Analyzes the local sensitivity of the first agent in a chain of N
identical plants under nearest-neighbour feedback: frequency sweeps of the
network sensitivity by three independent methods, an H-infinity lower
bound built from Laurent data at the loop's closed-right-half-plane poles,
gain-interval stability of the whole family, and the invariant Bode-type
sensitivity integral.
"""

__version__ = "0.1.0"

from .errors import (
    ClosedLoopPoleError,
    ConditioningError,
    ConfigError,
    DomainError,
    NearPoleError,
    PremiseError,
    StringSensError,
)
from .limits import (
    BoundReport,
    GainCrossing,
    IntegralReport,
    StabilityReport,
    bode_integral,
    det_log_integral,
    gain_crossings,
    hinf_lower_bound,
    probe_peak,
    routh_hurwitz_stable,
    stable_for_all_gains,
)
from .polynomial import Poly, RootSet, from_roots, roots
from .rational import LaurentExpansion, RationalTF, laurent_at
from .sensitivity import (
    FrequencyGrid,
    StringLaplacian,
    SweepResult,
    eig_dirichlet,
    eig_pinned,
    log_abs_sensitivity,
    mobius_root,
    sensitivity_auto,
    sensitivity_eigenproduct,
    sensitivity_linsolve,
    sensitivity_mobius,
    sweep,
)

__all__ = [
    "__version__",
    "BoundReport",
    "ClosedLoopPoleError",
    "ConditioningError",
    "ConfigError",
    "DomainError",
    "FrequencyGrid",
    "GainCrossing",
    "IntegralReport",
    "LaurentExpansion",
    "NearPoleError",
    "Poly",
    "PremiseError",
    "RationalTF",
    "RootSet",
    "StabilityReport",
    "StringLaplacian",
    "StringSensError",
    "SweepResult",
    "bode_integral",
    "det_log_integral",
    "eig_dirichlet",
    "eig_pinned",
    "from_roots",
    "gain_crossings",
    "hinf_lower_bound",
    "laurent_at",
    "log_abs_sensitivity",
    "mobius_root",
    "probe_peak",
    "roots",
    "routh_hurwitz_stable",
    "sensitivity_auto",
    "sensitivity_eigenproduct",
    "sensitivity_linsolve",
    "sensitivity_mobius",
    "stable_for_all_gains",
    "sweep",
]
