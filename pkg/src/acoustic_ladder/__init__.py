"""Multi-mode acoustic resonator models and ladder filter tools.

The package covers multi-branch mBVD resonator models, ABCD/S-parameter
ladder simulation, filter metric extraction, admittance fitting, penalty
based design optimisation and the file formats that tie them together.
"""

__version__ = "0.1.0"

from .errors import (
    BandEdgeError,
    FitError,
    InsufficientPeaksError,
    LadderError,
    MetricsError,
    ModelError,
    NoPassbandError,
    ParseError,
    ResonanceNotFoundError,
    SchemaError,
    SingularNetworkError,
)
from .fitting import AdmittanceTrace, FitResult, fit_mbvd, initial_guess
from .mbvd import (
    MotionalBranch,
    MotionalRLC,
    ResonatorMeta,
    ResonatorModel,
    admittance,
    branch_to_rlc,
    convert_coupling,
    impedance,
    resonance_frequencies,
    rlc_to_branch,
    thickness_scale,
)
from .metrics import FilterMetrics, extract_metrics
from .network import FrequencyGrid, LadderDesign, SParameters, Stage, ladder_orderings, simulate
from .optimizer import (
    CostWeights,
    DesignSpec,
    DesignVariables,
    RejectionRequirement,
    evaluate,
    optimize,
    rank_orderings,
)

__all__ = [name for name in dir() if not name.startswith("_")]
