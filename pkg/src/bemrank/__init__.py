"""Rank certification of BEM channel-estimation matrices for doubly-selective OFDM."""

__version__ = "0.1.0"

from .bem import BemKind, BemMatrix, BemSpec, DegenerateBasisError, bem, build_bem, fit_bem, orthonormal_basis
from .channel import (
    ChannelModel,
    ChannelRealization,
    EstimateResult,
    OfdmFrame,
    RankDeficientError,
    evaluate_nmse,
    generate_channel,
    ls_estimate,
    ofdm_demodulate,
    simulate,
    transmit_vector,
)
from .estimation import (
    EstimationMatrix,
    RankReport,
    ThetaBlocks,
    assemble_P,
    build_E,
    build_theta,
    build_W,
    rank_report,
    reference_permutation,
    theta_orthogonality,
)
from .geometry import (
    PRESETS,
    FeasibilityReport,
    GeometryError,
    Mode,
    SystemGeometry,
    build_index_matrix,
    build_observation_indices,
    build_pilot_index_vector,
    check_feasibility,
    harmonic_vector,
    index_vectors,
    preset,
)
from .linalg import RANK_RTOL, numerical_rank
from .pilots import (
    InfeasibleDesignError,
    PilotPattern,
    design_pattern,
    design_patterns,
    embed_pattern,
    harmonic_pattern,
)
from .rnc import RncReport, rnc_bem_check

__all__ = [
    "assemble_P",
    "bem",
    "BemKind",
    "BemMatrix",
    "BemSpec",
    "build_bem",
    "build_E",
    "build_index_matrix",
    "build_observation_indices",
    "build_pilot_index_vector",
    "build_theta",
    "build_W",
    "ChannelModel",
    "ChannelRealization",
    "check_feasibility",
    "DegenerateBasisError",
    "design_pattern",
    "design_patterns",
    "embed_pattern",
    "EstimateResult",
    "EstimationMatrix",
    "evaluate_nmse",
    "FeasibilityReport",
    "fit_bem",
    "generate_channel",
    "GeometryError",
    "harmonic_pattern",
    "harmonic_vector",
    "index_vectors",
    "InfeasibleDesignError",
    "ls_estimate",
    "Mode",
    "numerical_rank",
    "ofdm_demodulate",
    "OfdmFrame",
    "orthonormal_basis",
    "PilotPattern",
    "preset",
    "PRESETS",
    "rank_report",
    "RANK_RTOL",
    "RankDeficientError",
    "RankReport",
    "reference_permutation",
    "rnc_bem_check",
    "RncReport",
    "simulate",
    "SystemGeometry",
    "theta_orthogonality",
    "ThetaBlocks",
    "transmit_vector",
]
