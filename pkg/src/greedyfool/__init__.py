"""Black-box per-pixel adversarial attacks scored by perceptual cost.

The toolkit pairs a multi-factor perceptual loss (luminance-masking JND,
logarithmic stimulus response, texture masking, channel weighting) with a
query-only attack: differential evolution scores single-pixel perturbation
candidates by confidence shift per unit of perceptual cost, and a greedy
pass accumulates the ranked units until the classifier's decision flips.
"""

from .attack import (
    AttackConfig,
    AttackGoal,
    AttackReport,
    CandidateRecord,
    SENTINEL_PRIORITY,
    attack,
    greedy_synthesize,
    perturbation_priority,
    random_baseline_attack,
    score_candidates,
)
from .evolution import DeConfig, DeResult, EvaluatedMember, FitnessError, SearchBounds
from .images import PerturbationUnit, apply_unit, load_png, save_png, validate_image
from .metrics import (
    ChannelWeights,
    DEFAULT_CHANNEL_WEIGHTS,
    DEFAULT_PS_TABLE,
    LpNorms,
    PixelLossBreakdown,
    PsTable,
    build_ps_table,
    integ_loss,
    jnd_at,
    jnd_curve,
    lp_norms,
    mul_factor_loss,
    ps_of_change,
    texture_sd,
)
from .oracle import (
    OracleError,
    OracleHTTPError,
    OracleProtocolError,
    OracleShapeError,
    OracleStats,
    OracleTimeoutError,
    OracleTransportError,
    ProbabilityVector,
    RemoteOracle,
    ToyClassifier,
)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackGoal",
    "AttackReport",
    "CandidateRecord",
    "ChannelWeights",
    "DEFAULT_CHANNEL_WEIGHTS",
    "DEFAULT_PS_TABLE",
    "DeConfig",
    "DeResult",
    "EvaluatedMember",
    "FitnessError",
    "LpNorms",
    "OracleError",
    "OracleHTTPError",
    "OracleProtocolError",
    "OracleShapeError",
    "OracleStats",
    "OracleTimeoutError",
    "OracleTransportError",
    "PerturbationUnit",
    "PixelLossBreakdown",
    "ProbabilityVector",
    "PsTable",
    "RemoteOracle",
    "SENTINEL_PRIORITY",
    "SearchBounds",
    "ToyClassifier",
    "apply_unit",
    "attack",
    "build_ps_table",
    "greedy_synthesize",
    "integ_loss",
    "jnd_at",
    "jnd_curve",
    "load_png",
    "lp_norms",
    "mul_factor_loss",
    "perturbation_priority",
    "ps_of_change",
    "random_baseline_attack",
    "save_png",
    "score_candidates",
    "texture_sd",
    "validate_image",
]
