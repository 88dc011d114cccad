"""Cumulative link model heads for ordinal classification trained with a
continuous quadratic weighted kappa loss."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    ConfigError,
    DivergenceError,
    DomainError,
    GenerationError,
    OrdinalError,
    ParseError,
    UndefinedMetricError,
    UnsupportedRuleError,
)
from .clm_head import (  # noqa: E402
    ClmParameters,
    LinkFunction,
    build_thresholds,
    clm_forward,
    clm_gradients,
    link_cdf,
    link_pdf,
    predict_argmax,
    predict_interval,
)
from .losses import qwk_c_gradient, qwk_c_loss, qwk_metric, qwk_weights, softmax_cross_entropy  # noqa: E402
from .metrics import EvaluationReport, confusion_from_predictions, evaluate_all  # noqa: E402
from .data import Dataset, SyntheticSpec, generate_synthetic  # noqa: E402
from .bundle import ModelBundle  # noqa: E402
from .trainer import TrainingConfig, TrainingHistory, evaluate, train  # noqa: E402
