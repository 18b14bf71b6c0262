"""Co-training over early- and late-fused Ensemble Projection representations."""
from .core_types import MultiFeatureDataset, PseudoLabel, View, ViewPair, validate_dataset
from .cotraining import CotrainConfig, CotrainState, Variant, combine_predict, run_curl
from .ensemble_projection import EpConfig, ProjectionEnsemble
from .evaluation import Scenario, average_precision, mean_average_precision, split_scenario
from .fusion import compute_url
from .kernels import BACKEND
from .linear_classifier import LogRegConfig, ProbClassifier

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CotrainConfig",
    "CotrainState",
    "EpConfig",
    "LogRegConfig",
    "MultiFeatureDataset",
    "ProbClassifier",
    "ProjectionEnsemble",
    "PseudoLabel",
    "Scenario",
    "Variant",
    "View",
    "ViewPair",
    "average_precision",
    "combine_predict",
    "compute_url",
    "mean_average_precision",
    "run_curl",
    "split_scenario",
    "validate_dataset",
]
