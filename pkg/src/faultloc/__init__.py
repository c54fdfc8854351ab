"""Source localization in sensor networks from fault-corrupted binary decisions."""

from .base import (EmptyCollectionError, LocalizationError, NoAlarmError, NoFeaturesError,
                   SolverBudgetError)
from .baselines import (CentroidLocalizer, FaultTolerantMLLocalizer, GridSpec,
                        MaximumLikelihoodLocalizer, SNAPLocalizer)
from .feature_selection import FeatureSelectionLocalizer, FeatureSelectionMLLocalizer
from .harness import ExperimentConfig, preset, rms_error, run_sweep, write_csv
from .hitting_set import (HittingSetLocalizer, build_collection, minimal_hitting_set,
                          minimum_hitting_set, multi_sample_bound, sample_bound)
from .multi_source import MultiSourceLocalizer, connection_distance
from .simulation import (AreaBounds, FaultParams, PropagationParams, SensingParams, SensorField,
                         SourceSpec, deploy_sensors, generate_dataset, roi_radius,
                         true_neighborhood)

__version__ = "0.1.0"

__all__ = [
    "AreaBounds", "CentroidLocalizer", "EmptyCollectionError", "ExperimentConfig",
    "FaultParams", "FaultTolerantMLLocalizer", "FeatureSelectionLocalizer",
    "FeatureSelectionMLLocalizer", "GridSpec", "HittingSetLocalizer", "LocalizationError",
    "MaximumLikelihoodLocalizer", "MultiSourceLocalizer", "NoAlarmError", "NoFeaturesError",
    "PropagationParams", "SNAPLocalizer", "SensingParams", "SensorField", "SolverBudgetError",
    "SourceSpec", "build_collection", "connection_distance", "deploy_sensors",
    "generate_dataset", "minimal_hitting_set", "minimum_hitting_set", "multi_sample_bound",
    "preset", "rms_error", "roi_radius", "run_sweep", "sample_bound", "true_neighborhood",
    "write_csv",
]
