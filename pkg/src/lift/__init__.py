"""
Observation lift and dataset building
"""

from .dataset import Dataset, LatentSeries, build_dataset, independent_frames, load_dataset, write_dataset
from .features import feature_dim, feature_names, state_to_features
from .observation_lift import LiftParams, apply_lift, make_lift

__all__ = [
    "LiftParams",
    "LatentSeries",
    "Dataset",
    "make_lift",
    "apply_lift",
    "build_dataset",
    "independent_frames",
    "write_dataset",
    "load_dataset",
    "feature_dim",
    "feature_names",
    "state_to_features",
]
