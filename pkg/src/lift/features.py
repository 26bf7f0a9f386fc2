"""
Lift features
Maps raw states to O(1) feature vectors before the observation lift.
"""

from typing import List, Optional

import numpy as np

from src.systems.dynamics import SystemSpec
from src.utils.helpers import as_batch


def use_angle_features(spec: SystemSpec, angle_features: Optional[bool]) -> bool:
    """Angles go in as (sin, cos) pairs for systems that have angles, unless overridden"""
    if angle_features is None:
        return bool(spec.angle_indices)
    return angle_features


def feature_names(spec: SystemSpec, angle_features: Optional[bool] = None) -> List[str]:
    wrap = use_angle_features(spec, angle_features)
    names: List[str] = []
    for i, name in enumerate(spec.state_names):
        if wrap and i in spec.angle_indices:
            names.extend([f"sin_{name}", f"cos_{name}"])
        else:
            names.append(name)
    return names


def feature_dim(spec: SystemSpec, angle_features: Optional[bool] = None) -> int:
    return len(feature_names(spec, angle_features))


def state_to_features(spec: SystemSpec, states: np.ndarray, angle_features: Optional[bool] = None) -> np.ndarray:
    """
    Convert states of shape (..., state_dim) to features of shape (..., feature_dim)

    Angles become (sin, cos) pairs; every other component is divided by the
    system's characteristic scale.
    """
    s = as_batch(states, spec.state_dim, f"{spec.name} state")
    wrap = use_angle_features(spec, angle_features)
    columns = []
    for i in range(spec.state_dim):
        if wrap and i in spec.angle_indices:
            columns.append(np.sin(s[..., i]))
            columns.append(np.cos(s[..., i]))
        else:
            columns.append(s[..., i] / spec.feature_scales[i])
    return np.stack(columns, axis=-1)
