"""
Minimal dense neural-network kernel
"""

from .checkpoint import load_checkpoint, params_from_dict, params_to_dict, save_checkpoint
from .mlp import (
    ForwardCache,
    LayerSpec,
    MlpParams,
    architecture_fingerprint,
    backward,
    forward,
    init_mlp,
    jacobian_of_net,
    predict,
    zero_mlp,
)
from .optimizer import AdamState, adam_step, init_adam
from .training_report import TrainingReport

__all__ = [
    "LayerSpec",
    "MlpParams",
    "ForwardCache",
    "AdamState",
    "TrainingReport",
    "init_mlp",
    "zero_mlp",
    "forward",
    "predict",
    "backward",
    "jacobian_of_net",
    "architecture_fingerprint",
    "init_adam",
    "adam_step",
    "save_checkpoint",
    "load_checkpoint",
    "params_to_dict",
    "params_from_dict",
]
