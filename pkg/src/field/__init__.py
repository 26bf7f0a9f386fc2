"""
Neural state vector field: model, integration, losses and training
"""

from .evaluate import FieldAccuracy, evaluate_field
from .filtering import FilterResult, filter_trajectories, step_lengths
from .integrate import RolloutTape, integrate, integrate_many, rollout_backward, rollout_with_tape
from .losses import FieldLoss, field_loss, finite_difference_loss, horizon_weights, trajectory_batch
from .model import FieldLike, FieldModel, as_callable, build_field_model, eval_field, field_specs
from .trainer import load_field, rho_schedule, save_field, train_field, validation_loss

__all__ = [
    "FieldModel",
    "FieldLike",
    "field_specs",
    "build_field_model",
    "eval_field",
    "as_callable",
    "integrate",
    "integrate_many",
    "RolloutTape",
    "rollout_with_tape",
    "rollout_backward",
    "FieldLoss",
    "field_loss",
    "finite_difference_loss",
    "horizon_weights",
    "trajectory_batch",
    "FilterResult",
    "filter_trajectories",
    "step_lengths",
    "rho_schedule",
    "validation_loss",
    "train_field",
    "save_field",
    "load_field",
    "FieldAccuracy",
    "evaluate_field",
]
