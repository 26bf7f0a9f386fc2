"""
Field trainer
Fits the neural state vector field to encoded trajectories with either the
integrated multi-horizon loss or the finite-difference baseline.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import FieldTrainConfig
from src.nn.checkpoint import load_checkpoint, save_checkpoint
from src.nn.optimizer import adam_step, init_adam
from src.nn.training_report import TrainingReport
from src.utils.errors import DegenerateInputError, IntegrationDivergenceError, TrainingDivergedError
from src.utils.helpers import derive_seed, make_rng
from .losses import FieldLoss, trajectory_batch, field_loss, finite_difference_loss
from .model import FieldModel, build_field_model

logger = logging.getLogger(__name__)

VALIDATION_RHO = 0.5


def rho_schedule(step: int, cfg: FieldTrainConfig) -> float:
    """Sawtooth from rho_min to rho_max over rho_cycle steps"""
    phase = (step % cfg.rho_cycle) / cfg.rho_cycle
    return float(cfg.rho_min + (cfg.rho_max - cfg.rho_min) * phase)


def validation_loss(model: FieldModel, batch: np.ndarray, dt: float, cfg: FieldTrainConfig) -> float:
    """Integrated loss at rho = 0.5 over strided starts; inf when a rollout diverges"""
    starts = np.arange(0, batch.shape[1] - 1, cfg.validation_stride)
    try:
        return field_loss(model, batch, VALIDATION_RHO, dt, cfg.substeps, starts=starts, with_grad=False).value
    except IntegrationDivergenceError:
        return float("inf")


def _sample_starts(rng: np.random.Generator, n_traj: int, n_len: int, per_traj: Optional[int]) -> Optional[np.ndarray]:
    if per_traj is None or per_traj >= n_len - 1:
        return None
    return np.sort(np.stack([rng.choice(n_len - 1, size=per_traj, replace=False) for _ in range(n_traj)]), axis=1)


def train_field(
    train_trajectories: Sequence,
    val_trajectories: Sequence,
    cfg: FieldTrainConfig,
    dt: float,
    seed: int,
    label: str = "smooth",
) -> Tuple[FieldModel, TrainingReport]:
    """
    Train a vector field on encoded trajectories

    Args:
        train_trajectories: Equal-length (N, d) trajectories
        val_trajectories: Held-out trajectories for checkpoint selection
        cfg: Training settings
        dt: Sampling interval
        seed: Training seed
        label: Run label

    Returns:
        (best-validation field, TrainingReport)

    Raises:
        DegenerateInputError: If there are no training trajectories
        TrainingDivergedError: On a non-finite loss, with the best field so far
    """
    if len(train_trajectories) == 0:
        raise DegenerateInputError("no training trajectories for the field")
    train = trajectory_batch(train_trajectories)
    val = trajectory_batch(val_trajectories) if len(val_trajectories) else train
    n_traj, n_len, d = train.shape

    model = build_field_model(d, derive_seed(seed, "field/init"))
    rng = make_rng(seed, "field/batches")
    arrays = model.params.arrays()
    state = init_adam(arrays, lr=cfg.learning_rate)

    report = TrainingReport(kind="field", label=label, seed=seed)
    report.extra.update({"mode": cfg.mode, "latent_dim": d, "n_train": n_traj})
    best_model = model
    best_val = np.inf
    logger.info(f"Training {label} field ({cfg.mode}): d={d}, {n_traj} trajectories, {cfg.steps} steps")

    for step in range(cfg.steps):
        picks = rng.integers(0, n_traj, size=min(cfg.batch_size, n_traj))
        batch = train[picks]
        rho = rho_schedule(step, cfg)
        try:
            if cfg.mode == "integrated":
                starts = _sample_starts(rng, len(picks), n_len, cfg.starts_per_trajectory)
                loss: FieldLoss = field_loss(model, batch, rho, dt, cfg.substeps, starts=starts)
            else:
                loss = finite_difference_loss(model, batch, dt)
        except IntegrationDivergenceError as e:
            loss = FieldLoss(value=float("nan"), grads=None)
            logger.warning(f"Rollout diverged during training: {e}")

        if not np.isfinite(loss.value) or loss.grads is None:
            logger.error(f"Field loss became non-finite at step {step}")
            report.aborted = True
            report.message = f"non-finite loss at step {step}"
            report.steps_run = step
            raise TrainingDivergedError(f"field loss diverged at step {step}", step=step, last_good=best_model)

        report.records.append({"step": float(step), "rho": rho, "loss": loss.value})
        arrays, state = adam_step(arrays, loss.grads, state)
        model = FieldModel(model.params.with_arrays(arrays))

        if (step + 1) % cfg.eval_every == 0 or step + 1 == cfg.steps:
            score = validation_loss(model, val, dt, cfg)
            report.validation.append({"step": float(step + 1), "loss": score if np.isfinite(score) else None})
            if np.isfinite(score) and score < best_val:
                best_val = score
                best_model = model
                report.best_step = step + 1
                report.best_validation = float(score)
            logger.info(f"[{label}] step {step + 1}: loss={loss.value:.5f} rho={rho:.2f} val={score:.5f}")

    report.steps_run = cfg.steps
    return best_model, report


# ============================================================================
# Persistence
# ============================================================================

def save_field(model: FieldModel, path: Union[str, Path], seed: int,
               metadata: Optional[Dict[str, Any]] = None) -> Path:
    return save_checkpoint(path, {"field": model.params}, seed, metadata)


def load_field(path: Union[str, Path]) -> FieldModel:
    networks, _ = load_checkpoint(path)
    return FieldModel(networks["field"])
