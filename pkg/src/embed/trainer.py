"""
Embedding trainer
Trains the autoencoder on observation triplets under the cyclic beta
schedule, keeps the best-validation model, and encodes datasets.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.config import EmbedConfig
from src.exporters import CSVExporter
from src.lift.dataset import SPLITS, Dataset, LatentSeries
from src.nn.checkpoint import load_checkpoint, save_checkpoint
from src.nn.optimizer import adam_step, init_adam
from src.nn.training_report import TrainingReport
from src.transport.sinkhorn import uniform_reference
from src.utils.errors import DegenerateInputError, MissingArtifactError, TrainingDivergedError
from src.utils.helpers import derive_seed, make_rng
from .losses import beta_schedule, default_l0, reconstruction_error, total_loss
from .model import EmbeddingModel, NsvTrajectory, build_embedding_model, encode, standardization

logger = logging.getLogger(__name__)


def _triplet_index(series: List[LatentSeries]) -> np.ndarray:
    rows = [(k, t) for k, item in enumerate(series) for t in range(len(item) - 2)]
    if not rows:
        raise DegenerateInputError("training split has no sequences with at least 3 samples")
    return np.asarray(rows, dtype=np.int64)


def train_embedding(
    dataset: Dataset,
    cfg: EmbedConfig,
    d: int,
    seed: int,
    label: str = "smooth",
) -> Tuple[EmbeddingModel, TrainingReport]:
    """
    Train the autoencoder

    Args:
        dataset: Lifted dataset; standardization uses the train split only
        cfg: Training settings
        d: Latent dimension
        seed: Training seed
        label: Run label recorded in the report

    Returns:
        (best-validation model, TrainingReport)

    Raises:
        TrainingDivergedError: If the loss becomes non-finite; carries the
            best model seen so far
    """
    train = dataset.splits["train"]
    val_obs = dataset.observations("val")
    mean, std = standardization(dataset.observations("train"))
    model = build_embedding_model(d, mean, std, seed, cfg.omega0)

    stacked = [item.observations for item in train]
    index = _triplet_index(train)
    l0 = cfg.l0 if cfg.l0 is not None else default_l0(d, dataset.seq_len)
    rng = make_rng(seed, "embed/batches")

    n_enc = len(model.encoder.arrays())
    arrays = model.encoder.arrays() + model.decoder.arrays()
    state = init_adam(arrays, lr=cfg.learning_rate)

    report = TrainingReport(kind="embed", label=label, seed=seed)
    report.extra.update({"latent_dim": d, "l0": l0})
    best_model = model
    best_val = np.inf
    logger.info(f"Training {label} embedding: d={d}, {len(index)} triplets, {cfg.steps} steps")

    for step in range(cfg.steps):
        picks = index[rng.integers(0, len(index), size=cfg.batch_size)]
        batch = np.stack([stacked[k][t:t + 3] for k, t in picks])
        beta = beta_schedule(step, cfg)
        reference = uniform_reference(d, cfg.batch_size, derive_seed(seed, f"embed/reference/{step}"))
        loss = total_loss(batch, model, beta, cfg, l0, reference)

        if not np.isfinite(loss.value):
            logger.error(f"Embedding loss became non-finite at step {step}")
            report.aborted = True
            report.message = f"non-finite loss at step {step}"
            report.steps_run = step
            raise TrainingDivergedError(f"embedding loss diverged at step {step}", step=step, last_good=best_model)

        report.records.append({
            "step": float(step),
            "beta": beta,
            "loss": loss.value,
            "reconstruct": loss.reconstruct,
            "smooth": loss.smooth,
            "space": loss.space,
        })

        arrays, state = adam_step(arrays, loss.encoder_grads + loss.decoder_grads, state)
        model = model.with_params(
            model.encoder.with_arrays(arrays[:n_enc]), model.decoder.with_arrays(arrays[n_enc:])
        )

        if (step + 1) % cfg.eval_every == 0 or step + 1 == cfg.steps:
            val = reconstruction_error(model, val_obs)
            report.validation.append({"step": float(step + 1), "reconstruct": val, "beta": beta})
            if np.isfinite(val) and val < best_val:
                best_val = val
                best_model = model
                report.best_step = step + 1
                report.best_validation = float(val)
            logger.info(f"[{label}] step {step + 1}: loss={loss.value:.5f} beta={beta:.2f} val_rec={val:.5f}")

    report.steps_run = cfg.steps
    return best_model, report


def encode_dataset(model: EmbeddingModel, dataset: Dataset) -> Dict[str, List[NsvTrajectory]]:
    """One NsvTrajectory per sequence of every split"""
    encoded: Dict[str, List[NsvTrajectory]] = {}
    for split in SPLITS:
        encoded[split] = [
            NsvTrajectory(
                states=encode(model, item.observations),
                dt=item.dt,
                provenance={"split": split, "index": item.index, "seed": item.seed, "system": item.system},
            )
            for item in dataset.splits[split]
        ]
    return encoded


# ============================================================================
# Persistence
# ============================================================================

def save_embedding(model: EmbeddingModel, path: Union[str, Path], seed: int,
                   metadata: Optional[Dict[str, Any]] = None) -> Path:
    meta = dict(metadata or {})
    meta.update({"mean": model.mean.tolist(), "std": model.std.tolist(), "latent_dim": model.latent_dim})
    return save_checkpoint(path, {"encoder": model.encoder, "decoder": model.decoder}, seed, meta)


def load_embedding(path: Union[str, Path]) -> EmbeddingModel:
    networks, document = load_checkpoint(path)
    meta = document["metadata"]
    return EmbeddingModel(
        encoder=networks["encoder"],
        decoder=networks["decoder"],
        mean=np.asarray(meta["mean"], dtype=np.float64),
        std=np.asarray(meta["std"], dtype=np.float64),
    )


def write_encoded(encoded: Dict[str, List[NsvTrajectory]], root: Union[str, Path]) -> List[Path]:
    """One table per encoded sequence: t, v0..v{d-1}"""
    written = []
    for split, trajs in encoded.items():
        for traj in trajs:
            columns = ["t"] + [f"v{j}" for j in range(traj.dim)]
            table = np.column_stack([traj.dt * np.arange(len(traj)), traj.states])
            header = dict(traj.provenance)
            header["dt"] = traj.dt
            path = Path(root) / split / f"seq_{int(traj.provenance['index']):04d}.csv"
            written.append(CSVExporter.export_series(table, columns, path, header))
    return written


def load_encoded(root: Union[str, Path]) -> Dict[str, List[NsvTrajectory]]:
    """
    Read encoded trajectories written by write_encoded

    Raises:
        MissingArtifactError: If the directory does not exist
    """
    base = Path(root)
    if not base.exists():
        raise MissingArtifactError(f"Encoded trajectories not found: {base}", field="encoded")
    encoded: Dict[str, List[NsvTrajectory]] = {}
    for split in SPLITS:
        encoded[split] = []
        for path in sorted((base / split).glob("seq_*.csv")):
            header, frame = CSVExporter.load_frame(path)
            values = frame.to_numpy(dtype=np.float64)
            provenance = {k: v for k, v in (header or {}).items() if k != "dt"}
            encoded[split].append(NsvTrajectory(states=values[:, 1:], dt=float(header["dt"]), provenance=provenance))
    return encoded
