"""
Embedding losses
Reconstruction, hinge smoothness and Sinkhorn space-filling terms, the
cyclic beta schedule, and the composite loss with exact gradients.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.config import EmbedConfig
from src.nn.mlp import backward, forward
from src.transport.sinkhorn import sinkhorn_divergence, uniform_reference
from src.utils.errors import ConfigurationError, DegenerateInputError, DimensionError
from .model import EmbeddingModel

DISTANCE_MODES = ("box", "torus")


# ============================================================================
# Distances and smoothness
# ============================================================================

def nsv_difference(a: np.ndarray, b: np.ndarray, mode: str = "box") -> np.ndarray:
    """a - b, wrapped onto [-1, 1] per coordinate in torus mode"""
    if mode not in DISTANCE_MODES:
        raise DimensionError(f"unknown distance mode '{mode}'")
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"state shapes differ: {x.shape} vs {y.shape}")
    delta = x - y
    if mode == "torus":
        delta = delta - 2.0 * np.round(delta / 2.0)
    return delta


def nsv_distance(a: np.ndarray, b: np.ndarray, mode: str = "box") -> np.ndarray:
    """Euclidean distance on the box or on the period-2 torus"""
    return np.linalg.norm(nsv_difference(a, b, mode), axis=-1)


def _unit(delta: np.ndarray, dist: np.ndarray) -> np.ndarray:
    safe = np.where(dist > 0, dist, 1.0)
    return np.where(dist[..., None] > 0, delta / safe[..., None], 0.0)


def smoothness_loss_and_grad(
    v0: np.ndarray, v1: np.ndarray, v2: np.ndarray, l0: float, eta: float, mode: str = "box"
) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """
    Batch-mean hinge smoothness loss and its gradients

    Args:
        v0, v1, v2: States at t, t+dt, t+2dt, shape (n, d)
        l0: Threshold L0
        eta: Weight of the one-step hinge
        mode: box or torus

    Returns:
        (value, d/dv0, d/dv1, d/dv2)
    """
    v0, v1, v2 = (np.atleast_2d(np.asarray(v, dtype=np.float64)) for v in (v0, v1, v2))
    n = v0.shape[0]
    d02 = nsv_difference(v2, v0, mode)
    d01 = nsv_difference(v1, v0, mode)
    dist02 = np.linalg.norm(d02, axis=-1)
    dist01 = np.linalg.norm(d01, axis=-1)
    h02 = dist02 - 2.0 * l0
    h01 = dist01 - l0
    active02 = h02 > 0
    active01 = h01 > 0
    value = float((np.where(active02, h02, 0.0) + eta * np.where(active01, h01, 0.0)).sum() / n)

    u02 = _unit(d02, dist02) * active02[:, None] / n
    u01 = eta * _unit(d01, dist01) * active01[:, None] / n
    return value, -u02 - u01, u01, u02


def smoothness_loss(v0, v1, v2, l0: float, eta: float, mode: str = "box") -> float:
    """
    max(0, dist(v2, v0) - 2 L0) + eta * max(0, dist(v1, v0) - L0), averaged over a batch
    """
    return smoothness_loss_and_grad(v0, v1, v2, l0, eta, mode)[0]


def beta_schedule(step: int, cfg: EmbedConfig) -> float:
    """
    Cyclic annealing weight

    Within each cycle: 0 for the zero share, a linear ramp to 1, 1 for the
    hold share, then 0 again until the cycle restarts.
    """
    if not cfg.anneal:
        return 0.0
    cycle = cfg.beta_cycle
    pos = step % cycle
    zero_end = cfg.beta_zero_fraction * cycle
    ramp_end = zero_end + cfg.beta_ramp_fraction * cycle
    hold_end = ramp_end + cfg.beta_hold_fraction * cycle
    if pos < zero_end:
        return 0.0
    if pos < ramp_end:
        return float((pos - zero_end) / (ramp_end - zero_end))
    if pos < hold_end:
        return 1.0
    return 0.0


def default_l0(d: int, seq_len: int) -> float:
    return 2.0 * np.sqrt(d) / seq_len


# ============================================================================
# Composite loss
# ============================================================================

@dataclass(frozen=True, eq=False)
class EmbedLoss:
    value: float
    reconstruct: float
    smooth: float
    space: Optional[float]
    encoder_grads: List[np.ndarray]
    decoder_grads: List[np.ndarray]
    sinkhorn_converged: bool = True


def reconstruction_error(model: EmbeddingModel, observations: np.ndarray) -> float:
    """Mean per-sample squared error in standardized space"""
    x = model.standardize(np.asarray(observations, dtype=np.float64))
    v, _ = forward(model.encoder, x)
    xhat, _ = forward(model.decoder, v)
    return float(np.mean(np.sum((xhat - x) ** 2, axis=-1)))


def total_loss(
    batch: np.ndarray,
    model: EmbeddingModel,
    beta: float,
    cfg: EmbedConfig,
    l0: Optional[float] = None,
    reference: Optional[np.ndarray] = None,
) -> EmbedLoss:
    """
    w_r * reconstruction + beta * (w_s * smoothness + w_sp * space filling)

    Args:
        batch: Consecutive observation triplets, shape (n, 3, D)
        model: Current model
        beta: Annealing weight
        cfg: Loss weights and Sinkhorn settings
        l0: Smoothness threshold; cfg.l0 when None
        reference: Uniform samples for the space-filling term, shape (n, d)

    Returns:
        EmbedLoss with gradients for every encoder and decoder parameter

    Raises:
        DegenerateInputError: If the batch is empty
        DimensionError: If the batch is not made of triplets
        ConfigurationError: If no threshold is available
    """
    obs = np.asarray(batch, dtype=np.float64)
    if obs.ndim != 3 or obs.shape[1] != 3:
        raise DimensionError(f"batch must have shape (n, 3, D), got {obs.shape}")
    n = obs.shape[0]
    if n == 0:
        raise DegenerateInputError("empty batch")
    d = model.latent_dim
    l0 = cfg.l0 if l0 is None else l0
    if l0 is None:
        raise ConfigurationError("smoothness threshold l0 is not set", field="embed.l0")

    x = model.standardize(obs.reshape(3 * n, -1))
    v, enc_cache = forward(model.encoder, x)
    xhat, dec_cache = forward(model.decoder, v)
    diff = xhat - x
    reconstruct = float(np.mean(np.sum(diff * diff, axis=1)))
    grad_xhat = cfg.w_reconstruct * 2.0 * diff / (3 * n)
    decoder_grads, grad_v = backward(model.decoder, dec_cache, grad_xhat)

    triplets = v.reshape(n, 3, d)
    smooth, g0, g1, g2 = smoothness_loss_and_grad(
        triplets[:, 0], triplets[:, 1], triplets[:, 2], l0, cfg.eta, cfg.distance_mode
    )
    value = cfg.w_reconstruct * reconstruct
    grad_v = grad_v.reshape(n, 3, d)

    if beta > 0 and cfg.w_smooth > 0:
        scale = beta * cfg.w_smooth
        grad_v[:, 0] += scale * g0
        grad_v[:, 1] += scale * g1
        grad_v[:, 2] += scale * g2
    value += beta * cfg.w_smooth * smooth

    space: Optional[float] = None
    converged = True
    if beta > 0 and cfg.w_space > 0:
        ref = reference if reference is not None else uniform_reference(d, n, 0)
        result = sinkhorn_divergence(triplets[:, 0], ref, cfg.sinkhorn)
        space = result.value
        converged = result.converged
        value += beta * cfg.w_space * space
        grad_v[:, 0] += beta * cfg.w_space * result.gradient

    encoder_grads, _ = backward(model.encoder, enc_cache, grad_v.reshape(3 * n, d))
    return EmbedLoss(
        value=float(value),
        reconstruct=reconstruct,
        smooth=smooth,
        space=space,
        encoder_grads=encoder_grads,
        decoder_grads=decoder_grads,
        sinkhorn_converged=converged,
    )
