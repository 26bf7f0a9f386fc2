"""
Smooth neural state variable embedding
"""

from .losses import (
    EmbedLoss,
    beta_schedule,
    default_l0,
    nsv_difference,
    nsv_distance,
    reconstruction_error,
    smoothness_loss,
    smoothness_loss_and_grad,
    total_loss,
)
from .model import (
    EmbeddingModel,
    NsvTrajectory,
    build_embedding_model,
    decode,
    decoder_specs,
    encode,
    encoder_specs,
    standardization,
)
from .trainer import encode_dataset, load_embedding, load_encoded, save_embedding, train_embedding, write_encoded

__all__ = [
    "EmbeddingModel",
    "NsvTrajectory",
    "EmbedLoss",
    "encoder_specs",
    "decoder_specs",
    "build_embedding_model",
    "standardization",
    "encode",
    "decode",
    "nsv_difference",
    "nsv_distance",
    "smoothness_loss",
    "smoothness_loss_and_grad",
    "beta_schedule",
    "default_l0",
    "reconstruction_error",
    "total_loss",
    "train_embedding",
    "encode_dataset",
    "save_embedding",
    "load_embedding",
    "write_encoded",
    "load_encoded",
]
