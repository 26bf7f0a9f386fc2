"""
Embedding model
Sine-activated autoencoder mapping standardized observations to neural state
variables in [-1, 1]^d and back.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from src.nn.mlp import LayerSpec, MlpParams, forward, init_mlp
from src.utils.errors import DimensionError
from src.utils.helpers import derive_seed


def encoder_specs(d: int, input_dim: int = 64) -> List[LayerSpec]:
    """input -> 128 -> 64 -> 32 -> d, all sine"""
    widths = [input_dim, 128, 64, 32, d]
    return [LayerSpec(a, b, "sine") for a, b in zip(widths[:-1], widths[1:])]


def decoder_specs(d: int, output_dim: int = 64) -> List[LayerSpec]:
    """d -> 32 -> 64 -> 128 -> output, sine with a linear output layer"""
    widths = [d, 32, 64, 128, output_dim]
    specs = [LayerSpec(a, b, "sine") for a, b in zip(widths[:-2], widths[1:-1])]
    specs.append(LayerSpec(widths[-2], widths[-1], "none"))
    return specs


@dataclass(frozen=True, eq=False)
class EmbeddingModel:
    encoder: MlpParams
    decoder: MlpParams
    mean: np.ndarray
    std: np.ndarray

    @property
    def latent_dim(self) -> int:
        return self.encoder.out_dim

    @property
    def input_dim(self) -> int:
        return self.encoder.in_dim

    def standardize(self, observations: np.ndarray) -> np.ndarray:
        return (observations - self.mean) / self.std

    def destandardize(self, standardized: np.ndarray) -> np.ndarray:
        return standardized * self.std + self.mean

    def with_params(self, encoder: MlpParams, decoder: MlpParams) -> "EmbeddingModel":
        return EmbeddingModel(encoder=encoder, decoder=decoder, mean=self.mean, std=self.std)


def standardization(observations: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean and standard deviation; zero spread maps to 1"""
    obs = np.asarray(observations, dtype=np.float64)
    mean = obs.mean(axis=0)
    std = obs.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def build_embedding_model(
    d: int, mean: np.ndarray, std: np.ndarray, seed: int, omega0: float = 30.0
) -> EmbeddingModel:
    """Freshly initialized autoencoder for latent dimension d"""
    input_dim = int(np.asarray(mean).shape[0])
    encoder = init_mlp(encoder_specs(d, input_dim), derive_seed(seed, "embed/encoder"), omega0)
    decoder = init_mlp(decoder_specs(d, input_dim), derive_seed(seed, "embed/decoder"), omega0)
    return EmbeddingModel(encoder=encoder, decoder=decoder, mean=np.asarray(mean, float), std=np.asarray(std, float))


def encode(model: EmbeddingModel, observation: np.ndarray) -> np.ndarray:
    """
    Observation(s) of shape (D,) or (n, D) to state variables in [-1, 1]^d

    Raises:
        DimensionError: If the observation width is wrong
    """
    obs = np.asarray(observation, dtype=np.float64)
    if obs.shape[-1] != model.input_dim:
        raise DimensionError(f"observation must have length {model.input_dim}, got shape {obs.shape}")
    out, _ = forward(model.encoder, model.standardize(obs))
    return out


def decode(model: EmbeddingModel, v: np.ndarray) -> np.ndarray:
    """
    State variable(s) of shape (d,) or (n, d) back to observation space

    Raises:
        DimensionError: If the state width is wrong
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape[-1] != model.latent_dim:
        raise DimensionError(f"state variable must have length {model.latent_dim}, got shape {arr.shape}")
    out, _ = forward(model.decoder, arr)
    return model.destandardize(out)


@dataclass(frozen=True, eq=False)
class NsvTrajectory:
    """Uniformly sampled neural state variables"""

    states: np.ndarray  # (n, d)
    dt: float
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]
