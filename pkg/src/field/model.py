"""
Neural state vector field
ReLU MLP giving dV/dt at any point of the state-variable domain.
"""

from dataclasses import dataclass
from typing import Callable, List, Union

import numpy as np

from src.nn.mlp import LayerSpec, MlpParams, init_mlp, jacobian_of_net, predict
from src.utils.errors import DimensionError


FieldLike = Union["FieldModel", Callable[[np.ndarray], np.ndarray]]


def field_specs(d: int) -> List[LayerSpec]:
    """d -> 32 -> 64 -> 128 -> 64 -> 32 -> d for d <= 2, a deeper chain with a 256 layer above"""
    if d <= 2:
        widths = [d, 32, 64, 128, 64, 32, d]
    else:
        widths = [d, 32, 64, 128, 256, 128, 64, 32, d]
    specs = [LayerSpec(a, b, "relu") for a, b in zip(widths[:-2], widths[1:-1])]
    specs.append(LayerSpec(widths[-2], widths[-1], "none"))
    return specs


@dataclass(frozen=True, eq=False)
class FieldModel:
    params: MlpParams

    def __post_init__(self) -> None:
        if self.params.in_dim != self.params.out_dim:
            raise DimensionError("field input and output dimensions differ")

    @property
    def dim(self) -> int:
        return self.params.in_dim

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return eval_field(self, v)

    def jacobian(self, v: np.ndarray) -> np.ndarray:
        return jacobian_of_net(self.params, np.asarray(v, dtype=np.float64))


def build_field_model(d: int, seed: int) -> FieldModel:
    return FieldModel(init_mlp(field_specs(d), seed))


def eval_field(model: FieldModel, v: np.ndarray) -> np.ndarray:
    """
    dV/dt at V of shape (d,) or (n, d)

    Raises:
        DimensionError: If the state width is not d
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.shape[-1] != model.dim:
        raise DimensionError(f"field expects states of length {model.dim}, got shape {arr.shape}")
    return predict(model.params, arr)


def as_callable(field: FieldLike) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(field, FieldModel):
        return lambda v: eval_field(field, v)
    return field
