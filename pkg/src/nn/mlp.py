"""
Dense MLP kernel
Batched forward pass, exact reverse-mode gradients and deterministic
initialization for small fully connected networks.

Weights are stored as (in, out) matrices so a layer computes x @ W + b on a
batch of row vectors. Sine layers carry their frequency scale folded into
the weights; the activation itself is plain sin.
"""

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import DimensionError, StaleCacheError

Activation = Literal["sine", "relu", "none"]
ACTIVATIONS = ("sine", "relu", "none")

_tokens = itertools.count(1)


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: Activation = "none"

    def __post_init__(self) -> None:
        if self.in_dim < 1 or self.out_dim < 1:
            raise DimensionError(f"layer widths must be >= 1, got {self.in_dim}->{self.out_dim}")
        if self.activation not in ACTIVATIONS:
            raise DimensionError(f"unknown activation '{self.activation}'")

    def to_dict(self) -> dict:
        return {"in_dim": self.in_dim, "out_dim": self.out_dim, "activation": self.activation}


def architecture_fingerprint(specs: Sequence[LayerSpec]) -> str:
    """Stable hash of a layer chain"""
    text = json.dumps([s.to_dict() for s in specs], sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def check_chain(specs: Sequence[LayerSpec]) -> None:
    if not specs:
        raise DimensionError("layer chain is empty")
    for prev, nxt in zip(specs[:-1], specs[1:]):
        if prev.out_dim != nxt.in_dim:
            raise DimensionError(f"layer chain mismatch: {prev.out_dim} -> {nxt.in_dim}")


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Immutable parameter set; every instance gets its own cache token"""

    specs: Tuple[LayerSpec, ...]
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    token: int = field(default_factory=lambda: next(_tokens))

    def __post_init__(self) -> None:
        check_chain(self.specs)
        if len(self.weights) != len(self.specs) or len(self.biases) != len(self.specs):
            raise DimensionError("parameter count does not match layer count")
        for spec, w, b in zip(self.specs, self.weights, self.biases):
            if w.shape != (spec.in_dim, spec.out_dim) or b.shape != (spec.out_dim,):
                raise DimensionError(
                    f"parameter shapes {w.shape}/{b.shape} do not match layer {spec.in_dim}->{spec.out_dim}"
                )

    @property
    def fingerprint(self) -> str:
        return architecture_fingerprint(self.specs)

    @property
    def in_dim(self) -> int:
        return self.specs[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.specs[-1].out_dim

    def arrays(self) -> List[np.ndarray]:
        """Flat list [W0, b0, W1, b1, ...]"""
        out: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "MlpParams":
        """New parameter set from a flat list in arrays() order"""
        if len(arrays) != 2 * len(self.specs):
            raise DimensionError(f"expected {2 * len(self.specs)} arrays, got {len(arrays)}")
        return MlpParams(
            specs=self.specs,
            weights=tuple(np.array(a, dtype=np.float64) for a in arrays[0::2]),
            biases=tuple(np.array(a, dtype=np.float64) for a in arrays[1::2]),
        )

    def count(self) -> int:
        return int(sum(a.size for a in self.arrays()))


@dataclass(frozen=True, eq=False)
class ForwardCache:
    token: int
    inputs: Tuple[np.ndarray, ...]
    pre_activations: Tuple[np.ndarray, ...]
    squeeze: bool


def init_mlp(specs: Sequence[LayerSpec], seed: int, omega0: float = 30.0) -> MlpParams:
    """
    Deterministic initialization

    Sine layers: the first sine layer of the chain draws weights from
    U[-omega0/fan_in, omega0/fan_in]; later sine layers from
    U[-sqrt(6/fan_in), sqrt(6/fan_in)] (the omega0 factor cancels once folded).
    ReLU layers use Kaiming-uniform bounds sqrt(6/fan_in); linear layers and
    all biases use U[-1/sqrt(fan_in), 1/sqrt(fan_in)].
    """
    specs = tuple(specs)
    check_chain(specs)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    seen_sine = False
    for spec in specs:
        fan_in = spec.in_dim
        if spec.activation == "sine":
            bound = omega0 / fan_in if not seen_sine else math.sqrt(6.0 / fan_in)
            seen_sine = True
        elif spec.activation == "relu":
            bound = math.sqrt(6.0 / fan_in)
        else:
            bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(spec.in_dim, spec.out_dim)))
        bias_bound = 1.0 / math.sqrt(fan_in)
        biases.append(rng.uniform(-bias_bound, bias_bound, size=spec.out_dim))
    return MlpParams(specs=specs, weights=tuple(weights), biases=tuple(biases))


def zero_mlp(specs: Sequence[LayerSpec]) -> MlpParams:
    """All-zero parameters"""
    specs = tuple(specs)
    return MlpParams(
        specs=specs,
        weights=tuple(np.zeros((s.in_dim, s.out_dim)) for s in specs),
        biases=tuple(np.zeros(s.out_dim) for s in specs),
    )


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "sine":
        return np.sin(z)
    if activation == "relu":
        return np.maximum(z, 0.0)
    return z


def _activation_grad(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "sine":
        return np.cos(z)
    if activation == "relu":
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


def forward(params: MlpParams, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    """
    Evaluate the network

    Args:
        params: Network parameters
        x: Input of shape (in,) or (n, in)

    Returns:
        (output of shape (out,) or (n, out), cache for backward)

    Raises:
        DimensionError: If the input width is wrong
    """
    arr = np.asarray(x, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != params.in_dim:
        raise DimensionError(f"network expects input width {params.in_dim}, got shape {np.shape(x)}")

    inputs, pre = [], []
    h = arr
    for spec, w, b in zip(params.specs, params.weights, params.biases):
        inputs.append(h)
        z = h @ w + b
        pre.append(z)
        h = _activate(z, spec.activation)
    cache = ForwardCache(token=params.token, inputs=tuple(inputs), pre_activations=tuple(pre), squeeze=squeeze)
    return (h[0] if squeeze else h), cache


def predict(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Forward pass without keeping the cache"""
    return forward(params, x)[0]


def backward(
    params: MlpParams, cache: ForwardCache, grad_output: np.ndarray
) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Reverse-mode gradients of sum(grad_output * output)

    Args:
        params: Parameters the cache was produced with
        cache: Cache from forward
        grad_output: Gradient with respect to the output, same shape as it

    Returns:
        (parameter gradients in arrays() order, gradient with respect to the input)

    Raises:
        StaleCacheError: If the cache belongs to another parameter set
        DimensionError: If grad_output has the wrong shape
    """
    if cache.token != params.token:
        raise StaleCacheError("forward cache does not belong to these parameters")
    g = np.asarray(grad_output, dtype=np.float64)
    if cache.squeeze:
        g = g[None, :]
    expected = cache.pre_activations[-1].shape
    if g.shape != expected:
        raise DimensionError(f"output gradient shape {g.shape} does not match output {expected}")

    n_layers = len(params.specs)
    grads: List[Optional[np.ndarray]] = [None] * (2 * n_layers)
    for i in range(n_layers - 1, -1, -1):
        spec = params.specs[i]
        dz = g * _activation_grad(cache.pre_activations[i], spec.activation)
        grads[2 * i] = cache.inputs[i].T @ dz
        grads[2 * i + 1] = dz.sum(axis=0)
        g = dz @ params.weights[i].T
    grad_in = g[0] if cache.squeeze else g
    return [gr for gr in grads if gr is not None], grad_in


def jacobian_of_net(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """
    Exact Jacobian d(output)/d(input) at a single point

    One reverse pass per output row, run together as a batch of identical
    inputs seeded with the rows of the identity.

    Returns:
        Matrix of shape (out, in)
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (params.in_dim,):
        raise DimensionError(f"network expects input of shape ({params.in_dim},), got {arr.shape}")
    tiled = np.repeat(arr[None, :], params.out_dim, axis=0)
    _, cache = forward(params, tiled)
    _, grad_in = backward(params, cache, np.eye(params.out_dim))
    return grad_in
