"""
Checkpoints
JSON checkpoints holding one or more networks as flat row-major decimal
arrays, plus arbitrary metadata.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.config import Config
from src.exporters import JSONExporter
from src.utils.errors import ConfigurationError, MissingArtifactError, ProvenanceError
from .mlp import LayerSpec, MlpParams, architecture_fingerprint

logger = logging.getLogger(__name__)


def params_to_dict(params: MlpParams) -> Dict[str, Any]:
    return {
        "specs": [s.to_dict() for s in params.specs],
        "fingerprint": params.fingerprint,
        "weights": [w.ravel().tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }


def params_from_dict(data: Dict[str, Any]) -> MlpParams:
    """
    Rebuild a network from its checkpoint record

    Raises:
        ProvenanceError: If the stored fingerprint does not match the specs
    """
    specs = tuple(LayerSpec(**s) for s in data["specs"])
    fingerprint = architecture_fingerprint(specs)
    if fingerprint != data.get("fingerprint"):
        raise ProvenanceError(
            "checkpoint architecture fingerprint mismatch",
            diff={"fingerprint": (str(data.get("fingerprint")), fingerprint)},
        )
    weights = tuple(
        np.asarray(w, dtype=np.float64).reshape(s.in_dim, s.out_dim) for w, s in zip(data["weights"], specs)
    )
    biases = tuple(np.asarray(b, dtype=np.float64) for b in data["biases"])
    return MlpParams(specs=specs, weights=weights, biases=biases)


def save_checkpoint(
    path: Union[str, Path],
    networks: Dict[str, MlpParams],
    seed: int,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write networks and metadata to a checkpoint document"""
    document = {
        "format_version": Config.FORMAT_VERSION,
        "seed": seed,
        "networks": {name: params_to_dict(p) for name, p in networks.items()},
        "metadata": metadata or {},
    }
    JSONExporter.export(document, path)
    logger.info(f"Checkpoint saved to {path}")
    return Path(path)


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, MlpParams], Dict[str, Any]]:
    """
    Read a checkpoint

    Returns:
        (networks by name, full document without the networks)

    Raises:
        MissingArtifactError: If the file does not exist
        ConfigurationError: On a format version mismatch
    """
    source = Path(path)
    if not source.exists():
        raise MissingArtifactError(f"Checkpoint not found: {source}", field="checkpoint")
    document = JSONExporter.load(source)
    if document.get("format_version") != Config.FORMAT_VERSION:
        raise ConfigurationError("checkpoint format_version mismatch", field="format_version")
    networks = {name: params_from_dict(rec) for name, rec in document["networks"].items()}
    rest = {k: v for k, v in document.items() if k != "networks"}
    return networks, rest
