"""
Helper Utilities
Common functions used across the application: seeding, hashing, atomic file
writes and shape checks.
"""

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np

from .errors import DimensionError

PathLike = Union[str, Path]


def derive_seed(seed: int, role: str) -> int:
    """
    Derive a named sub-seed from a global seed

    Args:
        seed: Global seed
        role: Role string, e.g. "dataset/train/17"

    Returns:
        Non-negative 63-bit integer seed
    """
    digest = hashlib.sha256(f"{int(seed)}:{role}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def make_rng(seed: int, role: str) -> np.random.Generator:
    """Seeded numpy generator for a named role"""
    return np.random.default_rng(derive_seed(seed, role))


def hash_text(text: str) -> str:
    """SHA-256 of a text"""
    return hashlib.sha256(text.encode()).hexdigest()


def hash_file(filepath: PathLike) -> str:
    """SHA-256 of a file's bytes"""
    digest = hashlib.sha256()
    with open(filepath, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(filepath: PathLike, text: str) -> Path:
    """
    Write text through a temporary file and rename it into place

    Args:
        filepath: Destination path; parent directories are created
        text: Content

    Returns:
        Destination path
    """
    target = Path(filepath)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def as_batch(values: Any, width: int, name: str = "input") -> np.ndarray:
    """
    Convert to a float64 array whose last axis has the given width

    Raises:
        DimensionError: If the last axis differs
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != width:
        raise DimensionError(f"{name} must have trailing dimension {width}, got shape {arr.shape}")
    return arr
