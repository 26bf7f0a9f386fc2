"""
Run directory layout
"""

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from src.utils.errors import ConfigurationError

_LABEL = re.compile(r"^[a-z0-9][a-z0-9_-]*$")


def check_label(label: str) -> str:
    if not _LABEL.match(label):
        raise ConfigurationError(f"invalid run label '{label}'", field="label")
    return label


@dataclass(frozen=True)
class RunLayout:
    root: Path

    @classmethod
    def at(cls, root: Union[str, Path]) -> "RunLayout":
        return cls(Path(root))

    @property
    def dataset(self) -> Path:
        return self.root / "dataset"

    @property
    def dimension(self) -> Path:
        return self.root / "dimension"

    @property
    def dimension_estimate(self) -> Path:
        return self.dimension / "estimate.json"

    @property
    def ablations(self) -> Path:
        return self.root / "ablations"

    @property
    def smoothness(self) -> Path:
        return self.root / "smoothness"

    def embed(self, label: str) -> Path:
        return self.root / "embed" / check_label(label)

    def encoded(self, label: str) -> Path:
        return self.embed(label) / "encoded"

    def field(self, label: str) -> Path:
        return self.root / "field" / check_label(label)

    def analysis(self, label: str) -> Path:
        return self.root / "analysis" / check_label(label)
