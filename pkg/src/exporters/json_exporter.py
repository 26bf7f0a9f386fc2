"""
JSON Exporter
Exports reports, manifests and checkpoints to deterministic JSON.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import BaseModel

from src.utils.helpers import atomic_write_text

logger = logging.getLogger(__name__)


def _to_plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _to_plain(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): _to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


class JSONExporter:
    """
    Exports structured documents to JSON with sorted keys, written atomically.
    """

    @staticmethod
    def dumps(data: Union[Dict[str, Any], BaseModel]) -> str:
        """Serialize to the canonical JSON text"""
        return json.dumps(_to_plain(data), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"

    @staticmethod
    def export(
        data: Union[Dict[str, Any], BaseModel],
        output_path: Optional[Union[str, Path]] = None,
    ) -> str:
        """
        Export a document to JSON.

        Args:
            data: Mapping or pydantic model; numpy values are converted and
                non-finite floats become null
            output_path: Optional path to save JSON file

        Returns:
            JSON string
        """
        try:
            json_string = JSONExporter.dumps(data)

            if output_path:
                atomic_write_text(output_path, json_string)
                logger.debug(f"JSON saved to: {output_path}")

            return json_string

        except Exception as e:
            logger.error(f"Error exporting JSON: {str(e)}")
            raise

    @staticmethod
    def load(path: Union[str, Path]) -> Dict[str, Any]:
        """Read a JSON document"""
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
