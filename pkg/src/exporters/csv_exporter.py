"""
CSV Exporter
Delimited-text tables for trajectories, training curves and analysis curves.

Series files start with one comment line holding a JSON header record,
followed by a CSV table with a header row. Floats are written in their
shortest round-trip form and read back exactly.
"""

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.utils.errors import DimensionError, MissingArtifactError
from src.utils.helpers import atomic_write_text

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
HEADER_PREFIX = "# "


class CSVExporter:
    """
    Writes and reads pandas tables with exact float round-trips.
    """

    @staticmethod
    def export_frame(frame: pd.DataFrame, output_path: PathLike, header: Optional[Dict[str, Any]] = None) -> Path:
        """
        Write a DataFrame, optionally preceded by a JSON header line

        Args:
            frame: Table to write (index is dropped)
            output_path: Destination
            header: Optional header record

        Returns:
            Destination path
        """
        buffer = io.StringIO()
        if header is not None:
            buffer.write(HEADER_PREFIX + json.dumps(header, sort_keys=True, separators=(",", ":")) + "\n")
        frame.to_csv(buffer, index=False, lineterminator="\n")
        path = atomic_write_text(output_path, buffer.getvalue())
        logger.debug(f"CSV saved to: {output_path}")
        return path

    @staticmethod
    def export_series(
        values: np.ndarray,
        columns: Sequence[str],
        output_path: PathLike,
        header: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """Write a 2-d array as a table with the given column names"""
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(columns):
            raise DimensionError(f"series of shape {arr.shape} does not match {len(columns)} columns")
        return CSVExporter.export_frame(pd.DataFrame(arr, columns=list(columns)), output_path, header)

    @staticmethod
    def load_frame(path: PathLike) -> Tuple[Optional[Dict[str, Any]], pd.DataFrame]:
        """
        Read a table written by export_frame

        Returns:
            (header record or None, DataFrame)

        Raises:
            MissingArtifactError: If the file does not exist
        """
        source = Path(path)
        if not source.exists():
            raise MissingArtifactError(f"File not found: {source}")
        with open(source, "r", encoding="utf-8") as f:
            first = f.readline()
            header = None
            if first.startswith(HEADER_PREFIX):
                header = json.loads(first[len(HEADER_PREFIX):])
            else:
                f.seek(0)
            frame = pd.read_csv(f, float_precision="round_trip")
        return header, frame
