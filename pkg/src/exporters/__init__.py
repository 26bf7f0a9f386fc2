"""
Exporters for reports, checkpoints and tables
"""

from .csv_exporter import CSVExporter
from .json_exporter import JSONExporter

__all__ = ["JSONExporter", "CSVExporter"]
