"""
Run event log
Records pipeline events as one JSON object per line in <out>/logs/events.jsonl
"""

import json
import logging
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)


class RunEventType(Enum):
    """Types of pipeline events to log"""
    DATASET_WRITTEN = "dataset_written"
    CHECKPOINT_SAVED = "checkpoint_saved"
    REPORT_WRITTEN = "report_written"
    TRAINING_ABORTED = "training_aborted"
    PROVENANCE_MISMATCH = "provenance_mismatch"
    COMMAND_FINISHED = "command_finished"


class RunLog:
    """
    Append-only event log of a run directory
    """

    def __init__(self, run_dir: Union[str, Path], command: str):
        """
        Args:
            run_dir: Run output directory
            command: Command recorded on every event
        """
        self.log_file = Path(run_dir) / "logs" / "events.jsonl"
        self.command = command
        self._setup_logger()

    def _setup_logger(self) -> None:
        self.log_file.parent.mkdir(parents=True, exist_ok=True)
        self.logger = logging.getLogger(f"nsv.events.{self.log_file.resolve()}")
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

        # Remove existing handlers
        for handler in list(self.logger.handlers):
            handler.close()
        self.logger.handlers = []

        handler = logging.FileHandler(self.log_file, encoding="utf-8")
        handler.setLevel(logging.INFO)
        handler.setFormatter(logging.Formatter("%(message)s"))
        self.logger.addHandler(handler)

    def log_event(
        self,
        event_type: RunEventType,
        details: Optional[Dict[str, Any]] = None,
        success: bool = True,
    ) -> Dict[str, Any]:
        """
        Append an event

        Args:
            event_type: Type of event
            details: Additional event details
            success: Whether the event was successful

        Returns:
            The record written
        """
        event = {
            "event_type": event_type.value,
            "command": self.command,
            "success": success,
            "details": details or {},
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        self.logger.info(json.dumps(event, sort_keys=True, default=str))

        status = "SUCCESS" if success else "FAILED"
        logger.debug(f"EVENT [{status}] {event_type.value} - {self.command}")
        return event

    def dataset_written(self, path: Union[str, Path], n_sequences: int) -> None:
        self.log_event(RunEventType.DATASET_WRITTEN, {"path": str(path), "sequences": n_sequences})

    def checkpoint_saved(self, path: Union[str, Path], label: str) -> None:
        self.log_event(RunEventType.CHECKPOINT_SAVED, {"path": str(path), "label": label})

    def report_written(self, path: Union[str, Path]) -> None:
        self.log_event(RunEventType.REPORT_WRITTEN, {"path": str(path)})

    def training_aborted(self, kind: str, step: int, message: str) -> None:
        self.log_event(RunEventType.TRAINING_ABORTED, {"kind": kind, "step": step, "message": message}, success=False)

    def provenance_mismatch(self, stage: str, diff: Dict[str, Any]) -> None:
        self.log_event(RunEventType.PROVENANCE_MISMATCH, {"stage": stage, "diff": diff}, success=False)

    def command_finished(self, success: bool, details: Optional[Dict[str, Any]] = None) -> None:
        self.log_event(RunEventType.COMMAND_FINISHED, details, success=success)

    def close(self) -> None:
        for handler in list(self.logger.handlers):
            handler.close()
        self.logger.handlers = []

    def read_events(self) -> list:
        """All events in the log, oldest first"""
        if not self.log_file.exists():
            return []
        return [json.loads(line) for line in self.log_file.read_text(encoding="utf-8").splitlines() if line.strip()]
