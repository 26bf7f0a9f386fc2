"""
Training report shared by the embedding and field trainers
"""

from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, Field


class TrainingReport(BaseModel):
    kind: str
    label: str = "smooth"
    seed: int
    steps_run: int = 0
    best_step: Optional[int] = None
    best_validation: Optional[float] = None
    aborted: bool = False
    message: str = ""
    records: List[Dict[str, Optional[float]]] = Field(default_factory=list)
    validation: List[Dict[str, Optional[float]]] = Field(default_factory=list)
    extra: Dict[str, Any] = Field(default_factory=dict)

    def curve(self) -> pd.DataFrame:
        """Per-step scalars as a table"""
        return pd.DataFrame(self.records)

    def validation_curve(self) -> pd.DataFrame:
        return pd.DataFrame(self.validation)
