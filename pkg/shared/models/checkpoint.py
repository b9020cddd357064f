from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .architecture import Architecture

CHECKPOINT_SCHEMA = "tfn.checkpoint/1"


class ParameterRecord(BaseModel):
    """A named parameter array stored as its shape plus row-major values."""

    name: str
    shape: List[int]
    values: List[float]

    @model_validator(mode="after")
    def check_size(self) -> "ParameterRecord":
        expected = int(np.prod(self.shape)) if self.shape else 1
        if len(self.values) != expected:
            raise ValueError(
                f"parameter {self.name}: {len(self.values)} values for shape {self.shape}"
            )
        return self

    @classmethod
    def from_array(cls, name: str, array: np.ndarray) -> "ParameterRecord":
        array = np.asarray(array, dtype=np.float64)
        return cls(name=name, shape=list(array.shape), values=array.ravel().tolist())

    def to_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64).reshape(self.shape)


class Checkpoint(BaseModel):
    """Architecture, trained parameters and provenance of one run."""

    schema_id: str = Field(default=CHECKPOINT_SCHEMA, alias="schema")
    task: str
    config_hash: str = ""
    config: Optional[Dict[str, Any]] = None
    architecture: Architecture
    parameters: List[ParameterRecord] = Field(default_factory=list)
    metrics: Dict[str, float] = Field(default_factory=dict)

    model_config = ConfigDict(populate_by_name=True)
