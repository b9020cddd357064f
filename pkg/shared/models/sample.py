from enum import Enum
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DATASET_SCHEMA = "tfn.dataset/1"


class TaskKind(str, Enum):
    TETRIS = "tetris"
    GRAVITY = "gravity"
    INERTIA = "inertia"
    MISSING_POINT = "missing-point"


class MissingPointTarget(BaseModel):
    """Position and type of the block removed from a shape."""

    position: List[float] = Field(min_length=3, max_length=3)
    type: int = Field(ge=0)


class LabeledSample(BaseModel):
    """
    One input cloud together with the target of its task.

    target is a class id (tetris), one 3-vector per point (gravity),
    a 3x3 symmetric matrix (inertia) or a MissingPointTarget.
    """

    schema_id: str = Field(default=DATASET_SCHEMA, alias="schema")
    config_hash: str = ""
    task: TaskKind
    seed: int
    index: int = 0

    positions: List[List[float]]
    masses: Optional[List[float]] = None
    types: Optional[List[int]] = None

    # Inertia: point the tensor is taken about. Missing point: shape identity.
    query_point: Optional[List[float]] = None
    shape_class: Optional[int] = None

    target: Union[int, List[List[float]], MissingPointTarget]

    model_config = ConfigDict(use_enum_values=True, populate_by_name=True)

    @field_validator("positions")
    @classmethod
    def check_positions(cls, value: List[List[float]]) -> List[List[float]]:
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 2 or array.shape[1] != 3 or array.shape[0] < 1:
            raise ValueError(f"positions must have shape [n >= 1, 3], got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("positions must be finite")
        return value

    @model_validator(mode="after")
    def check_target(self) -> "LabeledSample":
        n = len(self.positions)
        task = TaskKind(self.task)

        if task == TaskKind.TETRIS:
            if not isinstance(self.target, int) or not 0 <= self.target < 8:
                raise ValueError("tetris target must be a class id in [0, 8)")

        elif task == TaskKind.GRAVITY:
            if not isinstance(self.target, list) or np.shape(self.target) != (n, 3):
                raise ValueError(f"gravity target must have shape [{n}, 3]")
            if self.masses is None or len(self.masses) != n:
                raise ValueError("gravity samples need one mass per point")

        elif task == TaskKind.INERTIA:
            if not isinstance(self.target, list) or np.shape(self.target) != (3, 3):
                raise ValueError("inertia target must be a 3x3 matrix")
            if self.masses is None or len(self.masses) != n:
                raise ValueError("inertia samples need one mass per point")
            if self.query_point is None or len(self.query_point) != 3:
                raise ValueError("inertia samples need a query point")

        elif task == TaskKind.MISSING_POINT:
            if not isinstance(self.target, MissingPointTarget):
                raise ValueError("missing-point target must carry position and type")
            if self.types is None or len(self.types) != n:
                raise ValueError("missing-point samples need one type per point")
            if self.shape_class is None:
                raise ValueError("missing-point samples need the shape class")

        return self

    def positions_array(self) -> np.ndarray:
        """Positions as a float64 array of shape [n, 3]."""
        return np.asarray(self.positions, dtype=np.float64)

    def masses_array(self) -> np.ndarray:
        """Masses as a float64 array of shape [n] (ones when absent)."""
        if self.masses is None:
            return np.ones(len(self.positions))
        return np.asarray(self.masses, dtype=np.float64)

    def target_array(self) -> np.ndarray:
        """Vector or matrix target as a float64 array."""
        if isinstance(self.target, MissingPointTarget):
            return np.asarray(self.target.position, dtype=np.float64)
        return np.asarray(self.target, dtype=np.float64)
