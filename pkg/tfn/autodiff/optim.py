"""
Parameters, the Adam optimizer and a finite-difference gradient oracle.
"""

import logging
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from shared.models.checkpoint import ParameterRecord
from shared.utils.errors import ShapeMismatchError

from .tape import Node, Tape

logger = logging.getLogger(__name__)


class ParameterStore:
    """
    Named float64 parameter arrays.

    Arrays are copied on the way in and on the way out, so a store never
    shares memory with a tape or with another store.
    """

    def __init__(self, arrays: Optional[Mapping[str, np.ndarray]] = None):
        self._arrays: Dict[str, np.ndarray] = {}
        for name, value in (arrays or {}).items():
            self[name] = value

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name].copy()

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self._arrays[name] = np.array(value, dtype=np.float64, copy=True)

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __len__(self) -> int:
        return len(self._arrays)

    def __iter__(self) -> Iterator[str]:
        return iter(self._arrays)

    def names(self) -> List[str]:
        return list(self._arrays)

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return {name: value.shape for name, value in self._arrays.items()}

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name, value in self._arrays.items():
            yield name, value.copy()

    @property
    def size(self) -> int:
        """Total number of scalar parameters."""
        return int(np.sum([value.size for value in self._arrays.values()], dtype=np.int64))

    def copy(self) -> "ParameterStore":
        return ParameterStore(self._arrays)

    def bind(self, tape: Tape) -> Dict[str, Node]:
        """Register every parameter on ``tape`` and return the leaf nodes by name."""
        return {name: tape.parameter(name, value) for name, value in self._arrays.items()}

    def flatten(self) -> np.ndarray:
        """All parameters concatenated in insertion order."""
        if not self._arrays:
            return np.zeros(0)
        return np.concatenate([value.ravel() for value in self._arrays.values()])

    def unflatten(self, vector: np.ndarray) -> "ParameterStore":
        """A store of the same layout holding the values of ``vector``."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.size,):
            raise ShapeMismatchError("flat parameter vector has the wrong size", vector.shape, (self.size,))
        arrays, offset = {}, 0
        for name, value in self._arrays.items():
            arrays[name] = vector[offset : offset + value.size].reshape(value.shape)
            offset += value.size
        return ParameterStore(arrays)

    def to_records(self) -> List[ParameterRecord]:
        return [ParameterRecord.from_array(name, value) for name, value in self._arrays.items()]

    @classmethod
    def from_records(cls, records: List[ParameterRecord]) -> "ParameterStore":
        return cls({record.name: record.to_array() for record in records})


class AdamState(BaseModel):
    """First and second moment estimates of Adam."""

    step: int = 0
    m: Dict[str, np.ndarray] = Field(default_factory=dict)
    v: Dict[str, np.ndarray] = Field(default_factory=dict)

    model_config = ConfigDict(arbitrary_types_allowed=True)


def adam_step(
    params: ParameterStore,
    grads: Mapping[str, np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> Tuple[ParameterStore, AdamState]:
    """
    One bias-corrected Adam update.

    Args:
        params: Current parameters (left untouched)
        grads: Gradient per parameter name; missing names count as zero
        state: Moments from the previous step

    Returns:
        (updated parameters, updated state)
    """
    step = state.step + 1
    updated = params.copy()
    m_next, v_next = {}, {}
    for name, value in params.items():
        grad = np.asarray(grads.get(name, np.zeros_like(value)), dtype=np.float64)
        if grad.shape != value.shape:
            raise ShapeMismatchError(f"gradient of '{name}' does not match the parameter", grad.shape, value.shape)
        m = beta1 * state.m.get(name, np.zeros_like(value)) + (1.0 - beta1) * grad
        v = beta2 * state.v.get(name, np.zeros_like(value)) + (1.0 - beta2) * grad**2
        m_hat = m / (1.0 - beta1**step)
        v_hat = v / (1.0 - beta2**step)
        updated[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
        m_next[name], v_next[name] = m, v
    return updated, AdamState(step=step, m=m_next, v=v_next)


class Adam:
    """Stateful wrapper around ``adam_step``."""

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState()

    def step(self, params: ParameterStore, grads: Mapping[str, np.ndarray]) -> ParameterStore:
        params, self.state = adam_step(
            params, grads, self.state, lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps
        )
        return params


def numerical_gradient(fn: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of a scalar function of one array."""
    x = np.array(x, dtype=np.float64, copy=True)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + h
        upper = float(fn(x))
        x[index] = original - h
        lower = float(fn(x))
        x[index] = original
        grad[index] = (upper - lower) / (2.0 * h)
    return grad
