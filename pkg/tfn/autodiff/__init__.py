from .tape import Node, Tape, TapeEntry, backward
from .optim import Adam, AdamState, ParameterStore, adam_step, numerical_gradient
from . import ops

__all__ = [
    "Node",
    "Tape",
    "TapeEntry",
    "backward",
    "Adam",
    "AdamState",
    "ParameterStore",
    "adam_step",
    "numerical_gradient",
    "ops",
]
