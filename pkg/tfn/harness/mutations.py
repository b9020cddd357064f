"""
Insert a deliberately broken layer into an architecture or a checkpoint.

The mutated network keeps every original parameter; only the inserted layer
gets fresh ones. Layer names carry their index, so parameters of the layers
behind the insertion point are renamed accordingly.
"""

import logging
from typing import Dict, Optional, Tuple

import numpy as np

from shared.models.architecture import (
    Architecture,
    IndexGateRecord,
    MDependentSelfInteractionRecord,
    PositionGateRecord,
)
from shared.models.checkpoint import Checkpoint
from tfn.autodiff import ParameterStore
from tfn.layers import TensorFieldNetwork

logger = logging.getLogger(__name__)

# Mutation kind -> symmetry it breaks.
MUTATIONS: Dict[str, str] = {
    "m_dependent": "rotation",
    "position_gate": "translation",
    "index_gate": "permutation",
}


def _insertion_point(model: TensorFieldNetwork, kind: str) -> int:
    """Index after the first layer whose output has an order above 0 (rotation needs one)."""
    if kind != "m_dependent":
        return 1 if model.layers else 0
    for index, channels in enumerate(model.channel_flow):
        if any(l > 0 for l in channels):
            return index
    raise ValueError(f"{model.name} carries no l > 0 features; an m-dependent layer cannot break it")


def mutate_architecture(architecture: Architecture, kind: str = "m_dependent", position: Optional[int] = None) -> Tuple[Architecture, int]:
    """
    Architecture with one broken layer inserted.

    Returns:
        (mutated architecture, index of the inserted layer)
    """
    if kind not in MUTATIONS:
        raise ValueError(f"unknown mutation '{kind}' (known: {sorted(MUTATIONS)})")
    model = TensorFieldNetwork(architecture)
    position = _insertion_point(model, kind) if position is None else position
    if kind == "m_dependent":
        record = MDependentSelfInteractionRecord(channels=model.channel_flow[position])
    elif kind == "position_gate":
        record = PositionGateRecord()
    else:
        record = IndexGateRecord()

    layers = list(architecture.layers)
    layers.insert(position, record)
    mutated = architecture.model_copy(update={"name": f"{architecture.name}+{kind}", "layers": layers})
    logger.info(f"Inserted {record.kind} at layer {position} of {architecture.name}")
    return mutated, position


def mutate_model(
    model: TensorFieldNetwork, store: ParameterStore, kind: str = "m_dependent", seed: int = 0,
    position: Optional[int] = None,
) -> Tuple[TensorFieldNetwork, ParameterStore]:
    """Mutated network plus the original parameters under their new names."""
    architecture, position = mutate_architecture(model.architecture, kind, position)
    mutated = TensorFieldNetwork(architecture)

    renamed = ParameterStore()
    for old_index, layer in enumerate(model.layers):
        new_name = mutated.layers[old_index + (old_index >= position)].name
        for name, value in store.items():
            if name.startswith(f"{layer.name}."):
                renamed[new_name + name[len(layer.name) :]] = value

    inserted = mutated.layers[position]
    for name, value in inserted.init_parameters(np.random.default_rng(seed)).items():
        renamed[name] = value
    mutated.check_parameters(renamed)
    return mutated, renamed


def mutate_checkpoint(checkpoint: Checkpoint, kind: str = "m_dependent", seed: int = 0) -> Checkpoint:
    model, store = TensorFieldNetwork.from_checkpoint(checkpoint)
    mutated, store = mutate_model(model, store, kind, seed)
    return mutated.to_checkpoint(
        store,
        task=checkpoint.task,
        config_hash=checkpoint.config_hash,
        config=checkpoint.config,
        metrics=checkpoint.metrics,
    )
