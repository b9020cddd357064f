"""
Training loop: Adam on per-sample losses, averaged over mini-batches.

Every step is a pure function of (config, seed): the sample order of each
epoch is drawn from default_rng([seed, epoch]).
"""

import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from shared.models.checkpoint import Checkpoint
from shared.models.sample import LabeledSample
from shared.utils.errors import TrainingDivergedError
from tfn.autodiff import Adam, ParameterStore, Tape
from tfn.layers import TensorFieldNetwork

from .base import BaseTask

logger = logging.getLogger(__name__)

METRICS_SCHEMA = "tfn.metrics/1"


class TrainingResult(BaseModel):
    """Final parameters, the checkpoint built from them and the per-epoch log."""

    model: TensorFieldNetwork
    store: ParameterStore
    checkpoint: Checkpoint
    metrics: pd.DataFrame

    model_config = ConfigDict(arbitrary_types_allowed=True)


def train(
    task: BaseTask,
    model: Optional[TensorFieldNetwork] = None,
    samples: Optional[Sequence[LabeledSample]] = None,
    store: Optional[ParameterStore] = None,
    epochs: Optional[int] = None,
) -> TrainingResult:
    """
    Train ``model`` on ``samples`` with the task's loss.

    Args:
        task: Task providing encoding, loss, metric and the run config
        model: Network to train (default: the task's network)
        samples: Training samples (default: the task's training set)
        store: Initial parameters (default: fresh, seeded by config.seed)
        epochs: Override of config.epochs

    Returns:
        TrainingResult; ``metrics`` has one row per epoch with the mean
        loss and the task metrics of the predictions made during the epoch

    Raises:
        TrainingDivergedError: If a batch loss is NaN or infinite
    """
    config = task.config
    model = model or task.build_model()
    samples = list(samples) if samples is not None else task.train_samples()
    store = store.copy() if store is not None else model.init_parameters(config.seed)
    model.check_parameters(store)
    epochs = epochs or config.epochs
    optimizer = Adam(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps)

    logger.info(
        f"Training {model.name} on {len(samples)} samples: {epochs} epochs, "
        f"batch {config.batch_size}, lr {config.lr}, {store.size} parameters"
    )

    rows: List[Dict[str, float]] = []
    for epoch in range(epochs):
        order = np.random.default_rng([config.seed, epoch]).permutation(len(samples))
        losses: List[float] = []
        predictions: List[np.ndarray] = []
        seen: List[LabeledSample] = []

        for step, start in enumerate(range(0, len(order), config.batch_size)):
            batch = [samples[i] for i in order[start : start + config.batch_size]]
            tape = Tape()
            params = store.bind(tape)
            sample_losses = []
            for sample in batch:
                prediction = task.forward(model, params, sample, tape)
                sample_losses.append(task.loss(prediction, sample))
                predictions.append(prediction.value.copy())
                seen.append(sample)
            loss = sample_losses[0]
            for extra in sample_losses[1:]:
                loss = loss + extra
            loss = loss * (1.0 / len(sample_losses))

            value = float(loss.value)
            if not np.isfinite(value):
                logger.error(f"Loss became {value} at epoch {epoch}, step {step}")
                raise TrainingDivergedError(
                    f"loss is {value} at epoch {epoch}, step {step} "
                    f"(samples {[s.index for s in batch]})"
                )
            store = optimizer.step(store, tape.backward(loss))
            losses.extend(float(l.value) for l in sample_losses)

        row = {"epoch": epoch, "loss": float(np.mean(losses))}
        row.update(task.score(predictions, seen))
        rows.append(row)
        logger.debug(f"epoch {epoch}: loss {row['loss']:.6g}", extra={"context": {"model": model.name, **row}})

    metrics = pd.DataFrame(rows)
    final = metrics.iloc[-1]
    logger.info(f"Finished training {model.name}: loss {final['loss']:.6g}, {task.metric} {final[task.metric]:.6g}")

    checkpoint = model.to_checkpoint(
        store,
        task=task.kind.value,
        config_hash=task.config_hash,
        config=task.config.model_dump(mode="json"),
        metrics={
            f"train_{key}": float(value) for key, value in final.items() if key != "epoch" and np.isfinite(value)
        },
    )
    return TrainingResult(model=model, store=store, checkpoint=checkpoint, metrics=metrics)
