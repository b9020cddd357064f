"""
Equivariance checks.

A Subject wraps any function (cloud, features) -> outputs together with the
kind of its output:

* per_point - feature map with a point axis; rotates with D, permutes rows;
* pooled    - feature map without a meaningful point axis; rotates with D,
  invariant under permutations;
* position  - one Cartesian 3-vector (order 1); rotates with R, shifts with t.

Residuals are max-abs differences divided by the RMS of the baseline output
of the same order, so one tolerance serves outputs of any scale.
"""

import logging
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from shared.models.report import EquivarianceReport, ResidualRecord, TransformFamily
from shared.utils.errors import OrderMismatchError
from tfn.autodiff import ParameterStore, Tape
from tfn.layers import FeatureMap, GlobalPool, Layer, PairGeometry, PointCloud, TensorFieldNetwork
from tfn.so3 import Rotation, random_rotations, rotate_features
from tfn.tasks import BaseTask

logger = logging.getLogger(__name__)

Features = Dict[int, np.ndarray]

DEFAULT_TRIALS = 50
ROTATION_TOLERANCE = 1e-8
TRANSLATION_TOLERANCE = 1e-12
PERMUTATION_TOLERANCE = 1e-12

_TINY_RMS = 1e-300


class OutputKind(str, Enum):
    PER_POINT = "per_point"
    POOLED = "pooled"
    POSITION = "position"


class Subject:
    """A function under test and the way its outputs transform."""

    def __init__(
        self,
        name: str,
        fn: Callable[[PointCloud, Features], Features],
        output: OutputKind = OutputKind.PER_POINT,
        input_orders: Optional[Sequence[int]] = None,
        output_orders: Optional[Sequence[int]] = None,
    ):
        self.name = name
        self.fn = fn
        self.output = OutputKind(output)
        self.input_orders = None if input_orders is None else sorted(input_orders)
        self.output_orders = None if output_orders is None else sorted(output_orders)

    def __repr__(self) -> str:
        return f"Subject({self.name!r}, output={self.output.value})"

    def __call__(self, cloud: PointCloud, features: Features) -> Features:
        if self.input_orders is not None and sorted(features) != self.input_orders:
            raise OrderMismatchError(
                f"{self.name}: declared input orders {self.input_orders}, got {sorted(features)}"
            )
        outputs = {int(l): np.asarray(v, dtype=np.float64) for l, v in self.fn(cloud, features).items()}
        if self.output_orders is not None:
            undeclared = sorted(set(outputs) - set(self.output_orders))
            if undeclared:
                raise OrderMismatchError(f"{self.name}: undeclared output order(s) {undeclared}")
        return outputs


# Subject constructors


def model_subject(model: TensorFieldNetwork, store: ParameterStore, layers: Optional[slice] = None, name: Optional[str] = None) -> Subject:
    """The whole network, or a contiguous slice of its layers."""
    selected = model.layers[layers or slice(None)]
    start = model.layers.index(selected[0]) if selected else 0
    pooled = any(isinstance(layer, GlobalPool) for layer in model.layers[: start + len(selected)])
    return Subject(
        name or (model.name if layers is None else f"{model.name}[{selected[0].name}..{selected[-1].name}]"),
        lambda cloud, features: model(store, cloud, features, layers),
        OutputKind.POOLED if pooled else OutputKind.PER_POINT,
        input_orders=model.channel_flow[start],
        output_orders=model.channel_flow[start + len(selected)],
    )


def layer_subject(layer: Layer, store: Mapping[str, np.ndarray], pooled: bool = False) -> Subject:
    """A single layer evaluated with fixed parameters."""

    def run(cloud: PointCloud, features: Features) -> Features:
        tape = Tape()
        params = {name: tape.constant(value) for name, value in store.items()}
        geometry = PairGeometry.from_cloud(cloud)
        return layer.forward(params, geometry, FeatureMap.from_arrays(tape, features)).to_arrays()

    output = OutputKind.POOLED if pooled or isinstance(layer, GlobalPool) else OutputKind.PER_POINT
    return Subject(layer.name, run, output)


def layer_subjects(model: TensorFieldNetwork, store: ParameterStore) -> List[Subject]:
    """One subject per layer of the network, in order."""
    return [model_subject(model, store, slice(i, i + 1), name=layer.name) for i, layer in enumerate(model.layers)]


def task_subject(task: BaseTask, model: TensorFieldNetwork, store: ParameterStore) -> Subject:
    """The network followed by the task readout (class logits, vectors, tensor or voted point)."""

    def run(cloud: PointCloud, features: Features) -> Features:
        tape = Tape()
        params = {name: tape.constant(value) for name, value in store.items()}
        outputs = model.forward(params, cloud, FeatureMap.from_arrays(tape, features))
        return task.prediction_features(task.readout(outputs, cloud).value)

    return Subject(f"{model.name}+readout", run, OutputKind(task.prediction_kind), input_orders=model.input_channels)


def identity_subject(output: OutputKind = OutputKind.PER_POINT) -> Subject:
    return Subject("identity", lambda cloud, features: {l: np.array(v) for l, v in features.items()}, output)


def compose_subjects(subjects: Sequence[Subject], name: Optional[str] = None) -> Subject:
    """Apply the subjects in order, each feeding the next."""

    def run(cloud: PointCloud, features: Features) -> Features:
        for subject in subjects:
            features = subject(cloud, features)
        return features

    return Subject(
        name or " | ".join(s.name for s in subjects),
        run,
        subjects[-1].output,
        input_orders=subjects[0].input_orders,
        output_orders=subjects[-1].output_orders,
    )


# Random inputs


def random_cloud(num_points: int, seed: Optional[int] = 0, scale: float = 1.0) -> PointCloud:
    rng = np.random.default_rng(seed)
    return PointCloud(positions=scale * rng.standard_normal((num_points, 3)))


def random_features(channels: Mapping[int, int], num_points: int, seed: Optional[int] = 0) -> Features:
    rng = np.random.default_rng(seed)
    return {l: rng.standard_normal((num_points, c, 2 * l + 1)) for l, c in sorted(channels.items())}


# Output transforms


def _unit_rms(outputs: Features) -> Dict[int, float]:
    scales = {}
    for l, value in outputs.items():
        rms = float(np.sqrt(np.mean(value**2))) if value.size else 0.0
        scales[l] = rms if rms > _TINY_RMS else 1.0
    return scales


def _rotated_outputs(kind: OutputKind, outputs: Features, rotation: Rotation) -> Features:
    if kind == OutputKind.POSITION:
        return {l: rotation.apply(value) for l, value in outputs.items()}
    return rotate_features(outputs, rotation)


def _residuals(
    subject: Subject, trial: int, got: Features, expected: Features, scales: Dict[int, float]
) -> List[ResidualRecord]:
    if set(got) != set(expected):
        raise OrderMismatchError(f"{subject.name}: output orders changed from {sorted(expected)} to {sorted(got)}")
    records = []
    for l in sorted(expected):
        if got[l].shape != expected[l].shape:
            raise OrderMismatchError(f"{subject.name}: order {l} output changed shape")
        residual = float(np.max(np.abs(got[l] - expected[l]))) / scales[l] if got[l].size else 0.0
        records.append(ResidualRecord(layer=subject.name, order=l, trial=trial, residual=residual))
    return records


def _report(family: TransformFamily, subject: Subject, tol: float, residuals: List[ResidualRecord]) -> EquivarianceReport:
    report = EquivarianceReport(family=family, subject=subject.name, tolerance=tol, residuals=residuals)
    log = logger.info if report.passed else logger.warning
    log(
        f"{family.value} check of {subject.name}: max residual {report.max_residual:.3e} "
        f"(tol {tol:.1e}) {'passed' if report.passed else 'FAILED'}",
        extra={
            "context": {
                "family": family.value,
                "subject": subject.name,
                "max_residual": report.max_residual,
                "tolerance": tol,
                "passed": report.passed,
            }
        },
    )
    return report


# Checks


def rotation_residuals(
    subject: Subject, cloud: PointCloud, features: Features, rotation: Rotation, trial: int = 0,
    baseline: Optional[Features] = None,
) -> List[ResidualRecord]:
    """Residuals of one rotation: f(R x, D v) against D f(x, v)."""
    baseline = subject(cloud, features) if baseline is None else baseline
    got = subject(cloud.rotated(rotation), rotate_features(features, rotation))
    expected = _rotated_outputs(subject.output, baseline, rotation)
    return _residuals(subject, trial, got, expected, _unit_rms(baseline))


def check_rotation(
    subject: Subject,
    cloud: PointCloud,
    features: Features,
    trials: int = DEFAULT_TRIALS,
    tol: float = ROTATION_TOLERANCE,
    seed: Optional[int] = 0,
    rotations: Optional[Sequence[Rotation]] = None,
) -> EquivarianceReport:
    """
    Rotate positions by R(g) and every input order by D^(l)(g), run the
    subject, and compare with the D-transformed baseline outputs.

    Raises:
        OrderMismatchError: If the subject emits an undeclared order
    """
    baseline = subject(cloud, features)
    rotations = list(rotations) if rotations is not None else random_rotations(trials, seed)
    residuals: List[ResidualRecord] = []
    for trial, rotation in enumerate(rotations):
        residuals.extend(rotation_residuals(subject, cloud, features, rotation, trial, baseline))
    return _report(TransformFamily.ROTATION, subject, tol, residuals)


def check_translation(
    subject: Subject,
    cloud: PointCloud,
    features: Features,
    trials: int = DEFAULT_TRIALS,
    tol: float = TRANSLATION_TOLERANCE,
    seed: Optional[int] = 0,
    shifts: Optional[Sequence[np.ndarray]] = None,
    scale: float = 1.0,
) -> EquivarianceReport:
    """
    Shift every position by t. Feature outputs must not change; position
    outputs must move by exactly t.
    """
    baseline = subject(cloud, features)
    scales = _unit_rms(baseline)
    if shifts is None:
        rng = np.random.default_rng(seed)
        shifts = [scale * rng.standard_normal(3) for _ in range(trials)]
    residuals: List[ResidualRecord] = []
    for trial, shift in enumerate(shifts):
        shift = np.asarray(shift, dtype=np.float64)
        got = subject(cloud.translated(shift), features)
        if subject.output == OutputKind.POSITION:
            expected = {l: value + shift for l, value in baseline.items()}
        else:
            expected = baseline
        residuals.extend(_residuals(subject, trial, got, expected, scales))
    return _report(TransformFamily.TRANSLATION, subject, tol, residuals)


def check_permutation(
    subject: Subject,
    cloud: PointCloud,
    features: Features,
    trials: int = DEFAULT_TRIALS,
    tol: float = PERMUTATION_TOLERANCE,
    seed: Optional[int] = 0,
    permutations: Optional[Sequence[np.ndarray]] = None,
) -> EquivarianceReport:
    """
    Reorder the points (positions and per-point features together).
    Per-point outputs must be reordered identically; pooled and position
    outputs must not change.
    """
    baseline = subject(cloud, features)
    scales = _unit_rms(baseline)
    if permutations is None:
        rng = np.random.default_rng(seed)
        permutations = [rng.permutation(cloud.num_points) for _ in range(trials)]
    residuals: List[ResidualRecord] = []
    for trial, order in enumerate(permutations):
        order = np.asarray(order)
        got = subject(cloud.permuted(order), {l: value[order] for l, value in features.items()})
        if subject.output == OutputKind.PER_POINT:
            expected = {l: value[order] for l, value in baseline.items()}
        else:
            expected = baseline
        residuals.extend(_residuals(subject, trial, got, expected, scales))
    return _report(TransformFamily.PERMUTATION, subject, tol, residuals)


def check_composition(
    subjects: Sequence[Subject],
    cloud: PointCloud,
    features: Features,
    trials: int = DEFAULT_TRIALS,
    tol: float = ROTATION_TOLERANCE,
    seed: Optional[int] = 0,
) -> EquivarianceReport:
    """
    Rotation check of a stack, layer by layer and end to end.

    Each stage is checked at the input it actually receives inside the
    stack. The report holds every stage's residuals plus the composite's;
    a composite residual above the sum of its stage residuals (plus tol)
    is recorded as a violation of the composition bound.
    """
    if len(subjects) < 2:
        raise ValueError("composition needs at least two subjects")
    composite = compose_subjects(subjects, name="composite")
    rotations = random_rotations(trials, seed)

    stage_inputs = [features]
    for subject in subjects[:-1]:
        stage_inputs.append(subject(cloud, stage_inputs[-1]))

    residuals: List[ResidualRecord] = []
    per_stage_bound = np.zeros(len(rotations))
    for subject, stage_features in zip(subjects, stage_inputs):
        baseline = subject(cloud, stage_features)
        for trial, rotation in enumerate(rotations):
            records = rotation_residuals(subject, cloud, stage_features, rotation, trial, baseline)
            residuals.extend(records)
            per_stage_bound[trial] += max(r.residual for r in records)

    baseline = composite(cloud, features)
    for trial, rotation in enumerate(rotations):
        records = rotation_residuals(composite, cloud, features, rotation, trial, baseline)
        residuals.extend(records)
        worst = max(r.residual for r in records)
        excess = worst - per_stage_bound[trial] - tol
        if excess > 0:
            logger.warning(f"composite residual {worst:.3e} exceeds the stage bound {per_stage_bound[trial]:.3e}")
            residuals.append(ResidualRecord(layer="composition-bound", order=0, trial=trial, residual=excess))
    return _report(TransformFamily.COMPOSITION, composite, tol, residuals)


def check_group_composition(
    subject: Subject,
    cloud: PointCloud,
    features: Features,
    trials: int = DEFAULT_TRIALS,
    tol: float = ROTATION_TOLERANCE,
    seed: Optional[int] = 0,
) -> EquivarianceReport:
    """
    Residual of g h stays within residual(g) + residual(h) + tol for random
    pairs (g, h). Records the three residuals and any excess.
    """
    baseline = subject(cloud, features)
    rotations = random_rotations(2 * trials, seed)
    residuals: List[ResidualRecord] = []
    for trial in range(trials):
        g, h = rotations[2 * trial], rotations[2 * trial + 1]
        worst = {}
        for label, rotation in (("g", g), ("h", h), ("gh", g.compose(h))):
            records = rotation_residuals(subject, cloud, features, rotation, trial, baseline)
            worst[label] = max(r.residual for r in records)
            residuals.extend(r.model_copy(update={"layer": f"{subject.name}:{label}"}) for r in records)
        excess = worst["gh"] - worst["g"] - worst["h"] - tol
        if excess > 0:
            residuals.append(ResidualRecord(layer=f"{subject.name}:excess", order=0, trial=trial, residual=excess))
    return _report(TransformFamily.COMPOSITION, subject, tol, residuals)
