from .sample import LabeledSample, MissingPointTarget, TaskKind
from .architecture import (
    Architecture,
    ConvolutionRecord,
    FilterSpec,
    GlobalPoolRecord,
    LayerRecord,
    MDependentSelfInteractionRecord,
    NonlinearityRecord,
    IndexGateRecord,
    PositionGateRecord,
    RadialConfig,
    SelectOrdersRecord,
    SelfInteractionRecord,
)
from .checkpoint import Checkpoint, ParameterRecord
from .report import EquivarianceReport, ReportBundle, ResidualRecord, TransformFamily
from .tables import CGDump, CGRecord

__all__ = [
    "LabeledSample",
    "MissingPointTarget",
    "TaskKind",
    "Architecture",
    "ConvolutionRecord",
    "FilterSpec",
    "GlobalPoolRecord",
    "LayerRecord",
    "MDependentSelfInteractionRecord",
    "NonlinearityRecord",
    "IndexGateRecord",
    "PositionGateRecord",
    "RadialConfig",
    "SelectOrdersRecord",
    "SelfInteractionRecord",
    "Checkpoint",
    "ParameterRecord",
    "EquivarianceReport",
    "ReportBundle",
    "ResidualRecord",
    "TransformFamily",
    "CGDump",
    "CGRecord",
]
