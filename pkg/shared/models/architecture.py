from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing_extensions import Annotated

ARCHITECTURE_SCHEMA = "tfn.architecture/1"


class RadialConfig(BaseModel):
    """Gaussian basis and hidden width of a radial network."""

    count: int = Field(default=30, ge=1)
    r_min: float = 0.0
    r_max: float = 2.0
    hidden: int = Field(default=16, ge=1)
    # Hard distance cutoff; None means every pair interacts.
    cutoff: Optional[float] = Field(default=None, gt=0.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_range(self) -> "RadialConfig":
        if self.r_max <= self.r_min:
            raise ValueError(f"r_max ({self.r_max}) must exceed r_min ({self.r_min})")
        return self

    @property
    def spacing(self) -> float:
        """Distance between neighbouring Gaussian centers."""
        if self.count == 1:
            return self.r_max - self.r_min
        return (self.r_max - self.r_min) / (self.count - 1)

    @property
    def variance(self) -> float:
        """Shared Gaussian variance: half the center spacing."""
        return 0.5 * self.spacing


class FilterSpec(BaseModel):
    """One convolution path: input order, filter order, output order and width."""

    l_i: int = Field(ge=0)
    l_f: int = Field(ge=0)
    l_o: int = Field(ge=0)
    channels: int = Field(ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_selection_rule(self) -> "FilterSpec":
        if not abs(self.l_i - self.l_f) <= self.l_o <= self.l_i + self.l_f:
            raise ValueError(
                f"l_o={self.l_o} is not reachable from l_i={self.l_i}, l_f={self.l_f}"
            )
        return self

    @property
    def radial_key(self) -> str:
        """Name of the radial function shared by all paths with this (l_f, l_i)."""
        return f"lf{self.l_f}_li{self.l_i}"


class SelfInteractionRecord(BaseModel):
    kind: Literal["self_interaction"] = "self_interaction"
    channels_in: Dict[int, int]
    channels_out: Dict[int, int]
    bias: bool = True

    @model_validator(mode="after")
    def check_orders(self) -> "SelfInteractionRecord":
        if set(self.channels_in) != set(self.channels_out):
            raise ValueError("self-interaction must map the same set of orders")
        return self


class ConvolutionRecord(BaseModel):
    kind: Literal["convolution"] = "convolution"
    paths: List[FilterSpec] = Field(min_length=1)
    radial: RadialConfig = Field(default_factory=RadialConfig)


class NonlinearityRecord(BaseModel):
    kind: Literal["nonlinearity"] = "nonlinearity"
    channels: Dict[int, int]
    # Per-order activation override; missing orders use shifted_softplus.
    activations: Dict[int, str] = Field(default_factory=dict)


class SelectOrdersRecord(BaseModel):
    kind: Literal["select_orders"] = "select_orders"
    orders: List[int] = Field(min_length=1)


class GlobalPoolRecord(BaseModel):
    kind: Literal["global_pool"] = "global_pool"


class MDependentSelfInteractionRecord(BaseModel):
    """Deliberately broken self-interaction whose weights vary with m."""

    kind: Literal["m_dependent_self_interaction"] = "m_dependent_self_interaction"
    channels: Dict[int, int]


class PositionGateRecord(BaseModel):
    """Deliberately broken gate reading absolute positions."""

    kind: Literal["position_gate"] = "position_gate"


class IndexGateRecord(BaseModel):
    """Deliberately broken gate reading the point index."""

    kind: Literal["index_gate"] = "index_gate"


LayerRecord = Annotated[
    Union[
        SelfInteractionRecord,
        ConvolutionRecord,
        NonlinearityRecord,
        SelectOrdersRecord,
        GlobalPoolRecord,
        MDependentSelfInteractionRecord,
        PositionGateRecord,
        IndexGateRecord,
    ],
    Field(discriminator="kind"),
]


class Architecture(BaseModel):
    """Ordered list of layer records describing a tensor field network."""

    schema_id: str = Field(default=ARCHITECTURE_SCHEMA, alias="schema")
    name: str
    task: Optional[str] = None
    l_max: int = Field(default=2, ge=0)
    input_channels: Dict[int, int]
    layers: List[LayerRecord] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode="after")
    def check_orders(self) -> "Architecture":
        for record in self.layers:
            if isinstance(record, ConvolutionRecord):
                for path in record.paths:
                    if max(path.l_i, path.l_f, path.l_o) > self.l_max:
                        raise ValueError(
                            f"path {path.l_i}->{path.l_o} via l_f={path.l_f} exceeds l_max={self.l_max}"
                        )
        return self
