from typing import List

from pydantic import BaseModel, Field

CG_SCHEMA = "tfn.cg/1"


class CGRecord(BaseModel):
    """One real Clebsch-Gordan coefficient."""

    l_o: int
    l_f: int
    l_i: int
    m_o: int
    m_f: int
    m_i: int
    value: float


class CGDump(BaseModel):
    """Inspection dump of a Clebsch-Gordan table."""

    schema_id: str = Field(default=CG_SCHEMA, alias="schema")
    config_hash: str = ""
    l_max: int
    records: List[CGRecord] = Field(default_factory=list)

    model_config = {"populate_by_name": True}
