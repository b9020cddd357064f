from enum import Enum
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

REPORT_SCHEMA = "tfn.report/1"


class TransformFamily(str, Enum):
    ROTATION = "rotation"
    TRANSLATION = "translation"
    PERMUTATION = "permutation"
    COMPOSITION = "composition"


class ResidualRecord(BaseModel):
    """Max-abs residual of one output order in one random trial."""

    layer: str
    order: int
    trial: int
    residual: float = Field(ge=0.0)


class EquivarianceReport(BaseModel):
    """Residuals of an equivariance check and whether they stay under tolerance."""

    schema_id: str = Field(default=REPORT_SCHEMA, alias="schema")
    family: TransformFamily
    subject: str
    tolerance: float = Field(gt=0.0)
    residuals: List[ResidualRecord] = Field(default_factory=list)

    model_config = ConfigDict(use_enum_values=True, populate_by_name=True)

    @property
    def max_residual(self) -> float:
        if not self.residuals:
            return 0.0
        return float(max(r.residual for r in self.residuals))

    @property
    def mean_residual(self) -> float:
        if not self.residuals:
            return 0.0
        return float(np.mean([r.residual for r in self.residuals]))

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance

    def merge(self, other: "EquivarianceReport") -> "EquivarianceReport":
        """Concatenate residuals of two reports of the same family."""
        if other.family != self.family:
            raise ValueError(f"cannot merge {self.family} report with {other.family}")
        return EquivarianceReport(
            family=self.family,
            subject=self.subject if self.subject == other.subject else f"{self.subject}+{other.subject}",
            tolerance=min(self.tolerance, other.tolerance),
            residuals=self.residuals + other.residuals,
        )

    def summary(self) -> dict:
        """Flat summary used for the JSON report and the console table."""
        return {
            "family": self.family,
            "subject": self.subject,
            "trials": len({r.trial for r in self.residuals}),
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


class ReportBundle(BaseModel):
    """All reports of one check-equivariance run."""

    schema_id: str = Field(default=REPORT_SCHEMA, alias="schema")
    config_hash: str = ""
    subject: str
    reports: List[EquivarianceReport] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)

    @property
    def passed(self) -> bool:
        return all(report.passed for report in self.reports)

    def summary(self) -> List[dict]:
        return [report.summary() for report in self.reports]
