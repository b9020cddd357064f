import hashlib
import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from shared.models.sample import TaskKind
from shared.utils.errors import ConfigError


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables (prefix TFN_)."""

    # Logging
    log_level: str = "INFO"
    log_format: str = "console"
    log_file: Optional[str] = None

    # Defaults used when a command runs without a config file
    output_dir: str = "runs"
    l_max: int = 2

    model_config = SettingsConfigDict(
        env_prefix="TFN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Per-task defaults, applied under whatever the config file sets explicitly.
TASK_DEFAULTS: Dict[TaskKind, Dict[str, Any]] = {
    TaskKind.TETRIS: {
        "channels": 4,
        "radial_count": 30,
        "radial_min": 0.0,
        "radial_max": 3.0,
        "radial_hidden": 16,
        "lr": 1e-2,
        "epochs": 400,
        "batch_size": 8,
        "train_count": 8,
        "test_count": 100,
    },
    TaskKind.GRAVITY: {
        "channels": 1,
        "radial_count": 40,
        "radial_min": 0.0,
        "radial_max": 6.0,
        "radial_hidden": 16,
        "lr": 1e-3,
        "epochs": 20,
        "batch_size": 1,
        "train_count": 1000,
        "test_count": 200,
    },
    TaskKind.INERTIA: {
        "channels": 1,
        "radial_count": 30,
        "radial_min": 0.0,
        "radial_max": 2.0,
        "radial_hidden": 16,
        "lr": 1e-3,
        "epochs": 20,
        "batch_size": 1,
        "train_count": 1000,
        "test_count": 200,
    },
    TaskKind.MISSING_POINT: {
        "channels": 8,
        "radial_count": 30,
        "radial_min": 0.0,
        "radial_max": 3.0,
        "radial_hidden": 16,
        "lr": 1e-2,
        "epochs": 600,
        "batch_size": 32,
        "train_count": 32,
        "test_count": 100,
    },
}


class RunConfig(BaseModel):
    """
    Validated configuration of one training / evaluation run.

    Fields left unset fall back to the defaults of the selected task.
    Unknown keys are rejected.
    """

    task: TaskKind
    seed: int = 0
    l_max: int = Field(default=2, ge=0, le=6)

    # Network widths and radial basis
    channels: int = Field(default=4, ge=1)
    radial_count: int = Field(default=30, ge=1)
    radial_min: float = 0.0
    radial_max: float = 2.0
    radial_hidden: int = Field(default=16, ge=1)
    cutoff: Optional[float] = Field(default=None, gt=0.0)

    # Optimizer (Adam)
    lr: float = Field(default=1e-3, gt=0.0)
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    eps: float = Field(default=1e-8, gt=0.0)

    # Schedule and data
    epochs: int = Field(default=20, ge=1)
    batch_size: int = Field(default=1, ge=1)
    train_count: int = Field(default=1000, ge=1)
    test_count: int = Field(default=200, ge=1)

    output_dir: str = "runs"

    model_config = ConfigDict(extra="forbid", use_enum_values=False, frozen=True)

    @model_validator(mode="before")
    @classmethod
    def apply_task_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "task" not in data:
            return data
        try:
            task = TaskKind(data["task"])
        except ValueError:
            return data
        merged = dict(TASK_DEFAULTS[task])
        merged.update({key: value for key, value in data.items() if value not in (None, "")})
        return merged

    @model_validator(mode="after")
    def check_ranges(self) -> "RunConfig":
        if self.radial_max <= self.radial_min:
            raise ValueError(
                f"radial_max ({self.radial_max}) must exceed radial_min ({self.radial_min})"
            )
        if self.task == TaskKind.INERTIA and self.l_max < 2:
            raise ValueError("inertia task needs l_max >= 2 for the 0+2 encoding")
        if self.task != TaskKind.INERTIA and self.l_max < 1:
            raise ValueError(f"{self.task.value} task needs l_max >= 1")
        return self


def load_run_config(path: Union[str, Path], **overrides: Any) -> RunConfig:
    """
    Load a flat key=value config file.

    Args:
        path: Path of the config file
        overrides: Values that take precedence over the file (e.g. from flags)

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: If the file is missing or any key/value is invalid
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")

    values: Dict[str, Any] = {
        key.strip().lower(): value for key, value in dotenv_values(path).items()
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    return parse_run_config(values)


def parse_run_config(values: Dict[str, Any]) -> RunConfig:
    """Validate a dict of config values, converting errors to ConfigError."""
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration: {e}") from e


def config_hash(config: Union[BaseModel, Dict[str, Any]]) -> str:
    """Short, stable hash of a config (first 16 hex digits of SHA-256 over sorted JSON)."""
    if isinstance(config, BaseModel):
        config = config.model_dump(mode="json")
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
