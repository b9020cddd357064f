"""
Artifact readers and writers: JSON-lines datasets, JSON records, CSV tables.

CSV files start with a comment header carrying the config hash and schema;
pandas skips it on read via ``comment="#"``.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Type, TypeVar, Union

import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)
PathLike = Union[str, Path]


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_jsonl(path: PathLike, records: Iterable[BaseModel]) -> int:
    """
    Write one JSON object per line.

    Returns:
        Number of records written
    """
    path = _prepare(path)
    count = 0
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(record.model_dump_json(by_alias=True))
            f.write("\n")
            count += 1
    logger.info(f"Wrote {count} records to {path}")
    return count


def read_jsonl(path: PathLike, model: Type[ModelT]) -> List[ModelT]:
    """Read a JSON-lines file into a list of validated records."""
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(model.model_validate_json(line))
    return records


def write_json(path: PathLike, record: BaseModel) -> Path:
    """Write a single record as indented JSON."""
    path = _prepare(path)
    path.write_text(record.model_dump_json(by_alias=True, indent=2), encoding="utf-8")
    logger.info(f"Wrote {type(record).__name__} to {path}")
    return path


def read_json(path: PathLike, model: Type[ModelT]) -> ModelT:
    """Read a single JSON record."""
    return model.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_csv(path: PathLike, frame: pd.DataFrame, config_hash: str, schema: str) -> Path:
    """Write a DataFrame as CSV after a '# config_hash=... schema=...' header line."""
    path = _prepare(path)
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(f"# config_hash={config_hash} schema={schema}\n")
        frame.to_csv(f, index=False, float_format="%.17g")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    """Read a CSV written by write_csv."""
    return pd.read_csv(path, comment="#")
