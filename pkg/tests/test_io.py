import pandas as pd
import pytest
from pydantic import ValidationError

from shared.models.sample import LabeledSample, MissingPointTarget
from shared.utils.io import read_csv, read_json, read_jsonl, write_csv, write_json, write_jsonl
from tfn.so3 import clebsch_gordan_table
from tfn.tasks import gen_gravity, gen_missing_point


def test_jsonl_round_trip(tmp_path):
    samples = [gen_gravity(0, i) for i in range(3)] + gen_missing_point(count=2)
    path = tmp_path / "nested" / "data.jsonl"
    assert write_jsonl(path, samples) == 5
    restored = read_jsonl(path, LabeledSample)
    assert restored == samples
    assert isinstance(restored[-1].target, MissingPointTarget)
    assert '"schema":"tfn.dataset/1"' in path.read_text().splitlines()[0]


def test_csv_header_and_round_trip(tmp_path):
    frame = pd.DataFrame({"epoch": [0, 1], "loss": [0.5, 0.25]})
    path = write_csv(tmp_path / "metrics.csv", frame, config_hash="abc123", schema="tfn.metrics/1")
    assert path.read_text().splitlines()[0] == "# config_hash=abc123 schema=tfn.metrics/1"
    pd.testing.assert_frame_equal(read_csv(path), frame)


def test_json_record_round_trip(tmp_path):
    dump = clebsch_gordan_table(1).dump()
    path = write_json(tmp_path / "cg.json", dump)
    assert read_json(path, type(dump)) == dump


@pytest.mark.parametrize(
    "record",
    [
        {"task": "tetris", "seed": 0, "positions": [[0, 0, 0]], "target": 9},
        {"task": "gravity", "seed": 0, "positions": [[0, 0, 0]], "target": [[0, 0, 0]]},
        {"task": "inertia", "seed": 0, "positions": [[0, 0, 0]], "masses": [1.0], "target": [[0, 0, 0]] * 3},
        {"task": "tetris", "seed": 0, "positions": [[0, 0]], "target": 1},
        {"task": "tetris", "seed": 0, "positions": [[0, 0, float("nan")]], "target": 1},
    ],
)
def test_invalid_samples_are_rejected(record):
    with pytest.raises(ValidationError):
        LabeledSample.model_validate(record)
