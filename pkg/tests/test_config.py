import json
import logging

import pytest

from shared.models.sample import TaskKind
from shared.utils.config import TASK_DEFAULTS, RunConfig, Settings, config_hash, load_run_config, parse_run_config
from shared.utils.errors import ConfigError
from shared.utils.logging import JSONFormatter, setup_logging


@pytest.mark.parametrize("kind", list(TaskKind))
def test_task_defaults_apply(kind):
    config = RunConfig(task=kind)
    for key, value in TASK_DEFAULTS[kind].items():
        assert getattr(config, key) == value


def test_explicit_values_beat_task_defaults():
    config = RunConfig(task="gravity", epochs=3, lr=0.5)
    assert config.epochs == 3
    assert config.lr == 0.5
    assert config.radial_max == 6.0


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigError):
        parse_run_config({"task": "tetris", "learning_rate": 0.1})


def test_unknown_task_is_rejected():
    with pytest.raises(ConfigError):
        parse_run_config({"task": "pentris"})


def test_radial_range_must_be_increasing():
    with pytest.raises(ConfigError):
        parse_run_config({"task": "gravity", "radial_min": 2.0, "radial_max": 1.0})


def test_inertia_needs_second_order_features():
    with pytest.raises(ConfigError):
        parse_run_config({"task": "inertia", "l_max": 1})
    assert parse_run_config({"task": "tetris", "l_max": 1}).l_max == 1


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# tiny gravity run\ntask=gravity\nEPOCHS=2\nlr=0.01\n")
    config = load_run_config(path, seed=7)
    assert config.task == TaskKind.GRAVITY
    assert config.epochs == 2
    assert config.lr == 0.01
    assert config.seed == 7


def test_flag_overrides_skip_unset_values(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("task=tetris\nseed=4\n")
    assert load_run_config(path, seed=None).seed == 4


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.cfg")


def test_config_hash_is_stable():
    a = RunConfig(task="gravity")
    assert config_hash(a) == config_hash(RunConfig(task="gravity"))
    assert config_hash(a) != config_hash(RunConfig(task="gravity", seed=1))
    assert config_hash({"b": 1, "a": 2}) == config_hash({"a": 2, "b": 1})
    assert len(config_hash(a)) == 16


def test_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("TFN_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("TFN_OUTPUT_DIR", "/tmp/tfn-runs")
    settings = Settings()
    assert settings.log_level == "DEBUG"
    assert settings.output_dir == "/tmp/tfn-runs"


def test_json_log_lines_carry_context():
    record = logging.LogRecord("tfn.test", logging.INFO, __file__, 1, "trained %s", ("gravity",), None)
    record.context = {"epoch": 3}
    payload = json.loads(JSONFormatter().format(record))
    assert payload["message"] == "trained gravity"
    assert payload["level"] == "INFO"
    assert payload["epoch"] == 3


def test_setup_logging_writes_json_file(tmp_path):
    log_file = tmp_path / "run.log"
    logger = setup_logging("tfn.test_logging", level="DEBUG", log_file=str(log_file))
    logger.debug("hello")
    for handler in logger.handlers:
        handler.flush()
    assert json.loads(log_file.read_text().splitlines()[0])["message"] == "hello"
    assert not logger.propagate


def test_context_never_overrides_the_record_fields():
    record = logging.LogRecord("tfn.test", logging.INFO, __file__, 1, "checked", (), None)
    record.context = {"message": "other", "level": "DEBUG", "passed": False}
    payload = json.loads(JSONFormatter().format(record))
    assert payload["message"] == "checked"
    assert payload["level"] == "INFO"
    assert payload["passed"] is False
