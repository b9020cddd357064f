from .config import Settings, get_settings, RunConfig, load_run_config, config_hash
from .logging import setup_logging

__all__ = [
    "Settings",
    "get_settings",
    "RunConfig",
    "load_run_config",
    "config_hash",
    "setup_logging",
]
