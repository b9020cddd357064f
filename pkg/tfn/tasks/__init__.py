from .base import TASK_REGISTRY, BaseTask, get_task, register_task
from .tetris import (
    MIRROR_PAIR,
    TETRIS_NAMES,
    TETRIS_SHAPES,
    TetrisTask,
    build_tetris_net,
    gen_tetris,
    tetris_mirror_distances,
)
from .gravity import GravityTask, build_gravity_net, gen_gravity, gravity_field
from .inertia import InertiaTask, build_inertia_net, gen_inertia, inertia_tensor, mean_minimum_distance
from .missing_point import MissingPointTask, build_missing_point_net, gen_missing_point, missing_point_toy
from .oracles import fit_scale, gravity_oracle, inertia_oracle, radial_recovery_error
from .training import METRICS_SCHEMA, TrainingResult, train

__all__ = [
    "TASK_REGISTRY",
    "BaseTask",
    "get_task",
    "register_task",
    "MIRROR_PAIR",
    "TETRIS_NAMES",
    "TETRIS_SHAPES",
    "TetrisTask",
    "build_tetris_net",
    "gen_tetris",
    "tetris_mirror_distances",
    "GravityTask",
    "build_gravity_net",
    "gen_gravity",
    "gravity_field",
    "InertiaTask",
    "build_inertia_net",
    "gen_inertia",
    "inertia_tensor",
    "mean_minimum_distance",
    "MissingPointTask",
    "build_missing_point_net",
    "gen_missing_point",
    "missing_point_toy",
    "fit_scale",
    "gravity_oracle",
    "inertia_oracle",
    "radial_recovery_error",
    "METRICS_SCHEMA",
    "TrainingResult",
    "train",
]
