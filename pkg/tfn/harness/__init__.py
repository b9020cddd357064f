from .equivariance import (
    DEFAULT_TRIALS,
    PERMUTATION_TOLERANCE,
    ROTATION_TOLERANCE,
    TRANSLATION_TOLERANCE,
    OutputKind,
    Subject,
    check_composition,
    check_group_composition,
    check_permutation,
    check_rotation,
    check_translation,
    compose_subjects,
    identity_subject,
    layer_subject,
    layer_subjects,
    model_subject,
    random_cloud,
    random_features,
    rotation_residuals,
    task_subject,
)
from .mutations import MUTATIONS, mutate_architecture, mutate_checkpoint, mutate_model

__all__ = [
    "DEFAULT_TRIALS",
    "PERMUTATION_TOLERANCE",
    "ROTATION_TOLERANCE",
    "TRANSLATION_TOLERANCE",
    "OutputKind",
    "Subject",
    "check_composition",
    "check_group_composition",
    "check_permutation",
    "check_rotation",
    "check_translation",
    "compose_subjects",
    "identity_subject",
    "layer_subject",
    "layer_subjects",
    "model_subject",
    "random_cloud",
    "random_features",
    "rotation_residuals",
    "task_subject",
    "MUTATIONS",
    "mutate_architecture",
    "mutate_checkpoint",
    "mutate_model",
]
