from .rotation import Rotation, random_rotations, rotation_from_axis_angle, sample_random_rotation
from .spherical_harmonics import (
    cartesian_to_sh,
    real_spherical_harmonics,
    sh_equivariance_residual,
    sh_orthonormality_residual,
    sh_to_cartesian,
    sphere_quadrature,
    spherical_harmonics_masked,
)
from .clebsch_gordan import (
    CGTable,
    admissible,
    cg_commutation_residual,
    clebsch_gordan_table,
    complex_clebsch_gordan,
    complex_to_real_basis,
    real_clebsch_gordan,
)
from .wigner import (
    WignerD,
    homomorphism_residual,
    rotate_features,
    wigner_d,
    wigner_d_from_fit,
    wigner_d_matrices,
)
from .symmetric import irreps_from_symmetric, symmetric_from_irreps

__all__ = [
    "Rotation",
    "random_rotations",
    "rotation_from_axis_angle",
    "sample_random_rotation",
    "cartesian_to_sh",
    "real_spherical_harmonics",
    "sh_equivariance_residual",
    "sh_orthonormality_residual",
    "sh_to_cartesian",
    "sphere_quadrature",
    "spherical_harmonics_masked",
    "CGTable",
    "admissible",
    "cg_commutation_residual",
    "clebsch_gordan_table",
    "complex_clebsch_gordan",
    "complex_to_real_basis",
    "real_clebsch_gordan",
    "WignerD",
    "homomorphism_residual",
    "rotate_features",
    "wigner_d",
    "wigner_d_from_fit",
    "wigner_d_matrices",
    "irreps_from_symmetric",
    "symmetric_from_irreps",
]
