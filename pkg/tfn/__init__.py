"""Tensor field networks: rotation-, translation- and permutation-equivariant networks on 3D point clouds."""

__version__ = "0.1.0"
