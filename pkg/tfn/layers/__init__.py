from .geometry import PairGeometry, PointCloud
from .features import FeatureMap, concat_features, global_pool, select_orders
from .base import LAYER_REGISTRY, Layer, layer_from_record, register_layer
from .radial import RadialNet, gaussian_basis, gaussian_centers, radial_eval
from .convolution import Convolution, admissible_outputs, convolve_path, filter_eval, point_convolution
from .self_interaction import SelfInteraction, self_interaction
from .nonlinearity import Nonlinearity, norm_nonlinearity
from .pooling import GlobalPool, SelectOrders
from .mutations import IndexGate, MDependentSelfInteraction, PositionGate
from .vote import displacements_from_features, vote_aggregate
from .model import TensorFieldNetwork

__all__ = [
    "PairGeometry",
    "PointCloud",
    "FeatureMap",
    "concat_features",
    "global_pool",
    "select_orders",
    "LAYER_REGISTRY",
    "Layer",
    "layer_from_record",
    "register_layer",
    "RadialNet",
    "gaussian_basis",
    "gaussian_centers",
    "radial_eval",
    "Convolution",
    "admissible_outputs",
    "convolve_path",
    "filter_eval",
    "point_convolution",
    "SelfInteraction",
    "self_interaction",
    "Nonlinearity",
    "norm_nonlinearity",
    "GlobalPool",
    "SelectOrders",
    "IndexGate",
    "MDependentSelfInteraction",
    "PositionGate",
    "displacements_from_features",
    "vote_aggregate",
    "TensorFieldNetwork",
]
