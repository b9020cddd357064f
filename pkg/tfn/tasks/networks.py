"""
Building blocks for the task architectures.

A module is a convolution over a list of (l_i, l_f, l_o) paths, followed by
a self-interaction back to a fixed width and a norm nonlinearity.
"""

from typing import Dict, List, Sequence, Tuple

from shared.models.architecture import (
    ConvolutionRecord,
    FilterSpec,
    NonlinearityRecord,
    RadialConfig,
    SelfInteractionRecord,
)

Path = Tuple[int, int, int]

# Every path with l_i, l_f <= 1 and l_o <= 1.
PATHS_L1: Tuple[Path, ...] = ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1))
# The paths reachable from scalar inputs only.
PATHS_FROM_SCALARS: Tuple[Path, ...] = ((0, 0, 0), (0, 1, 1))


def filter_specs(paths: Sequence[Path], widths: Dict[int, int]) -> List[FilterSpec]:
    """One FilterSpec per path; a path's width is the input width at l_i."""
    return [FilterSpec(l_i=l_i, l_f=l_f, l_o=l_o, channels=widths[l_i]) for l_i, l_f, l_o in paths]


def conv_outputs(specs: Sequence[FilterSpec]) -> Dict[int, int]:
    widths: Dict[int, int] = {}
    for spec in specs:
        widths[spec.l_o] = widths.get(spec.l_o, 0) + spec.channels
    return dict(sorted(widths.items()))


def conv_module(
    paths: Sequence[Path], widths: Dict[int, int], channels: int, radial: RadialConfig
) -> Tuple[list, Dict[int, int]]:
    """
    Records of one convolution -> self-interaction -> nonlinearity module.

    Returns:
        (layer records, output widths)
    """
    specs = filter_specs(paths, widths)
    conv_widths = conv_outputs(specs)
    out = {l: channels for l in conv_widths}
    records = [
        ConvolutionRecord(paths=specs, radial=radial),
        SelfInteractionRecord(channels_in=conv_widths, channels_out=out),
        NonlinearityRecord(channels=out),
    ]
    return records, out
