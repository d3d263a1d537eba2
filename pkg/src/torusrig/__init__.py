"""Generic rigidity of periodic body-bar frameworks on the fixed 3-torus.

Two independent routes decide minimal rigidity: gain-sparsity counts on the
orbit graph (``sparsity``) and the generic rank of the periodic rigidity
matrix of the induced bar-joint framework (``rigidity``).
"""

from __future__ import annotations

from .constructions import (
    PinchSpec,
    ReductionTrace,
    apply_pinch,
    random_tight_graph,
    reduce_to_seed,
    replay_trace,
    split_off,
    validate_pinch,
)
from .gain_graph import Edge, Gain, GainGraph, gain_space_rank
from .rigidity import BarJointGraph, generic_rank, induce_bar_joint
from .sparsity import check_sparsity, deficiency, is_tight

__version__ = "0.1.0"

__all__ = [
    "BarJointGraph",
    "Edge",
    "Gain",
    "GainGraph",
    "PinchSpec",
    "ReductionTrace",
    "apply_pinch",
    "check_sparsity",
    "deficiency",
    "gain_space_rank",
    "generic_rank",
    "induce_bar_joint",
    "is_tight",
    "random_tight_graph",
    "reduce_to_seed",
    "replay_trace",
    "split_off",
    "validate_pinch",
]
