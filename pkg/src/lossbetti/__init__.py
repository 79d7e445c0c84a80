"""Pfaffian-format Betti bounds for neural-network loss landscapes, and tools
to measure the actual Betti numbers of tiny-network sublevel sets."""
from .bounds import BoundResult, appendix_explicit_bound, regime_summary, zell_bound
from .pfaffian import (
    ACTIVATIONS,
    Architecture,
    DependenceCase,
    LossSpec,
    PfaffianFormat,
    apply_l2,
    apply_skip_connections,
    corollary_published_format,
    derivative_degree,
    get_activation,
    loss_format_bce,
    loss_format_mse,
    total_params,
)

__version__ = "0.1.0"
