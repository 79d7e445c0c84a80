"""Sublevel-set topology of sampled loss landscapes."""
from .cubical import CubicalComplex, sublevel_complex
from .homology import BettiVector, betti, betti_fast2d, betti_gf2, sweep_betti
from .kernels import BACKEND
from .slices import (
    ParameterSlice,
    ScalarField,
    default_base_point,
    default_thresholds,
    read_field,
    sample_field,
    write_field,
)

__all__ = [
    "BACKEND", "BettiVector", "CubicalComplex", "ParameterSlice", "ScalarField",
    "betti", "betti_fast2d", "betti_gf2", "default_base_point", "default_thresholds",
    "read_field", "sample_field", "sublevel_complex", "sweep_betti", "write_field",
]
