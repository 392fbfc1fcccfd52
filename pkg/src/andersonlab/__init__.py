"""Exact-diagonalization laboratory for interacting particles in random lattice potentials."""

__version__ = "0.1.0"

from .errors import AndersonLabError, ConfigError, InfeasibleError, SolverError
from .lattice import Box, CubeSequenceParams, Region, box_distance, boundary_ratio, make_cube_sequence
from .disorder import DisorderSpec, PotentialField, sample_potential, translate_realization
from .oneparticle import SpectrumResult, assemble_one_body, counting_function, diagonalize, empirical_ids
from .interactions import InteractionSpec
from .manybody import (
    Statistics,
    assemble_many_body,
    energy_at_entropy,
    entropy,
    enumerate_basis,
    ground_state_energy,
)

__all__ = [
    "AndersonLabError",
    "ConfigError",
    "InfeasibleError",
    "SolverError",
    "Box",
    "Region",
    "CubeSequenceParams",
    "box_distance",
    "boundary_ratio",
    "make_cube_sequence",
    "DisorderSpec",
    "PotentialField",
    "sample_potential",
    "translate_realization",
    "SpectrumResult",
    "assemble_one_body",
    "counting_function",
    "diagonalize",
    "empirical_ids",
    "InteractionSpec",
    "Statistics",
    "assemble_many_body",
    "energy_at_entropy",
    "entropy",
    "enumerate_basis",
    "ground_state_energy",
]
