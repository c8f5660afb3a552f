"""Lattice Boltzmann solver (D2Q9/D3Q27, BGK and entropic collision)."""

from .stencil import D2Q9, D3Q27, Stencil, stencil_for_dim
from .core import (
    apply_bounce_back,
    apply_equilibrium_boundary,
    collide_bgk,
    collide_kbc,
    equilibrium,
    kbc_split,
    moments,
    stream,
)
from .diagnostics import enstrophy, save_snapshot_csv, save_velocity_pgm, velocity_magnitude
from .simulation import (
    FlowFeatures,
    SimConfig,
    lattice_units,
    relaxation_beta,
    run_simulation,
)

__all__ = [
    "D2Q9",
    "D3Q27",
    "FlowFeatures",
    "SimConfig",
    "Stencil",
    "apply_bounce_back",
    "apply_equilibrium_boundary",
    "collide_bgk",
    "collide_kbc",
    "enstrophy",
    "equilibrium",
    "kbc_split",
    "lattice_units",
    "moments",
    "relaxation_beta",
    "run_simulation",
    "save_snapshot_csv",
    "save_velocity_pgm",
    "stencil_for_dim",
    "stream",
    "velocity_magnitude",
]
