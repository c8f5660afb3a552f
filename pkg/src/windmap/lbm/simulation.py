"""Channel-flow simulation driver and unit conversion.

The domain is a channel: equilibrium inlet/outlet at the x extremes,
periodic in y (and z), fullway bounce-back on the obstacle.  Flow features
are sampled after a warmup phase: the running maximum of |u| over fluid
cells (reported as a fraction of the inlet speed) and the time average of
the mean enstrophy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import NonPositiveDensity, SimulationDiverged, UnstableViscosity, WindmapError
from ..geometry import ObstacleMask, floor_area
from . import kernels
from .core import equilibrium
from .diagnostics import enstrophy
from .stencil import CS2, stencil_for_dim

SOLVER_VERSION = "lbm-1"
BETA_LIMIT = 0.999
INLET_CLEARANCE = 2  # obstacle-free columns required next to inlet/outlet


class Timeout(WindmapError):
    """Requested run exceeds the caller-imposed step budget."""


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical setup of one channel simulation."""

    nx: int
    ny: int
    nz: int | None = None
    reynolds: float = 300.0
    mach: float = 0.075
    char_length: float = 20.0
    t_max: float = 10.0
    t_warm: float = 4.0
    collision: str = "kbc"
    init_perturbation: float = 1e-3
    perturbation_seed: int = 0

    def __post_init__(self):
        if self.reynolds <= 0:
            raise ValueError("Reynolds number must be positive")
        if not 0 < self.mach < 0.3:
            raise ValueError("Mach number must be in (0, 0.3)")
        if self.t_warm >= self.t_max:
            raise ValueError("warmup must end before t_max")
        if self.collision not in ("bgk", "kbc"):
            raise ValueError("collision must be 'bgk' or 'kbc'")

    @property
    def dim(self) -> int:
        return 2 if self.nz is None else 3

    @property
    def shape(self) -> tuple:
        return (self.nx, self.ny) if self.nz is None else (self.nx, self.ny, self.nz)

    def with_nz(self, nz: int | None) -> "SimConfig":
        return replace(self, nz=nz)

    def to_dict(self) -> dict:
        return {
            "nx": self.nx,
            "ny": self.ny,
            "nz": self.nz,
            "reynolds": self.reynolds,
            "mach": self.mach,
            "char_length": self.char_length,
            "t_max": self.t_max,
            "t_warm": self.t_warm,
            "collision": self.collision,
            "init_perturbation": self.init_perturbation,
            "perturbation_seed": self.perturbation_seed,
        }


@dataclass(frozen=True)
class FlowFeatures:
    """Measured features of one simulation.

    u_max is the sampled maximum flow speed as a fraction of the inlet
    speed; enstrophy_mean is the time-averaged mean squared vorticity in
    lattice units; area the occupied footprint cell count.
    """

    u_max: float
    enstrophy_mean: float
    area: float
    dim: str

    def to_dict(self) -> dict:
        return {
            "u_max": self.u_max,
            "enstrophy_mean": self.enstrophy_mean,
            "area": self.area,
            "dim": self.dim,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlowFeatures":
        return cls(
            u_max=float(d["u_max"]),
            enstrophy_mean=float(d["enstrophy_mean"]),
            area=float(d["area"]),
            dim=str(d["dim"]),
        )


def relaxation_beta(nu: float) -> float:
    """Relaxation parameter from kinematic viscosity: 1/(2(nu/cs^2 + 1/2))."""
    return 1.0 / (2.0 * (nu / CS2 + 0.5))


def lattice_units(cfg: SimConfig):
    """Derive lattice-unit quantities from the physical configuration.

    Returns (nu, u_in, steps_total, steps_warm).  One convective time unit
    is char_length / u_in steps.
    """
    u_in = cfg.mach * math.sqrt(CS2)
    nu = u_in * cfg.char_length / cfg.reynolds
    steps_per_unit = cfg.char_length / u_in
    steps_total = round(cfg.t_max * steps_per_unit)
    steps_warm = round(cfg.t_warm * steps_per_unit)
    beta = relaxation_beta(nu)
    if beta > BETA_LIMIT:
        raise UnstableViscosity(f"beta={beta:.6f} too close to the stability limit")
    return nu, u_in, steps_total, steps_warm


def sample_interval(cfg: SimConfig) -> int:
    """Steps between feature samples: ten samples per convective time."""
    _, u_in, _, _ = lattice_units(cfg)
    return max(1, round(cfg.char_length / (10.0 * u_in)))


def _initial_velocity(cfg: SimConfig, u_in: float, shape) -> np.ndarray:
    """Uniform inlet velocity plus a small seeded perturbation.

    A perfectly uniform start keeps extruded 3D flow exactly z-invariant
    (and symmetric shapes shed nothing), so a tiny deterministic
    perturbation seeds the physical instabilities.
    """
    d = len(shape)
    u = np.zeros((d,) + tuple(shape))
    u[0] = u_in
    if cfg.init_perturbation > 0:
        rng = np.random.Generator(np.random.PCG64(cfg.perturbation_seed))
        u += cfg.init_perturbation * u_in * rng.standard_normal(u.shape)
    return u


def _check_clearance(solid: np.ndarray) -> None:
    occupied_x = np.where(solid.any(axis=tuple(range(1, solid.ndim))))[0]
    if occupied_x.size == 0:
        return
    nx = solid.shape[0]
    if occupied_x.min() < INLET_CLEARANCE or occupied_x.max() >= nx - INLET_CLEARANCE:
        raise ValueError("obstacle must keep clearance from inlet and outlet")


def run_simulation(cfg: SimConfig, mask: ObstacleMask, step_budget: int | None = None) -> FlowFeatures:
    """March the channel flow and extract features; deterministic per (cfg, mask).

    Raises SimulationDiverged on NaN or non-positive densities (the caller
    assigns worst fitness) and Timeout when the configured duration exceeds
    ``step_budget``.
    """
    if mask.dims != cfg.shape:
        raise ValueError(f"mask dims {mask.dims} do not match config {cfg.shape}")
    stencil = stencil_for_dim(cfg.dim)
    nu, u_in, steps_total, steps_warm = lattice_units(cfg)
    if step_budget is not None and steps_total > step_budget:
        raise Timeout(f"{steps_total} steps exceed budget {step_budget}")
    beta = relaxation_beta(nu)
    interval = sample_interval(cfg)

    solid = mask.cells
    _check_clearance(solid)
    fluid = ~solid
    solid_flat = solid.reshape(-1)

    u0 = _initial_velocity(cfg, u_in, cfg.shape)
    f = np.ascontiguousarray(equilibrium(np.ones(cfg.shape), u0, stencil))
    f_flat = f.reshape(stencil.q, -1)
    buf = np.empty_like(f_flat)

    src = kernels.build_stream_indices(cfg.shape, stencil)
    workspace = kernels.Workspace(stencil)
    solid_idx = np.flatnonzero(solid_flat)

    inlet_u = np.zeros(stencil.d)
    inlet_u[0] = u_in
    feq_boundary = np.ascontiguousarray(equilibrium(np.float64(1.0), inlet_u, stencil))

    c_t = stencil.c_float().T.copy()
    spatial = tuple(cfg.shape)
    ny_slab = int(np.prod(spatial[1:]))

    u_max_lattice = 0.0
    enstrophy_samples = []

    for step in range(1, steps_total + 1):
        if cfg.collision == "kbc":
            kernels.collide_kbc_inplace(f_flat, stencil, beta, solid_flat, workspace)
        else:
            kernels.collide_bgk_inplace(f_flat, stencil, beta, solid_flat, workspace)
        kernels.stream_fix(f_flat, buf, src, solid_idx, stencil.opposite, ny_slab, feq_boundary)
        f_flat, buf = buf, f_flat

        if step > steps_warm and step % interval == 0:
            rho = f_flat.sum(axis=0)
            if not np.all(np.isfinite(rho)) or np.any(rho <= 0.0):
                raise SimulationDiverged(f"density blew up at step {step}")
            u = (c_t @ f_flat) / rho
            u_field = u.reshape((stencil.d,) + spatial)
            speed = np.sqrt((u_field * u_field).sum(axis=0))
            u_max_lattice = max(u_max_lattice, float(speed[fluid].max()))
            enstrophy_samples.append(enstrophy(u_field, fluid))

    if not enstrophy_samples:
        raise SimulationDiverged("no samples collected; t_warm leaves no sampling window")
    area = floor_area(ObstacleMask(solid[:, :, 0] if solid.ndim == 3 else solid, offset=mask.offset))
    return FlowFeatures(
        u_max=u_max_lattice / u_in,
        enstrophy_mean=float(np.mean(enstrophy_samples)),
        area=area,
        dim="3d" if cfg.dim == 3 else "2d",
    )
