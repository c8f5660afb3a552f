"""Reference implementations of the collide-and-stream building blocks.

These numpy versions define the semantics; the fused numba kernels in
``kernels.py`` reproduce them (cross-checked in the test suite) for the hot
simulation loop.  All functions here return new arrays and never mutate
their inputs.

Population arrays are indexed ``f[q, x, y]`` or ``f[q, x, y, z]``; velocity
fields ``u[d, ...]``.
"""

from __future__ import annotations

import numpy as np

from ..errors import NonPositiveDensity
from .stencil import Stencil

GAMMA_FALLBACK_EPS = 1e-14  # entropic denominator underflow threshold


def equilibrium(rho, u, stencil: Stencil) -> np.ndarray:
    """Second-order Maxwell-Boltzmann equilibrium populations.

    ``rho`` is scalar or a field, ``u`` a length-d vector or a (d, ...) field.
    Returns populations shaped (q,) + field shape.
    """
    rho = np.asarray(rho, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if u.shape[0] != stencil.d:
        raise ValueError(f"velocity must have {stencil.d} components")
    cs2 = stencil.cs2
    cu = np.tensordot(stencil.c_float(), u, axes=([1], [0]))  # (q, ...)
    uu = np.sum(u * u, axis=0)
    shape = (stencil.q,) + (1,) * (cu.ndim - 1)
    w = stencil.w.reshape(shape)
    return w * rho * (1.0 + cu / cs2 + cu**2 / (2.0 * cs2**2) - uu / (2.0 * cs2))


def moments(f: np.ndarray, stencil: Stencil):
    """Density and velocity fields from populations.

    Raises NonPositiveDensity if any cell density is <= 0, which signals a
    blown-up simulation; callers abort the evaluation and assign worst
    fitness.
    """
    rho = f.sum(axis=0)
    if np.any(rho <= 0.0) or not np.all(np.isfinite(rho)):
        raise NonPositiveDensity("density must stay positive everywhere")
    momentum = np.tensordot(stencil.c_float(), f, axes=([0], [0]))
    return rho, momentum / rho


def collide_bgk(f: np.ndarray, beta: float, stencil: Stencil, solid=None) -> np.ndarray:
    """Single-relaxation collision: relax toward equilibrium at rate 2*beta."""
    rho, u = moments(f, stencil)
    feq = equilibrium(rho, u, stencil)
    out = f + 2.0 * beta * (feq - f)
    if solid is not None:
        out[:, solid] = f[:, solid]
    return out


def _basis_1d(c: float, u, order: int):
    """Population-space basis factor for one axis and one central-moment order.

    c is the integer velocity component (-1, 0, or 1), u the velocity field
    along that axis.  Together with the other axes, the product of these
    factors times rho lifts a unit central moment back onto populations.
    """
    if order == 0:
        if c == 0:
            return 1.0 - u * u
        return 0.5 * (u * u + c * u)
    if order == 1:
        if c == 0:
            return -2.0 * u
        return 0.5 * c + u
    if order == 2:
        if c == 0:
            return -np.ones_like(u) if isinstance(u, np.ndarray) else -1.0
        return 0.5 * np.ones_like(u) if isinstance(u, np.ndarray) else 0.5

    raise ValueError("order must be 0, 1 or 2")


def _shear_orders(d: int):
    """Central-moment multi-indices of the second-order (shear) block."""
    if d == 2:
        return [(2, 0), (0, 2), (1, 1)]
    return [(2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (1, 0, 1), (0, 1, 1)]


def _central_moment(g: np.ndarray, rho, du, orders) -> np.ndarray:
    """Central moment of populations g for one multi-index, normalized by rho.

    du[d] holds (c_d - u_d) per direction, shape (q,) + field shape.
    """
    term = g.copy()
    for axis, p in enumerate(orders):
        for _ in range(p):
            term = term * du[axis]
    return term.sum(axis=0) / rho


def _lift(moment_values, orders_list, u, stencil: Stencil, rho) -> np.ndarray:
    """Map central moments back to population space (inverse transform)."""
    out = None
    for mom, orders in zip(moment_values, orders_list):
        basis = None
        for q in range(stencil.q):
            row = np.ones_like(np.asarray(u[0], dtype=np.float64))
            for axis, p in enumerate(orders):
                row = row * _basis_1d(int(stencil.c[q, axis]), u[axis], p)
            if basis is None:
                basis = np.empty((stencil.q,) + row.shape)
            basis[q] = row
        contrib = mom[None, ...] * basis
        out = contrib if out is None else out + contrib
    return rho[None, ...] * out


def collide_kbc(
    f: np.ndarray,
    beta: float,
    stencil: Stencil,
    solid=None,
    gamma_override: float | None = None,
    return_gamma: bool = False,
):
    """Entropic multi-relaxation collision.

    The non-equilibrium part is split into a shear part (all second-order
    central moments) relaxed at 2*beta and a higher-order remainder relaxed
    at beta*gamma, with gamma chosen per cell from the entropic estimate

        gamma = 1/beta - (2 - 1/beta) * <ds, dh> / <dh, dh>,

    where <a, b> = sum_i a_i b_i / feq_i.  Cells whose denominator
    underflows fall back to gamma = 2, which reduces the update to the BGK
    operator; forcing ``gamma_override=2`` reproduces BGK everywhere.
    """
    rho, u = moments(f, stencil)
    feq = equilibrium(rho, u, stencil)
    df = f - feq
    du = [stencil.c_float()[:, a].reshape((stencil.q,) + (1,) * rho.ndim) - u[a][None, ...] for a in range(stencil.d)]
    orders_list = _shear_orders(stencil.d)
    mom_values = [_central_moment(df, rho, du, o) for o in orders_list]
    ds = _lift(mom_values, orders_list, u, stencil, rho)
    dh = df - ds
    inv_feq = 1.0 / feq
    sh = (ds * dh * inv_feq).sum(axis=0)
    hh = (dh * dh * inv_feq).sum(axis=0)
    if gamma_override is not None:
        gamma = np.full_like(hh, float(gamma_override))
    else:
        safe = hh >= GAMMA_FALLBACK_EPS
        gamma = np.full_like(hh, 2.0)
        inv_beta = 1.0 / beta
        gamma[safe] = inv_beta - (2.0 - inv_beta) * sh[safe] / hh[safe]
    out = f - beta * (2.0 * ds + gamma[None, ...] * dh)
    if solid is not None:
        out[:, solid] = f[:, solid]
    if return_gamma:
        return out, gamma
    return out


def kbc_split(f: np.ndarray, stencil: Stencil):
    """Full decomposition f = k + s + h in the central-moment basis.

    k carries the conserved moments (density and momentum), s the
    second-order block, h everything else.  The three parts re-sum to f up
    to roundoff because the basis is complete.
    """
    rho, u = moments(f, stencil)
    du = [stencil.c_float()[:, a].reshape((stencil.q,) + (1,) * rho.ndim) - u[a][None, ...] for a in range(stencil.d)]
    all_orders = []
    if stencil.d == 2:
        all_orders = [(p, q) for p in range(3) for q in range(3)]
        k_set = [(0, 0), (1, 0), (0, 1)]
    else:
        all_orders = [(p, q, r) for p in range(3) for q in range(3) for r in range(3)]
        k_set = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    s_set = _shear_orders(stencil.d)
    h_set = [o for o in all_orders if o not in k_set and o not in s_set]

    def part(orders):
        vals = [_central_moment(f, rho, du, o) for o in orders]
        return _lift(vals, orders, u, stencil, rho)

    return part(k_set), part(s_set), part(h_set)


def stream(f: np.ndarray, stencil: Stencil) -> np.ndarray:
    """Advect each population one lattice link, periodic on every edge.

    Edges owned by equilibrium boundaries are simply overwritten by the
    boundary update after streaming, so wrapping them here is harmless.
    """
    out = np.empty_like(f)
    axes = tuple(range(f.ndim - 1))
    for q in range(stencil.q):
        out[q] = np.roll(f[q], shift=tuple(stencil.c[q]), axis=axes)
    return out


def apply_bounce_back(f: np.ndarray, solid: np.ndarray, stencil: Stencil) -> np.ndarray:
    """Fullway bounce-back: reverse every population sitting in a solid cell.

    Populations streamed into the obstacle leave it along the opposite link
    on the next streaming step, realizing a no-slip wall over two steps.
    """
    out = f.copy()
    trapped = f[:, solid]
    out[:, solid] = trapped[stencil.opposite]
    return out


def apply_equilibrium_boundary(f: np.ndarray, region, rho_b: float, u_b, stencil: Stencil) -> np.ndarray:
    """Overwrite all populations in ``region`` with equilibrium(rho_b, u_b).

    ``region`` is any index expression over the spatial axes (boolean mask
    or slices).  Used for inlets and outlets with prescribed macroscopics.
    """
    out = f.copy()
    feq = equilibrium(np.float64(rho_b), np.asarray(u_b, dtype=np.float64), stencil)
    index = (slice(None),) + (region if isinstance(region, tuple) else (region,))
    sel = out[index]
    out[index] = np.broadcast_to(feq.reshape((stencil.q,) + (1,) * (sel.ndim - 1)), sel.shape)
    return out
