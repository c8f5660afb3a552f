"""Fused numba kernels for the simulation hot loop.

Populations are handled as a flat (q, n_cells) view; collision runs in
blocks so equilibrium and shear-part scratch rows stay cache resident.
The kernels reproduce the reference operations in ``core.py`` to roundoff
(asserted by the test suite) and are strict IEEE (no fastmath) so runs are
bit-reproducible.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BLOCK = 1024


@njit(cache=True)
def bgk_collide(f, cx, cy, cz, w, beta, solid, rho, ux, uy, uz):
    q_count, n = f.shape
    b = rho.size
    for n0 in range(0, n, b):
        m = min(n0 + b, n) - n0
        for i in range(m):
            rho[i] = 0.0
            ux[i] = 0.0
            uy[i] = 0.0
            uz[i] = 0.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            cqx = cx[q]
            cqy = cy[q]
            cqz = cz[q]
            for i in range(m):
                v = fq[i]
                rho[i] += v
                ux[i] += v * cqx
                uy[i] += v * cqy
                uz[i] += v * cqz
        for i in range(m):
            inv = 1.0 / rho[i]
            ux[i] *= inv
            uy[i] *= inv
            uz[i] *= inv
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            cqx = cx[q]
            cqy = cy[q]
            cqz = cz[q]
            wq = w[q]
            for i in range(m):
                if not solid[n0 + i]:
                    cu = 3.0 * (cqx * ux[i] + cqy * uy[i] + cqz * uz[i])
                    usq = 1.5 * (ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i])
                    feq = wq * rho[i] * (1.0 + cu + 0.5 * cu * cu - usq)
                    fq[i] += 2.0 * beta * (feq - fq[i])


@njit(cache=True)
def kbc_collide_d2(
    f, cxi, cyi, cxf, cyf, w, beta, solid, gamma_override,
    feqb, dsb, basis, rho, ux, uy, mxx, myy, mxy, sh, hh, gam,
):
    """Entropic collision, D2Q9, central-moment shear part.

    gamma_override < 0 selects the per-cell entropic estimate; otherwise the
    given value is used everywhere (2.0 recovers BGK).  ``basis`` holds the
    per-cell one-dimensional lift factors, indexed [axis*2 + order][c + 1].
    """
    q_count, n = f.shape
    b = rho.size
    for n0 in range(0, n, b):
        m = min(n0 + b, n) - n0
        for i in range(m):
            rho[i] = 0.0
            ux[i] = 0.0
            uy[i] = 0.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            cqx = cxf[q]
            cqy = cyf[q]
            for i in range(m):
                v = fq[i]
                rho[i] += v
                ux[i] += v * cqx
                uy[i] += v * cqy
        for i in range(m):
            inv = 1.0 / rho[i]
            ux[i] *= inv
            uy[i] *= inv
            mxx[i] = 0.0
            myy[i] = 0.0
            mxy[i] = 0.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            feqq = feqb[q]
            cqx = cxf[q]
            cqy = cyf[q]
            wq = w[q]
            for i in range(m):
                cu = 3.0 * (cqx * ux[i] + cqy * uy[i])
                fe = wq * rho[i] * (1.0 + cu + 0.5 * cu * cu - 1.5 * (ux[i] * ux[i] + uy[i] * uy[i]))
                feqq[i] = fe
                df = fq[i] - fe
                dx = cqx - ux[i]
                dy = cqy - uy[i]
                mxx[i] += df * dx * dx
                myy[i] += df * dy * dy
                mxy[i] += df * dx * dy
        # one-dimensional lift factors per cell: orders 0 and 1 for each axis
        # (order 2 is velocity independent: -1 at c=0, 1/2 at c=+-1)
        for i in range(m):
            inv = 1.0 / rho[i]
            mxx[i] *= inv
            myy[i] *= inv
            mxy[i] *= inv
            sh[i] = 0.0
            hh[i] = 0.0
            uxi = ux[i]
            uyi = uy[i]
            basis[0, 0, i] = 0.5 * (uxi * uxi - uxi)
            basis[0, 1, i] = 1.0 - uxi * uxi
            basis[0, 2, i] = 0.5 * (uxi * uxi + uxi)
            basis[1, 0, i] = -0.5 + uxi
            basis[1, 1, i] = -2.0 * uxi
            basis[1, 2, i] = 0.5 + uxi
            basis[2, 0, i] = 0.5 * (uyi * uyi - uyi)
            basis[2, 1, i] = 1.0 - uyi * uyi
            basis[2, 2, i] = 0.5 * (uyi * uyi + uyi)
            basis[3, 0, i] = -0.5 + uyi
            basis[3, 1, i] = -2.0 * uyi
            basis[3, 2, i] = 0.5 + uyi
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            feqq = feqb[q]
            dsq = dsb[q]
            jx = cxi[q] + 1
            jy = cyi[q] + 1
            p0x = basis[0, jx]
            p1x = basis[1, jx]
            p0y = basis[2, jy]
            p1y = basis[3, jy]
            p2x = 1.5 * cxf[q] * cxf[q] - 1.0
            p2y = 1.5 * cyf[q] * cyf[q] - 1.0
            for i in range(m):
                d = rho[i] * (mxx[i] * p2x * p0y[i] + myy[i] * p0x[i] * p2y + mxy[i] * p1x[i] * p1y[i])
                dsq[i] = d
                dh = fq[i] - feqq[i] - d
                r = 1.0 / feqq[i]
                sh[i] += d * dh * r
                hh[i] += dh * dh * r
        if gamma_override >= 0.0:
            for i in range(m):
                gam[i] = gamma_override
        else:
            inv_beta = 1.0 / beta
            for i in range(m):
                if hh[i] >= 1e-14:
                    gam[i] = inv_beta - (2.0 - inv_beta) * sh[i] / hh[i]
                else:
                    gam[i] = 2.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            feqq = feqb[q]
            dsq = dsb[q]
            for i in range(m):
                if not solid[n0 + i]:
                    dh = fq[i] - feqq[i] - dsq[i]
                    fq[i] -= beta * (2.0 * dsq[i] + gam[i] * dh)


@njit(cache=True)
def kbc_collide_d3(
    f, cxi, cyi, czi, cxf, cyf, czf, w, beta, solid, gamma_override,
    feqb, dsb, basis, rho, ux, uy, uz, mxx, myy, mzz, mxy, mxz, myz, sh, hh, gam,
):
    """Entropic collision, D3Q27, central-moment shear part."""
    q_count, n = f.shape
    b = rho.size
    for n0 in range(0, n, b):
        m = min(n0 + b, n) - n0
        for i in range(m):
            rho[i] = 0.0
            ux[i] = 0.0
            uy[i] = 0.0
            uz[i] = 0.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            cqx = cxf[q]
            cqy = cyf[q]
            cqz = czf[q]
            for i in range(m):
                v = fq[i]
                rho[i] += v
                ux[i] += v * cqx
                uy[i] += v * cqy
                uz[i] += v * cqz
        for i in range(m):
            inv = 1.0 / rho[i]
            ux[i] *= inv
            uy[i] *= inv
            uz[i] *= inv
            mxx[i] = 0.0
            myy[i] = 0.0
            mzz[i] = 0.0
            mxy[i] = 0.0
            mxz[i] = 0.0
            myz[i] = 0.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            feqq = feqb[q]
            cqx = cxf[q]
            cqy = cyf[q]
            cqz = czf[q]
            wq = w[q]
            for i in range(m):
                cu = 3.0 * (cqx * ux[i] + cqy * uy[i] + cqz * uz[i])
                fe = wq * rho[i] * (
                    1.0 + cu + 0.5 * cu * cu - 1.5 * (ux[i] * ux[i] + uy[i] * uy[i] + uz[i] * uz[i])
                )
                feqq[i] = fe
                df = fq[i] - fe
                dx = cqx - ux[i]
                dy = cqy - uy[i]
                dz = cqz - uz[i]
                mxx[i] += df * dx * dx
                myy[i] += df * dy * dy
                mzz[i] += df * dz * dz
                mxy[i] += df * dx * dy
                mxz[i] += df * dx * dz
                myz[i] += df * dy * dz
        for i in range(m):
            inv = 1.0 / rho[i]
            mxx[i] *= inv
            myy[i] *= inv
            mzz[i] *= inv
            mxy[i] *= inv
            mxz[i] *= inv
            myz[i] *= inv
            sh[i] = 0.0
            hh[i] = 0.0
            uxi = ux[i]
            uyi = uy[i]
            uzi = uz[i]
            basis[0, 0, i] = 0.5 * (uxi * uxi - uxi)
            basis[0, 1, i] = 1.0 - uxi * uxi
            basis[0, 2, i] = 0.5 * (uxi * uxi + uxi)
            basis[1, 0, i] = -0.5 + uxi
            basis[1, 1, i] = -2.0 * uxi
            basis[1, 2, i] = 0.5 + uxi
            basis[2, 0, i] = 0.5 * (uyi * uyi - uyi)
            basis[2, 1, i] = 1.0 - uyi * uyi
            basis[2, 2, i] = 0.5 * (uyi * uyi + uyi)
            basis[3, 0, i] = -0.5 + uyi
            basis[3, 1, i] = -2.0 * uyi
            basis[3, 2, i] = 0.5 + uyi
            basis[4, 0, i] = 0.5 * (uzi * uzi - uzi)
            basis[4, 1, i] = 1.0 - uzi * uzi
            basis[4, 2, i] = 0.5 * (uzi * uzi + uzi)
            basis[5, 0, i] = -0.5 + uzi
            basis[5, 1, i] = -2.0 * uzi
            basis[5, 2, i] = 0.5 + uzi
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            feqq = feqb[q]
            dsq = dsb[q]
            jx = cxi[q] + 1
            jy = cyi[q] + 1
            jz = czi[q] + 1
            p0x = basis[0, jx]
            p1x = basis[1, jx]
            p0y = basis[2, jy]
            p1y = basis[3, jy]
            p0z = basis[4, jz]
            p1z = basis[5, jz]
            p2x = 1.5 * cxf[q] * cxf[q] - 1.0
            p2y = 1.5 * cyf[q] * cyf[q] - 1.0
            p2z = 1.5 * czf[q] * czf[q] - 1.0
            for i in range(m):
                d = rho[i] * (
                    mxx[i] * p2x * p0y[i] * p0z[i]
                    + myy[i] * p0x[i] * p2y * p0z[i]
                    + mzz[i] * p0x[i] * p0y[i] * p2z
                    + mxy[i] * p1x[i] * p1y[i] * p0z[i]
                    + mxz[i] * p1x[i] * p0y[i] * p1z[i]
                    + myz[i] * p0x[i] * p1y[i] * p1z[i]
                )
                dsq[i] = d
                dh = fq[i] - feqq[i] - d
                r = 1.0 / feqq[i]
                sh[i] += d * dh * r
                hh[i] += dh * dh * r
        if gamma_override >= 0.0:
            for i in range(m):
                gam[i] = gamma_override
        else:
            inv_beta = 1.0 / beta
            for i in range(m):
                if hh[i] >= 1e-14:
                    gam[i] = inv_beta - (2.0 - inv_beta) * sh[i] / hh[i]
                else:
                    gam[i] = 2.0
        for q in range(q_count):
            fq = f[q, n0 : n0 + m]
            feqq = feqb[q]
            dsq = dsb[q]
            for i in range(m):
                if not solid[n0 + i]:
                    dh = fq[i] - feqq[i] - dsq[i]
                    fq[i] -= beta * (2.0 * dsq[i] + gam[i] * dh)


@njit(cache=True)
def stream_fix(fin, fout, src, solid_idx, opp, nslab, feq_bc):
    """Periodic pull streaming, then bounce-back and inlet/outlet columns.

    Equivalent to gather + fullway direction reversal on solid cells +
    equilibrium overwrite of the first and last x-columns.
    """
    q_count, n = fin.shape
    for q in range(q_count):
        row = fin[q]
        idx = src[q]
        out = fout[q]
        for i in range(n):
            out[i] = row[idx[i]]
    for j in range(solid_idx.size):
        i = solid_idx[j]
        for q in range(q_count):
            o = opp[q]
            if o > q:
                a = fout[q, i]
                fout[q, i] = fout[o, i]
                fout[o, i] = a
    for q in range(q_count):
        v = feq_bc[q]
        out = fout[q]
        for i in range(nslab):
            out[i] = v
        for i in range(n - nslab, n):
            out[i] = v


@njit(cache=True)
def gather(fin, src, fout):
    """Pull streaming only: fout[q, i] = fin[q, src[q, i]]."""
    q_count, n = fin.shape
    for q in range(q_count):
        row = fin[q]
        idx = src[q]
        out = fout[q]
        for i in range(n):
            out[i] = row[idx[i]]


class Workspace:
    """Scratch buffers reused across collision calls of one simulation."""

    def __init__(self, stencil):
        q, d = stencil.q, stencil.d
        self.stencil = stencil
        self.ci = [np.ascontiguousarray(stencil.c[:, a]) for a in range(d)]
        self.cf = [np.ascontiguousarray(stencil.c_float()[:, a]) for a in range(d)]
        self.feq = np.empty((q, BLOCK))
        self.ds = np.empty((q, BLOCK))
        self.basis = np.empty((2 * d, 3, BLOCK))
        n_scalars = {2: 9, 3: 13}[d]
        self.scalars = [np.empty(BLOCK) for _ in range(n_scalars)]
        self.zeros_q = np.zeros(q)


def collide_kbc_inplace(f_flat, stencil, beta, solid_flat, ws: Workspace, gamma_override=None):
    """Dispatch to the dimension-specific entropic kernel (mutates f_flat)."""
    go = -1.0 if gamma_override is None else float(gamma_override)
    if stencil.d == 2:
        kbc_collide_d2(
            f_flat, ws.ci[0], ws.ci[1], ws.cf[0], ws.cf[1], stencil.w, beta, solid_flat, go,
            ws.feq, ws.ds, ws.basis, *ws.scalars,
        )
    else:
        kbc_collide_d3(
            f_flat, ws.ci[0], ws.ci[1], ws.ci[2], ws.cf[0], ws.cf[1], ws.cf[2], stencil.w,
            beta, solid_flat, go, ws.feq, ws.ds, ws.basis, *ws.scalars,
        )


def collide_bgk_inplace(f_flat, stencil, beta, solid_flat, ws: Workspace):
    cz = ws.cf[2] if stencil.d == 3 else ws.zeros_q
    uz = ws.scalars[3] if stencil.d == 3 else np.empty(BLOCK)
    bgk_collide(
        f_flat, ws.cf[0], ws.cf[1], cz, stencil.w, beta, solid_flat,
        ws.scalars[0], ws.scalars[1], ws.scalars[2], uz,
    )


def build_stream_indices(shape, stencil) -> np.ndarray:
    """Flat source index per (direction, cell) for periodic pull streaming."""
    n = int(np.prod(shape))
    src = np.empty((stencil.q, n), dtype=np.int64)
    grid = np.indices(shape)
    for q in range(stencil.q):
        coords = [(grid[a] - stencil.c[q, a]) % shape[a] for a in range(len(shape))]
        src[q] = np.ravel_multi_index(coords, shape).reshape(-1)
    return src
