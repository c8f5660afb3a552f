"""Flow-field diagnostics: vorticity, enstrophy, snapshot export."""

from __future__ import annotations

import csv

import numpy as np


def _masked_derivative(field: np.ndarray, axis: int, fluid: np.ndarray) -> np.ndarray:
    """d(field)/d(axis) on fluid cells, unit grid spacing.

    Second-order central differences where both neighbors are fluid,
    second-order one-sided stencils at solid/domain boundaries, first-order
    one-sided where only a single neighbor exists, zero on isolated cells.
    Solid cells get zero.
    """
    f = field
    n = f.shape[axis]

    def shifted(arr, k, fill=0.0):
        out = np.full_like(arr, fill)
        src = [slice(None)] * arr.ndim
        dst = [slice(None)] * arr.ndim
        if k > 0:
            src[axis] = slice(0, n - k)
            dst[axis] = slice(k, n)
        elif k < 0:
            src[axis] = slice(-k, n)
            dst[axis] = slice(0, n + k)
        else:
            return arr.copy()
        out[tuple(dst)] = arr[tuple(src)]
        return out

    avail = fluid.astype(bool)
    ap1 = shifted(avail, -1, False)
    am1 = shifted(avail, 1, False)
    ap2 = shifted(avail, -2, False)
    am2 = shifted(avail, 2, False)
    fp1 = shifted(f, -1)
    fm1 = shifted(f, 1)
    fp2 = shifted(f, -2)
    fm2 = shifted(f, 2)

    d = np.zeros_like(f)
    central = ap1 & am1
    fwd2 = ~am1 & ap1 & ap2
    bwd2 = ~ap1 & am1 & am2
    fwd1 = ~am1 & ap1 & ~ap2
    bwd1 = ~ap1 & am1 & ~am2

    d[central] = 0.5 * (fp1[central] - fm1[central])
    d[fwd2] = 0.5 * (-3.0 * f[fwd2] + 4.0 * fp1[fwd2] - fp2[fwd2])
    d[bwd2] = 0.5 * (3.0 * f[bwd2] - 4.0 * fm1[bwd2] + fm2[bwd2])
    d[fwd1] = fp1[fwd1] - f[fwd1]
    d[bwd1] = f[bwd1] - fm1[bwd1]
    d[~avail] = 0.0
    return d


def vorticity(u: np.ndarray, fluid: np.ndarray) -> np.ndarray:
    """Curl of the velocity field over fluid cells.

    Returns the scalar dv/dx - du/dy in 2D, the full 3-vector in 3D.
    """
    d = u.shape[0]
    if d == 2:
        return _masked_derivative(u[1], 0, fluid) - _masked_derivative(u[0], 1, fluid)
    wx = _masked_derivative(u[2], 1, fluid) - _masked_derivative(u[1], 2, fluid)
    wy = _masked_derivative(u[0], 2, fluid) - _masked_derivative(u[2], 0, fluid)
    wz = _masked_derivative(u[1], 0, fluid) - _masked_derivative(u[0], 1, fluid)
    return np.stack([wx, wy, wz])


def enstrophy(u: np.ndarray, fluid: np.ndarray) -> float:
    """Mean squared vorticity over fluid cells (turbulence indicator)."""
    w = vorticity(u, fluid)
    w2 = w * w if w.ndim == fluid.ndim else (w * w).sum(axis=0)
    return float(w2[fluid].mean())


def velocity_magnitude(u: np.ndarray) -> np.ndarray:
    return np.sqrt((u * u).sum(axis=0))


def save_snapshot_csv(path, u: np.ndarray, rho: np.ndarray) -> None:
    """Write a field snapshot as x,y[,z],ux,uy[,uz],rho rows."""
    d = u.shape[0]
    shape = rho.shape
    coords = np.indices(shape).reshape(d, -1)
    uf = u.reshape(d, -1)
    rf = rho.reshape(-1)
    header = ["x", "y", "z"][:d] + ["ux", "uy", "uz"][:d] + ["rho"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(rf.size):
            row = [int(coords[a, i]) for a in range(d)]
            row += [f"{uf[a, i]:.17g}" for a in range(d)]
            row.append(f"{rf[i]:.17g}")
            writer.writerow(row)


def save_velocity_pgm(path, u: np.ndarray) -> None:
    """Velocity-magnitude image (2D fields or a z-slice of 3D fields)."""
    mag = velocity_magnitude(u)
    if mag.ndim == 3:
        mag = mag[:, :, mag.shape[2] // 2]
    peak = mag.max()
    scaled = (255 * mag / peak).astype(np.uint8) if peak > 0 else np.zeros_like(mag, dtype=np.uint8)
    img = scaled.T[::-1]
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
