"""Velocity stencils for the D2Q9 and D3Q27 lattices."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

CS2 = 1.0 / 3.0  # lattice speed of sound squared, both stencils


@dataclass(frozen=True)
class Stencil:
    """Discrete velocity set: vectors c, weights w, opposite-direction map."""

    c: np.ndarray
    w: np.ndarray
    opposite: np.ndarray
    cs2: float = CS2

    @property
    def q(self) -> int:
        return self.c.shape[0]

    @property
    def d(self) -> int:
        return self.c.shape[1]

    def c_float(self) -> np.ndarray:
        return self.c.astype(np.float64)


def _make_d2q9() -> Stencil:
    c = np.array(
        [
            [0, 0],
            [1, 0],
            [0, 1],
            [-1, 0],
            [0, -1],
            [1, 1],
            [-1, 1],
            [-1, -1],
            [1, -1],
        ],
        dtype=np.int64,
    )
    w = np.array([4 / 9] + [1 / 9] * 4 + [1 / 36] * 4, dtype=np.float64)
    return Stencil(c=c, w=w, opposite=_opposites(c))


def _make_d3q27() -> Stencil:
    # deterministic lexicographic order over {-1,0,1}^3, rest velocity first
    vecs = sorted(product((-1, 0, 1), repeat=3), key=lambda v: (np.abs(v).sum(), v))
    c = np.array(vecs, dtype=np.int64)
    w_by_speed = {0: 8 / 27, 1: 2 / 27, 2: 1 / 54, 3: 1 / 216}
    w = np.array([w_by_speed[int(np.abs(v).sum())] for v in vecs], dtype=np.float64)
    return Stencil(c=c, w=w, opposite=_opposites(c))


def _opposites(c: np.ndarray) -> np.ndarray:
    index = {tuple(v): i for i, v in enumerate(c.tolist())}
    return np.array([index[tuple((-v).tolist())] for v in c], dtype=np.int64)


D2Q9 = _make_d2q9()
D3Q27 = _make_d3q27()


def stencil_for_dim(d: int) -> Stencil:
    if d == 2:
        return D2Q9
    if d == 3:
        return D3Q27
    raise ValueError(f"no stencil for {d} dimensions")
