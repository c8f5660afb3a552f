"""Sobol low-discrepancy sequence from Joe-Kuo direction numbers.

Gray-code construction over 32-bit direction numbers.  The leading
all-zeros point of the raw sequence is dropped: the first returned point
(no skip) is 0.5 in every coordinate.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionTooLarge

N_BITS = 32

# (primitive polynomial, initial direction numbers) per dimension, from the
# published Joe-Kuo table.  The polynomial integer includes the leading and
# trailing coefficient bits; dimension 1 is the van der Corput sequence.
_JOE_KUO = [
    (1, []),
    (3, [1]),
    (7, [1, 3]),
    (11, [1, 3, 1]),
    (13, [1, 1, 1]),
    (19, [1, 1, 3, 3]),
    (25, [1, 3, 5, 13]),
    (37, [1, 1, 5, 5, 17]),
    (41, [1, 1, 5, 5, 5]),
    (47, [1, 1, 7, 11, 19]),
    (55, [1, 1, 5, 1, 1]),
    (59, [1, 1, 1, 3, 11]),
    (61, [1, 3, 5, 5, 31]),
    (67, [1, 3, 3, 9, 7, 49]),
    (91, [1, 1, 1, 15, 21, 21]),
    (97, [1, 3, 1, 13, 27, 49]),
    (103, [1, 1, 1, 15, 7, 5]),
    (109, [1, 3, 1, 15, 13, 25]),
    (115, [1, 1, 5, 5, 19, 61]),
    (131, [1, 3, 7, 11, 23, 15, 103]),
    (137, [1, 3, 7, 13, 13, 15, 69]),
    (143, [1, 1, 3, 13, 7, 35, 63]),
    (145, [1, 3, 5, 9, 1, 25, 53]),
    (157, [1, 3, 1, 13, 9, 35, 107]),
    (167, [1, 3, 1, 5, 27, 61, 31]),
    (171, [1, 1, 5, 11, 19, 41, 61]),
    (185, [1, 3, 5, 3, 3, 13, 69]),
    (191, [1, 1, 7, 13, 1, 19, 1]),
    (193, [1, 3, 7, 5, 13, 19, 59]),
    (203, [1, 1, 3, 9, 25, 29, 41]),
    (211, [1, 3, 5, 13, 23, 1, 55]),
    (213, [1, 3, 7, 3, 13, 59, 17]),
]

MAX_DIM = len(_JOE_KUO)


def direction_numbers(dim_index: int) -> np.ndarray:
    """32 direction numbers (as 32-bit integers) for one dimension (0-based)."""
    poly, m_init = _JOE_KUO[dim_index]
    s = max(poly.bit_length() - 1, 0)
    m = list(m_init)
    if s == 0:
        m = [1] * N_BITS
    else:
        a_bits = [(poly >> (s - i)) & 1 for i in range(1, s)]
        while len(m) < N_BITS:
            j = len(m)
            new = m[j - s] ^ (m[j - s] << s)
            for i, a in enumerate(a_bits, start=1):
                if a:
                    new ^= m[j - i] << i
            m.append(new)
    v = np.array([m[j] << (N_BITS - 1 - j) for j in range(N_BITS)], dtype=np.uint64)
    return v


def sobol(n: int, d: int, seed_skip: int = 0) -> np.ndarray:
    """First ``n`` Sobol points in [0, 1)^d after skipping ``seed_skip``.

    Point k is the raw sequence element at index ``seed_skip + k + 1``
    (Gray-code order), so consecutive calls with growing skips walk the
    same global sequence.
    """
    if d < 1 or n < 0 or seed_skip < 0:
        raise ValueError("need d >= 1, n >= 0, seed_skip >= 0")
    if d > MAX_DIM:
        raise DimensionTooLarge(f"requested {d} dimensions, table covers {MAX_DIM}")
    v = np.stack([direction_numbers(j) for j in range(d)])  # (d, 32)
    out = np.empty((n, d), dtype=np.float64)
    scale = float(2**N_BITS)
    for k in range(n):
        raw = seed_skip + k + 1
        gray = raw ^ (raw >> 1)
        acc = np.zeros(d, dtype=np.uint64)
        bit = 0
        g = gray
        while g:
            if g & 1:
                acc ^= v[:, bit]
            g >>= 1
            bit += 1
        out[k] = acc / scale
    return out
