"""Unstructured bounded elite archive with closest-pair competition.

Candidates are keyed by feature coordinates normalized to the unit square
by fixed bounds.  While below capacity every candidate is retained (except
exact feature duplicates, which compete immediately).  Once the archive
overflows, the closest pair in normalized feature space competes and the
worse-fitness member is ejected, so survivors spread out over the feature
plane while local competition keeps only the best performers.

Deterministic tie rules (mirrored by the brute-force oracle in the tests):
the competing pair is found by taking, for every elite, its nearest
neighbor (squared Euclidean distance; equal distances resolved toward the
newest neighbor), then picking the elite with the smallest such distance
(again newest-first on ties).  Within the pair, equal fitness ejects the
older member.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Elite:
    """One archive member: search-space parameters plus measured coordinates.

    ``fitness`` is the maximum flow speed around the shape (lower is
    better); ``features`` the raw (area, enstrophy) pair; ``provenance``
    records whether the values came from simulation or surrogate prediction.
    """

    params: np.ndarray
    features: tuple
    fitness: float
    provenance: str = "simulated"
    elite_id: int = -1

    def to_dict(self) -> dict:
        return {
            "params": np.asarray(self.params, dtype=float).tolist(),
            "features": [float(self.features[0]), float(self.features[1])],
            "fitness": float(self.fitness),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Elite":
        return cls(
            params=np.asarray(d["params"], dtype=float),
            features=(float(d["features"][0]), float(d["features"][1])),
            fitness=float(d["fitness"]),
            provenance=str(d.get("provenance", "simulated")),
        )


class Archive:
    """Bounded set of elites with closest-pair ejection at capacity."""

    def __init__(self, capacity: int, feature_bounds):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        (a_lo, a_hi), (e_lo, e_hi) = feature_bounds
        if a_hi <= a_lo or e_hi <= e_lo:
            raise ValueError("feature bounds must have positive span")
        self.capacity = capacity
        self.feature_bounds = ((float(a_lo), float(a_hi)), (float(e_lo), float(e_hi)))
        self._elites: list[Elite] = []
        self._pos = np.empty((0, 2))        # normalized feature coordinates
        self._fitness = np.empty(0)
        self._ids = np.empty(0, dtype=np.int64)
        self._nearest_d = np.empty(0)       # squared distance to nearest peer
        self._nearest_id = np.empty(0, dtype=np.int64)
        self._next_id = 0

    def __len__(self) -> int:
        return len(self._elites)

    @property
    def elites(self) -> list:
        return list(self._elites)

    def normalize(self, features) -> np.ndarray:
        (a_lo, a_hi), (e_lo, e_hi) = self.feature_bounds
        a = (float(features[0]) - a_lo) / (a_hi - a_lo)
        e = (float(features[1]) - e_lo) / (e_hi - e_lo)
        return np.clip(np.array([a, e]), 0.0, 1.0)

    def normalized_positions(self) -> np.ndarray:
        return self._pos.copy()

    def insert(self, elite: Elite) -> "Archive":
        """Add a candidate, competing by the closest-pair rule at capacity.

        A candidate landing on an incumbent's exact coordinates competes
        immediately even below capacity (the zero-distance pair is the
        closest pair by construction), so coordinates stay unique.
        """
        pos = self.normalize(elite.features)
        elite.elite_id = self._next_id
        self._next_id += 1
        self._append_row(elite, pos)
        duplicate = self._nearest_d[-1] == 0.0
        if len(self._elites) > self.capacity or duplicate:
            self._eject_from_closest_pair()
        return self

    def _append_row(self, elite: Elite, pos: np.ndarray) -> None:
        n = len(self._elites)
        self._elites.append(elite)
        self._pos = np.vstack([self._pos, pos[None, :]])
        self._fitness = np.append(self._fitness, elite.fitness)
        self._ids = np.append(self._ids, elite.elite_id)
        if n == 0:
            self._nearest_d = np.array([np.inf])
            self._nearest_id = np.array([-1], dtype=np.int64)
            return
        d2 = ((self._pos[:n] - pos) ** 2).sum(axis=1)
        # the newcomer has the largest id, so ties resolve toward it
        closer = d2 <= self._nearest_d[:n]
        self._nearest_d = np.append(np.where(closer, d2, self._nearest_d[:n]), d2.min())
        new_ids = np.where(closer, elite.elite_id, self._nearest_id[:n])
        mins = np.flatnonzero(d2 == d2.min())
        target = int(mins[np.argmax(self._ids[mins])])
        self._nearest_id = np.append(new_ids, self._ids[target])

    def _eject_from_closest_pair(self) -> None:
        d_min = self._nearest_d.min()
        rows = np.flatnonzero(self._nearest_d == d_min)
        i = int(rows[np.argmax(self._ids[rows])])
        j = int(np.flatnonzero(self._ids == self._nearest_id[i])[0])
        # worse fitness goes; equal fitness ejects the older elite
        fi, fj = self._fitness[i], self._fitness[j]
        if fi > fj:
            victim = i
        elif fj > fi:
            victim = j
        else:
            victim = i if self._ids[i] < self._ids[j] else j
        self._remove_row(victim)

    def _remove_row(self, j: int) -> None:
        gone_id = self._ids[j]
        last = len(self._elites) - 1
        for arr_name in ("_pos", "_fitness", "_ids", "_nearest_d", "_nearest_id"):
            arr = getattr(self, arr_name)
            arr[j] = arr[last]
            setattr(self, arr_name, arr[:last].copy() if arr.ndim == 1 else arr[:last].copy())
        self._elites[j] = self._elites[last]
        self._elites.pop()
        stale = np.flatnonzero(self._nearest_id == gone_id)
        for r in stale:
            self._rescan_row(int(r))

    def _rescan_row(self, r: int) -> None:
        n = len(self._elites)
        if n < 2:
            self._nearest_d[r] = np.inf
            self._nearest_id[r] = -1
            return
        d2 = ((self._pos - self._pos[r]) ** 2).sum(axis=1)
        d2[r] = np.inf
        d_min = d2.min()
        mins = np.flatnonzero(d2 == d_min)
        target = int(mins[np.argmax(self._ids[mins])])
        self._nearest_d[r] = d_min
        self._nearest_id[r] = self._ids[target]

    def to_records(self) -> list:
        order = np.argsort(self._ids)
        return [self._elites[int(i)].to_dict() for i in order]
