"""Surrogate-assisted quality-diversity search.

The outer loop alternates between (a) illuminating the feature plane with
an inner mutation-and-insert search scored purely by surrogate models and
(b) simulating a Sobol-spread selection of archive members to grow the
training set.  Fitness (maximum flow speed, minimized) is scored by the
optimistic acquisition mu - kappa * sigma; the two feature coordinates by
their predictive means.  After the budget is exhausted the archive is
rebuilt exploitatively (kappa = 0) and all simulated samples are inserted
last so measured elites dominate ties.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import surrogate
from ..errors import WindmapError
from .archive import Archive, Elite
from .sobol import sobol


@dataclass(frozen=True)
class SphenConfig:
    """Search budget and operators of the surrogate-assisted QD loop."""

    n_initial: int = 64
    samples_per_iter: int = 10
    outer_iters: int = 100
    inner_generations: int = 1024
    parents_per_gen: int = 32
    mutation_sigma: float = 0.1
    archive_capacity: int = 1024
    kappa_illuminate: float = 1.0
    kappa_final: float = 0.0
    seed: int = 0
    n_params: int = 32
    feature_bounds: tuple = ((0.0, 400.0), (0.0, 1e-4))

    def __post_init__(self):
        positive = (
            self.n_initial,
            self.samples_per_iter,
            self.inner_generations,
            self.parents_per_gen,
            self.archive_capacity,
            self.n_params,
        )
        if any(v <= 0 for v in positive) or self.outer_iters < 0:
            raise ValueError("budget fields must be positive (outer_iters >= 0)")
        if self.mutation_sigma <= 0:
            raise ValueError("mutation_sigma must be positive")

    @property
    def budget(self) -> int:
        return self.n_initial + self.outer_iters * self.samples_per_iter

    def to_dict(self) -> dict:
        return {
            "n_initial": self.n_initial,
            "samples_per_iter": self.samples_per_iter,
            "outer_iters": self.outer_iters,
            "inner_generations": self.inner_generations,
            "parents_per_gen": self.parents_per_gen,
            "mutation_sigma": self.mutation_sigma,
            "archive_capacity": self.archive_capacity,
            "kappa_illuminate": self.kappa_illuminate,
            "kappa_final": self.kappa_final,
            "seed": self.seed,
            "n_params": self.n_params,
            "feature_bounds": [list(b) for b in self.feature_bounds],
        }


def mutate(params: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian perturbation of normalized parameters, clamped to [0, 1]."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return np.clip(params + sigma * rng.standard_normal(params.shape), 0.0, 1.0)


def _predict_mean(model, x: np.ndarray) -> np.ndarray:
    if hasattr(model, "predict_mean"):
        return np.asarray(model.predict_mean(x), dtype=float)
    mu, _ = surrogate.predict(model, x)
    return np.atleast_1d(mu)


def _predict_optimistic(model, x: np.ndarray, kappa: float) -> np.ndarray:
    if hasattr(model, "optimistic"):
        return np.asarray(model.optimistic(x, kappa), dtype=float)
    return np.atleast_1d(surrogate.optimistic(model, x, kappa))


@dataclass
class SurrogateModels:
    """The three per-quantity surrogates driving illumination."""

    fitness: object
    area: object
    enstrophy: object


def illuminate(
    models: SurrogateModels,
    archive_seed: Archive,
    cfg: SphenConfig,
    rng: np.random.Generator,
    kappa: float | None = None,
) -> Archive:
    """Fill an archive using surrogate scores only (zero simulator calls)."""
    kappa = cfg.kappa_illuminate if kappa is None else kappa
    archive = archive_seed
    if len(archive) == 0:
        raise WindmapError("illumination needs a non-empty seed archive")
    for _ in range(cfg.inner_generations):
        pool = archive.elites
        idx = rng.integers(0, len(pool), size=cfg.parents_per_gen)
        parents = np.stack([pool[int(i)].params for i in idx])
        children = mutate(parents, cfg.mutation_sigma, rng)
        fit = _predict_optimistic(models.fitness, children, kappa)
        area = _predict_mean(models.area, children)
        enst = _predict_mean(models.enstrophy, children)
        for j in range(children.shape[0]):
            archive.insert(
                Elite(
                    params=children[j],
                    features=(float(area[j]), float(enst[j])),
                    fitness=float(fit[j]),
                    provenance="predicted",
                )
            )
    return archive


def select_new_samples(archive: Archive, n: int, sobol_skip: int = 0):
    """Pick ``n`` distinct elites spread over feature space.

    Sobol points in the normalized feature plane are matched greedily to
    their nearest not-yet-chosen elites; returns fewer when the archive is
    smaller than ``n``.
    """
    pool = archive.elites
    if len(pool) == 0:
        raise WindmapError("cannot select from an empty archive")
    n_pick = min(n, len(pool))
    targets = sobol(n_pick, 2, seed_skip=sobol_skip)
    pos = archive.normalized_positions()
    chosen = []
    taken = np.zeros(len(pool), dtype=bool)
    for t in targets:
        d2 = ((pos - t) ** 2).sum(axis=1)
        d2[taken] = np.inf
        j = int(np.argmin(d2))
        taken[j] = True
        chosen.append(pool[j])
    return chosen


def _seed_archive_from_training(
    x: np.ndarray, models: SurrogateModels, cfg: SphenConfig, kappa: float
) -> Archive:
    """Archive of all training genomes scored by the current surrogates."""
    archive = Archive(cfg.archive_capacity, cfg.feature_bounds)
    fit = _predict_optimistic(models.fitness, x, kappa)
    area = _predict_mean(models.area, x)
    enst = _predict_mean(models.enstrophy, x)
    for j in range(x.shape[0]):
        archive.insert(
            Elite(
                params=x[j].copy(),
                features=(float(area[j]), float(enst[j])),
                fitness=float(fit[j]),
                provenance="predicted",
            )
        )
    return archive


def _fit_models(x: np.ndarray, fitness, area, enstrophy, n_params: int) -> SurrogateModels:
    bounds = (np.zeros(n_params), np.ones(n_params))
    return SurrogateModels(
        fitness=surrogate.fit(x, fitness, input_bounds=bounds),
        area=surrogate.fit(x, area, input_bounds=bounds),
        enstrophy=surrogate.fit(x, enstrophy, input_bounds=bounds),
    )


def sphen(cfg: SphenConfig, evaluator, progress=None):
    """Run the full surrogate-assisted QD loop.

    ``evaluator(params) -> (u_max, area, enstrophy)`` runs one simulation
    and may raise; failures are logged and excluded from training, never
    retried.  Returns (final archive, evaluation log).  The number of
    evaluator calls is exactly n_initial + outer_iters * samples_per_iter.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    log: list[dict] = []
    x_ok: list[np.ndarray] = []
    y_fit: list[float] = []
    y_area: list[float] = []
    y_enst: list[float] = []

    def simulate_batch(batch, iteration):
        for params in batch:
            record = {
                "iteration": iteration,
                "index": len(log),
                "params": np.asarray(params, dtype=float).tolist(),
            }
            try:
                u_max, area, enst = evaluator(np.asarray(params, dtype=float))
            except WindmapError as exc:
                record["status"] = "failed"
                record["error"] = f"{type(exc).__name__}: {exc}"
            else:
                record["status"] = "ok"
                record["u_max"] = float(u_max)
                record["area"] = float(area)
                record["enstrophy"] = float(enst)
                x_ok.append(np.asarray(params, dtype=float))
                y_fit.append(float(u_max))
                y_area.append(float(area))
                y_enst.append(float(enst))
            log.append(record)

    initial = sobol(cfg.n_initial, cfg.n_params, seed_skip=cfg.seed * cfg.budget)
    simulate_batch(initial, iteration=0)
    if len(x_ok) < 2:
        raise WindmapError("too few feasible initial samples to fit surrogates")

    feature_skip = 0
    for it in range(1, cfg.outer_iters + 1):
        models = _fit_models(np.stack(x_ok), y_fit, y_area, y_enst, cfg.n_params)
        seed_arch = _seed_archive_from_training(np.stack(x_ok), models, cfg, cfg.kappa_illuminate)
        candidate_arch = illuminate(models, seed_arch, cfg, rng, kappa=cfg.kappa_illuminate)
        picks = select_new_samples(candidate_arch, cfg.samples_per_iter, sobol_skip=feature_skip)
        feature_skip += cfg.samples_per_iter
        simulate_batch([p.params for p in picks], iteration=it)
        if progress is not None:
            progress(it, len(log), len(candidate_arch))

    models = _fit_models(np.stack(x_ok), y_fit, y_area, y_enst, cfg.n_params)
    seed_arch = _seed_archive_from_training(np.stack(x_ok), models, cfg, cfg.kappa_final)
    final = illuminate(models, seed_arch, cfg, rng, kappa=cfg.kappa_final)
    for params, u_max, area, enst in zip(x_ok, y_fit, y_area, y_enst):
        final.insert(
            Elite(params=params, features=(area, enst), fitness=u_max, provenance="simulated")
        )
    return final, log
