"""Gradient-free minimizers over flat parameter vectors.

Particle swarm, whale optimization, archive-based continuous ant colony, and
a uniform random-search baseline share the same config/result types.  Every
member of a population owns its own counter-based random stream (stream id =
member index), so objective evaluations may run concurrently without changing
any result bit.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadConfigError, EmptyBatchError
from .models import ModelConfig, pair_loss, param_count
from .numcore import RngStream
from .vocab import EmbeddingMatrix, TokenIds

# Stream id reserved for population-independent draws (e.g. archive seeding).
_COLONY_STREAM = 2**32


class Objective:
    """Deterministic scalar objective with a thread-safe evaluation counter."""

    def __init__(self, fn, arity: int):
        self._fn = fn
        self.arity = arity
        self.eval_count = 0
        self._lock = threading.Lock()

    def evaluate(self, x) -> float:
        value = float(self._fn(np.asarray(x, dtype=np.float64)))
        with self._lock:
            self.eval_count += 1
        return value

    __call__ = evaluate


@dataclass
class OptConfig:
    population: int = 20
    iterations: int = 200
    bounds: tuple = (-1.0, 1.0)
    seed: int = 0
    workers: int = 1
    # particle swarm (constriction-style constants)
    inertia: float = 0.729
    cognitive: float = 1.49445
    social: float = 1.49445
    # whale spiral shape
    spiral_b: float = 1.0
    # continuous ant colony
    archive_size: int = 10
    locality: float = 0.1
    deviation: float = 0.85


@dataclass
class OptResult:
    best_point: np.ndarray
    best_value: float
    trace: list[float]        # best-so-far after each iteration
    mean_trace: list[float]   # population mean value per iteration
    evals_used: int
    initial_best: float = float("inf")
    extras: dict = field(default_factory=dict)


def _check(cfg: OptConfig, dim: int, min_population: int = 2):
    lo, hi = _bounds_arrays(cfg, dim)
    if cfg.population < min_population:
        raise BadConfigError(f"population {cfg.population} < {min_population}")
    if cfg.iterations < 1:
        raise BadConfigError("iterations must be >= 1")
    if cfg.workers < 1:
        raise BadConfigError("workers must be >= 1")
    if not np.all(lo < hi):
        raise BadConfigError("bounds must satisfy lo < hi")
    return lo, hi


def _bounds_arrays(cfg: OptConfig, dim: int):
    lo, hi = cfg.bounds
    return (np.broadcast_to(np.asarray(lo, dtype=np.float64), dim).copy(),
            np.broadcast_to(np.asarray(hi, dtype=np.float64), dim).copy())


def _evaluate(f: Objective, points: list[np.ndarray], workers: int) -> np.ndarray:
    """Population values in member-index order; thread pool when workers > 1."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(f.evaluate, points)))
    return np.array([f.evaluate(p) for p in points])


def _init_positions(streams, lo, hi, dim):
    return [lo + s.uniform(0.0, 1.0, dim) * (hi - lo) for s in streams]


def pso_minimize(f: Objective, cfg: OptConfig,
                 on_iteration=None) -> OptResult:
    """Canonical particle swarm with inertia and cognitive/social pulls.

    Per particle: v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x) with fresh
    per-dimension r1, r2 from the particle's own stream; positions clamp to
    the bounds after every move.
    """
    dim = f.arity
    lo, hi = _check(cfg, dim)
    streams = [RngStream(cfg.seed, i) for i in range(cfg.population)]
    x = _init_positions(streams, lo, hi, dim)
    v = [np.zeros(dim) for _ in range(cfg.population)]
    values = _evaluate(f, x, cfg.workers)
    pbest = [p.copy() for p in x]
    pbest_val = values.copy()
    g = int(np.argmin(values))
    gbest, gbest_val = x[g].copy(), float(values[g])
    initial_best = gbest_val

    trace, mean_trace = [], []
    for it in range(cfg.iterations):
        for i, s in enumerate(streams):
            r1 = s.uniform(0.0, 1.0, dim)
            r2 = s.uniform(0.0, 1.0, dim)
            v[i] = (cfg.inertia * v[i]
                    + cfg.cognitive * r1 * (pbest[i] - x[i])
                    + cfg.social * r2 * (gbest - x[i]))
            x[i] = np.clip(x[i] + v[i], lo, hi)
        values = _evaluate(f, x, cfg.workers)
        for i in range(cfg.population):
            if values[i] < pbest_val[i]:
                pbest_val[i] = values[i]
                pbest[i] = x[i].copy()
            if values[i] < gbest_val:
                gbest_val = float(values[i])
                gbest = x[i].copy()
        trace.append(gbest_val)
        mean_trace.append(float(values.mean()))
        if on_iteration:
            on_iteration(it, gbest.copy(), gbest_val)
    return OptResult(gbest, gbest_val, trace, mean_trace,
                     evals_used=cfg.population * (cfg.iterations + 1),
                     initial_best=initial_best)


def woa_minimize(f: Objective, cfg: OptConfig,
                 on_iteration=None) -> OptResult:
    """Whale optimization: encircle / explore / logarithmic-spiral moves.

    The control scalar a shrinks linearly from 2 toward 0; each agent flips
    p ~ U[0,1) between the encircling family (exploiting the best, or a random
    agent while |A| >= 1) and the spiral around the best.
    """
    dim = f.arity
    lo, hi = _check(cfg, dim)
    streams = [RngStream(cfg.seed, i) for i in range(cfg.population)]
    x = _init_positions(streams, lo, hi, dim)
    values = _evaluate(f, x, cfg.workers)
    g = int(np.argmin(values))
    best, best_val = x[g].copy(), float(values[g])
    initial_best = best_val

    trace, mean_trace = [], []
    for it in range(cfg.iterations):
        a = 2.0 - 2.0 * it / cfg.iterations
        snapshot = [p.copy() for p in x]
        for i, s in enumerate(streams):
            r1 = float(s.uniform(0.0, 1.0, 1)[0])
            r2 = float(s.uniform(0.0, 1.0, 1)[0])
            p = float(s.uniform(0.0, 1.0, 1)[0])
            big_a = 2.0 * a * r1 - a
            big_c = 2.0 * r2
            if p < 0.5:
                if abs(big_a) < 1.0:
                    d = np.abs(big_c * best - x[i])
                    x[i] = best - big_a * d
                else:
                    other = snapshot[s.integers(cfg.population)]
                    d = np.abs(big_c * other - x[i])
                    x[i] = other - big_a * d
            else:
                l = float(s.uniform(-1.0, 1.0, 1)[0])
                d = np.abs(best - x[i])
                x[i] = d * np.exp(cfg.spiral_b * l) * np.cos(2.0 * np.pi * l) + best
            x[i] = np.clip(x[i], lo, hi)
        values = _evaluate(f, x, cfg.workers)
        for i in range(cfg.population):
            if values[i] < best_val:
                best_val = float(values[i])
                best = x[i].copy()
        trace.append(best_val)
        mean_trace.append(float(values.mean()))
        if on_iteration:
            on_iteration(it, best.copy(), best_val)
    return OptResult(best, best_val, trace, mean_trace,
                     evals_used=cfg.population * (cfg.iterations + 1),
                     initial_best=initial_best)


def aco_minimize(f: Objective, cfg: OptConfig,
                 on_iteration=None) -> OptResult:
    """Continuous ant colony over a ranked solution archive.

    Rank weights are Gaussian with locality q; each ant copies one archive
    guide and resamples every dimension from a Gaussian whose deviation is
    xi times the guide's mean absolute distance to the rest of the archive.
    The archive keeps the best archive_size solutions ever seen.
    """
    dim = f.arity
    lo, hi = _check(cfg, dim)
    k = cfg.archive_size
    if k < 2:
        raise BadConfigError("archive_size must be >= 2")
    colony = RngStream(cfg.seed, _COLONY_STREAM)
    streams = [RngStream(cfg.seed, i) for i in range(cfg.population)]

    archive = [lo + colony.uniform(0.0, 1.0, dim) * (hi - lo) for _ in range(k)]
    arch_val = _evaluate(f, archive, cfg.workers)
    order = np.argsort(arch_val, kind="stable")
    archive = [archive[i] for i in order]
    arch_val = arch_val[order]
    initial_best = float(arch_val[0])

    ranks = np.arange(k, dtype=np.float64)
    weights = np.exp(-(ranks**2) / (2.0 * (cfg.locality * k) ** 2))
    probs = np.cumsum(weights / weights.sum())

    trace, mean_trace = [], []
    for it in range(cfg.iterations):
        table = np.stack(archive)
        ants = []
        for s in streams:
            guide = int(np.searchsorted(probs, float(s.uniform(0.0, 1.0, 1)[0])))
            guide = min(guide, k - 1)
            sigma = cfg.deviation * np.abs(table - table[guide]).sum(axis=0) / (k - 1)
            ants.append(np.clip(s.normal(table[guide], sigma), lo, hi))
        values = _evaluate(f, ants, cfg.workers)
        merged = archive + ants
        merged_val = np.concatenate([arch_val, values])
        order = np.argsort(merged_val, kind="stable")[:k]
        archive = [merged[i] for i in order]
        arch_val = merged_val[order]
        trace.append(float(arch_val[0]))
        mean_trace.append(float(values.mean()))
        if on_iteration:
            on_iteration(it, archive[0].copy(), float(arch_val[0]))
    return OptResult(archive[0], float(arch_val[0]), trace, mean_trace,
                     evals_used=k + cfg.population * cfg.iterations,
                     initial_best=initial_best)


def random_search(f: Objective, cfg: OptConfig,
                  on_iteration=None) -> OptResult:
    """Uniform sampling baseline at exactly population x iterations evaluations."""
    dim = f.arity
    lo, hi = _check(cfg, dim, min_population=1)
    streams = [RngStream(cfg.seed, i) for i in range(cfg.population)]
    best, best_val = None, float("inf")
    initial_best = float("inf")
    trace, mean_trace = [], []
    for it in range(cfg.iterations):
        x = _init_positions(streams, lo, hi, dim)
        values = _evaluate(f, x, cfg.workers)
        if it == 0:
            initial_best = float(values.min())
        for i in range(cfg.population):
            if values[i] < best_val:
                best_val = float(values[i])
                best = x[i].copy()
        trace.append(best_val)
        mean_trace.append(float(values.mean()))
        if on_iteration:
            on_iteration(it, best.copy(), best_val)
    return OptResult(best, best_val, trace, mean_trace,
                     evals_used=cfg.population * cfg.iterations,
                     initial_best=initial_best)


MINIMIZERS = {
    "pso": pso_minimize,
    "woa": woa_minimize,
    "aco": aco_minimize,
    "random": random_search,
}


def sphere(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum(x * x))


def rastrigin(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def make_objective(cfg: ModelConfig, batch: list[tuple[TokenIds, TokenIds]],
                   emb: EmbeddingMatrix) -> Objective:
    """Mean teacher-forced loss over a batch, as a search objective."""
    if not batch:
        raise EmptyBatchError("objective needs at least one (src, tgt) pair")

    def fn(p):
        return sum(pair_loss(p, src, tgt, emb, cfg) for src, tgt in batch) / len(batch)

    return Objective(fn, arity=param_count(cfg))


def write_trace_csv(result: OptResult, path, val_trace: list[float] | None = None) -> None:
    """Per-iteration loss curve: iteration,best_value,mean_value[,val_value]."""
    header = "iteration,best_value,mean_value"
    if val_trace is not None:
        if len(val_trace) != len(result.trace):
            raise BadConfigError("validation trace length differs from trace")
        header += ",val_value"
    lines = [header]
    for i, (b, m) in enumerate(zip(result.trace, result.mean_trace)):
        row = f"{i},{b!r},{m!r}"
        if val_trace is not None:
            row += f",{val_trace[i]!r}"
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
