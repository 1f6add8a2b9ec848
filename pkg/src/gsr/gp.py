"""Genetic-programming search over sets of basis functions.

Each individual holds ``M_phi`` feature-side and ``M_psi`` target-side basis
matrices. Fitness is the residual of the constrained Lasso fit of
``sum beta_j psi_j(y) = sum alpha_i phi_i(x)``. Every generation keeps the
``n_p`` best individuals and refills the population by crossover, mutation
or fresh random individuals drawn from a scheduled sublibrary.
"""

from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .admm import AdmmConfig, AdmmInputError, FitResult, solve_admm
from .benchmarks import BenchmarkSpec, sample_dataset
from .encoding import (
    POLY_TRANSFORMS,
    TRIG_TRANSFORMS,
    BasisPhi,
    BasisPsi,
    MappingTable,
    Transform,
    constant_phi,
    random_phi,
    random_psi,
)
from .evaluate import Dataset, _phi_columns, column_ok

INF = float("inf")


@dataclass(frozen=True)
class GpConfig:
    n_pop: int = 30
    n_survivors: int = 10
    m_phi: int = 15
    m_psi: int | None = None  # None: benchmark default (1, or 2 for SymSet-11)
    mutate_count: int = 3
    rmse_tol0: float = 1e-6
    relax_factor: float = math.sqrt(10.0)
    relax_period: int = 1500
    max_generations: int = 20000
    wall_clock_budget: float = 900.0
    seed: int = 0
    sgsr_mode: bool = False
    max_repairs: int = 10
    beta_floor: float = 1e-6
    admm: AdmmConfig = field(default_factory=AdmmConfig)

    def __post_init__(self):
        counts = (self.n_pop, self.n_survivors, self.m_phi, self.mutate_count,
                  self.relax_period, self.max_generations)
        if any(int(c) < 1 for c in counts) or (self.m_psi is not None and self.m_psi < 1):
            raise ValueError("all counts must be positive")
        if self.n_survivors >= self.n_pop:
            raise ValueError("n_survivors must be smaller than n_pop")
        if self.rmse_tol0 <= 0 or self.relax_factor < 1 or self.wall_clock_budget <= 0:
            raise ValueError("bad threshold or budget")

    def threshold(self, k: int) -> float:
        return self.rmse_tol0 * self.relax_factor ** (k // self.relax_period)


@dataclass
class Individual:
    phis: tuple[BasisPhi, ...]
    psis: tuple[BasisPsi, ...]
    born: int = 0
    fit: FitResult | None = field(default=None, repr=False)
    fitness: float = INF

    def key(self) -> tuple:
        return tuple(m.key for m in self.phis), tuple(m.key for m in self.psis)


# -- sublibrary schedule ------------------------------------------------------

def _stage_x(k: int) -> str:
    if k <= 1500:
        pos = (k - 1) % 70 + 1
        return "full" if pos <= 15 else "poly" if pos <= 40 else "trig"
    pos = (k - 1501) % 1500
    return "full" if pos < 500 else "poly" if pos < 1000 else "trig"


def _stage_y(k: int) -> str:
    return "poly" if (k - 1) % 20 < 10 else "full"


def _sub(table: MappingTable, stage: str) -> MappingTable:
    if stage == "full":
        return table.full()
    return table.restrict(POLY_TRANSFORMS if stage == "poly" else TRIG_TRANSFORMS)


def schedule_sublibrary(k: int, lib_x: MappingTable, lib_y: MappingTable
                        ) -> tuple[MappingTable, MappingTable]:
    """Sub-tables active at generation ``k`` (1-based)."""
    if k < 1:
        raise ValueError("generations are numbered from 1")
    return _sub(lib_x, _stage_x(k)), _sub(lib_y, _stage_y(k))


# -- fitness ------------------------------------------------------------------

class Evaluator:
    """Fitness of individuals on one dataset, with column and fit caches.

    Cached values depend only on the basis (or the ordered basis set), so
    caching never changes results.
    """

    def __init__(self, ds: Dataset, table_x: MappingTable, table_y: MappingTable, cfg: GpConfig,
                 cache_limit: int = 200_000):
        self.ds = ds
        self.table_x = table_x.full()
        self.table_y = table_y.full()
        self.cfg = cfg
        self.cache_limit = cache_limit
        self._cols: dict = {}
        self._fits: dict = {}
        self.n_solves = 0

    def _column(self, m) -> np.ndarray | None:
        k = (type(m) is BasisPsi, m.key)
        col = self._cols.get(k, False)
        if col is False:
            if len(self._cols) > self.cache_limit:
                self._cols.clear()
            if isinstance(m, BasisPhi):
                col = _phi_columns(m, self.table_x, self.ds.features)
            else:
                col = np.ones(self.ds.n)
                with np.errstate(all="ignore"):
                    for c in m.codes:
                        t = self.table_y.transforms[c]
                        if t is not Transform.ONE:
                            col = col * t(self.ds.targets)
            col = col if column_ok(col) else None
            self._cols[k] = col
        return col

    def repair(self, ind: Individual, sub_x: MappingTable, sub_y: MappingTable,
               rng: np.random.Generator) -> Individual:
        """Regenerate bases whose columns are non-finite; fall back to One."""
        phis, psis = list(ind.phis), list(ind.psis)
        for j, m in enumerate(phis):
            tries = 0
            while self._column(m) is None:
                tries += 1
                m = random_phi(sub_x, rng) if tries <= self.cfg.max_repairs else constant_phi()
            phis[j] = m
        if not self.cfg.sgsr_mode:
            for j, m in enumerate(psis):
                tries = 0
                while self._column(m) is None:
                    tries += 1
                    m = random_psi(sub_y, rng) if tries <= self.cfg.max_repairs else BasisPsi([0])
                psis[j] = m
        return replace(ind, phis=tuple(phis), psis=tuple(psis), fit=None, fitness=INF)

    def design(self, ind: Individual) -> np.ndarray:
        X = np.column_stack([self._column(m) for m in ind.phis])
        Y = np.column_stack([self._column(m) for m in ind.psis])
        return np.hstack([X, -Y])

    def evaluate(self, ind: Individual) -> Individual:
        """Attach the fit and fitness of an already-repaired individual."""
        key = ind.key()
        hit = self._fits.get(key)
        if hit is None:
            if len(self._fits) > self.cache_limit:
                self._fits.clear()
            hit = self._solve(ind)
            self._fits[key] = hit
        ind.fit, ind.fitness = hit
        return ind

    def _solve(self, ind: Individual) -> tuple[FitResult | None, float]:
        if all(m.is_constant() for m in ind.psis):
            return None, INF
        cols = [self._column(m) for m in (*ind.phis, *ind.psis)]
        if any(c is None for c in cols):
            return None, INF
        self.n_solves += 1
        try:
            fit = solve_admm(self.design(ind), self.cfg.admm, n_phi=len(ind.phis))
        except (AdmmInputError, np.linalg.LinAlgError):
            return None, INF
        if not np.isfinite(fit.residual_rmse) or np.abs(fit.beta).max() < self.cfg.beta_floor:
            return fit, INF
        # residual per unit target-side weight: relations that merely cancel
        # feature columns against each other carry almost no beta
        return fit, fit.residual_rmse / float(np.linalg.norm(fit.beta))

    def fitness(self, ind: Individual, sub_x: MappingTable, sub_y: MappingTable,
                rng: np.random.Generator) -> Individual:
        return self.evaluate(self.repair(ind, sub_x, sub_y, rng))


# -- variation operators ------------------------------------------------------

_IDENTITY_PSI = BasisPsi([1])


def random_individual(sub_x: MappingTable, sub_y: MappingTable, cfg: GpConfig, m_psi: int,
                      rng: np.random.Generator, born: int = 0) -> Individual:
    phis = tuple(random_phi(sub_x, rng) for _ in range(cfg.m_phi))
    if cfg.sgsr_mode:
        psis = (_IDENTITY_PSI,)
    else:
        psis = tuple(random_psi(sub_y, rng) for _ in range(m_psi))
    return Individual(phis, psis, born)


def crossover(a: Individual, b: Individual, rng: np.random.Generator, born: int = 0) -> Individual:
    """Fill every slot by a uniform draw from both parents' bases of that side."""
    pool_phi = a.phis + b.phis
    pool_psi = a.psis + b.psis
    phis = tuple(pool_phi[i] for i in rng.integers(len(pool_phi), size=len(a.phis)))
    psis = tuple(pool_psi[i] for i in rng.integers(len(pool_psi), size=len(a.psis)))
    return Individual(phis, psis, born)


def mutate(parent: Individual, sub_x: MappingTable, sub_y: MappingTable, count: int,
           rng: np.random.Generator, born: int = 0, fixed_psi: bool = False) -> Individual:
    """Replace ``count`` distinct slots (drawn over phi and psi slots) with new bases."""
    n_phi = len(parent.phis)
    n_slots = n_phi + (0 if fixed_psi else len(parent.psis))
    slots = rng.choice(n_slots, size=min(count, n_slots), replace=False)
    phis, psis = list(parent.phis), list(parent.psis)
    for s in sorted(int(s) for s in slots):
        if s < n_phi:
            phis[s] = random_phi(sub_x, rng)
        else:
            psis[s - n_phi] = random_psi(sub_y, rng)
    return Individual(tuple(phis), tuple(psis), born)


def rank(pop: list[Individual]) -> list[int]:
    """Indices sorted by fitness, then age (older first), then position."""
    return sorted(range(len(pop)), key=lambda i: (pop[i].fitness, pop[i].born, i))


def step_generation(pop: list[Individual], ev: Evaluator, cfg: GpConfig, k: int,
                    rng: np.random.Generator, m_psi: int) -> list[Individual]:
    survivors = [pop[i] for i in rank(pop)[: cfg.n_survivors]]
    sub_x, sub_y = schedule_sublibrary(k, ev.table_x, ev.table_y)
    out = list(survivors)
    while len(out) < cfg.n_pop:
        u = int(rng.integers(1, 5))
        if u == 1:
            i, j = rng.choice(len(survivors), size=2, replace=False)
            child = crossover(survivors[i], survivors[j], rng, born=k)
        elif u == 2:
            parent = survivors[int(rng.integers(len(survivors)))]
            child = mutate(parent, sub_x, sub_y, cfg.mutate_count, rng, born=k,
                           fixed_psi=cfg.sgsr_mode)
        else:
            child = random_individual(sub_x, sub_y, cfg, m_psi, rng, born=k)
        out.append(ev.fitness(child, sub_x, sub_y, rng))
    return out


# -- driver -------------------------------------------------------------------

@dataclass
class RunResult:
    best: Individual
    fit: FitResult | None
    trace: list[dict]
    converged: bool
    generations: int
    elapsed: float
    dataset: Dataset
    table_x: MappingTable
    table_y: MappingTable
    stop_reason: str

    @property
    def best_fitness(self) -> float:
        return self.best.fitness


def gp_rng(seed: int, name: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), 2, zlib.crc32(name.encode())])
    return np.random.Generator(np.random.Philox(ss))


def run_on_dataset(ds: Dataset, table_x: MappingTable, table_y: MappingTable, cfg: GpConfig,
                   m_psi: int = 1, name: str = "", on_generation: Callable | None = None
                   ) -> RunResult:
    """Run the GP loop on a dataset until the active threshold or a budget is hit."""
    t0 = time.perf_counter()
    rng = gp_rng(cfg.seed, name)
    ev = Evaluator(ds, table_x, table_y, cfg)
    sub_x, sub_y = schedule_sublibrary(1, ev.table_x, ev.table_y)
    pop = [ev.fitness(random_individual(sub_x, sub_y, cfg, m_psi, rng), sub_x, sub_y, rng)
           for _ in range(cfg.n_pop)]
    trace: list[dict] = []
    best = pop[rank(pop)[0]]
    reason = "threshold" if best.fitness < cfg.threshold(0) else ""
    k = 0
    while not reason:
        if k >= cfg.max_generations:
            reason = "max_generations"
            break
        if time.perf_counter() - t0 > cfg.wall_clock_budget:
            reason = "budget"
            break
        k += 1
        pop = step_generation(pop, ev, cfg, k, rng, m_psi)
        best = pop[rank(pop)[0]]
        thr = cfg.threshold(k)
        rec = {"k": k, "best": best.fitness, "threshold": thr,
               "stage_x": _stage_x(k), "stage_y": _stage_y(k)}
        trace.append(rec)
        if on_generation is not None:
            on_generation(rec)
        if best.fitness < thr:
            reason = "threshold"
    return RunResult(best, best.fit, trace, reason == "threshold", k,
                     time.perf_counter() - t0, ds, ev.table_x, ev.table_y, reason)


def run(bench: BenchmarkSpec, cfg: GpConfig, ds: Dataset | None = None,
        on_generation: Callable | None = None) -> RunResult:
    """Run GSR (or s-GSR when ``cfg.sgsr_mode``) on a registered benchmark.

    The training set is drawn with the run's seed unless ``ds`` is given.
    """
    table_x, table_y = bench.tables()
    ds = sample_dataset(bench, "train", cfg.seed) if ds is None else ds
    m_psi = 1 if cfg.sgsr_mode else (cfg.m_psi or bench.m_psi)
    return run_on_dataset(ds, table_x, table_y, cfg, m_psi, bench.name, on_generation)
