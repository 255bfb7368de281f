"""Experiment orchestration: run every selector across the budget grid on
test instances, evaluate with paired Monte Carlo rollouts, and emit CSV
reports plus run metadata."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .diffusion import SeedSet
from .graph import (Graph, Instance, InstancePool, ProbabilityModel,
                    UniformProbabilities, build_instance_pool, load_edge_list)
from .metrics import FairnessConfig, evaluate_seed_set
from .seeding import derive_seed
from .trainer import TrainConfig, TrainedPolicy, select_seed_set, train

ALGORITHMS = ("rl", "random", "highdegree", "pagerank", "parity", "fairpagerank")

RESULT_COLUMNS = ("algorithm", "budget", "instance", "profit_mean",
                  "profit_std", "fairness_mean", "tau_ok", "seed_size",
                  "seed_cost")
TIMING_COLUMNS = ("algorithm", "budget", "instance", "seconds")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    directed: bool
    prob_model: ProbabilityModel = UniformProbabilities(0.1)
    budgets: tuple[float, ...] = (500, 1000, 1500, 2000, 2500, 3000)
    m: int = 1000
    algorithms: tuple[str, ...] = ALGORITHMS
    train: TrainConfig = field(default_factory=lambda: TrainConfig(budget=1000.0))
    n_train: int = 12
    n_test: int = 8
    nodes_per_instance: int = 500
    cost_range: tuple[float, float] = (1.0, 100.0)
    benefit_range: tuple[float, float] = (1.0, 100.0)
    minority_fraction: float = 0.2
    fairness: FairnessConfig = field(default_factory=FairnessConfig)
    out_dir: str = "results"
    seed: int = 0

    def validate(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms: {sorted(unknown)}")
        if any(b <= 0 for b in self.budgets) or \
                list(self.budgets) != sorted(self.budgets):
            raise ValueError("budgets must be positive and ascending")


@dataclass(frozen=True)
class ExperimentResult:
    algorithm: str
    budget: float
    instance: str
    profit_mean: float
    profit_std: float
    fairness_mean: float
    tau_ok: bool
    seed_size: int
    seed_cost: float
    seconds: float


def build_pool(cfg: ExperimentConfig, source: Graph | None = None) -> InstancePool:
    if source is None:
        source = load_edge_list(cfg.dataset, cfg.directed)
    return build_instance_pool(
        source, cfg.n_train, cfg.n_test, cfg.nodes_per_instance,
        derive_seed(cfg.seed, "pool"), prob_model=cfg.prob_model,
        cost_range=cfg.cost_range, benefit_range=cfg.benefit_range,
        minority_fraction=cfg.minority_fraction)


def _select(algorithm: str, instance: Instance, budget: float,
            policy: TrainedPolicy | None, cfg: ExperimentConfig) -> SeedSet:
    g, attrs, parts = instance.graph, instance.attrs, instance.parts
    if algorithm == "rl":
        if policy is None:
            raise ValueError("rl selection requires a trained policy")
        return select_seed_set(policy, instance, budget)
    if algorithm == "random":
        rng = np.random.default_rng(
            derive_seed(cfg.seed, "random-baseline", instance.id, int(budget)))
        return baselines.random_seeds(g, attrs, budget, rng)
    if algorithm == "highdegree":
        return baselines.high_degree_seeds(g, attrs, budget)
    if algorithm == "pagerank":
        return baselines.pagerank_seeds(g, attrs, budget)
    if algorithm == "parity":
        return baselines.parity_seeds(g, attrs, parts, budget)
    if algorithm == "fairpagerank":
        return baselines.fair_pagerank_seeds(g, attrs, parts, budget)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_experiment(cfg: ExperimentConfig, pool: InstancePool | None = None,
                   policy: TrainedPolicy | None = None
                   ) -> list[ExperimentResult]:
    """Evaluate each (algorithm, budget, test instance) triple.

    Rollout streams are derived from (seed, instance, budget) only, so all
    algorithms are compared under common random numbers. Timing covers seed
    selection only; Monte Carlo evaluation is shared and excluded.
    """
    cfg.validate()
    if pool is None:
        pool = build_pool(cfg)
    if "rl" in cfg.algorithms and policy is None:
        policy = train(cfg.train, pool)
    results = []
    for instance in pool.test:
        for budget in cfg.budgets:
            eval_seed = derive_seed(cfg.seed, "eval", instance.id, int(budget))
            for algorithm in cfg.algorithms:
                t0 = time.perf_counter()
                seeds = _select(algorithm, instance, budget, policy, cfg)
                elapsed = time.perf_counter() - t0
                assert seeds.total_cost <= budget + 1e-9, "budget violated"
                report, profits, _ = evaluate_seed_set(
                    instance.graph, instance.attrs, instance.parts, seeds,
                    cfg.m, eval_seed, cfg.fairness)
                results.append(ExperimentResult(
                    algorithm=algorithm,
                    budget=float(budget),
                    instance=instance.id,
                    profit_mean=report.profit,
                    profit_std=float(profits.std()),
                    fairness_mean=report.fairness,
                    tau_ok=report.tau_ok,
                    seed_size=len(seeds),
                    seed_cost=seeds.total_cost,
                    seconds=elapsed,
                ))
    results.sort(key=lambda r: (r.algorithm, r.budget, r.instance))
    return results


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(results: list[ExperimentResult], out_dir: str,
                meta: dict | None = None) -> dict[str, str]:
    """Write results.csv, timings.csv, summary.csv, and run_meta.json.

    Wall-clock seconds live in timings.csv so results.csv stays
    byte-reproducible for identical configs and seeds.
    """
    os.makedirs(out_dir, exist_ok=True)
    rows = sorted(results, key=lambda r: (r.algorithm, r.budget, r.instance))
    paths = {
        "results": os.path.join(out_dir, "results.csv"),
        "timings": os.path.join(out_dir, "timings.csv"),
        "summary": os.path.join(out_dir, "summary.csv"),
        "meta": os.path.join(out_dir, "run_meta.json"),
    }
    with open(paths["results"], "w") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(getattr(r, c)) for c in RESULT_COLUMNS) + "\n")
    with open(paths["timings"], "w") as fh:
        fh.write(",".join(TIMING_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(getattr(r, c)) for c in TIMING_COLUMNS) + "\n")
    groups: dict[tuple[str, float], list[ExperimentResult]] = {}
    for r in rows:
        groups.setdefault((r.algorithm, r.budget), []).append(r)
    with open(paths["summary"], "w") as fh:
        fh.write("algorithm,budget,instances,profit_mean,fairness_mean,"
                 "seed_size_mean,seed_cost_mean\n")
        for (alg, budget), grp in sorted(groups.items()):
            fh.write(",".join([
                alg, _fmt(budget), str(len(grp)),
                _fmt(float(np.mean([g.profit_mean for g in grp]))),
                _fmt(float(np.mean([g.fairness_mean for g in grp]))),
                _fmt(float(np.mean([g.seed_size for g in grp]))),
                _fmt(float(np.mean([g.seed_cost for g in grp]))),
            ]) + "\n")
    with open(paths["meta"], "w") as fh:
        json.dump(meta or {}, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return paths
