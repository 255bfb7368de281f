"""Independent Cascade simulation and exact small-graph oracles.

simulate_ic runs one cascade; estimate_spread_and_benefit averages m
independent rollouts on counter-derived streams. The exact_* functions
enumerate every live-arc realization (feasible up to 20 arcs) and serve as
test oracles for the Monte Carlo path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CommunityPartition, Graph, NodeAttrs
from .seeding import RolloutStreams


@dataclass(frozen=True)
class SeedSet:
    nodes: tuple[int, ...]  # sorted, unique
    total_cost: float

    @classmethod
    def build(cls, nodes, attrs: NodeAttrs) -> "SeedSet":
        ids = tuple(sorted(int(v) for v in nodes))
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate seed node")
        if ids and (ids[0] < 0 or ids[-1] >= len(attrs.cost)):
            raise ValueError("seed node out of range")
        return cls(nodes=ids, total_cost=float(attrs.cost[list(ids)].sum()))

    @classmethod
    def empty(cls) -> "SeedSet":
        return cls(nodes=(), total_cost=0.0)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, v: int) -> bool:
        return v in self.nodes


@dataclass(frozen=True)
class InfluencedSet:
    mask: np.ndarray  # bool over V
    count: int

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "InfluencedSet":
        return cls(mask=mask, count=int(mask.sum()))


def simulate_ic(g: Graph, s: SeedSet, rng: np.random.Generator) -> InfluencedSet:
    """One cascade rollout.

    Rounds proceed until no activation; within a round, newly active nodes
    attempt their out-neighbors in ascending node id / adjacency order, so
    the rollout is a pure function of the generator state.
    """
    active = np.zeros(g.n, dtype=bool)
    if not s.nodes:
        return InfluencedSet.from_mask(active)
    frontier = np.array(s.nodes, dtype=np.int64)
    active[frontier] = True
    indptr, indices, probs = g.indptr, g.indices, g.probs
    while frontier.size:
        if frontier.size == 1:
            f = frontier[0]
            pos = np.arange(indptr[f], indptr[f + 1])
        else:
            # flat positions of all out-arcs of the frontier, frontier order
            starts = indptr[frontier]
            counts = indptr[frontier + 1] - starts
            offs = np.repeat(starts, counts)
            pos = np.arange(offs.size) + offs \
                - np.repeat(np.cumsum(counts) - counts, counts)
        if pos.size == 0:
            break
        targets = indices[pos]
        hit = (rng.random(pos.size) < probs[pos]) & ~active[targets]
        prev = active.copy()
        active[targets[hit]] = True
        frontier = np.flatnonzero(active != prev)
    return InfluencedSet.from_mask(active)


def estimate_spread_and_benefit(g: Graph, attrs: NodeAttrs, s: SeedSet,
                                m: int, seed: int
                                ) -> tuple[float, float, np.ndarray]:
    """Monte Carlo means of spread and earned benefit over m rollouts.

    Returns (mean spread, mean benefit, per-rollout benefits). Rollout i
    always uses rollout_rng(seed, i), so results do not depend on execution
    order.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    streams = RolloutStreams(seed)
    spreads = np.empty(m)
    benefits = np.empty(m)
    for i in range(m):
        infl = simulate_ic(g, s, streams.at(i))
        spreads[i] = infl.count
        benefits[i] = attrs.benefit[infl.mask].sum()
    return float(spreads.mean()), float(benefits.mean()), benefits


MAX_ORACLE_ARCS = 20


def _enumerate_reach(g: Graph, s: SeedSet) -> tuple[np.ndarray, np.ndarray]:
    """All live-arc realizations: (probability, reached-node bitmask) arrays.

    Each stored arc is an independent trial, which for undirected graphs
    means both directions of an edge are separate trials (matching the
    cascade's independent activation attempts).
    """
    src, dst, p = g.arc_arrays()
    n_arcs = len(src)
    if n_arcs > MAX_ORACLE_ARCS:
        raise ValueError(
            f"exact oracle limited to {MAX_ORACLE_ARCS} arcs, graph has {n_arcs}")
    if g.n > 62:
        raise ValueError("exact oracle limited to 62 nodes")
    subsets = np.arange(1 << n_arcs, dtype=np.int64)
    prob = np.ones(len(subsets))
    live = [(subsets >> a) & 1 for a in range(n_arcs)]
    for a in range(n_arcs):
        prob *= np.where(live[a] == 1, p[a], 1.0 - p[a])
    seed_mask = 0
    for v in s.nodes:
        seed_mask |= 1 << int(v)
    reach = np.full(len(subsets), seed_mask, dtype=np.int64)
    for _ in range(g.n):
        before = reach
        for a in range(n_arcs):
            cond = live[a] & (reach >> int(src[a])) & 1
            reach = reach | (cond << int(dst[a]))
        if np.array_equal(before, reach):
            break
    return prob, reach


def exact_expected_profit(g: Graph, attrs: NodeAttrs, s: SeedSet) -> float:
    """Exact E[benefit(I(S))] - cost(S) by live-arc enumeration."""
    prob, reach = _enumerate_reach(g, s)
    expected_benefit = 0.0
    for v in range(g.n):
        expected_benefit += attrs.benefit[v] * prob[(reach >> v) & 1 == 1].sum()
    return float(expected_benefit - s.total_cost)


def exact_expected_shaped_objective(g: Graph, attrs: NodeAttrs,
                                    parts: CommunityPartition, s: SeedSet,
                                    weight: float) -> float:
    """Exact E[benefit] - cost + weight * E[min-community benefit ratio]."""
    prob, reach = _enumerate_reach(g, s)
    reached_bit = np.stack([(reach >> v) & 1 for v in range(g.n)])  # (n, 2^E)
    expected_benefit = float(attrs.benefit @ reached_bit @ prob)
    ratios = np.stack([
        (attrs.benefit[m] @ reached_bit[m]) / t
        for m, t in zip(parts.members, parts.total_benefit)
    ])
    expected_fairness = float(ratios.min(axis=0) @ prob)
    return expected_benefit - s.total_cost + weight * expected_fairness
