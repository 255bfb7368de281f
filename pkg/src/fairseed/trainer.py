"""Deep Q-learning seed selection: episode loop, epsilon-greedy choice over
budget-feasible candidates, FIFO replay, periodic minibatch Bellman updates,
and greedy inference on trained policies."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .diffusion import SeedSet
from .embedding import (EmbeddingParams, NodeEmbeddings, compute_embeddings,
                        init_embedding_params)
from .graph import Graph, Instance, InstancePool, NodeAttrs
from .metrics import FairnessConfig, MetricReport, evaluate_seed_set, shaped_reward
from .qnet import QNetwork, adam_step, encode_state, encode_states, \
    q_forward_batch, q_loss_and_grad
from .seeding import derive_seed

CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file missing, malformed, or architecture mismatch."""


@dataclass(frozen=True)
class TrainConfig:
    budget: float
    episodes: int = 720
    learning_rate: float = 0.001
    discount: float = 0.95
    epsilon_start: float = 1.0
    epsilon_min: float = 0.05
    epsilon_decay: float = 0.995
    replay_capacity: int = 10_000
    batch_size: int = 32
    update_period: int = 2
    fairness_weight: float = 1.0
    d_emb: int = 64
    t_emb: int = 3
    seed: int = 0

    def validate(self) -> None:
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if not 0.0 <= self.discount < 1.0:
            raise ValueError("discount must lie in [0, 1)")
        if not 0.0 < self.epsilon_min <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 < epsilon_min <= epsilon_start <= 1")
        if not 0.0 < self.epsilon_decay <= 1.0:
            raise ValueError("epsilon_decay must lie in (0, 1]")
        if self.batch_size > self.replay_capacity:
            raise ValueError("batch_size exceeds replay capacity")
        if self.update_period < 1:
            raise ValueError("update_period must be >= 1")
        if self.fairness_weight < 0:
            raise ValueError("fairness_weight must be nonnegative")
        if self.episodes < 1 or self.d_emb < 1 or self.t_emb < 1:
            raise ValueError("episodes, d_emb, and t_emb must be >= 1")


@dataclass(frozen=True)
class Transition:
    instance_id: str
    seeds_before: tuple[int, ...]
    action: int
    reward: float
    seeds_after: tuple[int, ...]
    terminal: bool
    budget_after: float  # remaining budget once the action's cost is paid


class ReplayBuffer:
    """Bounded FIFO store of transitions."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)

    def add(self, t: Transition) -> None:
        self._items.append(t)

    def extend(self, ts) -> None:
        self._items.extend(ts)

    def sample(self, k: int, rng: np.random.Generator) -> list[Transition]:
        idx = rng.integers(len(self._items), size=k)
        return [self._items[i] for i in idx]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


@dataclass
class TrainedPolicy:
    """Everything inference needs: the value net plus the fixed embedding
    parameters it was trained against."""

    net: QNetwork
    embed: EmbeddingParams
    t_emb: int

    def embeddings_for(self, instance: Instance) -> NodeEmbeddings:
        return compute_embeddings(instance.graph, instance.attrs, self.embed,
                                  self.t_emb)


def feasible_candidates(n: int, selected: set[int], excluded: set[int],
                        cost: np.ndarray, remaining: float) -> np.ndarray:
    """Unselected, unexcluded nodes whose cost fits the remaining budget."""
    mask = cost <= remaining
    blocked = list(selected | excluded)
    if blocked:
        mask = mask.copy()
        mask[blocked] = False
    return np.flatnonzero(mask)


def epsilon_greedy_select(net: QNetwork, g: Graph, selected: set[int],
                          excluded: set[int], epsilon: float,
                          h: NodeEmbeddings, remaining: float,
                          attrs: NodeAttrs, budget: float, k_max: int,
                          rng: np.random.Generator) -> int | None:
    """Pick a feasible candidate, or None when no candidate fits.

    With probability epsilon a uniform random candidate, otherwise the
    Q-argmax (ties to the lowest node id).
    """
    cands = feasible_candidates(g.n, selected, excluded, attrs.cost, remaining)
    if len(cands) == 0:
        return None
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(cands[rng.integers(len(cands))])
    states = encode_states(cands, h, len(selected), remaining, attrs, budget, k_max)
    qvals = q_forward_batch(net, states)
    return int(cands[int(np.argmax(qvals))])  # argmax takes the first (lowest id) tie


def run_episode(net: QNetwork, instance: Instance, h: NodeEmbeddings,
                config: TrainConfig, epsilon: float,
                rng: np.random.Generator) -> list[Transition]:
    """One seed-construction episode; returns the emitted transitions."""
    g, attrs, parts = instance.graph, instance.attrs, instance.parts
    budget = config.budget
    c_min = float(attrs.cost.min())
    k_max = max(1, int(budget // c_min))
    selected: list[int] = []
    selected_set: set[int] = set()
    excluded: set[int] = set()
    remaining = budget
    r_prev = 0.0
    transitions: list[Transition] = []
    while remaining >= c_min:
        action = epsilon_greedy_select(net, g, selected_set, excluded, epsilon,
                                       h, remaining, attrs, budget, k_max, rng)
        if action is None:
            break
        if attrs.cost[action] > remaining:
            # the selector filters on feasibility, so this only fires if
            # feasibility shifted mid-evaluation; kept for exactness
            excluded.add(action)
            continue
        remaining -= float(attrs.cost[action])
        assert remaining >= 0.0, "budget overdraw"
        before = tuple(selected)
        selected.append(action)
        selected_set.add(action)
        new_set = SeedSet.build(selected, attrs)
        r_total = shaped_reward(g, attrs, parts, new_set,
                                config.fairness_weight, rng)
        transitions.append(Transition(
            instance_id=instance.id,
            seeds_before=before,
            action=action,
            reward=r_total - r_prev,
            seeds_after=tuple(sorted(selected)),
            terminal=remaining <= 0.0,
            budget_after=remaining,
        ))
        r_prev = r_total
    return transitions


def _bellman_targets(net: QNetwork, batch: list[Transition],
                     instances: dict[str, Instance],
                     embeddings: dict[str, NodeEmbeddings],
                     k_max_by_id: dict[str, int],
                     config: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Encode batch states and compute one-step bootstrapped targets.

    The next-state max ranges over unselected candidates feasible under the
    transition's stored remaining budget; when that set is empty the
    transition is treated as terminal.
    """
    states = []
    targets = []
    for t in batch:
        inst = instances[t.instance_id]
        h = embeddings[t.instance_id]
        k_max = k_max_by_id[t.instance_id]
        cost = inst.attrs.cost
        pre_budget = t.budget_after + float(cost[t.action])
        states.append(encode_state(t.action, h, len(t.seeds_before), pre_budget,
                                   inst.attrs, config.budget, k_max))
        y = t.reward
        if not t.terminal:
            cands = feasible_candidates(inst.graph.n, set(t.seeds_after), set(),
                                        cost, t.budget_after)
            if len(cands):
                nxt = encode_states(cands, h, len(t.seeds_after), t.budget_after,
                                    inst.attrs, config.budget, k_max)
                y += config.discount * float(q_forward_batch(net, nxt).max())
        targets.append(y)
    return np.array(states), np.array(targets)


def train(config: TrainConfig, pool: InstancePool,
          progress=None) -> TrainedPolicy:
    """Full training loop over the pool's train instances.

    `progress`, when given, is called once per episode with a dict holding
    episode index, epsilon, buffer size, episode shaped return, and the
    minibatch loss (None on episodes without a gradient step).
    """
    config.validate()
    if not pool.train:
        raise ValueError("empty training pool")
    instances = {inst.id: inst for inst in pool.train}
    embed = init_embedding_params(config.d_emb, derive_seed(config.seed, "embed"))
    # embedding params are fixed; cache per-instance embeddings
    embeddings = {
        inst.id: compute_embeddings(inst.graph, inst.attrs, embed, config.t_emb)
        for inst in pool.train
    }
    k_max_by_id = {
        inst.id: max(1, int(config.budget // float(inst.attrs.cost.min())))
        for inst in pool.train
    }
    in_dim = config.d_emb + 3
    net = QNetwork.init(in_dim, derive_seed(config.seed, "qnet"))
    buffer = ReplayBuffer(config.replay_capacity)
    rng = np.random.default_rng(derive_seed(config.seed, "loop"))
    train_ids = sorted(instances)
    for episode in range(1, config.episodes + 1):
        epsilon = max(config.epsilon_start * config.epsilon_decay ** episode,
                      config.epsilon_min)
        inst = instances[train_ids[rng.integers(len(train_ids))]]
        transitions = run_episode(net, inst, embeddings[inst.id], config,
                                  epsilon, rng)
        buffer.extend(transitions)
        loss = None
        if episode % config.update_period == 0 and len(buffer) >= config.batch_size:
            batch = buffer.sample(config.batch_size, rng)
            states, targets = _bellman_targets(net, batch, instances, embeddings,
                                               k_max_by_id, config)
            loss, grads = q_loss_and_grad(net, states, targets)
            adam_step(net, grads, config.learning_rate)
        if progress is not None:
            progress({
                "episode": episode,
                "epsilon": epsilon,
                "buffer_size": len(buffer),
                "loss": loss,
                "shaped_return": sum(t.reward for t in transitions),
            })
    return TrainedPolicy(net=net, embed=embed, t_emb=config.t_emb)


def select_seed_set(policy: TrainedPolicy, instance: Instance,
                    budget: float) -> SeedSet:
    """Greedy (epsilon=0) budget-constrained selection; deterministic."""
    g, attrs = instance.graph, instance.attrs
    h = policy.embeddings_for(instance)
    c_min = float(attrs.cost.min())
    k_max = max(1, int(budget // c_min))
    rng = np.random.default_rng(0)  # unused at epsilon=0
    selected: list[int] = []
    selected_set: set[int] = set()
    remaining = budget
    while remaining >= c_min:
        action = epsilon_greedy_select(policy.net, g, selected_set, set(), 0.0,
                                       h, remaining, attrs, budget, k_max, rng)
        if action is None:
            break
        remaining -= float(attrs.cost[action])
        selected.append(action)
        selected_set.add(action)
    return SeedSet.build(selected, attrs)


def infer_seed_set(policy: TrainedPolicy, instance: Instance, budget: float,
                   m: int = 1000, eval_seed: int = 0,
                   fairness: FairnessConfig = FairnessConfig()
                   ) -> tuple[SeedSet, MetricReport]:
    """Greedy selection plus a Monte Carlo metric report for the result."""
    seeds = select_seed_set(policy, instance, budget)
    report, _, _ = evaluate_seed_set(instance.graph, instance.attrs,
                                     instance.parts, seeds, m, eval_seed,
                                     fairness)
    return seeds, report


def save_checkpoint(path: str, policy: TrainedPolicy, config: TrainConfig) -> None:
    """Versioned npz dump of the net, Adam state, and embedding parameters."""
    net = policy.net
    meta = {
        "version": CHECKPOINT_VERSION,
        "in_dim": net.in_dim,
        "hidden": net.hidden_dim,
        "d_emb": policy.embed.dim,
        "t_emb": policy.t_emb,
        "config": {k: v for k, v in vars(config).items()},
    }
    arrays = {
        "w1": net.w1, "b1": net.b1, "w2": net.w2, "b2": net.b2,
        "step": np.array([net.step]),
        "embed_w_feat": policy.embed.w_feat,
        "embed_w_agg": policy.embed.w_agg,
        "embed_w_edge": policy.embed.w_edge,
        "meta": np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
    }
    for name in net.PARAM_NAMES:
        m, v = net.moments[name]
        arrays[f"adam_m_{name}"] = m
        arrays[f"adam_v_{name}"] = v
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path: str, expect_d_emb: int | None = None
                    ) -> tuple[TrainedPolicy, dict]:
    """Load a checkpoint; raises CheckpointError on any mismatch."""
    try:
        data = np.load(path)
        meta = json.loads(bytes(data["meta"]).decode())
    except (OSError, KeyError, ValueError) as exc:
        raise CheckpointError(f"cannot load checkpoint {path}: {exc}") from exc
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {meta.get('version')}")
    w1 = data["w1"]
    if w1.shape != (meta["hidden"], meta["in_dim"]):
        raise CheckpointError("parameter shapes disagree with recorded dims")
    if meta["in_dim"] != meta["d_emb"] + 3:
        raise CheckpointError("state width inconsistent with embedding dim")
    if expect_d_emb is not None and meta["d_emb"] != expect_d_emb:
        raise CheckpointError(
            f"embedding dim {meta['d_emb']} != expected {expect_d_emb}")
    net = QNetwork(w1=w1, b1=data["b1"], w2=data["w2"], b2=data["b2"],
                   step=int(data["step"][0]))
    net.moments = {
        name: (data[f"adam_m_{name}"], data[f"adam_v_{name}"])
        for name in QNetwork.PARAM_NAMES
    }
    embed = EmbeddingParams(w_feat=data["embed_w_feat"],
                            w_agg=data["embed_w_agg"],
                            w_edge=data["embed_w_edge"])
    return TrainedPolicy(net=net, embed=embed, t_emb=int(meta["t_emb"])), meta
