import numpy as np
import pytest
from scipy.stats import chisquare

from fairseed.embedding import compute_embeddings, init_embedding_params
from fairseed.graph import InstancePool
from fairseed.qnet import QNetwork
from fairseed.trainer import (CheckpointError, ReplayBuffer, TrainConfig,
                              TrainedPolicy, Transition, epsilon_greedy_select,
                              infer_seed_set, load_checkpoint, run_episode,
                              save_checkpoint, select_seed_set, train)

from conftest import make_instance

D_EMB = 8


def toy_instance(name="toy", cost=None, benefit=None):
    edges = [(0, 1, 0.6), (1, 2, 0.6), (2, 3, 0.6), (3, 4, 0.6), (0, 4, 0.6),
             (1, 5, 0.6)]
    return make_instance(name, 6, edges, directed=False,
                         cost=cost or [2, 3, 1, 4, 2, 3],
                         benefit=benefit or [5, 4, 3, 2, 1, 6],
                         labels=[0, 0, 1, 1, 1, 1])


def toy_config(**kw):
    defaults = dict(budget=6.0, episodes=10, d_emb=D_EMB, t_emb=2, seed=1)
    defaults.update(kw)
    return TrainConfig(**defaults)


def toy_policy(instance, config, seed=0):
    embed = init_embedding_params(config.d_emb, seed)
    net = QNetwork.init(config.d_emb + 3, seed, hidden=16)
    h = compute_embeddings(instance.graph, instance.attrs, embed, config.t_emb)
    return TrainedPolicy(net=net, embed=embed, t_emb=config.t_emb), h


class TestReplayBuffer:
    @staticmethod
    def t(i):
        return Transition("x", (), i, 0.0, (i,), False, 1.0)

    def test_fifo_eviction(self):
        buf = ReplayBuffer(5)
        for i in range(8):
            buf.add(self.t(i))
        assert len(buf) == 5
        assert [tr.action for tr in buf] == [3, 4, 5, 6, 7]

    def test_sample_size(self, rng):
        buf = ReplayBuffer(10)
        for i in range(10):
            buf.add(self.t(i))
        assert len(buf.sample(4, rng)) == 4

    def test_bad_capacity(self):
        with pytest.raises(ValueError):
            ReplayBuffer(0)


class TestConfigValidation:
    @pytest.mark.parametrize("kw", [
        dict(budget=0.0), dict(discount=1.0), dict(epsilon_min=0.0),
        dict(epsilon_start=1.5), dict(epsilon_decay=0.0),
        dict(batch_size=20000), dict(update_period=0),
        dict(fairness_weight=-1.0), dict(episodes=0),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            toy_config(**kw).validate()

    def test_defaults_valid(self):
        toy_config().validate()


class TestEpsilonGreedy:
    def test_none_when_nothing_feasible(self, rng):
        inst = toy_instance()
        cfg = toy_config()
        policy, h = toy_policy(inst, cfg)
        got = epsilon_greedy_select(policy.net, inst.graph, set(range(6)), set(),
                                    0.5, h, 100.0, inst.attrs, 100.0, 10, rng)
        assert got is None
        got = epsilon_greedy_select(policy.net, inst.graph, set(), set(), 0.5,
                                    h, 0.5, inst.attrs, 100.0, 10, rng)
        assert got is None  # cheapest node costs 1

    def test_zero_net_tie_breaks_to_lowest_id(self, rng):
        inst = toy_instance()
        cfg = toy_config()
        policy, h = toy_policy(inst, cfg)
        for name in policy.net.PARAM_NAMES:
            getattr(policy.net, name)[:] = 0.0
        got = epsilon_greedy_select(policy.net, inst.graph, set(), set(), 0.0,
                                    h, 10.0, inst.attrs, 10.0, 10, rng)
        assert got == 0

    def test_excluded_respected(self, rng):
        inst = toy_instance()
        cfg = toy_config()
        policy, h = toy_policy(inst, cfg)
        for name in policy.net.PARAM_NAMES:
            getattr(policy.net, name)[:] = 0.0
        got = epsilon_greedy_select(policy.net, inst.graph, {0}, {1}, 0.0,
                                    h, 10.0, inst.attrs, 10.0, 10, rng)
        assert got == 2

    def test_epsilon_one_uniform(self, rng):
        inst = toy_instance()
        cfg = toy_config()
        policy, h = toy_policy(inst, cfg)
        draws = [
            epsilon_greedy_select(policy.net, inst.graph, set(), set(), 1.0,
                                  h, 100.0, inst.attrs, 100.0, 10, rng)
            for _ in range(10_000)
        ]
        counts = np.bincount(draws, minlength=6)
        _, p = chisquare(counts)
        assert p > 0.001


class TestRunEpisode:
    def test_budget_below_min_cost(self, rng):
        inst = toy_instance()
        cfg = toy_config(budget=0.5)
        policy, h = toy_policy(inst, cfg)
        assert run_episode(policy.net, inst, h, cfg, 1.0, rng) == []

    def test_forced_single_step(self, rng):
        inst = toy_instance(cost=[1, 9, 9, 9, 9, 9])
        cfg = toy_config(budget=1.0)
        policy, h = toy_policy(inst, cfg)
        transitions = run_episode(policy.net, inst, h, cfg, 0.0, rng)
        assert len(transitions) == 1
        assert transitions[0].terminal
        assert transitions[0].action == 0

    def test_horizon_bound_and_chain(self, rng):
        inst = toy_instance()
        cfg = toy_config(budget=8.0)
        policy, h = toy_policy(inst, cfg)
        for _ in range(20):
            ts = run_episode(policy.net, inst, h, cfg, 0.7, rng)
            c_min = inst.attrs.cost.min()
            assert len(ts) <= int(cfg.budget // c_min)
            total = 0.0
            for prev, nxt in zip(ts, ts[1:]):
                assert set(nxt.seeds_before) == set(prev.seeds_after)
            for t in ts:
                total += inst.attrs.cost[t.action]
                assert t.budget_after >= 0.0
                assert np.isfinite(t.reward)
            assert total <= cfg.budget


class TestTrain:
    def pool(self):
        return InstancePool(train=(toy_instance("a"), toy_instance("b")),
                            test=(toy_instance("c"),), seed=0)

    def test_update_arithmetic_and_epsilon_schedule(self):
        events = []
        cfg = toy_config(episodes=9, update_period=2, batch_size=4)
        train(cfg, self.pool(), progress=events.append)
        assert len(events) == 9
        for ev in events:
            e = ev["episode"]
            expected_eps = max(cfg.epsilon_start * cfg.epsilon_decay ** e,
                               cfg.epsilon_min)
            assert ev["epsilon"] == pytest.approx(expected_eps)
            if e % 2 == 1:
                assert ev["loss"] is None
            elif ev["buffer_size"] >= 4:
                assert ev["loss"] is not None

    def test_single_episode_no_step(self):
        events = []
        cfg = toy_config(episodes=1, update_period=2)
        train(cfg, self.pool(), progress=events.append)
        assert events[0]["loss"] is None

    def test_deterministic(self):
        cfg = toy_config(episodes=6, batch_size=4)
        p1 = train(cfg, self.pool())
        p2 = train(cfg, self.pool())
        assert np.array_equal(p1.net.w1, p2.net.w1)
        assert np.array_equal(p1.embed.w_agg, p2.embed.w_agg)

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError):
            train(toy_config(), InstancePool(train=(), test=(), seed=0))

    def test_phi_zero_single_community_is_pure_profit(self, rng):
        # with one community, fairness is the whole-graph benefit ratio and
        # contributes nothing when the weight is zero
        inst = make_instance("solo", 4, [(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)],
                             cost=[1, 1, 1, 1], benefit=[2, 3, 4, 5],
                             labels=[0, 0, 0, 0])
        from fairseed.diffusion import SeedSet, simulate_ic
        from fairseed.metrics import earned_benefit, shaped_reward
        from fairseed.seeding import rollout_rng
        s = SeedSet.build([0, 2], inst.attrs)
        reward = shaped_reward(inst.graph, inst.attrs, inst.parts, s, 0.0,
                               rollout_rng(3, 0))
        infl = simulate_ic(inst.graph, s, rollout_rng(3, 0))
        assert reward == earned_benefit(infl, inst.attrs) - s.total_cost


class TestInference:
    def test_budget_too_small_empty(self):
        inst = toy_instance()
        cfg = toy_config()
        policy, _ = toy_policy(inst, cfg)
        seeds, report = infer_seed_set(policy, inst, budget=0.5, m=10)
        assert len(seeds) == 0
        assert report.profit == 0.0

    def test_budget_respected_and_deterministic(self):
        inst = toy_instance()
        cfg = toy_config()
        policy, _ = toy_policy(inst, cfg)
        s1 = select_seed_set(policy, inst, budget=7.0)
        s2 = select_seed_set(policy, inst, budget=7.0)
        assert s1.nodes == s2.nodes
        assert s1.total_cost <= 7.0


class TestCheckpoint:
    def test_roundtrip(self, tmp_path):
        cfg = toy_config(episodes=4, batch_size=4)
        pool = InstancePool(train=(toy_instance("a"),),
                            test=(toy_instance("b"),), seed=0)
        policy = train(cfg, pool)
        path = str(tmp_path / "ckpt.npz")
        save_checkpoint(path, policy, cfg)
        loaded, meta = load_checkpoint(path)
        assert np.array_equal(loaded.net.w1, policy.net.w1)
        assert np.array_equal(loaded.embed.w_feat, policy.embed.w_feat)
        assert loaded.net.step == policy.net.step
        assert meta["d_emb"] == cfg.d_emb
        # inference agrees after reload
        inst = pool.test[0]
        assert select_seed_set(loaded, inst, 6.0).nodes \
            == select_seed_set(policy, inst, 6.0).nodes

    def test_dimension_mismatch_rejected(self, tmp_path):
        cfg = toy_config(episodes=2)
        pool = InstancePool(train=(toy_instance("a"),),
                            test=(), seed=0)
        policy = train(cfg, pool)
        path = str(tmp_path / "ckpt.npz")
        save_checkpoint(path, policy, cfg)
        with pytest.raises(CheckpointError):
            load_checkpoint(path, expect_d_emb=64)

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "bad.npz"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(CheckpointError):
            load_checkpoint(str(path))
