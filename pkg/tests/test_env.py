import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlbp.env import BranchEnv, ConstantAgent, EnvConfig, OracleAgent, PredictorAgent, run_episode
from rlbp.predictors import GQLAg, Gshare
from rlbp.trace import NT, T, BranchRecord, SyntheticSpec, Trace, generate_synthetic


def _two_branch_trace():
    a = SyntheticSpec("pattern", 1, pc=0x10, pattern="TTN")
    b = SyntheticSpec("random_bias", 1, pc=0x20, p=0.5)
    return generate_synthetic(SyntheticSpec("interleaved", 600, seed=3, parts=(a, b)))


class RandomAgent:
    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)

    def act(self, obs):
        return T if self.rng.random() < 0.5 else NT

    def learn(self, reward):
        pass


def test_observation_is_zero_padded_global_history():
    t = Trace("t", (BranchRecord(0x20, T), BranchRecord(0x10, NT), BranchRecord(0x20, NT),
                    BranchRecord(0x10, T)))
    env = BranchEnv(t, 3, 0x10)
    assert env.reset().tolist() == [1, 0, 0]
    obs, r, done, info = env.step(T)
    assert r == -1 and not done and info["actual"] == NT
    assert obs.tolist() == [-1, -1, 1]
    obs, r, done, _ = env.step(T)
    assert r == 1 and done


def test_oracle_earns_every_occurrence():
    env = BranchEnv(_two_branch_trace(), 8, 0x10)
    rows = run_episode(env, OracleAgent(env))
    assert rows[-1][3] == env.n_occurrences == 300


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reward_sum_identity(seed):
    env = BranchEnv(_two_branch_trace(), 4, 0x20)
    rows = run_episode(env, RandomAgent(seed))
    actual = env.actual_outcomes
    correct = sum(a == d for (_, a, _, _), d in zip(rows, actual))
    assert rows[-1][3] == 2 * correct - env.n_occurrences


def test_done_fires_exactly_once():
    env = BranchEnv(_two_branch_trace(), 4, 0x10)
    env.reset()
    flags = [env.step(T).done for _ in range(env.n_occurrences)]
    assert flags.count(True) == 1 and flags[-1]
    with pytest.raises(RuntimeError):
        env.step(T)
    env.reset()
    assert not env.step(T).done


def test_constant_agent_counts():
    env = BranchEnv(_two_branch_trace(), 4, 0x10)
    rows = run_episode(env, ConstantAgent(T))
    assert rows[-1][3] == 200 - 100


def test_predictor_agent_learns_pattern():
    env = BranchEnv(_two_branch_trace(), 8, 0x10)
    rows = run_episode(env, PredictorAgent(GQLAg(1024, 8, random_state=0), 0x10))
    assert sum(r for _, _, r, _ in rows[-100:]) >= 90


def test_predictor_agent_matches_harness_on_single_branch():
    from rlbp.harness import run_single

    tr = generate_synthetic(SyntheticSpec("xor_of_history", 2000, seed=2, i=2, j=3))
    env = BranchEnv(tr, 6, tr.records[0].pc)
    rows = run_episode(env, PredictorAgent(Gshare(256, 6), tr.records[0].pc))
    stats = run_single(Gshare(256, 6), tr, warmup=0)
    assert sum(r == -1 for _, _, r, _ in rows) == stats.mispredictions


def test_config_validation():
    t = Trace.from_outcomes([T, NT])
    with pytest.raises(ValueError):
        EnvConfig(t, 0xdead, 4)
    with pytest.raises(ValueError):
        EnvConfig(t, t.records[0].pc, 0)
    with pytest.raises(RuntimeError):
        BranchEnv().reset()
    env = BranchEnv.from_config(EnvConfig(t, t.records[0].pc, 2))
    with pytest.raises(RuntimeError):
        env.step(T)
