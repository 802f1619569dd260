"""Gym-style single-branch environment replaying a recorded trace.

An episode covers every occurrence of one branch pc. The observation is the
global history (all branches) just before the occurrence, as a ±1 vector
newest first, zero-padded when fewer than ``ghr_len`` branches precede it.
The agent's action never changes the replayed trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .predictors import BasePredictor
from .trace import Direction, GlobalHistory, Trace
from .validation import check_direction, check_int


@dataclass(frozen=True)
class EnvConfig:
    trace: Trace
    target_pc: int
    ghr_len: int

    def __post_init__(self):
        check_int(self.ghr_len, "ghr_len", 1)
        if not any(r.pc == self.target_pc for r in self.trace.records):
            raise ValueError(f"target pc {self.target_pc:#x} does not occur in trace {self.trace.name!r}")


class StepResult(NamedTuple):
    obs: np.ndarray
    reward: int
    done: bool
    info: dict


class BranchEnv:
    """``reset()`` / ``step(action)`` over the occurrences of ``target_pc``."""

    def __init__(self, trace: Trace | None = None, ghr_len: int | None = None,
                 target_pc: int | None = None):
        self.config = None
        if trace is not None:
            self.init(trace, ghr_len, target_pc)

    def init(self, trace: Trace, ghr_len: int, target_pc: int) -> "BranchEnv":
        self.config = EnvConfig(trace, target_pc, ghr_len)
        self._precompute()
        self._cursor = None
        return self

    @classmethod
    def from_config(cls, cfg: EnvConfig) -> "BranchEnv":
        return cls(cfg.trace, cfg.ghr_len, cfg.target_pc)

    def _precompute(self):
        cfg = self.config
        h = GlobalHistory(cfg.ghr_len)
        snaps, actual = [], []
        for rec in cfg.trace.records:
            if rec.pc == cfg.target_pc:
                snaps.append(h.as_pm1())
                actual.append(rec.outcome)
            h.push(rec.outcome)
        self._obs = np.array(snaps, dtype=np.int64)
        self._actual = actual

    @property
    def n_occurrences(self) -> int:
        return len(self._actual)

    @property
    def actual_outcomes(self) -> list[Direction]:
        return list(self._actual)

    def reset(self) -> np.ndarray:
        if self.config is None:
            raise RuntimeError("environment not initialised; call init(trace, ghr_len, branch)")
        self._cursor = 0
        return self._obs[0].copy()

    def step(self, action) -> StepResult:
        if self._cursor is None:
            raise RuntimeError("call reset() before step()")
        if self._cursor >= self.n_occurrences:
            raise RuntimeError("episode is done; call reset()")
        action = check_direction(action)
        i = self._cursor
        actual = self._actual[i]
        reward = 1 if action == actual else -1
        self._cursor = i + 1
        done = self._cursor == self.n_occurrences
        obs = self._obs[i if done else i + 1].copy()
        return StepResult(obs, reward, done, {"actual": actual, "occurrence": i})


class PredictorAgent:
    """Adapts a step-API predictor to ``act(obs)`` / ``learn(reward)``."""

    def __init__(self, predictor: BasePredictor, pc: int):
        self.predictor = predictor
        self.pc = pc
        predictor.reset()
        self._last = None

    def act(self, obs) -> Direction:
        h = GlobalHistory.from_pm1(obs, capacity=max(len(obs), self.predictor.history_capacity()))
        self._last = self.predictor.predict_branch(self.pc, h)
        return self._last

    def learn(self, reward: int) -> None:
        actual = self._last if reward == 1 else self._last.flip()
        self.predictor.update(actual)


class OracleAgent:
    """Test double that knows the replayed outcomes."""

    def __init__(self, env: BranchEnv):
        self._outcomes = env.actual_outcomes
        self._i = 0

    def act(self, obs) -> Direction:
        d = self._outcomes[self._i]
        self._i += 1
        return d

    def learn(self, reward: int) -> None:
        pass


class ConstantAgent:
    def __init__(self, direction=Direction.T):
        self.direction = check_direction(direction)

    def act(self, obs) -> Direction:
        return self.direction

    def learn(self, reward: int) -> None:
        pass


def run_episode(env: BranchEnv, agent) -> list[tuple[int, Direction, int, int]]:
    """Play one episode; rows are ``(step, action, reward, cumulative)``."""
    obs = env.reset()
    rows, total, done, step = [], 0, False, 0
    while not done:
        action = agent.act(obs)
        obs, reward, done, _ = env.step(action)
        agent.learn(reward)
        total += reward
        rows.append((step, action, reward, total))
        step += 1
    return rows
