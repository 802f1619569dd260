"""Tabular Q-learning predictors (generic TabularQL and G-QLAg)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import q6_dequantize, q6_quantize
from ..trace import NT, T, Direction
from ..validation import (
    check_choice,
    check_int,
    check_power_of_two,
    check_probability,
    check_real,
)
from .base import BasePredictor
from .counters import fold_history


@dataclass(frozen=True)
class QEntry:
    q_t: float = 0.0
    q_nt: float = 0.0
    quantized: bool = False

    def __post_init__(self):
        if not (-1.0 <= self.q_t <= 1.0 and -1.0 <= self.q_nt <= 1.0):
            raise ValueError("Q-values must lie in [-1, 1]")

    def value(self, a: Direction) -> float:
        return self.q_t if a else self.q_nt


def _store(x: float, quantized: bool) -> float:
    return q6_dequantize(q6_quantize(x)) if quantized else x


def greedy_select(q_t: float, q_nt: float, rng) -> Direction:
    if q_t > q_nt:
        return T
    if q_t < q_nt:
        return NT
    return T if rng.random() < 0.5 else NT


def gqlag_predict(e: QEntry, rng) -> Direction:
    return greedy_select(e.q_t, e.q_nt, rng)


def epsilon_greedy_select(q_t: float, q_nt: float, epsilon: float, rng) -> Direction:
    if epsilon > 0.0 and rng.random() < epsilon:
        return T if rng.random() < 0.5 else NT
    return greedy_select(q_t, q_nt, rng)


def ema_update(q: float, r: float, alpha: float) -> float:
    return (1.0 - alpha) * q + alpha * r


def gqlag_update(e: QEntry, predicted: Direction, r: int, alpha: float) -> QEntry:
    """Move the predicted action's value toward the reward; the other side is untouched."""
    if predicted:
        return QEntry(_store(ema_update(e.q_t, r, alpha), e.quantized), e.q_nt, e.quantized)
    return QEntry(e.q_t, _store(ema_update(e.q_nt, r, alpha), e.quantized), e.quantized)


def tabular_q_update(Q, s, a, r, s_next, alpha: float, gamma: float):
    """One Q-learning step on ``Q[s][a]``; ``Q`` is mutated and returned.

    Written as ``(1 - alpha) * Q + alpha * target`` so that ``gamma = 0``
    reproduces :func:`gqlag_update` bit for bit.
    """
    target = r + gamma * max(Q[s_next][0], Q[s_next][1])
    Q[s][a] = ema_update(Q[s][a], target, alpha)
    return Q


class TabularQL(BasePredictor):
    """Q-learning over a gshare-indexed table of (Q_NT, Q_T) pairs.

    Parameters
    ----------
    table_entries : int
        Table rows, a power of two.
    history_length : int
        Global history bits folded into the index (0 gives a PC-only table).
    learning_rate : float
    discount : float
        In ``[0, 1)``. When positive, the update for a branch waits until
        the next branch's state supplies ``max_a' Q(s', a')``.
    epsilon : float
        Exploration rate of the epsilon-greedy policy.
    q_precision : {"full", "q6"}
        ``"q6"`` stores values on the 6-bit grid ``c / 31``.
    random_state : int or None
        Seed for tie-breaking and exploration draws.
    """

    kind = "tabular_ql"

    def __init__(self, table_entries=4096, history_length=12, learning_rate=0.2,
                 discount=0.0, epsilon=0.0, q_precision="full", random_state=None):
        self.table_entries = table_entries
        self.history_length = history_length
        self.learning_rate = learning_rate
        self.discount = discount
        self.epsilon = epsilon
        self.q_precision = q_precision
        self.random_state = random_state

    def _validate_params(self):
        check_power_of_two(self.table_entries, "table_entries")
        check_int(self.history_length, "history_length", 0)
        check_real(self.learning_rate, "learning_rate", 0.0, lo_open=True)
        check_real(self.discount, "discount", 0.0, 1.0, hi_open=True)
        check_probability(self.epsilon, "epsilon")
        check_choice(self.q_precision, "q_precision", ("full", "q6"))

    def _init_state(self):
        n = self.table_entries
        self._mask = n - 1
        self._index_bits = n.bit_length() - 1
        self._quantized = self.q_precision == "q6"
        # Q_[a][idx]; a = 0 for NT, 1 for T
        self.Q_ = [[0.0] * n, [0.0] * n]
        self._rng = np.random.default_rng(self.random_state)
        self._deferred = None

    def _index(self, pc, history):
        return (pc ^ fold_history(history.value, self.history_length, self._index_bits)) & self._mask

    def _predict(self, pc, history):
        idx = self._index(pc, history)
        if self._deferred is not None:
            self._apply_deferred(idx)
        q_nt, q_t = self.Q_[0][idx], self.Q_[1][idx]
        if self.epsilon > 0.0:
            a = epsilon_greedy_select(q_t, q_nt, self.epsilon, self._rng)
        elif q_t > q_nt:
            a = T
        elif q_t < q_nt:
            a = NT
        else:
            a = T if self._rng.random() < 0.5 else NT
        return a, idx

    def _update(self, idx, pred, actual):
        r = 1.0 if pred == actual else -1.0
        if self.discount == 0.0:
            self._write(idx, int(pred), r, 0.0)
        else:
            self._deferred = (idx, int(pred), r)

    def _apply_deferred(self, next_idx):
        idx, a, r = self._deferred
        self._deferred = None
        self._write(idx, a, r, max(self.Q_[0][next_idx], self.Q_[1][next_idx]))

    def _write(self, idx, a, r, next_max):
        row = self.Q_[a]
        v = ema_update(row[idx], r + self.discount * next_max, self.learning_rate)
        row[idx] = q6_dequantize(q6_quantize(v)) if self._quantized else v

    def entry(self, idx: int) -> QEntry:
        return QEntry(self.Q_[1][idx], self.Q_[0][idx], self._quantized)

    def storage_bits(self):
        return self.table_entries * self.entry_bits(self.get_params())

    @classmethod
    def entry_bits(cls, params):
        return 12 if params.get("q_precision", "full") == "q6" else 64


class GQLAg(TabularQL):
    """G-QLAg: gshare reformulated as Q-learning with gamma = epsilon = 0 and 6-bit values."""

    kind = "gqlag"

    def __init__(self, table_entries=4096, history_length=12, learning_rate=0.2,
                 discount=0.0, epsilon=0.0, q_precision="q6", random_state=None):
        super().__init__(table_entries, history_length, learning_rate, discount,
                         epsilon, q_precision, random_state)
