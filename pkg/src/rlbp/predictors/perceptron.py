"""Perceptron and GEHL-style hashed-perceptron predictors (hinge loss, perceptron update)."""

from __future__ import annotations

import math

from ..trace import NT, T, Direction
from ..validation import (
    check_choice,
    check_int,
    check_power_of_two,
    check_real,
    check_table_entries,
)
from .base import BasePredictor
from .counters import fold_history

WEIGHT_MAX = 127


def default_threshold(n: int) -> int:
    return math.floor(1.93 * n + 14)


def perceptron_output(w, q) -> int:
    """``w = [b, w_1, ..., w_l]`` against the ±1 history ``q``."""
    y = w[0]
    for wk, qk in zip(w[1:], q):
        y += wk * qk
    return y


def perceptron_train(w, q, actual: Direction, y: int, threshold: int) -> list[int]:
    """Return the trained weights; unchanged when correct with margin ``> threshold``."""
    predicted = T if y >= 0 else NT
    if predicted == actual and abs(y) > threshold:
        return list(w)
    t = 1 if actual else -1
    out = [max(-WEIGHT_MAX, min(WEIGHT_MAX, w[0] + t))]
    for wk, qk in zip(w[1:], q):
        out.append(max(-WEIGHT_MAX, min(WEIGHT_MAX, wk + t * qk)))
    return out


class Perceptron(BasePredictor):
    """Perceptron predictor with int8 weights saturating at ±127.

    Parameters
    ----------
    table_entries : int or None
        Weight rows, a power of two, indexed by ``pc mod N``. ``None``
        dedicates one row to every distinct pc.
    history_length : int
    threshold : int or None
        Training threshold; defaults to ``floor(1.93 * history_length + 14)``.
    weight_dtype : {"int8"}
    """

    kind = "perceptron"

    def __init__(self, table_entries=None, history_length=16, threshold=None, weight_dtype="int8"):
        self.table_entries = table_entries
        self.history_length = history_length
        self.threshold = threshold
        self.weight_dtype = weight_dtype

    def _validate_params(self):
        check_table_entries(self.table_entries)
        check_int(self.history_length, "history_length", 0)
        if self.threshold is not None:
            check_int(self.threshold, "threshold", 0)
        check_choice(self.weight_dtype, "weight_dtype", ("int8",))

    def _init_state(self):
        self.threshold_ = (default_threshold(self.history_length)
                           if self.threshold is None else self.threshold)
        self.weights_ = {}
        self._row = (self.history_length + 1)
        self._mask = None if self.table_entries is None else self.table_entries - 1

    def _key(self, pc):
        return pc if self._mask is None else pc & self._mask

    def _predict(self, pc, history):
        key = self._key(pc)
        w = self.weights_.get(key)
        if w is None:
            w = self.weights_[key] = [0] * self._row
        q = history.pm1_list(self.history_length)
        y = w[0]
        for k, qk in enumerate(q, 1):
            y += w[k] * qk
        return (T if y >= 0 else NT), (w, q, y)

    def _update(self, ctx, pred, actual):
        w, q, y = ctx
        if pred == actual and abs(y) > self.threshold_:
            return
        t = 1 if actual else -1
        b = w[0] + t
        if -WEIGHT_MAX <= b <= WEIGHT_MAX:
            w[0] = b
        for k, qk in enumerate(q, 1):
            v = w[k] + t * qk
            if -WEIGHT_MAX <= v <= WEIGHT_MAX:
                w[k] = v

    def storage_bits(self):
        rows = len(self.weights_) if self.table_entries is None else self.table_entries
        return rows * 8 * self._row

    @classmethod
    def entry_bits(cls, params):
        return 8 * (params.get("history_length", 16) + 1)


def geometric_lengths(n_tables: int, min_history: int, ratio: float, cap: int) -> list[int]:
    return [min(math.floor(min_history * ratio**i), cap) for i in range(n_tables)]


def gehl_index(pc: int, history_value: int, length: int, index_bits: int) -> int:
    return (pc ^ (pc >> index_bits) ^ fold_history(history_value, length, index_bits)) & ((1 << index_bits) - 1)


def gehl_step(tables, pc, h, actual: Direction, lengths, threshold: int):
    """One predict-then-train step over ``tables`` (mutated in place)."""
    index_bits = len(tables[0]).bit_length() - 1
    idx = [gehl_index(pc, h.value, L, index_bits) for L in lengths]
    y = sum(t[i] for t, i in zip(tables, idx))
    pred = T if y >= 0 else NT
    if pred != actual or abs(y) <= threshold:
        d = 1 if actual else -1
        for t, i in zip(tables, idx):
            t[i] = max(-WEIGHT_MAX, min(WEIGHT_MAX, t[i] + d))
    return pred, tables


class GEHL(BasePredictor):
    """Simplified GEHL: M tables of signed 8-bit counters at geometric history lengths.

    Table ``i`` (0-based) uses the newest ``floor(min_history * ratio**i)``
    history bits, capped at ``history_length``. The training threshold is
    fixed (no dynamic adaptation).
    """

    kind = "gehl"

    def __init__(self, n_tables=8, table_entries=8192, history_length=128,
                 min_history=2, ratio=2.0, threshold=None):
        self.n_tables = n_tables
        self.table_entries = table_entries
        self.history_length = history_length
        self.min_history = min_history
        self.ratio = ratio
        self.threshold = threshold

    def _validate_params(self):
        check_int(self.n_tables, "n_tables", 1)
        check_power_of_two(self.table_entries, "table_entries")
        check_int(self.history_length, "history_length", 0)
        check_int(self.min_history, "min_history", 0)
        check_real(self.ratio, "ratio", 1.0)
        if self.threshold is not None:
            check_int(self.threshold, "threshold", 0)

    def _init_state(self):
        self.lengths_ = geometric_lengths(self.n_tables, self.min_history, self.ratio,
                                          self.history_length)
        self.threshold_ = default_threshold(self.n_tables) if self.threshold is None else self.threshold
        self.tables_ = [[0] * self.table_entries for _ in range(self.n_tables)]
        self._index_bits = self.table_entries.bit_length() - 1

    def _predict(self, pc, history):
        bits = self._index_bits
        idx = [gehl_index(pc, history.value, L, bits) for L in self.lengths_]
        y = 0
        for t, i in zip(self.tables_, idx):
            y += t[i]
        return (T if y >= 0 else NT), (idx, y)

    def _update(self, ctx, pred, actual):
        idx, y = ctx
        if pred == actual and abs(y) > self.threshold_:
            return
        d = 1 if actual else -1
        for t, i in zip(self.tables_, idx):
            v = t[i] + d
            if -WEIGHT_MAX <= v <= WEIGHT_MAX:
                t[i] = v

    def storage_bits(self):
        return self.n_tables * self.table_entries * 8

    @classmethod
    def entry_bits(cls, params):
        # one entry in every table per index
        return 8 * params.get("n_tables", 8)
