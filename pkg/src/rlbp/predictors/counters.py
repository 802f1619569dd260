"""Saturating-counter table predictors: Bimodal and gshare."""

from __future__ import annotations

from ..numerics import SatCounter, sat_step
from ..trace import NT, T, Direction, GlobalHistory
from ..validation import check_int, check_power_of_two
from .base import BasePredictor


def index_bimodal(pc: int, n_entries: int) -> int:
    return pc & (n_entries - 1)


def fold_history(value: int, l_used: int, index_bits: int) -> int:
    """XOR-fold the newest ``l_used`` history bits into ``index_bits`` bits."""
    if index_bits == 0 or l_used == 0:
        return 0
    v = value & ((1 << l_used) - 1)
    mask = (1 << index_bits) - 1
    folded = 0
    while v:
        folded ^= v & mask
        v >>= index_bits
    return folded


def index_gshare(pc: int, h: GlobalHistory, l_used: int, n_entries: int) -> int:
    index_bits = n_entries.bit_length() - 1
    return (pc ^ fold_history(h.value, min(l_used, h.capacity), index_bits)) & (n_entries - 1)


def counter_predictor_step(counter: SatCounter, actual: Direction) -> tuple[Direction, SatCounter]:
    return counter.prediction, sat_step(counter, actual)


class Bimodal(BasePredictor):
    """PC-indexed table of n-bit saturating counters.

    Parameters
    ----------
    table_entries : int
        Number of counters, a power of two.
    counter_bits : int
        Counter width; counters start weakly taken.
    """

    kind = "bimodal"

    def __init__(self, table_entries=4096, counter_bits=2):
        self.table_entries = table_entries
        self.counter_bits = counter_bits

    def _validate_params(self):
        check_power_of_two(self.table_entries, "table_entries")
        check_int(self.counter_bits, "counter_bits", 2, 8)

    def history_capacity(self):
        return 0

    def _init_state(self):
        self._max = (1 << self.counter_bits) - 1
        self._half = 1 << (self.counter_bits - 1)
        self._mask = self.table_entries - 1
        self.table_ = [self._half] * self.table_entries

    def _index(self, pc, history):
        return pc & self._mask

    def _predict(self, pc, history):
        idx = self._index(pc, history)
        return (T if self.table_[idx] >= self._half else NT), idx

    def _update(self, idx, pred, actual):
        c = self.table_[idx]
        if actual:
            if c < self._max:
                self.table_[idx] = c + 1
        elif c > 0:
            self.table_[idx] = c - 1

    def storage_bits(self):
        return self.table_entries * self.counter_bits

    @classmethod
    def entry_bits(cls, params):
        return params.get("counter_bits", 2)


class Gshare(Bimodal):
    """Counter table indexed by ``pc XOR fold(global history)``."""

    kind = "gshare"

    def __init__(self, table_entries=4096, history_length=12, counter_bits=2):
        self.table_entries = table_entries
        self.history_length = history_length
        self.counter_bits = counter_bits

    def _validate_params(self):
        super()._validate_params()
        check_int(self.history_length, "history_length", 0)

    def history_capacity(self):
        return self.history_length

    def _init_state(self):
        super()._init_state()
        self._index_bits = self.table_entries.bit_length() - 1

    def _index(self, pc, history):
        return (pc ^ fold_history(history.value, self.history_length, self._index_bits)) & self._mask
