"""PolGAg: REINFORCE with a linear softmax policy over per-PC history features.

For pc ``p`` and ±1 history ``q`` the feature vector of action T is
``x(T) = [1, q]`` and ``x(NT) = -x(T)``, placed in pc ``p``'s block of the
one-hot/Kronecker state vector. Only that block is ever touched, so the
parameters are stored per pc and the full vector is never built.

The two-action softmax collapses to ``pi(T|s) = sigmoid(2 * theta . x(T))``.
The update is ``theta += alpha * r * pi(not a | s) * x(a)``, which equals
``(alpha / 2) * r * grad log pi(a | s)``.
"""

from __future__ import annotations

import math

import numpy as np

from ..numerics import minifloat_round
from ..trace import NT, T, Direction
from ..validation import check_choice, check_int, check_real, check_table_entries
from .base import BasePredictor

WEIGHT_DTYPES = ("float32", "minifloat8", "float64")
ELEMENT_BITS = {"float32": 32, "minifloat8": 8, "float64": 64}


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def features(q, a: Direction = T) -> np.ndarray:
    x = np.empty(len(q) + 1, dtype=np.float64)
    x[0] = 1.0
    x[1:] = q
    return x if a else -x


def policy_logit(theta: np.ndarray, x_t: np.ndarray) -> float:
    # fsum makes the dot product independent of summation order
    return math.fsum((theta * x_t).tolist())


def polgag_policy(theta: np.ndarray, q) -> float:
    """Probability of T under the linear softmax policy."""
    return sigmoid(2.0 * policy_logit(np.asarray(theta, dtype=np.float64), features(q)))


def polgag_select(pi_t: float, mode: str, rng=None) -> Direction:
    if mode == "greedy":
        return T if pi_t >= 0.5 else NT
    if mode == "sample":
        return T if rng.random() < pi_t else NT
    raise ValueError(f"unknown selection mode {mode!r}")


def quantize_weights(theta: np.ndarray, weight_dtype: str) -> np.ndarray:
    if weight_dtype == "float64":
        return theta
    if weight_dtype == "float32":
        return theta.astype(np.float32).astype(np.float64)
    if weight_dtype == "minifloat8":
        return minifloat_round(theta)
    raise ValueError(f"unknown weight dtype {weight_dtype!r}")


def polgag_update(theta: np.ndarray, q, a: Direction, r: int, alpha: float,
                  weight_dtype: str = "float64") -> np.ndarray:
    """Return the updated parameter block for the owner pc."""
    theta = np.asarray(theta, dtype=np.float64)
    x_t = features(q)
    pi_t = sigmoid(2.0 * policy_logit(theta, x_t))
    pi_other = 1.0 - pi_t if a else pi_t
    x_a = x_t if a else -x_t
    return quantize_weights(theta + (alpha * r * pi_other) * x_a, weight_dtype)


class PolGAg(BasePredictor):
    """Policy-gradient agent branch predictor.

    Parameters
    ----------
    table_entries : int or None
        Parameter rows indexed by ``pc mod N``; ``None`` gives every pc its
        own row.
    history_length : int
    learning_rate : float
    weight_dtype : {"float32", "minifloat8", "float64"}
        Storage format of each parameter; updates are computed in float64
        and rounded back to this format.
    selection : {"greedy", "sample"}
        Predict the policy's mode, or sample from it.
    random_state : int or None
        Only used when ``selection="sample"``.
    """

    kind = "polgag"

    def __init__(self, table_entries=None, history_length=16, learning_rate=0.01,
                 weight_dtype="float32", selection="greedy", random_state=None):
        self.table_entries = table_entries
        self.history_length = history_length
        self.learning_rate = learning_rate
        self.weight_dtype = weight_dtype
        self.selection = selection
        self.random_state = random_state

    def _validate_params(self):
        check_table_entries(self.table_entries)
        check_int(self.history_length, "history_length", 0)
        check_real(self.learning_rate, "learning_rate", 0.0, lo_open=True)
        check_choice(self.weight_dtype, "weight_dtype", WEIGHT_DTYPES)
        check_choice(self.selection, "selection", ("greedy", "sample"))

    def _init_state(self):
        self.theta_ = {}
        self._mask = None if self.table_entries is None else self.table_entries - 1
        self._rng = np.random.default_rng(self.random_state)

    def _predict(self, pc, history):
        key = pc if self._mask is None else pc & self._mask
        theta = self.theta_.get(key)
        if theta is None:
            theta = self.theta_[key] = np.zeros(self.history_length + 1)
        x_t = np.empty(self.history_length + 1)
        x_t[0] = 1.0
        x_t[1:] = history.pm1_list(self.history_length)
        pi_t = sigmoid(2.0 * policy_logit(theta, x_t))
        if self.selection == "greedy":
            pred = T if pi_t >= 0.5 else NT
        else:
            pred = T if self._rng.random() < pi_t else NT
        return pred, (key, x_t, pi_t)

    def _update(self, ctx, pred, actual):
        key, x_t, pi_t = ctx
        r = 1.0 if pred == actual else -1.0
        if pred:
            step = self.learning_rate * r * (1.0 - pi_t)
        else:
            step = -self.learning_rate * r * pi_t
        self.theta_[key] = quantize_weights(self.theta_[key] + step * x_t, self.weight_dtype)

    def policy(self, pc: int, history) -> float:
        key = pc if self._mask is None else pc & self._mask
        theta = self.theta_.get(key)
        if theta is None:
            return 0.5
        return polgag_policy(theta, history.pm1_list(self.history_length))

    def storage_bits(self):
        rows = len(self.theta_) if self.table_entries is None else self.table_entries
        return rows * (self.history_length + 1) * ELEMENT_BITS[self.weight_dtype]

    @classmethod
    def entry_bits(cls, params):
        return (params.get("history_length", 16) + 1) * ELEMENT_BITS[params.get("weight_dtype", "float32")]
