"""Predictor contract shared by every branch predictor in the package."""

from __future__ import annotations

import copy

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..trace import NT, T, Direction, GlobalHistory
from ..validation import check_direction, check_trace


class BasePredictor(ClassifierMixin, BaseEstimator):
    """Online branch predictor with an sklearn-compatible surface.

    Two ways to drive a predictor:

    * the step API, used by the harness and the environment:
      ``predict_branch(pc, history)`` followed by ``update(actual)``;
    * the estimator API: ``fit`` / ``partial_fit`` / ``predict`` / ``score``
      over a trace. Branch predictors learn while they predict, so
      ``predict`` returns the test-then-train prediction stream computed on a
      copy of the fitted state; the estimator itself is left untouched.

    Subclasses implement ``_init_state``, ``_predict`` and ``_update``.
    """

    kind = "base"

    # -- state management ---------------------------------------------------

    def reset(self):
        self._validate_params()
        self._init_state()
        self.history_ = GlobalHistory(self.history_capacity())
        self.n_branches_seen_ = 0
        self.classes_ = np.array([0, 1])
        self._pending = None
        return self

    def _validate_params(self):
        pass

    def _init_state(self):
        raise NotImplementedError

    def history_capacity(self) -> int:
        return int(getattr(self, "history_length", 0))

    def storage_bits(self) -> int:
        """Bits of predictor state currently allocated."""
        raise NotImplementedError

    @classmethod
    def entry_bits(cls, params: dict) -> int:
        """Bits per table row, used to size tables from a storage budget."""
        raise NotImplementedError

    # -- step API -----------------------------------------------------------

    def predict_branch(self, pc: int, history: GlobalHistory) -> Direction:
        if self._pending is not None:
            raise RuntimeError("predict_branch called twice without update")
        pred, ctx = self._predict(pc, history)
        self._pending = (pred, ctx)
        return pred

    def update(self, actual) -> int:
        """Train on the outcome of the pending prediction; returns the reward."""
        if self._pending is None:
            raise RuntimeError("update called without a pending prediction")
        pred, ctx = self._pending
        self._pending = None
        actual = actual if isinstance(actual, Direction) else check_direction(actual)
        self._update(ctx, pred, actual)
        self.n_branches_seen_ += 1
        return 1 if pred == actual else -1

    def step(self, pc: int, history: GlobalHistory, actual) -> Direction:
        pred = self.predict_branch(pc, history)
        self.update(actual)
        return pred

    # -- estimator API ------------------------------------------------------

    def fit(self, X, y=None):
        self.reset()
        return self.partial_fit(X, y)

    def partial_fit(self, X, y=None):
        trace = check_trace(X, y)
        if not hasattr(self, "history_"):
            self.reset()
        self._run(trace)
        return self

    def predict(self, X):
        check_is_fitted(self, "n_branches_seen_")
        trace = check_trace(X)
        return copy.deepcopy(self)._run(trace)

    def score(self, X, y=None, sample_weight=None):
        trace = check_trace(X, y)
        pred = self.predict(trace)
        actual = np.fromiter((int(r.outcome) for r in trace.records), dtype=np.int8, count=len(trace))
        if sample_weight is None:
            return float(np.mean(pred == actual))
        w = np.asarray(sample_weight, dtype=float)
        return float(np.sum(w * (pred == actual)) / np.sum(w))

    def _run(self, trace) -> np.ndarray:
        out = np.empty(len(trace), dtype=np.int8)
        h = self.history_
        for n, rec in enumerate(trace.records):
            out[n] = self.predict_branch(rec.pc, h)
            self.update(rec.outcome)
            h.push(rec.outcome)
        return out


def direction_of(flag: bool) -> Direction:
    return T if flag else NT
