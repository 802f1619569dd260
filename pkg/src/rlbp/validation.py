"""Input validation helpers shared by predictors, the environment and the harness."""

from __future__ import annotations

import numbers

import numpy as np

from .trace import BranchRecord, Direction, Trace


def is_power_of_two(n) -> bool:
    return isinstance(n, numbers.Integral) and n > 0 and (n & (n - 1)) == 0


def check_power_of_two(n, name: str) -> int:
    if not is_power_of_two(n):
        raise ValueError(f"{name} must be a positive power of two, got {n!r}")
    return int(n)


def check_table_entries(n, name: str = "table_entries") -> int | None:
    """``None`` means unbounded storage."""
    if n is None:
        return None
    return check_power_of_two(n, name)


def check_int(x, name: str, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {x!r}")
    if lo is not None and x < lo:
        raise ValueError(f"{name} must be >= {lo}, got {x}")
    if hi is not None and x > hi:
        raise ValueError(f"{name} must be <= {hi}, got {x}")
    return int(x)


def check_real(x, name: str, lo: float | None = None, hi: float | None = None,
               lo_open: bool = False, hi_open: bool = False) -> float:
    if isinstance(x, bool) or not isinstance(x, numbers.Real) or not np.isfinite(x):
        raise TypeError(f"{name} must be a finite real number, got {x!r}")
    if lo is not None and (x < lo or (lo_open and x == lo)):
        raise ValueError(f"{name} must be {'>' if lo_open else '>='} {lo}, got {x}")
    if hi is not None and (x > hi or (hi_open and x == hi)):
        raise ValueError(f"{name} must be {'<' if hi_open else '<='} {hi}, got {x}")
    return float(x)


def check_probability(x, name: str) -> float:
    return check_real(x, name, 0.0, 1.0)


def check_choice(x, name: str, choices) -> str:
    if x not in choices:
        raise ValueError(f"{name} must be one of {tuple(choices)}, got {x!r}")
    return x


def check_direction(d) -> Direction:
    """Accept a :class:`Direction`, a bool, or an integer 0/1."""
    if isinstance(d, Direction):
        return d
    if isinstance(d, (bool, np.bool_)):
        return Direction(int(d))
    if isinstance(d, numbers.Integral) and int(d) in (0, 1):
        return Direction(int(d))
    if isinstance(d, str):
        return Direction.from_char(d)
    raise ValueError(f"not a branch direction: {d!r}")


def check_reward(r) -> int:
    if r not in (1, -1):
        raise ValueError(f"reward must be +1 or -1, got {r!r}")
    return int(r)


def check_trace(X, y=None) -> Trace:
    """Coerce estimator input to a :class:`Trace`.

    Accepts a Trace, a sequence of BranchRecord, an ``(n, 2)`` or ``(n, 3)``
    array of ``(pc, taken[, inst_gap])`` rows, or a 1-d array of pcs with the
    outcomes passed as ``y``.
    """
    if isinstance(X, Trace):
        if y is not None:
            raise ValueError("y must be None when X is a Trace")
        trace = X
    elif len(X) and isinstance(X[0], BranchRecord):
        trace = Trace("stream", tuple(X))
    else:
        arr = np.asarray(X)
        if arr.ndim == 1:
            if y is None:
                raise ValueError("outcomes are required: pass y or a (n, 2) array")
            yv = np.asarray(y).ravel()
            if yv.shape[0] != arr.shape[0]:
                raise ValueError(f"X and y lengths differ: {arr.shape[0]} != {yv.shape[0]}")
            arr = np.column_stack([arr, yv])
        elif y is not None:
            raise ValueError("y must be None when X already carries outcomes")
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise ValueError(f"expected a (n, 2) or (n, 3) array, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer) and not np.issubdtype(arr.dtype, np.bool_):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("branch arrays must hold integers")
        gaps = arr[:, 2] if arr.shape[1] == 3 else np.ones(len(arr), dtype=np.int64)
        trace = Trace("stream", tuple(
            BranchRecord(int(pc), check_direction(int(t)), int(g))
            for pc, t, g in zip(arr[:, 0], arr[:, 1], gaps)
        ))
    if len(trace) == 0:
        raise ValueError("empty trace")
    return trace
