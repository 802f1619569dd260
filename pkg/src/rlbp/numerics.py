"""Bit-exact quantized number formats and saturating counters.

MiniFloat8 layout is ``s eeeee mm`` with exponent bias 15. There are no
infinity or NaN codes: exponent 31 encodes ordinary finite values, so the
largest magnitude is ``1.75 * 2**16``. Encoding rounds to nearest, ties to
even, and saturates at the largest finite magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trace import Direction

# --- saturating counters ---------------------------------------------------


@dataclass(frozen=True)
class SatCounter:
    width: int = 2
    state: int = 0

    def __post_init__(self):
        if not 2 <= self.width <= 8:
            raise ValueError("counter width must be in [2, 8]")
        if not 0 <= self.state <= self.max_state:
            raise ValueError(f"state {self.state} out of range for width {self.width}")

    @property
    def max_state(self) -> int:
        return (1 << self.width) - 1

    @property
    def prediction(self) -> Direction:
        return Direction.T if self.state >= 1 << (self.width - 1) else Direction.NT


def sat_step(c: SatCounter, outcome: Direction) -> SatCounter:
    if outcome:
        return SatCounter(c.width, min(c.state + 1, c.max_state))
    return SatCounter(c.width, max(c.state - 1, 0))


def sat_add(value: int, delta: int, lo: int, hi: int) -> int:
    v = value + delta
    return lo if v < lo else hi if v > hi else v


# --- MiniFloat8 (1-5-2, bias 15) ------------------------------------------

MF8_BIAS = 15
MF8_EXP_BITS = 5
MF8_MAN_BITS = 2
MF8_MAX_CODE = 0x7F
MF8_MAX = 1.75 * 2.0**16
MF8_MIN_SUBNORMAL = 2.0 ** (1 - MF8_BIAS - MF8_MAN_BITS)


def minifloat_decode(code: int) -> float:
    if not 0 <= code <= 0xFF:
        raise ValueError(f"not an 8-bit code: {code}")
    sign = -1.0 if code & 0x80 else 1.0
    exp = (code >> MF8_MAN_BITS) & 0x1F
    man = code & 0x3
    if exp == 0:
        return sign * math.ldexp(man, 1 - MF8_BIAS - MF8_MAN_BITS)
    return sign * math.ldexp(4 + man, exp - MF8_BIAS - MF8_MAN_BITS)


def minifloat_encode(x: float) -> int:
    if not math.isfinite(x):
        raise ValueError("minifloat_encode needs a finite input")
    sign = 0x80 if x < 0 else 0
    a = abs(x)
    if a == 0.0:
        return 0
    if a >= MF8_MAX:
        return sign | MF8_MAX_CODE
    # every magnitude below 2**-14 shares the subnormal step
    _, e = math.frexp(a)  # a = m * 2**e, m in [0.5, 1)
    exp_field = max(e - 1 + MF8_BIAS, 1)
    step_exp = exp_field - MF8_BIAS - MF8_MAN_BITS
    scaled = math.ldexp(a, -step_exp)  # exact: power-of-two scaling
    n = math.floor(scaled)
    rem = scaled - n
    if rem > 0.5 or (rem == 0.5 and n & 1):
        n += 1
    # n counts steps of 2**step_exp; the code is linear in n within the binade
    code = ((exp_field - 1) << MF8_MAN_BITS) + n
    if code == 0:
        return 0
    return sign | min(code, MF8_MAX_CODE)


_MF8_POS = np.array([minifloat_decode(c) for c in range(0x80)])
_MF8_MID = (_MF8_POS[:-1] + _MF8_POS[1:]) / 2


def minifloat_round(x: np.ndarray) -> np.ndarray:
    """Vectorized ``decode(encode(x))`` for float arrays."""
    x = np.asarray(x, dtype=np.float64)
    a = np.abs(x)
    idx = np.searchsorted(_MF8_MID, a, side="left")
    # a equal to a midpoint lands on the lower code; move to even on ties
    tie = (idx < len(_MF8_MID)) & (a == _MF8_MID[np.minimum(idx, len(_MF8_MID) - 1)])
    idx = np.where(tie & (idx % 2 == 1), idx + 1, idx)
    return np.copysign(_MF8_POS[idx], x) * (idx != 0) + 0.0


# --- QValue6 ---------------------------------------------------------------

Q6_SCALE = 31


def q6_quantize(x: float) -> int:
    x = min(1.0, max(-1.0, x))
    c = math.floor(abs(x) * Q6_SCALE + 0.5)
    return -c if x < 0 else c


def q6_dequantize(c: int) -> float:
    if not -Q6_SCALE <= c <= Q6_SCALE:
        raise ValueError(f"QValue6 code out of range: {c}")
    return c / Q6_SCALE
