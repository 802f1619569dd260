import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlbp.numerics import (
    MF8_MAX,
    MF8_MIN_SUBNORMAL,
    Q6_SCALE,
    SatCounter,
    minifloat_decode,
    minifloat_encode,
    minifloat_round,
    q6_dequantize,
    q6_quantize,
    sat_add,
    sat_step,
)
from rlbp.trace import NT, T


def _oracle_values():
    """Every representable non-negative magnitude, built from exact rationals."""
    vals = []
    for e in range(32):
        for m in range(4):
            if e == 0:
                vals.append(Fraction(m, 4) * Fraction(2) ** (1 - 15))
            else:
                vals.append((1 + Fraction(m, 4)) * Fraction(2) ** (e - 15))
    return vals


ORACLE = _oracle_values()


def _oracle_encode(x: float) -> int:
    # nearest representable value, ties to the even code, saturating
    a = Fraction(abs(x))
    best = min(range(128), key=lambda c: (abs(ORACLE[c] - a), c & 1))
    if best == 0:
        return 0
    return (0x80 if x < 0 else 0) | best


class TestMiniFloat8:
    def test_decode_matches_rational_table(self):
        for c in range(128):
            assert Fraction(minifloat_decode(c)) == ORACLE[c]
            assert minifloat_decode(c | 0x80) == -minifloat_decode(c)

    def test_every_code_round_trips(self):
        for c in range(256):
            if c == 0x80:
                assert minifloat_encode(minifloat_decode(c)) == 0
            else:
                assert minifloat_encode(minifloat_decode(c)) == c

    def test_monotone_on_non_negative_codes(self):
        vals = [minifloat_decode(c) for c in range(128)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_named_points(self):
        assert minifloat_encode(1.0) == 0b0_01111_00
        assert minifloat_decode(0x7F) == MF8_MAX
        assert minifloat_decode(1) == MF8_MIN_SUBNORMAL
        assert minifloat_encode(1e6) == 0x7F
        assert minifloat_encode(-1e6) == 0xFF
        assert minifloat_encode(-0.0) == 0

    def test_ties_go_to_even(self):
        one, next_up = minifloat_decode(0x3C), minifloat_decode(0x3D)
        assert minifloat_encode((one + next_up) / 2) == 0x3C
        a, b = minifloat_decode(0x3D), minifloat_decode(0x3E)
        assert minifloat_encode((a + b) / 2) == 0x3E
        # halfway below the smallest subnormal rounds to zero
        assert minifloat_encode(MF8_MIN_SUBNORMAL / 2) == 0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            minifloat_encode(math.inf)
        with pytest.raises(ValueError):
            minifloat_encode(math.nan)
        with pytest.raises(ValueError):
            minifloat_decode(256)

    @settings(max_examples=400, deadline=None)
    @given(st.floats(min_value=-2e5, max_value=2e5, allow_nan=False))
    def test_encode_matches_nearest_oracle(self, x):
        assert minifloat_encode(x) == _oracle_encode(x)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.floats(min_value=-1e5, max_value=1e5, allow_nan=False), min_size=1, max_size=30))
    def test_vectorized_round_agrees_with_scalar(self, xs):
        got = minifloat_round(np.array(xs))
        want = [minifloat_decode(minifloat_encode(x)) for x in xs]
        np.testing.assert_array_equal(got, want)

    def test_vectorized_round_on_every_midpoint(self):
        mids = [(minifloat_decode(c) + minifloat_decode(c + 1)) / 2 for c in range(127)]
        want = [minifloat_decode(minifloat_encode(m)) for m in mids]
        np.testing.assert_array_equal(minifloat_round(np.array(mids)), want)


class TestQValue6:
    def test_all_codes_round_trip(self):
        codes = range(-Q6_SCALE, Q6_SCALE + 1)
        assert len(codes) == 63
        for c in codes:
            assert q6_quantize(q6_dequantize(c)) == c

    def test_rounding_and_clamp(self):
        assert q6_quantize(0.5) == 16  # 15.5 rounds away from zero
        assert q6_quantize(-0.5) == -16
        assert q6_quantize(2.0) == 31
        assert q6_quantize(-3.0) == -31
        with pytest.raises(ValueError):
            q6_dequantize(32)

    @given(st.floats(min_value=-1, max_value=1))
    def test_quantization_error_at_most_half_step(self, x):
        assert abs(q6_dequantize(q6_quantize(x)) - x) <= 0.5 / Q6_SCALE + 1e-12


class TestSatCounter:
    @pytest.mark.parametrize("width", [2, 3, 8])
    def test_saturates_at_both_ends(self, width):
        c = SatCounter(width, 0)
        for _ in range(300):
            c = sat_step(c, T)
        assert c.state == (1 << width) - 1
        for _ in range(300):
            c = sat_step(c, NT)
        assert c.state == 0

    def test_two_bit_fsm(self):
        table = {(0, T): 1, (1, T): 2, (2, T): 3, (3, T): 3,
                 (0, NT): 0, (1, NT): 0, (2, NT): 1, (3, NT): 2}
        for (s, d), nxt in table.items():
            assert sat_step(SatCounter(2, s), d).state == nxt
        assert [SatCounter(2, s).prediction for s in range(4)] == [NT, NT, T, T]

    def test_bounds_checked(self):
        with pytest.raises(ValueError):
            SatCounter(1, 0)
        with pytest.raises(ValueError):
            SatCounter(2, 4)

    @given(st.integers(-200, 200), st.integers(-300, 300))
    def test_sat_add_clamps(self, v, d):
        r = sat_add(v, d, -127, 127)
        assert r == max(-127, min(127, v + d))
