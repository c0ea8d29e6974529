"""Fixed-point encoding and arithmetic."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from byzsfl.fixedpoint import (
    DEFAULT_CONFIG,
    FixedPointConfig,
    FixedPointValue,
    decode,
    decode_vector,
    encode,
    encode_vector,
    fp_div,
    fp_mul,
)

F16 = FixedPointConfig(frac_bits=16, word_bits=40)


def fxp(x: float) -> FixedPointValue:
    return encode(x, F16)


class TestEncodeDecode:
    @pytest.mark.parametrize("x,raw", [(1.5, 98304), (0.0, 0), (-0.25, -16384)])
    def test_encode_values(self, x, raw):
        assert encode(x, F16).raw == raw

    @pytest.mark.parametrize("raw,x", [(98304, 1.5), (-16384, -0.25), (1, 2.0 ** -16)])
    def test_decode_values(self, raw, x):
        assert decode(FixedPointValue(raw, F16)) == x

    def test_encode_floors_toward_minus_inf(self):
        assert encode(-1.00001, F16).raw == math.floor(-1.00001 * 65536)
        assert encode(0.99999, F16).raw == math.floor(0.99999 * 65536)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            encode(2.0 ** 24, F16)
        with pytest.raises(OverflowError):
            FixedPointValue(1 << 39, F16)

    @given(st.integers(min_value=-(1 << 39) + 1, max_value=(1 << 39) - 1))
    def test_grid_round_trip_exact(self, raw):
        x = raw / 65536
        assert encode(x, F16).raw == raw

    @given(st.floats(min_value=-1000, max_value=1000, allow_nan=False))
    def test_decode_encode_close(self, x):
        # mathematically strict (< 2^-16); float subtraction can round the
        # gap up to the boundary for x just below a grid point
        assert abs(decode(encode(x, F16)) - x) <= 2.0 ** -16


class TestArithmetic:
    @pytest.mark.parametrize(
        "a,b,out",
        [(98304, 98304, 147456), (98304, -16384, -24576)],
    )
    def test_mul_values(self, a, b, out):
        assert fp_mul(FixedPointValue(a, F16), FixedPointValue(b, F16)).raw == out

    @given(st.integers(min_value=-(1 << 20), max_value=1 << 20))
    def test_mul_identity(self, raw):
        one = encode(1.0, F16)
        assert fp_mul(FixedPointValue(raw, F16), one).raw == raw

    def test_div_exact(self):
        assert fp_div(fxp(3.0), fxp(2.0)).raw == encode(1.5, F16).raw

    def test_div_floor(self):
        # independent oracle: exact rational, floored
        expected = math.floor(Fraction(65536 * 65536, 3 * 65536))
        assert expected == 21845
        assert fp_div(fxp(1.0), fxp(3.0)).raw == 21845

    def test_div_zero_numerator(self):
        assert fp_div(fxp(0.0), fxp(5.0)).raw == 0

    def test_div_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            fp_div(fxp(1.0), fxp(0.0))

    def test_config_mismatch(self):
        other = FixedPointConfig(frac_bits=8, word_bits=30)
        with pytest.raises(ValueError):
            fp_mul(fxp(1.0), encode(1.0, other))

    @given(
        st.integers(min_value=-(1 << 19), max_value=1 << 19),
        st.integers(min_value=-(1 << 19), max_value=1 << 19),
        st.integers(min_value=0, max_value=1 << 19),
    )
    def test_mul_monotone_in_first_arg(self, a, b, c):
        lo, hi = sorted((a, b))
        cv = FixedPointValue(c, F16)
        assert fp_mul(FixedPointValue(lo, F16), cv).raw <= fp_mul(FixedPointValue(hi, F16), cv).raw

    @given(
        st.integers(min_value=-(1 << 22), max_value=1 << 22),
        st.integers(min_value=-(1 << 30), max_value=1 << 30).filter(lambda v: v != 0),
    )
    @settings(max_examples=300)
    def test_div_matches_rational_floor(self, a, bdiv):
        expected = math.floor(Fraction(a * 65536, bdiv))
        if abs(expected) >= 1 << 39:
            with pytest.raises(OverflowError):
                fp_div(FixedPointValue(a, F16), FixedPointValue(bdiv, F16))
        else:
            assert fp_div(FixedPointValue(a, F16), FixedPointValue(bdiv, F16)).raw == expected


class TestConfig:
    def test_invariants(self):
        with pytest.raises(ValueError):
            FixedPointConfig(frac_bits=0)
        with pytest.raises(ValueError):
            FixedPointConfig(frac_bits=16, word_bits=16)

    def test_field_budget(self):
        assert DEFAULT_CONFIG.supports_vector_len(1 << 20)
        assert not FixedPointConfig(frac_bits=16, word_bits=125).supports_vector_len(16)

    def test_vector_helpers(self):
        raws = encode_vector([1.5, -0.25, 0.0], F16)
        assert raws == [98304, -16384, 0]
        back = decode_vector(raws, F16)
        assert list(back) == [1.5, -0.25, 0.0]
