"""Deterministic signed fixed-point arithmetic.

A real x is stored as the integer ``floor(x * 2**frac_bits)``. All
rounding is floor (toward minus infinity) everywhere, because the
in-circuit division witness ``a = q*b + rem, 0 <= rem < b`` enforces
exactly that rule; one global rule makes plaintext and circuit values
bit-equal rather than merely close.

Defaults: frac_bits=16, word_bits=40, i.e. magnitudes below 2**23 in
real units with 2**-16 resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class FixedPointConfig:
    """Scale and width of the encoding.

    frac_bits: number of fractional bits; the scale is 2**frac_bits.
    word_bits: signed width any encoded value must fit, |raw| < 2**(word_bits-1).
    """

    frac_bits: int = 16
    word_bits: int = 40

    def __post_init__(self):
        if self.frac_bits < 1:
            raise ValueError("frac_bits must be >= 1")
        if self.word_bits <= self.frac_bits:
            raise ValueError("word_bits must exceed frac_bits")

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def max_raw(self) -> int:
        return 1 << (self.word_bits - 1)

    def supports_vector_len(self, length: int) -> bool:
        """Field-overflow budget for in-circuit dot products of this width."""
        accum = 2 * self.word_bits + max(1, length - 1).bit_length() + 2
        return accum < 252


DEFAULT_CONFIG = FixedPointConfig()


@dataclass(frozen=True)
class FixedPointValue:
    raw: int
    config: FixedPointConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if abs(self.raw) >= self.config.max_raw:
            raise OverflowError(
                f"raw value {self.raw} outside signed {self.config.word_bits}-bit word"
            )


def encode(x: float, cfg: FixedPointConfig = DEFAULT_CONFIG) -> FixedPointValue:
    """Encode a real onto the fixed-point grid, flooring toward -inf."""
    raw = math.floor(x * cfg.scale)
    if abs(raw) >= cfg.max_raw:
        raise OverflowError(f"{x} does not fit a signed {cfg.word_bits}-bit word at scale 2**{cfg.frac_bits}")
    return FixedPointValue(raw, cfg)


def decode(v: FixedPointValue) -> float:
    return v.raw / v.config.scale


def fp_mul(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    """raw = floor(a.raw * b.raw / scale); matches the in-circuit gadget."""
    if a.config != b.config:
        raise ValueError("operands use different fixed-point configs")
    raw = (a.raw * b.raw) >> a.config.frac_bits
    if abs(raw) >= a.config.max_raw:
        raise OverflowError("fixed-point product overflows the word")
    return FixedPointValue(raw, a.config)


def fp_div(a: FixedPointValue, b: FixedPointValue) -> FixedPointValue:
    """raw = floor(a.raw * scale / b.raw), floor semantics as in the gadget."""
    if a.config != b.config:
        raise ValueError("operands use different fixed-point configs")
    if b.raw == 0:
        raise ZeroDivisionError("fixed-point division by zero")
    raw = (a.raw << a.config.frac_bits) // b.raw
    if abs(raw) >= a.config.max_raw:
        raise OverflowError("fixed-point quotient overflows the word")
    return FixedPointValue(raw, a.config)


# Vector helpers used throughout the protocol. Raw vectors are plain
# Python int lists: dot products of wide words overflow int64.

def encode_vector(xs: Iterable[float], cfg: FixedPointConfig = DEFAULT_CONFIG) -> list[int]:
    out = []
    for x in xs:
        raw = math.floor(float(x) * cfg.scale)
        if abs(raw) >= cfg.max_raw:
            raise OverflowError(f"vector entry {x} overflows the {cfg.word_bits}-bit word")
        out.append(raw)
    return out


def decode_vector(raws: Sequence[int], cfg: FixedPointConfig = DEFAULT_CONFIG) -> np.ndarray:
    return np.asarray([r / cfg.scale for r in raws], dtype=np.float64)
