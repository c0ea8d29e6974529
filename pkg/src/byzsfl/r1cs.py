"""Rank-1 constraint systems over the BLS12-381 scalar field.

A constraint is (A . X) * (B . X) = (C . X) where A, B, C are sparse
linear combinations and X is the dense assignment vector laid out as
[one, publics..., witnesses...]. Index 0 is always the constant one.

Field elements are plain ints in [0, MODULUS); linear combinations are
tuples of (variable index, coefficient). Keeping both as primitive
types matters: satisfaction checks walk hundreds of thousands of terms
per proof.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

# Order of the BLS12-381 G1/G2 groups (the scalar field the circuits live in).
MODULUS = 52435875175126190479447740508185965837690552500527637822603658699938581184513

Term = tuple[int, int]
LinComb = tuple[Term, ...]


def field_add(a: int, b: int) -> int:
    return (a + b) % MODULUS


def field_sub(a: int, b: int) -> int:
    return (a - b) % MODULUS


def field_mul(a: int, b: int) -> int:
    return (a * b) % MODULUS


def field_inverse(a: int) -> int:
    if a % MODULUS == 0:
        raise ZeroDivisionError("zero has no multiplicative inverse")
    return pow(a, -1, MODULUS)


def field_from_signed(v: int) -> int:
    """Map a signed integer onto the field; negatives wrap to MODULUS + v."""
    return v % MODULUS


def field_to_signed(v: int) -> int:
    """Centered lift; safe because circuit values are tiny next to MODULUS."""
    v %= MODULUS
    return v - MODULUS if v > MODULUS // 2 else v


def lincomb(terms: Iterable[Term]) -> LinComb:
    """Normalize: canonical coefficients, duplicates merged, zeros dropped."""
    acc: dict[int, int] = {}
    for idx, coeff in terms:
        acc[idx] = (acc.get(idx, 0) + coeff) % MODULUS
    return tuple(sorted((i, c) for i, c in acc.items() if c))


def lc_const(value: int) -> LinComb:
    value %= MODULUS
    return ((0, value),) if value else ()


def lc_var(idx: int, coeff: int = 1) -> LinComb:
    coeff %= MODULUS
    return ((idx, coeff),) if coeff else ()


def eval_lincomb(lc: LinComb, values: Sequence[int]) -> int:
    s = 0
    for idx, coeff in lc:
        s += values[idx] * coeff
    return s % MODULUS


class Constraint(NamedTuple):
    a: LinComb
    b: LinComb
    c: LinComb


class ConstraintSystem:
    """Mutable while a circuit is being built, then treated as immutable."""

    def __init__(self):
        self.num_public = 0
        self.num_witness = 0
        self.constraints: list[Constraint] = []
        self._witness_started = False
        self._digest: Optional[bytes] = None

    # -- allocation ---------------------------------------------------

    def alloc_public(self) -> int:
        if self._witness_started:
            raise RuntimeError("public inputs must be allocated before witnesses")
        self.num_public += 1
        return self.num_public

    def alloc_witness(self) -> int:
        self._witness_started = True
        self.num_witness += 1
        return self.num_public + self.num_witness

    @property
    def num_variables(self) -> int:
        return 1 + self.num_public + self.num_witness

    # -- constraints ----------------------------------------------------

    def enforce(self, a: Iterable[Term], b: Iterable[Term], c: Iterable[Term]) -> None:
        a, b, c = lincomb(a), lincomb(b), lincomb(c)
        bound = self.num_variables
        for lc in (a, b, c):
            for idx, _ in lc:
                if not 0 <= idx < bound:
                    raise IndexError(f"constraint references unallocated variable {idx}")
        self._digest = None
        self.constraints.append(Constraint(a, b, c))

    def enforce_raw(self, a: LinComb, b: LinComb, c: LinComb) -> None:
        """Trusted fast path for gadget builders: terms already normalized."""
        self._digest = None
        self.constraints.append(Constraint(a, b, c))

    # -- satisfaction -----------------------------------------------------

    def is_satisfied(self, assignment: "Assignment") -> tuple[bool, Optional[int]]:
        """True iff every row holds; else (False, first failing row index)."""
        values = assignment.values
        if len(values) != self.num_variables:
            raise ValueError(
                f"assignment has {len(values)} values, circuit has {self.num_variables} variables"
            )
        R = MODULUS
        for k, (a, b, c) in enumerate(self.constraints):
            s = 0
            for i, co in a:
                s += values[i] * co
            t = 0
            for i, co in b:
                t += values[i] * co
            u = 0
            for i, co in c:
                u += values[i] * co
            if (s % R) * (t % R) % R != u % R:
                return False, k
        return True, None

    # -- identity ---------------------------------------------------------

    def digest(self) -> bytes:
        """Canonical hash of the circuit shape; identifies key material."""
        if self._digest is not None:
            return self._digest
        h = hashlib.sha256()
        h.update(self.num_public.to_bytes(4, "big"))
        h.update(self.num_witness.to_bytes(4, "big"))
        h.update(len(self.constraints).to_bytes(4, "big"))
        parts: list[bytes] = []
        for con in self.constraints:
            for lc in con:
                parts.append(len(lc).to_bytes(4, "big"))
                for idx, coeff in lc:
                    parts.append(idx.to_bytes(4, "big"))
                    parts.append(coeff.to_bytes(32, "big"))
            if len(parts) > 65536:
                h.update(b"".join(parts))
                parts.clear()
        h.update(b"".join(parts))
        self._digest = h.digest()
        return self._digest


@dataclass
class Assignment:
    """Dense value vector ordered [one, publics..., witnesses...]."""

    values: list[int]

    def __post_init__(self):
        if not self.values or self.values[0] != 1:
            raise ValueError("assignment must start with the constant one")

    @classmethod
    def from_parts(cls, cs: ConstraintSystem, publics: Sequence[int], witness: Sequence[int]) -> "Assignment":
        if len(publics) != cs.num_public:
            raise ValueError(f"expected {cs.num_public} public inputs, got {len(publics)}")
        if len(witness) != cs.num_witness:
            raise ValueError(f"expected {cs.num_witness} witness values, got {len(witness)}")
        vals = [1]
        vals.extend(v % MODULUS for v in publics)
        vals.extend(v % MODULUS for v in witness)
        return cls(vals)

    def publics(self, cs: ConstraintSystem) -> list[int]:
        return self.values[1 : 1 + cs.num_public]

    def witness(self, cs: ConstraintSystem) -> list[int]:
        return self.values[1 + cs.num_public :]
