"""Field arithmetic and constraint-system mechanics."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from byzsfl.r1cs import (
    MODULUS,
    Assignment,
    ConstraintSystem,
    eval_lincomb,
    field_add,
    field_from_signed,
    field_inverse,
    field_mul,
    field_sub,
    field_to_signed,
    lincomb,
)


class TestFieldOps:
    @given(st.integers(min_value=1, max_value=MODULUS - 1))
    def test_inverse(self, x):
        assert field_mul(x, field_inverse(x)) == 1

    def test_inverse_of_zero(self):
        with pytest.raises(ZeroDivisionError):
            field_inverse(0)

    def test_from_signed(self):
        assert field_from_signed(-1) == MODULUS - 1
        assert field_from_signed(5) == 5
        assert field_to_signed(MODULUS - 1) == -1
        assert field_to_signed(5) == 5

    def test_wraparound(self):
        assert field_add(MODULUS - 1, 1) == 0
        assert field_sub(0, 1) == MODULUS - 1

    @given(st.integers(), st.integers())
    def test_add_sub_consistent(self, a, b):
        assert field_sub(field_add(a, b), b) == a % MODULUS


class TestAllocation:
    def test_first_public_is_one(self):
        cs = ConstraintSystem()
        assert cs.alloc_public() == 1

    def test_indices_distinct_and_counted(self):
        cs = ConstraintSystem()
        a = cs.alloc_public()
        b = cs.alloc_witness()
        c = cs.alloc_witness()
        assert len({0, a, b, c}) == 4
        assert (cs.num_public, cs.num_witness) == (1, 2)

    def test_publics_before_witnesses(self):
        cs = ConstraintSystem()
        cs.alloc_witness()
        with pytest.raises(RuntimeError):
            cs.alloc_public()


def _xyz_system():
    cs = ConstraintSystem()
    x, y, z = cs.alloc_witness(), cs.alloc_witness(), cs.alloc_witness()
    cs.enforce([(x, 1)], [(y, 1)], [(z, 1)])
    return cs, (x, y, z)


class TestEnforce:
    def test_product_satisfied(self):
        cs, _ = _xyz_system()
        ok, fail = cs.is_satisfied(Assignment([1, 3, 4, 12]))
        assert ok and fail is None

    def test_product_violated(self):
        cs, _ = _xyz_system()
        ok, fail = cs.is_satisfied(Assignment([1, 3, 4, 13]))
        assert not ok and fail == 0

    def test_linear_constraint_via_one(self):
        cs = ConstraintSystem()
        x, y, z = cs.alloc_witness(), cs.alloc_witness(), cs.alloc_witness()
        cs.enforce([(x, 1), (y, 1)], [(0, 1)], [(z, 1)])
        assert cs.is_satisfied(Assignment([1, 3, 4, 7]))[0]
        assert not cs.is_satisfied(Assignment([1, 3, 4, 8]))[0]

    def test_unknown_variable(self):
        cs = ConstraintSystem()
        cs.alloc_witness()
        with pytest.raises(IndexError):
            cs.enforce([(5, 1)], [(0, 1)], [])

    def test_empty_system_satisfied(self):
        cs = ConstraintSystem()
        assert cs.is_satisfied(Assignment([1]))[0]

    def test_length_mismatch(self):
        cs, _ = _xyz_system()
        with pytest.raises(ValueError):
            cs.is_satisfied(Assignment([1, 3, 4]))

    def test_thousand_random_products(self):
        rng = random.Random(11)
        cs = ConstraintSystem()
        values = [1]
        for _ in range(1000):
            a, b = rng.randrange(MODULUS), rng.randrange(MODULUS)
            ia, ib, ic = cs.alloc_witness(), cs.alloc_witness(), cs.alloc_witness()
            values += [a, b, a * b % MODULUS]
            cs.enforce([(ia, 1)], [(ib, 1)], [(ic, 1)])
        assert cs.is_satisfied(Assignment(values)) == (True, None)


class TestLinComb:
    def test_normalization_merges_duplicates(self):
        lc = lincomb([(3, 5), (3, MODULUS - 5), (2, 7), (1, 0)])
        assert lc == ((2, 7),)

    @given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 10 ** 9)), max_size=8))
    def test_evaluation_linear(self, terms):
        rng = random.Random(0)
        lc = lincomb(terms)
        u = [rng.randrange(MODULUS) for _ in range(10)]
        v = [rng.randrange(MODULUS) for _ in range(10)]
        s = [(a + b) % MODULUS for a, b in zip(u, v)]
        assert eval_lincomb(lc, s) == (eval_lincomb(lc, u) + eval_lincomb(lc, v)) % MODULUS


class TestDigest:
    def test_stable_for_identical_builds(self):
        a, _ = _xyz_system()
        b, _ = _xyz_system()
        assert a.digest() == b.digest()

    def test_differs_for_different_circuits(self):
        a, _ = _xyz_system()
        b, (x, y, z) = _xyz_system()
        b.enforce([(x, 1)], [(0, 1)], [(x, 1)])
        assert a.digest() != b.digest()

    def test_cache_invalidated_by_new_constraint(self):
        cs, (x, y, z) = _xyz_system()
        d1 = cs.digest()
        cs.enforce([(x, 1)], [(0, 1)], [(x, 1)])
        assert cs.digest() != d1


class TestAssignment:
    def test_must_start_with_one(self):
        with pytest.raises(ValueError):
            Assignment([0, 2])

    def test_from_parts_checks_lengths(self):
        cs = ConstraintSystem()
        cs.alloc_public()
        cs.alloc_witness()
        asg = Assignment.from_parts(cs, [7], [9])
        assert asg.values == [1, 7, 9]
        assert asg.publics(cs) == [7]
        assert asg.witness(cs) == [9]
        with pytest.raises(ValueError):
            Assignment.from_parts(cs, [7, 8], [9])
