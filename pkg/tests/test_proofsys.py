"""Transparent proof backend: completeness, soundness, wire form."""

import random

import pytest

from byzsfl import proofsys
from byzsfl.r1cs import MODULUS, ConstraintSystem


def product_circuit(n_products=3):
    """publics x_i, witnesses y_i, z_i with x*y = z and z public? Keep
    simple: one public x, witnesses y and z=x*y per product."""
    cs = ConstraintSystem()
    x = cs.alloc_public()
    ys, zs = [], []
    for _ in range(n_products):
        ys.append(cs.alloc_witness())
        zs.append(cs.alloc_witness())
    for y, z in zip(ys, zs):
        cs.enforce([(x, 1)], [(y, 1)], [(z, 1)])
    return cs


def honest_assignment(cs, rng, n_products=3):
    x = rng.randrange(1, MODULUS)
    publics = [x]
    witness = []
    for _ in range(n_products):
        y = rng.randrange(MODULUS)
        witness += [y, x * y % MODULUS]
    return publics, witness


class TestSetup:
    def test_deterministic_keys(self):
        cs = product_circuit()
        pk1, vk1 = proofsys.setup(cs)
        pk2, vk2 = proofsys.setup(cs)
        assert pk1.digest == pk2.digest == vk1.digest == vk2.digest

    def test_different_circuits_different_digests(self):
        assert proofsys.setup(product_circuit(2))[0].digest != proofsys.setup(product_circuit(3))[0].digest

    def test_unknown_backend(self):
        with pytest.raises(proofsys.BackendUnsupportedError):
            proofsys.setup(product_circuit(), backend="succinct")
        with pytest.raises(proofsys.BackendUnsupportedError):
            proofsys.setup(product_circuit(), backend="nope")


class TestProve:
    def test_honest(self):
        rng = random.Random(0)
        cs = product_circuit()
        pk, vk = proofsys.setup(cs)
        publics, witness = honest_assignment(cs, rng)
        proof = proofsys.prove(pk, publics, witness)
        assert proofsys.verify(vk, proof, publics)

    def test_tampered_witness_refused(self):
        rng = random.Random(1)
        cs = product_circuit()
        pk, _ = proofsys.setup(cs)
        publics, witness = honest_assignment(cs, rng)
        witness[1] += 1
        with pytest.raises(proofsys.UnsatisfiedWitnessError):
            proofsys.prove(pk, publics, witness)

    def test_empty_circuit(self):
        cs = ConstraintSystem()
        pk, vk = proofsys.setup(cs)
        proof = proofsys.prove(pk, [], [])
        assert proof.payload == ()
        assert proofsys.verify(vk, proof, [])


class TestVerify:
    def test_perturbed_public_fails(self):
        rng = random.Random(2)
        cs = product_circuit()
        pk, vk = proofsys.setup(cs)
        publics, witness = honest_assignment(cs, rng)
        proof = proofsys.prove(pk, publics, witness)
        for delta in (1, MODULUS - 1):
            assert not proofsys.verify(vk, proof, [(publics[0] + delta) % MODULUS])

    def test_wrong_payload_length(self):
        cs = product_circuit()
        pk, vk = proofsys.setup(cs)
        with pytest.raises(proofsys.MalformedProofError):
            proofsys.verify(vk, proofsys.Proof("transparent", (1, 2)), [1])

    def test_completeness_100_random(self):
        rng = random.Random(3)
        cs = product_circuit(4)
        pk, vk = proofsys.setup(cs)
        for _ in range(100):
            publics, witness = honest_assignment(cs, rng, 4)
            assert proofsys.verify(vk, proofsys.prove(pk, publics, witness), publics)

    def test_exhaustive_single_value_tampering(self):
        rng = random.Random(4)
        cs = product_circuit(4)
        pk, vk = proofsys.setup(cs)
        publics, witness = honest_assignment(cs, rng, 4)
        proof = proofsys.prove(pk, publics, witness)
        for i in range(len(witness)):
            for delta in (1, MODULUS - 1):
                bad = list(proof.payload)
                bad[i] = (bad[i] + delta) % MODULUS
                assert not proofsys.verify(
                    vk, proofsys.Proof("transparent", tuple(bad)), publics
                )


class TestWireForm:
    def test_roundtrip(self):
        rng = random.Random(5)
        cs = product_circuit()
        pk, _ = proofsys.setup(cs)
        publics, witness = honest_assignment(cs, rng)
        proof = proofsys.prove(pk, publics, witness)
        data = proofsys.serialize_proof(proof)
        assert data[0] == 0x01
        back, consumed = proofsys.deserialize_proof(data)
        assert back == proof and consumed == len(data)

    def test_none_roundtrip(self):
        data = proofsys.serialize_proof(None)
        assert proofsys.deserialize_proof(data) == (None, 5)

    def test_truncated(self):
        data = proofsys.serialize_proof(
            proofsys.Proof("transparent", (5, 6))
        )
        with pytest.raises(proofsys.MalformedProofError):
            proofsys.deserialize_proof(data[:-1])

    def test_unknown_tag(self):
        with pytest.raises(proofsys.MalformedProofError):
            proofsys.deserialize_proof(b"\x07" + (0).to_bytes(4, "big"))

    def test_ragged_payload(self):
        with pytest.raises(proofsys.MalformedProofError):
            proofsys.deserialize_proof(b"\x01" + (33).to_bytes(4, "big") + b"\x00" * 33)

    def test_out_of_field_value(self):
        body = MODULUS.to_bytes(32, "big")
        with pytest.raises(proofsys.MalformedProofError):
            proofsys.deserialize_proof(b"\x01" + (32).to_bytes(4, "big") + body)
