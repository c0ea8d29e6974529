"""Proving a trust-score computation inside a constraint system.

A client claims "these ciphertexts encrypt my correctly-weighted
update". The claim compiles to rank-1 constraints over the BLS12-381
scalar field; an honest witness satisfies every row, and nudging any
claimed value breaks one.
Run: python demos/03_circuit_proofs.py
"""

import random

from byzsfl import fltrust as ft
from byzsfl import paillier, proofsys
from byzsfl.fixedpoint import FixedPointConfig
from byzsfl.gadgets import (
    CircuitSpec,
    FLTrustPublicInputs,
    FLTrustWitnessInputs,
    build_fltrust_circuit,
)
from byzsfl.r1cs import Assignment

rng = random.Random(7)
fp = FixedPointConfig(frac_bits=12, word_bits=40)
spec = CircuitSpec(vector_len=4, fp=fp, grad_word_bits=14, paillier_bits=22)
ek, _ = paillier.keygen(22, b"demo-circuit")

print("circuit: trust score + weighted vector + in-circuit encryption")
print(f"update length {spec.vector_len}, toy modulus {ek.n} ({ek.n.bit_length()} bits)")

# the client's side of one round
g_star = [rng.randrange(-4000, 4000) for _ in range(4)]
g = [rng.randrange(-4000, 4000) for _ in range(4)]
scores = ft.fixedpoint_scores(g_star, g, fp)
h = ft.fixedpoint_weighted(scores.ts_norm_raw, g, fp)
m_h = [paillier.encode_signed(v, ek) for v in h]
m_ts = paillier.encode_signed(scores.ts_raw, ek)
r_h = [rng.randrange(2, ek.n) for _ in h]
r_ts = 7
c_h = [paillier.encrypt(mm, rr, ek).value for mm, rr in zip(m_h, r_h)]
c_ts = paillier.encrypt(m_ts, r_ts, ek).value
print(f"claimed scores: TS={scores.ts_raw / fp.scale:.4f}  "
      f"normalized={scores.ts_norm_raw / fp.scale:.4f}")

publics = FLTrustPublicInputs(g_star_raw=g_star, n=ek.n, c_h=c_h, c_ts=c_ts)
witness = FLTrustWitnessInputs(
    g_raw=g, ts_raw=scores.ts_raw, ts_norm_raw=scores.ts_norm_raw, h_raw=h,
    m_h=m_h, m_ts=m_ts, r_h=r_h, r_ts=r_ts,
)
circuit = build_fltrust_circuit(spec, ek_n=ek.n, publics=publics, witness=witness)
print(f"constraints: {len(circuit.cs.constraints)}   "
      f"variables: {circuit.cs.num_variables}   "
      f"public inputs: {circuit.cs.num_public}")

pk, vk = proofsys.setup(circuit.cs)
proof = proofsys.prove(
    pk, circuit.assignment.publics(circuit.cs), circuit.assignment.witness(circuit.cs)
)
ok = proofsys.verify(vk, proof, circuit.assignment.publics(circuit.cs))
print(f"honest proof verifies: {ok}")

# now cheat: claim a normalized weight of 1.0 instead
vals = list(circuit.assignment.values)
vals[circuit.layout.tsn] = fp.scale
good, row = circuit.cs.is_satisfied(Assignment(vals))
print(f"inflated-weight assignment satisfied: {good} (first broken row: {row})")

# or perturb any single witness value at all
idx = rng.randrange(1 + circuit.cs.num_public, circuit.cs.num_variables)
vals = list(circuit.assignment.values)
vals[idx] = (vals[idx] + 1) % (2 ** 255)
good, row = circuit.cs.is_satisfied(Assignment(vals))
print(f"random +-1 witness tamper satisfied: {good} (first broken row: {row})")

print()
print("note: this transparent backend reveals the witness to the verifier;")
print("it gives integrity, not zero-knowledge (see README).")
