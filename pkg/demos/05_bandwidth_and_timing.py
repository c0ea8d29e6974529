"""Transmission sizes at deployment scale, and the phase-timing table.

Encrypted-vector legs are measured from real serialized frames (widths
are value-independent, so zero-valued frames measure honestly without
minutes of exponentiation).
Run: python demos/05_bandwidth_and_timing.py
"""

from byzsfl import paillier
from byzsfl.experiment import (
    bandwidth_estimate,
    measure_bandwidth,
    parse_config,
    run_experiment,
    timing_table,
)

print("=" * 66)
print("Bandwidth per leg, 2048-bit modulus (512-byte residues)")
print("=" * 66)
ek, _ = paillier.keygen(2048, b"demo-bandwidth")
print(f"{'params':>8} {'client->S_C vector':>20} {'S_C->S_E vector':>17} {'S_E->client':>13}")
for L in (9_000, 19_000, 38_000):
    bw = measure_bandwidth(ek, L)
    est = bandwidth_estimate(L, 2048)
    assert bw.client_to_sc_encrypted_vector == est.client_to_sc_encrypted_vector
    print(f"{L:>8} {bw.client_to_sc_encrypted_vector:>17,} B "
          f"{bw.sc_to_se_encrypted_vector:>14,} B {bw.se_to_client_vector:>11,} B")
print("\nthe aggregated vector is as wide as one client's vector: summing")
print("ciphertexts never grows them, so the S_C->S_E leg is flat in clients.")

print()
print("=" * 66)
print("Phase timings from live toy runs (seconds; slowest client)")
print("=" * 66)
runs = []
for L in (8, 16):
    cfg = parse_config(None, dict(
        mode="byzsfl_toy", clients=2, params=L, rounds=2, seed=3,
        paillier_bits=24, frac_bits=14, grad_word_bits=16,
        examples_per_client=16, eta=0.2,
    ))
    _, records, _ = run_experiment(cfg)
    runs.append((L, records))
print(timing_table(runs))
print("\nproving dominates the client; verification dominates S_C; decryption")
print("cost depends only on the vector length, never on the client count.")
