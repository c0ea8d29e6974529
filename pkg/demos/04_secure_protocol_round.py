"""The full dual-server protocol with a cheating client.

Four clients train under byzsfl_toy (everything proven, toy key). One
client inflates its aggregation weight; the computing server rejects it
on sight, and the model evolves exactly as if that client never existed.
Run: python demos/04_secure_protocol_round.py
"""

import numpy as np

from byzsfl import fltrust as ft
from byzsfl import protocol
from byzsfl.attacks import AttackSpec, apply_attack
from byzsfl.fixedpoint import FixedPointConfig, encode_vector

L, m, rounds, seed = 8, 4, 4, 5
fp = FixedPointConfig(frac_bits=14, word_bits=40)
datasets, d_star, _ = ft.make_synthetic_regression(L, m, 32, 0.02, seed)
cfg = protocol.ProtocolConfig(
    mode=protocol.MODE_TOY, vector_len=L, n_clients=m,
    training=ft.TrainingConfig(eta=0.2, alpha=1.0, epochs=rounds),
    fp=fp, grad_word_bits=16, paillier_bits=24,
)

se = protocol.EncryptionServer(cfg, d_star, seed=seed)
clients = [protocol.Client(i, datasets[i], seed=seed) for i in range(m)]
apply_attack(AttackSpec(kind="inflated_weight", targets=(2,)), clients[2])
print(f"mode={cfg.mode}  clients={m}  client 2 inflates its weight\n")

reports = protocol.run_training(se, clients, rounds=rounds)
print(f"{'round':>5} {'loss on D*':>12} {'accepted':>12} {'rejected':>9} "
      f"{'sum TS':>8} {'bytes/client':>13}")
for r in reports:
    size = max(r.submission_bytes.values())
    print(f"{r.round_index:>5} {r.loss:>12.6f} {str(r.accepted):>12} "
          f"{str(r.rejected):>9} {r.ts_sum_raw / fp.scale:>8.3f} {size:>13}")

print()
print("cross-check: the decrypted aggregates equal the plaintext fixed-point")
print("oracle, run over the three honest clients only:")
honest = [datasets[i] for i in (0, 1, 3)]
beta_raw = encode_vector(np.zeros(L), fp)
exact = True
for r in reports:
    oracle = ft.fixedpoint_round_oracle(beta_raw, honest, d_star, cfg.training, fp)
    exact &= (r.agg_h_raw == oracle.agg_h_raw and r.ts_sum_raw == oracle.ts_sum_raw)
    beta_raw = oracle.new_beta_raw
print(f"raw-integer equality across all rounds: {exact}")
print()
print(f"the encryption server decrypted {se.decrypt_count} values "
      f"({rounds} rounds x (L+1)); it never saw a single client's update.")
