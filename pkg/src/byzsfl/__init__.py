"""Byzantine-robust secure federated aggregation.

A library and protocol simulator for dual-server secure aggregation:
clients upload Paillier-encrypted, trust-score-weighted model updates
together with a verifiable-computation proof; a computing server sums
ciphertexts from clients whose proofs verify; an encryption server
decrypts only the aggregate and updates the global model.

Subpackages / modules:

- ``fixedpoint``  deterministic signed fixed-point arithmetic
- ``paillier``    additively homomorphic encryption
- ``fltrust``     plaintext learning and trust-score math (the oracle)
- ``r1cs``        rank-1 constraint systems over the BLS12-381 scalar field
- ``gadgets``     reusable constraint gadgets and the trust-score circuit
- ``proofsys``    Setup / Prove / Verify over circuits
- ``protocol``    client and server state machines plus the wire format
- ``attacks``     Byzantine client behaviours for robustness experiments
- ``experiment``  experiment runner, metrics, bandwidth and timing tables
"""

from . import fixedpoint, paillier, fltrust, r1cs, gadgets, proofsys, protocol, attacks, experiment

__version__ = "0.1.0"

__all__ = [
    "fixedpoint",
    "paillier",
    "fltrust",
    "r1cs",
    "gadgets",
    "proofsys",
    "protocol",
    "attacks",
    "experiment",
]
