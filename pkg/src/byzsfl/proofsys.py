"""Setup / Prove / Verify over constraint systems.

The required backend is "transparent": the proof payload is the whole
witness segment and verification re-checks every constraint against the
public inputs. That preserves exactly the integrity semantics the
aggregation protocol needs (a client cannot claim scores its own update
does not produce) but it is NOT zero knowledge: the verifier sees the
witness, including the client's update vector. Treat it as the
reference integrity backend; a succinct pairing-based backend can sit
behind the same interface ("succinct" tag reserved) and would make
proofs constant-size and witness-hiding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .r1cs import MODULUS, Assignment, ConstraintSystem

BACKEND_TRANSPARENT = "transparent"
BACKEND_SUCCINCT = "succinct"

_TAG_NONE = 0x00
_TAG_TRANSPARENT = 0x01
_TAG_SUCCINCT = 0x02
_TAGS = {BACKEND_TRANSPARENT: _TAG_TRANSPARENT, BACKEND_SUCCINCT: _TAG_SUCCINCT}
_FIELD_BYTES = 32


class BackendUnsupportedError(ValueError):
    pass


class UnsatisfiedWitnessError(ValueError):
    """The prover's own assignment fails its circuit."""


class DigestMismatchError(ValueError):
    """Key material does not belong to the circuit at hand."""


class MalformedProofError(ValueError):
    pass


@dataclass(frozen=True)
class ProvingKey:
    backend: str
    digest: bytes
    circuit: ConstraintSystem
    material: bytes = b""


@dataclass(frozen=True)
class VerifyingKey:
    backend: str
    digest: bytes
    circuit: ConstraintSystem
    material: bytes = b""


@dataclass(frozen=True)
class Proof:
    backend: str
    payload: tuple[int, ...]


def setup(circuit: ConstraintSystem, backend: str = BACKEND_TRANSPARENT) -> tuple[ProvingKey, VerifyingKey]:
    """Key generation. Transparent setup is digest-only; identical circuits
    give identical keys."""
    if backend != BACKEND_TRANSPARENT:
        raise BackendUnsupportedError(f"backend {backend!r} is not available")
    digest = circuit.digest()
    return (
        ProvingKey(backend=backend, digest=digest, circuit=circuit),
        VerifyingKey(backend=backend, digest=digest, circuit=circuit),
    )


def prove(pk: ProvingKey, publics: Sequence[int], witness: Sequence[int]) -> Proof:
    """Self-check the assignment, then emit the witness as the payload."""
    if pk.backend != BACKEND_TRANSPARENT:
        raise BackendUnsupportedError(f"backend {pk.backend!r} cannot prove")
    asg = Assignment.from_parts(pk.circuit, publics, witness)
    ok, failing = pk.circuit.is_satisfied(asg)
    if not ok:
        raise UnsatisfiedWitnessError(f"assignment violates constraint {failing}")
    return Proof(backend=pk.backend, payload=tuple(v % MODULUS for v in witness))


def verify(vk: VerifyingKey, proof: Proof, publics: Sequence[int]) -> bool:
    """Rebuild the assignment from publics plus payload and check every row."""
    if vk.backend != BACKEND_TRANSPARENT:
        raise BackendUnsupportedError(f"backend {vk.backend!r} cannot verify")
    if proof.backend != vk.backend:
        return False
    if vk.digest != vk.circuit.digest():
        raise DigestMismatchError("verifying key does not match its circuit")
    if len(proof.payload) != vk.circuit.num_witness:
        raise MalformedProofError(
            f"payload carries {len(proof.payload)} values, circuit has "
            f"{vk.circuit.num_witness} witness variables"
        )
    if len(publics) != vk.circuit.num_public:
        return False
    asg = Assignment.from_parts(vk.circuit, publics, list(proof.payload))
    ok, _ = vk.circuit.is_satisfied(asg)
    return ok


# -- wire form ---------------------------------------------------------------

def serialize_proof(proof: Optional[Proof]) -> bytes:
    """1 tag byte, 4-byte big-endian payload length, then the payload.

    None encodes as the empty tag (proof-free protocol modes).
    """
    if proof is None:
        return bytes([_TAG_NONE]) + (0).to_bytes(4, "big")
    tag = _TAGS.get(proof.backend)
    if tag is None:
        raise BackendUnsupportedError(f"no wire tag for backend {proof.backend!r}")
    body = b"".join(v.to_bytes(_FIELD_BYTES, "big") for v in proof.payload)
    return bytes([tag]) + len(body).to_bytes(4, "big") + body


def deserialize_proof(data: bytes) -> tuple[Optional[Proof], int]:
    """Decode one proof; returns (proof, bytes consumed)."""
    if len(data) < 5:
        raise MalformedProofError("truncated proof header")
    tag = data[0]
    length = int.from_bytes(data[1:5], "big")
    end = 5 + length
    if end > len(data):
        raise MalformedProofError("truncated proof payload")
    if tag == _TAG_NONE:
        if length:
            raise MalformedProofError("empty proof with non-empty payload")
        return None, end
    if tag == _TAG_TRANSPARENT:
        if length % _FIELD_BYTES:
            raise MalformedProofError("payload is not whole field elements")
        body = data[5:end]
        payload = tuple(
            int.from_bytes(body[i : i + _FIELD_BYTES], "big")
            for i in range(0, length, _FIELD_BYTES)
        )
        if any(v >= MODULUS for v in payload):
            raise MalformedProofError("payload value outside the field")
        return Proof(backend=BACKEND_TRANSPARENT, payload=payload), end
    raise MalformedProofError(f"unknown proof tag 0x{tag:02x}")
