"""Paillier additively homomorphic encryption.

The variant with generator g fixed to n+1: encryption reduces to
``c = (1 + m*n) * r^n mod n^2`` (one modular exponentiation) and the
``1 + m*n`` term has a closed form a constraint circuit can reproduce.
Decryption is the standard ``L(c^lambda mod n^2) * mu mod n`` with
``L(u) = (u - 1) / n``.

Multiplying ciphertexts adds plaintexts, which is all the aggregation
server ever does. Randomness is an explicit argument everywhere so a
client can later present the same r as part of a circuit witness, and
so that transcripts replay bit-exactly from a seed.

Signed values ride in Z_n via a residue split at n/2, with a quarter-n
headroom so sums over many clients cannot wrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from .rng import DeterministicRandom

MIN_MODULUS_BITS = 16   # toy circuit sizes live well below 64 bits
MAX_MODULUS_BITS = 4096


class KeyMismatchError(ValueError):
    """Ciphertext used with a key it was not produced under."""


@dataclass(frozen=True)
class PaillierPublicKey:
    """Public modulus n (= p*q) with g = n+1 implied.

    Attributes:
      n: composite modulus.
      n_sq: n**2, cached because every operation reduces modulo it.
      key_id: short stable identifier derived from n, carried by
        ciphertexts so accidental key mixing fails loudly.
    """

    n: int
    n_sq: int
    key_id: str
    modulus_bits: int

    @property
    def g(self) -> int:
        return self.n + 1

    @property
    def ciphertext_bytes(self) -> int:
        """Fixed wire width of one ciphertext: the n^2 residue."""
        return 2 * ((self.modulus_bits + 7) // 8)

    @property
    def signed_bound(self) -> int:
        """Magnitude limit for signed plaintexts (quarter-n headroom)."""
        return self.n // 4


@dataclass(frozen=True)
class PaillierPrivateKey:
    """lambda = lcm(p-1, q-1) and mu = lambda^-1 mod n."""

    lam: int
    mu: int
    key_id: str


@dataclass(frozen=True)
class PaillierCiphertext:
    value: int
    key_id: str

    def to_bytes(self, ek: PaillierPublicKey) -> bytes:
        return self.value.to_bytes(ek.ciphertext_bytes, "big")

    @classmethod
    def from_bytes(cls, data: bytes, ek: PaillierPublicKey) -> "PaillierCiphertext":
        if len(data) != ek.ciphertext_bytes:
            raise ValueError(f"ciphertext must be {ek.ciphertext_bytes} bytes, got {len(data)}")
        return cls(int.from_bytes(data, "big"), ek.key_id)


def _key_id(n: int) -> str:
    import hashlib

    return hashlib.sha256(n.to_bytes((n.bit_length() + 7) // 8, "big")).hexdigest()[:16]


def _gen_prime(bits: int, rng: DeterministicRandom) -> int:
    # Top two bits forced so the product of two such primes keeps full width.
    cand = rng.getrandbits(bits) | (3 << (bits - 2)) | 1
    return int(gmpy2.next_prime(cand))


def keygen(modulus_bits: int, seed: bytes | str | int) -> tuple[PaillierPublicKey, PaillierPrivateKey]:
    """Deterministic keypair: same (modulus_bits, seed) gives the same keys.

    n has exactly modulus_bits bits. Sizes below 64 bits exist purely for
    circuit experiments and offer no security.
    """
    if not MIN_MODULUS_BITS <= modulus_bits <= MAX_MODULUS_BITS:
        raise ValueError(
            f"modulus_bits must lie in [{MIN_MODULUS_BITS}, {MAX_MODULUS_BITS}], got {modulus_bits}"
        )
    rng = DeterministicRandom(seed, "paillier-keygen")
    half = modulus_bits // 2
    while True:
        p = _gen_prime(modulus_bits - half, rng)
        q = _gen_prime(half, rng)
        if p == q:
            continue
        n = p * q
        if n.bit_length() != modulus_bits:
            continue
        lam = (p - 1) * (q - 1) // math.gcd(p - 1, q - 1)
        try:
            mu = pow(lam, -1, n)
        except ValueError:
            continue
        ek = PaillierPublicKey(n=n, n_sq=n * n, key_id=_key_id(n), modulus_bits=modulus_bits)
        dk = PaillierPrivateKey(lam=lam, mu=mu, key_id=ek.key_id)
        return ek, dk


def draw_randomness(ek: PaillierPublicKey, rng: DeterministicRandom) -> int:
    """Encryption randomness r in Z_n* from a deterministic stream."""
    while True:
        r = rng.randrange(1, ek.n)
        if math.gcd(r, ek.n) == 1:
            return r


def encrypt(m: int, r: int, ek: PaillierPublicKey) -> PaillierCiphertext:
    """c = (1 + m*n) * r^n mod n^2. Pure function of (m, r, ek)."""
    if not 0 <= m < ek.n:
        raise ValueError(f"plaintext must lie in [0, n), got {m}")
    if not 1 <= r < ek.n or math.gcd(r, ek.n) != 1:
        raise ValueError("randomness must lie in Z_n*")
    value = (1 + m * ek.n) * int(gmpy2.powmod(r, ek.n, ek.n_sq)) % ek.n_sq
    return PaillierCiphertext(value=value, key_id=ek.key_id)


def decrypt(c: PaillierCiphertext, dk: PaillierPrivateKey, ek: PaillierPublicKey) -> int:
    if c.key_id != ek.key_id or dk.key_id != ek.key_id:
        raise KeyMismatchError("ciphertext or private key does not match this public key")
    u = int(gmpy2.powmod(c.value, dk.lam, ek.n_sq))
    return (u - 1) // ek.n * dk.mu % ek.n


def add(c1: PaillierCiphertext, c2: PaillierCiphertext, ek: PaillierPublicKey) -> PaillierCiphertext:
    """Homomorphic addition: multiply residues mod n^2."""
    if c1.key_id != c2.key_id or c1.key_id != ek.key_id:
        raise KeyMismatchError("cannot add ciphertexts under different keys")
    return PaillierCiphertext(value=c1.value * c2.value % ek.n_sq, key_id=ek.key_id)


def zero_ciphertext(ek: PaillierPublicKey) -> PaillierCiphertext:
    """E(0, r=1) = 1: the multiplicative identity for aggregation folds."""
    return PaillierCiphertext(value=1, key_id=ek.key_id)


def encode_signed(v: int, ek: PaillierPublicKey) -> int:
    """Signed integer -> residue; negatives map to n + v."""
    if abs(v) >= ek.signed_bound:
        raise OverflowError(
            f"|{v}| exceeds the signed headroom n/4 = {ek.signed_bound}"
        )
    return v if v >= 0 else ek.n + v


def decode_signed(m: int, ek: PaillierPublicKey) -> int:
    """Residue -> signed integer via the n/2 threshold."""
    if not 0 <= m < ek.n:
        raise ValueError("residue outside [0, n)")
    return m - ek.n if m > ek.n // 2 else m


# -- key wire form -------------------------------------------------------

def _pack_int(v: int) -> bytes:
    data = v.to_bytes((v.bit_length() + 7) // 8 or 1, "big")
    return len(data).to_bytes(4, "big") + data


def _unpack_int(data: bytes, offset: int) -> tuple[int, int]:
    n = int.from_bytes(data[offset : offset + 4], "big")
    end = offset + 4 + n
    if end > len(data):
        raise ValueError("truncated key material")
    return int.from_bytes(data[offset + 4 : end], "big"), end


def serialize_public_key(ek: PaillierPublicKey) -> bytes:
    return ek.modulus_bits.to_bytes(4, "big") + _pack_int(ek.n)


def deserialize_public_key(data: bytes) -> PaillierPublicKey:
    bits = int.from_bytes(data[:4], "big")
    n, end = _unpack_int(data, 4)
    if end != len(data) or n.bit_length() != bits:
        raise ValueError("malformed public key")
    return PaillierPublicKey(n=n, n_sq=n * n, key_id=_key_id(n), modulus_bits=bits)
