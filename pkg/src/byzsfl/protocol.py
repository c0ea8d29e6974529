"""Dual-server aggregation protocol: parties, modes, wire format.

Parties
  Client             computes its update, scores it, encrypts, proves.
  ComputingServer    verifies proofs, sums ciphertexts; never decrypts.
  EncryptionServer   holds the decryption key, decrypts only aggregates,
                     updates the model, recomputes the reference update.

Modes
  duoagg_plain   no weights, no proofs; plain encrypted averaging with a
                 production-size modulus (>= 1024 bits).
  byzsfl_toy     all three proof stages including in-circuit encryption;
                 restricted to toy moduli (<= 60 bits).
  byzsfl_large   scoring and weighting proven, production-size modulus;
                 the encryption-consistency stage is NOT proven. This is
                 an explicit, logged integrity gap, accepted because
                 in-circuit exponentiation at such moduli does not fit a
                 single field element.

Every message crosses a byte-exact serialization boundary even though
transport is in-process, so reported sizes are real frame sizes and a
socket transport would be a mechanical addition.

Wire format: frame = 1 type byte || 4-byte big-endian length || body.
Ciphertext vectors: 4-byte count then fixed-width n^2 residues.
Fixed-point vectors: 4-byte count then 8-byte two's-complement raws.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import paillier, proofsys
from .fixedpoint import FixedPointConfig, decode_vector, encode_vector
from .fltrust import (
    Dataset,
    DegenerateRoundError,
    FixedScores,
    ModelParams,
    TrainingConfig,
    fixedpoint_scores,
    fixedpoint_weighted,
    local_update,
    mse_loss,
    reference_update,
)
from .gadgets import (
    ALL_STAGES,
    STAGE_TRUST_SCORE,
    STAGE_WEIGHTED,
    CircuitSpec,
    FLTrustPublicInputs,
    FLTrustWitnessInputs,
    build_fltrust_circuit,
    public_input_values,
)
from .rng import DeterministicRandom

MODE_DUOAGG = "duoagg_plain"
MODE_TOY = "byzsfl_toy"
MODE_LARGE = "byzsfl_large"
MODES = (MODE_DUOAGG, MODE_TOY, MODE_LARGE)

_FRAME_SETUP = 0x01
_FRAME_SUBMISSION = 0x02
_FRAME_AGGREGATE = 0x03
_FRAME_BROADCAST = 0x04

_OPTIMIZERS = {"SGD": 0}
_OPTIMIZERS_REV = {v: k for k, v in _OPTIMIZERS.items()}


def _model_code(model) -> tuple[int, int]:
    from .fltrust import LinearModel, TinyMLP

    if isinstance(model, TinyMLP):
        return 1, model.hidden
    if isinstance(model, LinearModel):
        return 0, 0
    raise ConfigError(f"predictor {model!r} has no wire encoding")


def _model_from_code(kind: int, hidden: int):
    from .fltrust import LINEAR, TinyMLP

    if kind == 0:
        return LINEAR
    if kind == 1:
        return TinyMLP(hidden)
    raise MalformedFrameError(f"unknown model code {kind}")


class ConfigError(ValueError):
    pass


class MalformedFrameError(ValueError):
    pass


class ProvingError(RuntimeError):
    """An honest client could not produce a consistent witness."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Experiment-wide protocol parameters, fixed at setup."""

    mode: str
    vector_len: int
    n_clients: int
    training: TrainingConfig = dc_field(default_factory=TrainingConfig)
    fp: FixedPointConfig = dc_field(default_factory=FixedPointConfig)
    grad_word_bits: int = 40
    paillier_bits: int = 2048
    init_beta: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.vector_len < 1 or self.n_clients < 1:
            raise ConfigError("vector_len and n_clients must be positive")
        if self.grad_word_bits <= self.fp.frac_bits or self.grad_word_bits > self.fp.word_bits:
            raise ConfigError("grad_word_bits must lie in (frac_bits, word_bits]")
        if self.mode == MODE_TOY:
            if not 16 <= self.paillier_bits <= 60:
                raise ConfigError("byzsfl_toy needs a toy modulus (16..60 bits)")
        else:
            if self.paillier_bits < 1024:
                raise ConfigError(f"{self.mode} needs a modulus of >= 1024 bits")

    def circuit_spec(self) -> Optional[CircuitSpec]:
        if self.mode == MODE_DUOAGG:
            return None
        stages = ALL_STAGES if self.mode == MODE_TOY else frozenset({STAGE_TRUST_SCORE, STAGE_WEIGHTED})
        return CircuitSpec(
            vector_len=self.vector_len,
            fp=self.fp,
            grad_word_bits=self.grad_word_bits,
            paillier_bits=self.paillier_bits if self.mode == MODE_TOY else None,
            stages=stages,
        )

    def validate_key(self, ek: paillier.PaillierPublicKey) -> None:
        # Worst-case trust-score mass is exactly m * scale (scores are
        # clamped at one); update sums are additionally guarded per value
        # at encryption time.
        if self.n_clients * self.fp.scale > ek.signed_bound:
            raise ConfigError("client count exceeds the signed headroom n/4")


# -- messages ---------------------------------------------------------------

@dataclass(frozen=True)
class SetupMessage:
    mode: str
    beta0_raw: list[int]
    eta: float
    alpha: float
    epochs: int
    optimizer: str
    model_kind: int
    model_hidden: int
    frac_bits: int
    word_bits: int
    grad_word_bits: int
    ek: paillier.PaillierPublicKey
    g_star_raw: list[int]
    circuit_digest: bytes  # 32 zero bytes in proof-free modes


@dataclass(frozen=True)
class ClientSubmission:
    client_id: int
    c_ts: paillier.PaillierCiphertext
    c_h: list[paillier.PaillierCiphertext]
    proof: Optional[proofsys.Proof]


@dataclass(frozen=True)
class AggregateMessage:
    c_h: list[paillier.PaillierCiphertext]
    c_ts: paillier.PaillierCiphertext
    accepted: list[int]


@dataclass(frozen=True)
class ModelBroadcast:
    round_index: int
    beta_raw: list[int]
    g_star_raw: list[int]


# -- wire helpers ------------------------------------------------------------

def _frame(kind: int, body: bytes) -> bytes:
    return bytes([kind]) + len(body).to_bytes(4, "big") + body


def _unframe(kind: int, data: bytes) -> bytes:
    if len(data) < 5:
        raise MalformedFrameError("truncated frame header")
    if data[0] != kind:
        raise MalformedFrameError(f"expected frame type {kind}, got {data[0]}")
    length = int.from_bytes(data[1:5], "big")
    if len(data) != 5 + length:
        raise MalformedFrameError("frame length does not match body")
    return data[5:]


def _pack_fpvec(raws: Sequence[int]) -> bytes:
    out = [len(raws).to_bytes(4, "big")]
    for r in raws:
        out.append(int(r).to_bytes(8, "big", signed=True))
    return b"".join(out)


def _unpack_fpvec(data: bytes, offset: int) -> tuple[list[int], int]:
    if offset + 4 > len(data):
        raise MalformedFrameError("truncated vector count")
    n = int.from_bytes(data[offset : offset + 4], "big")
    end = offset + 4 + 8 * n
    if end > len(data):
        raise MalformedFrameError("truncated fixed-point vector")
    vals = [
        int.from_bytes(data[i : i + 8], "big", signed=True)
        for i in range(offset + 4, end, 8)
    ]
    return vals, end


def _pack_ctvec(cts: Sequence[paillier.PaillierCiphertext], ek: paillier.PaillierPublicKey) -> bytes:
    return len(cts).to_bytes(4, "big") + b"".join(c.to_bytes(ek) for c in cts)


def _unpack_ctvec(data: bytes, offset: int, ek: paillier.PaillierPublicKey) -> tuple[list[paillier.PaillierCiphertext], int]:
    if offset + 4 > len(data):
        raise MalformedFrameError("truncated ciphertext count")
    n = int.from_bytes(data[offset : offset + 4], "big")
    w = ek.ciphertext_bytes
    end = offset + 4 + n * w
    if end > len(data):
        raise MalformedFrameError("truncated ciphertext vector")
    cts = [
        paillier.PaillierCiphertext.from_bytes(data[i : i + w], ek)
        for i in range(offset + 4, end, w)
    ]
    return cts, end


def serialize_setup(msg: SetupMessage) -> bytes:
    ek_bytes = paillier.serialize_public_key(msg.ek)
    body = b"".join([
        MODES.index(msg.mode).to_bytes(1, "big"),
        struct.pack(">dd", msg.eta, msg.alpha),
        msg.epochs.to_bytes(4, "big"),
        _OPTIMIZERS[msg.optimizer].to_bytes(1, "big"),
        msg.model_kind.to_bytes(1, "big"),
        msg.model_hidden.to_bytes(1, "big"),
        msg.frac_bits.to_bytes(2, "big"),
        msg.word_bits.to_bytes(2, "big"),
        msg.grad_word_bits.to_bytes(2, "big"),
        len(ek_bytes).to_bytes(4, "big"),
        ek_bytes,
        _pack_fpvec(msg.beta0_raw),
        _pack_fpvec(msg.g_star_raw),
        msg.circuit_digest,
    ])
    return _frame(_FRAME_SETUP, body)


def deserialize_setup(data: bytes) -> SetupMessage:
    body = _unframe(_FRAME_SETUP, data)
    try:
        mode = MODES[body[0]]
        eta, alpha = struct.unpack(">dd", body[1:17])
        epochs = int.from_bytes(body[17:21], "big")
        optimizer = _OPTIMIZERS_REV[body[21]]
        model_kind = body[22]
        model_hidden = body[23]
        frac_bits = int.from_bytes(body[24:26], "big")
        word_bits = int.from_bytes(body[26:28], "big")
        grad_word_bits = int.from_bytes(body[28:30], "big")
        ek_len = int.from_bytes(body[30:34], "big")
        ek = paillier.deserialize_public_key(body[34 : 34 + ek_len])
        beta0, off = _unpack_fpvec(body, 34 + ek_len)
        g_star, off = _unpack_fpvec(body, off)
        digest = body[off : off + 32]
        if len(digest) != 32 or off + 32 != len(body):
            raise MalformedFrameError("bad setup trailer")
    except (IndexError, KeyError, ValueError, struct.error) as exc:
        raise MalformedFrameError(f"malformed setup message: {exc}") from exc
    return SetupMessage(
        mode=mode, beta0_raw=beta0, eta=eta, alpha=alpha, epochs=epochs,
        optimizer=optimizer, model_kind=model_kind, model_hidden=model_hidden,
        frac_bits=frac_bits, word_bits=word_bits,
        grad_word_bits=grad_word_bits, ek=ek, g_star_raw=g_star,
        circuit_digest=digest,
    )


def serialize_submission(msg: ClientSubmission, ek: paillier.PaillierPublicKey) -> bytes:
    body = b"".join([
        msg.client_id.to_bytes(4, "big"),
        msg.c_ts.to_bytes(ek),
        _pack_ctvec(msg.c_h, ek),
        proofsys.serialize_proof(msg.proof),
    ])
    return _frame(_FRAME_SUBMISSION, body)


def deserialize_submission(data: bytes, ek: paillier.PaillierPublicKey) -> ClientSubmission:
    body = _unframe(_FRAME_SUBMISSION, data)
    try:
        client_id = int.from_bytes(body[:4], "big")
        w = ek.ciphertext_bytes
        c_ts = paillier.PaillierCiphertext.from_bytes(body[4 : 4 + w], ek)
        c_h, off = _unpack_ctvec(body, 4 + w, ek)
        proof, end = proofsys.deserialize_proof(body[off:])
        if off + end != len(body):
            raise MalformedFrameError("trailing bytes after proof")
    except (proofsys.MalformedProofError, ValueError) as exc:
        raise MalformedFrameError(f"malformed submission: {exc}") from exc
    return ClientSubmission(client_id=client_id, c_ts=c_ts, c_h=c_h, proof=proof)


def serialize_aggregate(msg: AggregateMessage, ek: paillier.PaillierPublicKey) -> bytes:
    body = b"".join([
        msg.c_ts.to_bytes(ek),
        _pack_ctvec(msg.c_h, ek),
        len(msg.accepted).to_bytes(4, "big"),
        b"".join(i.to_bytes(4, "big") for i in msg.accepted),
    ])
    return _frame(_FRAME_AGGREGATE, body)


def deserialize_aggregate(data: bytes, ek: paillier.PaillierPublicKey) -> AggregateMessage:
    body = _unframe(_FRAME_AGGREGATE, data)
    try:
        w = ek.ciphertext_bytes
        c_ts = paillier.PaillierCiphertext.from_bytes(body[:w], ek)
        c_h, off = _unpack_ctvec(body, w, ek)
        count = int.from_bytes(body[off : off + 4], "big")
        end = off + 4 + 4 * count
        if end != len(body):
            raise MalformedFrameError("bad accepted-id list")
        accepted = [
            int.from_bytes(body[i : i + 4], "big") for i in range(off + 4, end, 4)
        ]
    except ValueError as exc:
        raise MalformedFrameError(f"malformed aggregate: {exc}") from exc
    return AggregateMessage(c_h=c_h, c_ts=c_ts, accepted=accepted)


def serialize_broadcast(msg: ModelBroadcast) -> bytes:
    body = b"".join([
        msg.round_index.to_bytes(4, "big"),
        _pack_fpvec(msg.beta_raw),
        _pack_fpvec(msg.g_star_raw),
    ])
    return _frame(_FRAME_BROADCAST, body)


def deserialize_broadcast(data: bytes) -> ModelBroadcast:
    body = _unframe(_FRAME_BROADCAST, data)
    round_index = int.from_bytes(body[:4], "big")
    beta, off = _unpack_fpvec(body, 4)
    g_star, off = _unpack_fpvec(body, off)
    if off != len(body):
        raise MalformedFrameError("trailing bytes after broadcast")
    return ModelBroadcast(round_index=round_index, beta_raw=beta, g_star_raw=g_star)


# -- parties -----------------------------------------------------------------

def _encode_update(g: np.ndarray, cfg: ProtocolConfig) -> list[int]:
    raws = encode_vector(g, cfg.fp)
    bound = 1 << (cfg.grad_word_bits - 1)
    for r in raws:
        if abs(r) >= bound:
            raise OverflowError(
                f"update entry {r} exceeds the {cfg.grad_word_bits}-bit gradient word"
            )
    return raws


class EncryptionServer:
    """Key holder and model owner; sees only decrypted aggregates."""

    def __init__(self, cfg: ProtocolConfig, d_star: Dataset, seed: int | bytes | str):
        self.cfg = cfg
        self.d_star = d_star
        rng = DeterministicRandom(seed, "encryption-server")
        self.ek, self._dk = paillier.keygen(cfg.paillier_bits, rng.next_bytes(32))
        cfg.validate_key(self.ek)
        spec = cfg.circuit_spec()
        if spec is None:
            self._digest = bytes(32)
        else:
            shape = build_fltrust_circuit(spec, ek_n=self.ek.n if spec.paillier_bits else None)
            self._digest = shape.cs.digest()
        beta0 = cfg.init_beta if cfg.init_beta is not None else np.zeros(cfg.vector_len)
        self.beta_raw = encode_vector(beta0, cfg.fp)
        self.round_index = 0
        self.decrypt_count = 0
        self.last_decrypt_time = 0.0

    def _reference_raw(self) -> list[int]:
        beta = ModelParams(decode_vector(self.beta_raw, self.cfg.fp))
        g_star = reference_update(beta, self.d_star, self.cfg.training)
        raws = _encode_update(g_star.g, self.cfg)
        if all(v == 0 for v in raws):
            raise DegenerateRoundError("reference update vanished; aborting round")
        return raws

    def setup_message(self) -> SetupMessage:
        t = self.cfg.training
        kind, hidden = _model_code(t.model)
        return SetupMessage(
            mode=self.cfg.mode,
            beta0_raw=list(self.beta_raw),
            eta=t.eta, alpha=t.alpha, epochs=t.epochs, optimizer=t.optimizer,
            model_kind=kind, model_hidden=hidden,
            frac_bits=self.cfg.fp.frac_bits, word_bits=self.cfg.fp.word_bits,
            grad_word_bits=self.cfg.grad_word_bits,
            ek=self.ek,
            g_star_raw=self._reference_raw(),
            circuit_digest=self._digest,
        )

    def finalize(self, agg: AggregateMessage) -> ModelBroadcast:
        """Decrypt the aggregate (L+1 decryptions), step the model, re-derive
        the reference update at the new model."""
        if len(agg.c_h) != self.cfg.vector_len:
            raise MalformedFrameError("aggregate width does not match the model")
        t0 = time.perf_counter()
        h_raw = []
        for c in agg.c_h:
            h_raw.append(paillier.decode_signed(paillier.decrypt(c, self._dk, self.ek), self.ek))
            self.decrypt_count += 1
        ts_sum = paillier.decode_signed(paillier.decrypt(agg.c_ts, self._dk, self.ek), self.ek)
        self.decrypt_count += 1
        self.last_decrypt_time = time.perf_counter() - t0
        if ts_sum > 0:
            beta = decode_vector(self.beta_raw, self.cfg.fp)
            step = self.cfg.training.alpha * np.asarray([float(v) for v in h_raw]) / float(ts_sum)
            self.beta_raw = encode_vector(beta + step, self.cfg.fp)
        self.round_index += 1
        return ModelBroadcast(
            round_index=self.round_index,
            beta_raw=list(self.beta_raw),
            g_star_raw=self._reference_raw(),
        )

    def current_loss(self) -> float:
        beta = ModelParams(decode_vector(self.beta_raw, self.cfg.fp))
        return mse_loss(beta, self.d_star, self.cfg.training.model)


class ComputingServer:
    """Aggregates ciphertexts over clients whose proofs verify. Holds no
    decryption key by construction."""

    def __init__(self, cfg: ProtocolConfig, setup: SetupMessage):
        self.cfg = cfg
        self.ek = setup.ek
        self.g_star_raw = list(setup.g_star_raw)
        self.spec = cfg.circuit_spec()
        self.vk = None
        if self.spec is not None:
            shape = build_fltrust_circuit(
                self.spec, ek_n=self.ek.n if self.spec.paillier_bits else None
            )
            if shape.cs.digest() != setup.circuit_digest:
                raise proofsys.DigestMismatchError(
                    "setup message advertises a different circuit"
                )
            _, self.vk = proofsys.setup(shape.cs)
        self.last_verify_time = 0.0
        self.last_compute_time = 0.0

    def observe_broadcast(self, msg: ModelBroadcast) -> None:
        self.g_star_raw = list(msg.g_star_raw)

    def _verify(self, sub: ClientSubmission) -> bool:
        if len(sub.c_h) != self.cfg.vector_len:
            return False
        if self.spec is None:
            return True
        if sub.proof is None:
            return False
        publics = public_input_values(
            self.spec,
            self.g_star_raw,
            n=self.ek.n if self.spec.paillier_bits else None,
            c_h=[c.value for c in sub.c_h] if self.spec.paillier_bits else None,
            c_ts=sub.c_ts.value if self.spec.paillier_bits else None,
        )
        try:
            return proofsys.verify(self.vk, sub.proof, publics)
        except proofsys.MalformedProofError:
            return False

    def aggregate(self, submissions: Sequence[ClientSubmission]) -> AggregateMessage:
        """Verify every submission, then fold ciphertexts over accepted
        clients only. Rejection is recorded, never raised."""
        t0 = time.perf_counter()
        accepted = [sub for sub in submissions if self._verify(sub)]
        self.last_verify_time = time.perf_counter() - t0
        t0 = time.perf_counter()
        L = self.cfg.vector_len
        c_h = [paillier.zero_ciphertext(self.ek) for _ in range(L)]
        c_ts = paillier.zero_ciphertext(self.ek)
        for sub in accepted:
            for j in range(L):
                c_h[j] = paillier.add(c_h[j], sub.c_h[j], self.ek)
            c_ts = paillier.add(c_ts, sub.c_ts, self.ek)
        self.last_compute_time = time.perf_counter() - t0
        return AggregateMessage(c_h=c_h, c_ts=c_ts, accepted=[s.client_id for s in accepted])


class Client:
    """Honest client; attack behaviours subclass the hook methods."""

    def __init__(self, client_id: int, dataset: Dataset, seed: int | bytes | str):
        self.client_id = client_id
        self.dataset = dataset
        self._rng = DeterministicRandom(seed, f"client-{client_id}")
        self.cfg: Optional[ProtocolConfig] = None
        self.ek = None
        self.pk = None
        self.spec = None
        self.beta_raw: list[int] = []
        self.g_star_raw: list[int] = []
        self.last_compute_time = 0.0
        self.last_encrypt_time = 0.0
        self.last_prove_time = 0.0
        self.last_scores: Optional[FixedScores] = None

    def install(self, setup: SetupMessage, n_clients: int) -> None:
        self.cfg = ProtocolConfig(
            mode=setup.mode,
            vector_len=len(setup.beta0_raw),
            n_clients=n_clients,
            training=TrainingConfig(
                eta=setup.eta, alpha=setup.alpha, epochs=setup.epochs,
                optimizer=setup.optimizer,
                model=_model_from_code(setup.model_kind, setup.model_hidden),
            ),
            fp=FixedPointConfig(frac_bits=setup.frac_bits, word_bits=setup.word_bits),
            grad_word_bits=setup.grad_word_bits,
            paillier_bits=setup.ek.modulus_bits,
        )
        self.ek = setup.ek
        self.spec = self.cfg.circuit_spec()
        if self.spec is not None:
            shape = build_fltrust_circuit(
                self.spec, ek_n=self.ek.n if self.spec.paillier_bits else None
            )
            if shape.cs.digest() != setup.circuit_digest:
                raise proofsys.DigestMismatchError("local circuit build disagrees with setup")
            self.pk, _ = proofsys.setup(shape.cs)
        self.beta_raw = list(setup.beta0_raw)
        self.g_star_raw = list(setup.g_star_raw)

    # -- attack hook points ------------------------------------------------

    def compute_update(self, beta: ModelParams) -> np.ndarray:
        return local_update(beta, self.dataset, self.cfg.training).g

    def claim_scores(
        self, scores: FixedScores, g_raw: list[int], h_raw: list[int]
    ) -> tuple[FixedScores, list[int]]:
        return scores, h_raw

    def make_proof(self, publics: list[int], witness_vals: list[int]) -> proofsys.Proof:
        # honest path self-checks; a cheating subclass emits the payload raw
        return proofsys.prove(self.pk, publics, witness_vals)

    def finalize_submission(self, sub: ClientSubmission) -> ClientSubmission:
        return sub

    # -----------------------------------------------------------------------

    def observe_broadcast(self, msg: ModelBroadcast) -> None:
        self.beta_raw = list(msg.beta_raw)
        self.g_star_raw = list(msg.g_star_raw)

    def round(self) -> ClientSubmission:
        """One full client step: update, score, encrypt, prove."""
        cfg = self.cfg
        if cfg is None:
            raise RuntimeError("client not installed")
        S = cfg.fp.scale

        t0 = time.perf_counter()
        beta = ModelParams(decode_vector(self.beta_raw, cfg.fp))
        g = self.compute_update(beta)
        g_raw = _encode_update(g, cfg)
        if cfg.mode == MODE_DUOAGG:
            scores, h_raw = FixedScores(S, S), list(g_raw)
        else:
            if all(v == 0 for v in g_raw):
                raise ProvingError("zero update cannot be scored or proven")
            scores = fixedpoint_scores(self.g_star_raw, g_raw, cfg.fp)
            h_raw = fixedpoint_weighted(scores.ts_norm_raw, g_raw, cfg.fp)
        scores, h_raw = self.claim_scores(scores, g_raw, h_raw)
        self.last_scores = scores
        self.last_compute_time = time.perf_counter() - t0

        t0 = time.perf_counter()
        m_h = [paillier.encode_signed(v, self.ek) for v in h_raw]
        m_ts = paillier.encode_signed(scores.ts_raw, self.ek)
        r_h = [paillier.draw_randomness(self.ek, self._rng) for _ in h_raw]
        r_ts = paillier.draw_randomness(self.ek, self._rng)
        c_h = [paillier.encrypt(m, r, self.ek) for m, r in zip(m_h, r_h)]
        c_ts = paillier.encrypt(m_ts, r_ts, self.ek)
        self.last_encrypt_time = time.perf_counter() - t0

        t0 = time.perf_counter()
        proof = None
        if self.spec is not None:
            enc = self.spec.paillier_bits is not None
            publics = FLTrustPublicInputs(
                g_star_raw=list(self.g_star_raw),
                n=self.ek.n if enc else None,
                c_h=[c.value for c in c_h] if enc else None,
                c_ts=c_ts.value if enc else None,
            )
            witness = FLTrustWitnessInputs(
                g_raw=list(g_raw),
                ts_raw=scores.ts_raw,
                ts_norm_raw=scores.ts_norm_raw,
                h_raw=list(h_raw),
                m_h=m_h if enc else None,
                m_ts=m_ts if enc else None,
                r_h=r_h if enc else None,
                r_ts=r_ts if enc else None,
            )
            try:
                # Values-only regeneration: the constraint set was built
                # (and digest-checked) once at install time.
                circuit = build_fltrust_circuit(
                    self.spec, ek_n=self.ek.n if enc else None,
                    publics=publics, witness=witness, emit_constraints=False,
                )
                proof = self.make_proof(
                    circuit.assignment.publics(self.pk.circuit),
                    circuit.assignment.witness(self.pk.circuit),
                )
            except (proofsys.UnsatisfiedWitnessError, ValueError) as exc:
                raise ProvingError(f"client {self.client_id}: {exc}") from exc
        self.last_prove_time = time.perf_counter() - t0

        sub = ClientSubmission(
            client_id=self.client_id, c_ts=c_ts, c_h=c_h, proof=proof
        )
        return self.finalize_submission(sub)


def se_setup(
    cfg: ProtocolConfig, d_star: Dataset, seed: int | bytes | str
) -> tuple[SetupMessage, EncryptionServer]:
    """Key generation, circuit setup, and the initial broadcast payload.

    The decryption key never leaves the returned server object.
    """
    se = EncryptionServer(cfg, d_star, seed)
    return se.setup_message(), se


# -- training loop ------------------------------------------------------------

@dataclass
class RoundReport:
    round_index: int
    beta_raw: list[int]
    g_star_raw: list[int]
    loss: float
    accepted: list[int]
    rejected: list[int]
    ts_sum_raw: int
    agg_h_raw: list[int]
    submission_bytes: dict[int, int]
    aggregate_bytes: int
    broadcast_bytes: int
    client_ts_norm_raw: dict[int, int] = dc_field(default_factory=dict)
    client_compute: dict[int, float] = dc_field(default_factory=dict)
    client_encrypt: dict[int, float] = dc_field(default_factory=dict)
    client_prove: dict[int, float] = dc_field(default_factory=dict)
    sc_compute: float = 0.0
    sc_verify: float = 0.0
    se_decrypt: float = 0.0


def run_training(
    se: EncryptionServer,
    clients: Sequence[Client],
    rounds: int,
) -> list[RoundReport]:
    """Drive k rounds over the in-process bus.

    Every message is serialized and re-parsed, so the byte counts in the
    reports are true frame sizes. Clients act in ascending id order;
    ciphertext folding follows the same order, which is what makes the
    transcript of a run with rejected clients byte-equal to the run
    without them.
    """
    clients = sorted(clients, key=lambda c: c.client_id)
    setup_bytes = serialize_setup(se.setup_message())
    setup = deserialize_setup(setup_bytes)
    for c in clients:
        c.install(setup, n_clients=len(clients))
    sc = ComputingServer(se.cfg, setup)

    reports: list[RoundReport] = []
    for _ in range(rounds):
        submissions = []
        sizes: dict[int, int] = {}
        comp: dict[int, float] = {}
        encr: dict[int, float] = {}
        prov: dict[int, float] = {}
        for c in clients:
            wire = serialize_submission(c.round(), se.ek)
            sizes[c.client_id] = len(wire)
            comp[c.client_id] = c.last_compute_time
            encr[c.client_id] = c.last_encrypt_time
            prov[c.client_id] = c.last_prove_time
            submissions.append(deserialize_submission(wire, se.ek))

        agg_bytes = serialize_aggregate(sc.aggregate(submissions), se.ek)
        agg = deserialize_aggregate(agg_bytes, se.ek)

        broadcast_bytes = serialize_broadcast(se.finalize(agg))
        broadcast = deserialize_broadcast(broadcast_bytes)
        # The report mirrors what S_E just decrypted; recompute cheaply
        # for observability (simulation-side only).
        h_raw = [
            paillier.decode_signed(paillier.decrypt(c, se._dk, se.ek), se.ek)
            for c in agg.c_h
        ]
        ts_sum = paillier.decode_signed(paillier.decrypt(agg.c_ts, se._dk, se.ek), se.ek)

        for c in clients:
            c.observe_broadcast(broadcast)
        sc.observe_broadcast(broadcast)

        all_ids = [c.client_id for c in clients]
        reports.append(RoundReport(
            round_index=broadcast.round_index,
            beta_raw=list(broadcast.beta_raw),
            g_star_raw=list(broadcast.g_star_raw),
            loss=se.current_loss(),
            accepted=list(agg.accepted),
            rejected=[i for i in all_ids if i not in agg.accepted],
            ts_sum_raw=ts_sum,
            agg_h_raw=h_raw,
            submission_bytes=sizes,
            aggregate_bytes=len(agg_bytes),
            broadcast_bytes=len(broadcast_bytes),
            client_ts_norm_raw={
                c.client_id: c.last_scores.ts_norm_raw for c in clients if c.last_scores
            },
            client_compute=comp,
            client_encrypt=encr,
            client_prove=prov,
            sc_compute=sc.last_compute_time,
            sc_verify=sc.last_verify_time,
            se_decrypt=se.last_decrypt_time,
        ))
    return reports


def transcript_bytes(reports: Sequence[RoundReport], ek: paillier.PaillierPublicKey) -> bytes:
    """Canonical byte form of the protocol-visible outcome stream.

    Deliberately excludes per-client metadata (sizes, timings, the
    rejected list): those describe who knocked on the door, not what the
    protocol computed, and rejection containment is stated over this
    canonical form.
    """
    out = []
    for r in reports:
        out.append(r.round_index.to_bytes(4, "big"))
        out.append(_pack_fpvec(r.beta_raw))
        out.append(_pack_fpvec(r.g_star_raw))
        out.append(b"".join(i.to_bytes(4, "big") for i in r.accepted))
        out.append(_pack_fpvec(r.agg_h_raw))
        out.append(int(r.ts_sum_raw).to_bytes(16, "big", signed=True))
        out.append(struct.pack(">d", r.loss))
    return b"".join(out)
