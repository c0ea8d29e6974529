"""Byzantine client behaviours.

Each attack is a behaviour decorator over an honest client: the
instance keeps its state and runs the real pipeline, with one hook
overridden. Two families exist, and the system answers them
differently:

* data poisoning (sign_flip, scale, gaussian_noise, label_flip): the
  client still computes and proves its scores honestly over the
  poisoned update, so the proof verifies; the trust score then clamps
  or shrinks its weight. Detection is statistical, not cryptographic.
* relation cheating (inflated_weight, forged_proof, replayed_proof):
  the submitted values do not satisfy the proven relation, so the
  computing server rejects the client outright.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import proofsys
from .fltrust import Dataset, FixedScores, ModelParams
from .protocol import Client, ClientSubmission
from .r1cs import MODULUS
from .rng import DeterministicRandom

ATTACK_KINDS = (
    "sign_flip",
    "scale",
    "gaussian_noise",
    "label_flip",
    "inflated_weight",
    "forged_proof",
    "replayed_proof",
)


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    targets: tuple[int, ...]
    lam: float = 10.0        # scale factor, > 0
    sigma: float = 1.0       # label noise std-dev
    fraction: float = 1.0    # share of labels flipped, in (0, 1]

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.lam <= 0:
            raise ValueError("scale factor must be positive")
        if not 0 < self.fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")

    @classmethod
    def from_string(cls, text: str) -> "AttackSpec":
        """Parse KIND:IDS[:ARG], e.g. ``scale:0,3:10`` or ``sign_flip:1``."""
        parts = text.split(":")
        if len(parts) < 2:
            raise ValueError("attack spec needs KIND:IDS[:ARG]")
        kind = parts[0]
        targets = tuple(int(t) for t in parts[1].split(",") if t)
        kwargs = {}
        if len(parts) > 2:
            arg = float(parts[2])
            if kind == "scale":
                kwargs["lam"] = arg
            elif kind == "gaussian_noise":
                kwargs["sigma"] = arg
            elif kind == "label_flip":
                kwargs["fraction"] = arg
        return cls(kind=kind, targets=targets, **kwargs)


class _SignFlipClient(Client):
    def compute_update(self, beta: ModelParams) -> np.ndarray:
        return -super().compute_update(beta)


class _ScaleClient(Client):
    attack_lam: float

    def compute_update(self, beta: ModelParams) -> np.ndarray:
        return self.attack_lam * super().compute_update(beta)


class _InflatedWeightClient(Client):
    """Claims a normalized weight of one: H becomes the raw update and the
    ciphertexts encrypt it, but the witness still carries the true update,
    so the score binding cannot hold. Skips the honest prover's
    self-check, as a cheater would, and ships the payload anyway."""

    def claim_scores(self, scores: FixedScores, g_raw, h_raw):
        one = self.cfg.fp.scale
        return FixedScores(ts_raw=scores.ts_raw, ts_norm_raw=one), list(g_raw)

    def make_proof(self, publics, witness_vals):
        return proofsys.Proof(
            backend=proofsys.BACKEND_TRANSPARENT,
            payload=tuple(v % MODULUS for v in witness_vals),
        )


class _ForgedProofClient(Client):
    def finalize_submission(self, sub: ClientSubmission) -> ClientSubmission:
        if sub.proof is None:
            return sub
        rng = self._rng.derive("forged-proof")
        payload = tuple(
            rng.randbelow(MODULUS) for _ in range(len(sub.proof.payload))
        )
        return replace(sub, proof=proofsys.Proof(backend=sub.proof.backend, payload=payload))


class _ReplayedProofClient(Client):
    """Round t+1 ciphertexts with round t's (then valid) proof."""

    _stale_proof: Optional[proofsys.Proof] = None

    def finalize_submission(self, sub: ClientSubmission) -> ClientSubmission:
        stale, self._stale_proof = self._stale_proof, sub.proof
        if stale is None:
            return sub
        return replace(sub, proof=stale)


def _poison_labels(client: Client, spec: AttackSpec) -> None:
    d = client.dataset
    rng = DeterministicRandom(client.client_id, f"poison-{spec.kind}")
    labels = d.labels.copy()
    if spec.kind == "gaussian_noise":
        labels += np.asarray([rng.gauss(0.0, spec.sigma) for _ in labels])
    else:  # label_flip: negate a deterministic fraction of targets
        k = max(1, int(round(spec.fraction * len(labels))))
        order = sorted(range(len(labels)), key=lambda _: rng.getrandbits(32))
        for i in order[:k]:
            labels[i] = -labels[i]
    client.dataset = Dataset(d.features, labels, d.name)


_BEHAVIOUR = {
    "sign_flip": _SignFlipClient,
    "scale": _ScaleClient,
    "inflated_weight": _InflatedWeightClient,
    "forged_proof": _ForgedProofClient,
    "replayed_proof": _ReplayedProofClient,
}


def apply_attack(spec: AttackSpec, client: Client) -> Client:
    """Install the attack behaviour on a targeted client, in place."""
    if client.client_id not in spec.targets:
        return client
    if spec.kind in ("gaussian_noise", "label_flip"):
        _poison_labels(client, spec)
        return client
    client.__class__ = _BEHAVIOUR[spec.kind]
    if spec.kind == "scale":
        client.attack_lam = spec.lam
    if spec.kind == "replayed_proof":
        client._stale_proof = None
    return client


def apply_attacks(specs: Sequence[AttackSpec], clients: Sequence[Client]) -> list[Client]:
    out = list(clients)
    for spec in specs:
        for c in out:
            apply_attack(spec, c)
    return out
