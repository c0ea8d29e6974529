"""Plaintext learning and trust-score math.

This module is the reference the secure pipeline is measured against.
It has two layers:

* real-valued functions (loss, updates, trust scores, aggregation
  rules, a full-round oracle) used for analysis and tolerance checks;
* an integer fixed-point twin of the scoring path, shared verbatim by
  honest clients and by the constraint gadgets, so "secure equals
  plaintext" can be asserted as raw-integer equality rather than as a
  float tolerance.

Update vectors point in the descent direction: an update g satisfies
``loss(beta + g) < loss(beta)`` for small learning rates. Aggregation
therefore *adds* weighted updates to the model.

Trust scores follow the trust-bootstrapping rule: the cosine between a
client update and the reference update computed on the curated
server-side dataset, clamped at zero, is the unnormalized weight; the
normalized weight additionally rescales the client update to the
reference update's length, which algebraically equals
``max(0, dot) / ||g_i||^2``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .fixedpoint import DEFAULT_CONFIG, FixedPointConfig, decode_vector, encode_vector


class ZeroVectorError(ValueError):
    """Cosine similarity is undefined for a zero-length update."""


class DegenerateRoundError(RuntimeError):
    """No usable trust mass this round; the model must stay unchanged."""


# -- domain types ----------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=np.float64))
        if self.beta.ndim != 1 or self.beta.size == 0:
            raise ValueError("model parameters must be a non-empty flat vector")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("model parameters must be finite")


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=np.float64))
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.float64))
        if self.features.ndim != 2 or self.labels.ndim != 1:
            raise ValueError("features must be a matrix and labels a vector")
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("feature rows and labels must align")
        if self.labels.shape[0] == 0:
            raise ValueError("dataset must be non-empty")

    def __len__(self) -> int:
        return self.labels.shape[0]


class Predictor(Protocol):
    def param_len(self, n_features: int) -> int: ...
    def predict(self, beta: np.ndarray, X: np.ndarray) -> np.ndarray: ...
    def loss_gradient(self, beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray: ...


class LinearModel:
    """f(x) = x . beta; gradients in closed form, circuits stay small."""

    def param_len(self, n_features: int) -> int:
        return n_features

    def predict(self, beta: np.ndarray, X: np.ndarray) -> np.ndarray:
        return X @ beta

    def loss_gradient(self, beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        resid = y - X @ beta
        return -2.0 / len(y) * (X.T @ resid)


class TinyMLP:
    """One tanh hidden layer, scalar output; for robustness experiments only.

    Parameters pack as [W1 (d*h), b1 (h), w2 (h), b2 (1)].
    """

    def __init__(self, hidden: int = 8):
        if not 1 <= hidden <= 64:
            raise ValueError("hidden width must lie in [1, 64]")
        self.hidden = hidden

    def param_len(self, n_features: int) -> int:
        return n_features * self.hidden + 2 * self.hidden + 1

    def _unpack(self, beta: np.ndarray, d: int):
        h = self.hidden
        W1 = beta[: d * h].reshape(d, h)
        b1 = beta[d * h : d * h + h]
        w2 = beta[d * h + h : d * h + 2 * h]
        b2 = beta[-1]
        return W1, b1, w2, b2

    def predict(self, beta: np.ndarray, X: np.ndarray) -> np.ndarray:
        W1, b1, w2, b2 = self._unpack(beta, X.shape[1])
        return np.tanh(X @ W1 + b1) @ w2 + b2

    def loss_gradient(self, beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        n, d = X.shape
        W1, b1, w2, b2 = self._unpack(beta, d)
        z = X @ W1 + b1
        a = np.tanh(z)
        pred = a @ w2 + b2
        dpred = -2.0 / n * (y - pred)           # d(mse)/d(pred), per example
        gw2 = a.T @ dpred
        gb2 = dpred.sum()
        da = np.outer(dpred, w2) * (1.0 - a * a)
        gW1 = X.T @ da
        gb1 = da.sum(axis=0)
        return np.concatenate([gW1.ravel(), gb1, gw2, [gb2]])


LINEAR = LinearModel()


@dataclass(frozen=True)
class TrainingConfig:
    eta: float = 0.1          # local learning rate
    alpha: float = 1.0        # global learning rate
    epochs: int = 1           # number of aggregation rounds
    optimizer: str = "SGD"    # full-batch SGD is the only optimizer
    model: Predictor = field(default=LINEAR)

    def __post_init__(self):
        if self.eta <= 0 or self.alpha <= 0:
            raise ValueError("learning rates must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.optimizer != "SGD":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class UpdateVector:
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=np.float64))
        if self.g.ndim != 1 or self.g.size == 0:
            raise ValueError("update must be a non-empty flat vector")


@dataclass(frozen=True)
class TrustScores:
    ts: float
    ts_norm: float


# -- loss and updates ------------------------------------------------------

def mse_loss(beta: ModelParams, d: Dataset, model: Predictor = LINEAR) -> float:
    pred = model.predict(beta.beta, d.features)
    if pred.shape != d.labels.shape:
        raise ValueError("prediction/label shape mismatch")
    resid = d.labels - pred
    return float(resid @ resid / len(d))


def local_update(beta: ModelParams, d: Dataset, cfg: TrainingConfig) -> UpdateVector:
    """One full-batch SGD step direction: g = -eta * grad(loss).

    Applying beta + g lowers the loss for small eta; aggregation rules
    below all add updates.
    """
    grad = cfg.model.loss_gradient(beta.beta, d.features, d.labels)
    if grad.shape != beta.beta.shape:
        raise ValueError("gradient length does not match the model")
    return UpdateVector(-cfg.eta * grad)


def reference_update(beta: ModelParams, d_star: Dataset, cfg: TrainingConfig) -> UpdateVector:
    """The server-side update on the curated dataset; same rule as clients."""
    return local_update(beta, d_star, cfg)


# -- trust scores ----------------------------------------------------------

def trust_score(g_star: UpdateVector, g_i: UpdateVector) -> float:
    """max(0, cosine(g_star, g_i))."""
    ns = np.linalg.norm(g_star.g)
    ni = np.linalg.norm(g_i.g)
    if ns == 0.0 or ni == 0.0:
        raise ZeroVectorError("trust score undefined for zero update")
    cos = float(g_star.g @ g_i.g) / (ns * ni)
    return max(0.0, min(1.0, cos))


def normalized_trust_score(g_star: UpdateVector, g_i: UpdateVector) -> float:
    """trust_score rescaled by ||g_star|| / ||g_i||; equals max(0, dot)/||g_i||^2."""
    ns = np.linalg.norm(g_star.g)
    ni = np.linalg.norm(g_i.g)
    if ns == 0.0 or ni == 0.0:
        raise ZeroVectorError("normalized trust score undefined for zero update")
    return trust_score(g_star, g_i) * ns / ni


def weighted_update(ts_norm: float, g_i: UpdateVector) -> UpdateVector:
    if ts_norm < 0:
        raise ValueError("weight must be non-negative")
    return UpdateVector(ts_norm * g_i.g)


def global_update(beta: ModelParams, H: UpdateVector, ts_sum: float, alpha: float) -> ModelParams:
    """beta + alpha * H / ts_sum; signals a degenerate round on ts_sum <= 0."""
    if ts_sum <= 0:
        raise DegenerateRoundError("total trust is zero; round skipped")
    if H.g.shape != beta.beta.shape:
        raise ValueError("aggregate length does not match the model")
    return ModelParams(beta.beta + alpha * H.g / ts_sum)


def duoagg_update(beta: ModelParams, g_sum: UpdateVector, m: int, alpha: float) -> ModelParams:
    """Plain-aggregation rule: beta + alpha * g_sum / m."""
    if m < 1:
        raise ValueError("need at least one client")
    return ModelParams(beta.beta + alpha * g_sum.g / m)


# -- full-round oracle -----------------------------------------------------

def plaintext_round_oracle(
    beta: ModelParams,
    datasets: Sequence[Dataset],
    d_star: Dataset,
    cfg: TrainingConfig,
) -> tuple[ModelParams, list[TrustScores]]:
    """One unencrypted round: reference update, all client scores, aggregate.

    Zero-length client updates score zero and contribute nothing; if the
    reference update itself is zero or no trust mass remains, the model
    is returned unchanged.
    """
    if not datasets:
        raise ValueError("need at least one client")
    g_star = reference_update(beta, d_star, cfg)
    if np.linalg.norm(g_star.g) == 0.0:
        return beta, [TrustScores(0.0, 0.0) for _ in datasets]
    scores: list[TrustScores] = []
    H = np.zeros_like(beta.beta)
    ts_sum = 0.0
    for d in datasets:
        g_i = local_update(beta, d, cfg)
        if np.linalg.norm(g_i.g) == 0.0:
            scores.append(TrustScores(0.0, 0.0))
            continue
        ts = trust_score(g_star, g_i)
        tsn = normalized_trust_score(g_star, g_i)
        scores.append(TrustScores(ts, tsn))
        H += weighted_update(tsn, g_i).g
        ts_sum += ts
    if ts_sum <= 0:
        return beta, scores
    return global_update(beta, UpdateVector(H), ts_sum, cfg.alpha), scores


# -- fixed-point twin ------------------------------------------------------

@dataclass(frozen=True)
class FixedScores:
    """Raw integer scores at scale 2**frac_bits."""

    ts_raw: int
    ts_norm_raw: int


def fixedpoint_scores(
    g_star_raw: Sequence[int],
    g_raw: Sequence[int],
    cfg: FixedPointConfig = DEFAULT_CONFIG,
) -> FixedScores:
    """Integer trust scores, bit-identical to the circuit gadget.

    ts   = clamp(floor(d * S / (isqrt(nsq*) * isqrt(nsq_i))), 0, S)
    tsn  = floor(max(0, d) * S / nsq_i)

    where d is the raw dot product and nsq the raw squared norms. The
    upper clamp exists because flooring the square roots can push the
    cosine of identical vectors a hair past one.
    """
    if len(g_star_raw) != len(g_raw):
        raise ValueError("vectors must have equal length")
    S = cfg.scale
    d = sum(a * b for a, b in zip(g_star_raw, g_raw))
    nsq_s = sum(a * a for a in g_star_raw)
    nsq_i = sum(b * b for b in g_raw)
    if nsq_s == 0 or nsq_i == 0:
        raise ZeroVectorError("fixed-point trust score undefined for zero update")
    p = math.isqrt(nsq_s) * math.isqrt(nsq_i)
    ts = min(max(0, (d * S) // p), S)
    tsn = (max(0, d) * S) // nsq_i
    return FixedScores(ts_raw=ts, ts_norm_raw=tsn)


def fixedpoint_weighted(ts_norm_raw: int, g_raw: Sequence[int], cfg: FixedPointConfig = DEFAULT_CONFIG) -> list[int]:
    """h_j = floor(ts_norm * g_j / S), the weighted-update rows of the circuit."""
    f = cfg.frac_bits
    return [(ts_norm_raw * g) >> f for g in g_raw]


@dataclass(frozen=True)
class FixedRound:
    """Integer image of one round, the target for exactness tests."""

    beta_raw: list[int]
    g_star_raw: list[int]
    scores: list[FixedScores]
    h_raw: list[list[int]]        # per-client weighted updates
    agg_h_raw: list[int]          # sum over contributing clients
    ts_sum_raw: int
    new_beta_raw: list[int]


def fixedpoint_round_oracle(
    beta_raw: Sequence[int],
    datasets: Sequence[Dataset],
    d_star: Dataset,
    cfg: TrainingConfig,
    fp_cfg: FixedPointConfig = DEFAULT_CONFIG,
) -> FixedRound:
    """The quantized round the secure protocol must reproduce exactly.

    The model itself lives on the fixed-point grid (it crosses the wire
    as raw integers); gradients are computed at the decoded model and
    re-encoded, scores and weighted updates use integer arithmetic, and
    the updated model is re-encoded onto the grid.
    """
    beta = ModelParams(decode_vector(beta_raw, fp_cfg))
    g_star = reference_update(beta, d_star, cfg)
    g_star_raw = encode_vector(g_star.g, fp_cfg)
    if all(v == 0 for v in g_star_raw):
        raise DegenerateRoundError("reference update vanished on the grid")
    L = len(beta_raw)
    scores: list[FixedScores] = []
    h_all: list[list[int]] = []
    agg = [0] * L
    ts_sum = 0
    for d in datasets:
        g_raw = encode_vector(local_update(beta, d, cfg).g, fp_cfg)
        if all(v == 0 for v in g_raw):
            sc = FixedScores(0, 0)
            h = [0] * L
        else:
            sc = fixedpoint_scores(g_star_raw, g_raw, fp_cfg)
            h = fixedpoint_weighted(sc.ts_norm_raw, g_raw, fp_cfg)
        scores.append(sc)
        h_all.append(h)
        agg = [x + y for x, y in zip(agg, h)]
        ts_sum += sc.ts_raw
    if ts_sum <= 0:
        new_beta_raw = list(beta_raw)
    else:
        # decode(H)/decode(ts_sum): the scale cancels, so raw/raw is exact.
        step = cfg.alpha * np.asarray([float(x) for x in agg]) / float(ts_sum)
        new_beta_raw = encode_vector(beta.beta + step, fp_cfg)
    return FixedRound(
        beta_raw=list(beta_raw),
        g_star_raw=g_star_raw,
        scores=scores,
        h_raw=h_all,
        agg_h_raw=agg,
        ts_sum_raw=ts_sum,
        new_beta_raw=new_beta_raw,
    )


# -- data -------------------------------------------------------------------

def make_synthetic_regression(
    L: int,
    n_clients: int,
    examples_per_client: int,
    noise_sigma: float,
    seed: int,
) -> tuple[list[Dataset], Dataset, ModelParams]:
    """Deterministic linear-regression federation at desk scale.

    Every client and the curated reference set draw i.i.d. from the same
    distribution: standard normal features, labels x . beta_true plus
    optional Gaussian noise.
    """
    if L < 1 or n_clients < 1 or examples_per_client < 1:
        raise ValueError("all sizes must be positive")
    rng = np.random.default_rng(seed)
    true_beta = rng.normal(0.0, 1.0, L) / np.sqrt(L)

    def draw(n: int, name: str) -> Dataset:
        X = rng.normal(0.0, 1.0, (n, L))
        y = X @ true_beta
        if noise_sigma > 0:
            y = y + rng.normal(0.0, noise_sigma, n)
        return Dataset(X, y, name)

    datasets = [draw(examples_per_client, f"client-{i}") for i in range(n_clients)]
    d_star = draw(examples_per_client, "reference")
    return datasets, d_star, ModelParams(true_beta)


# -- IDX ingestion -----------------------------------------------------------

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def load_idx(path: str) -> np.ndarray:
    """Read a big-endian IDX image or label file into an array."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4:
        raise ValueError("truncated IDX header")
    magic = struct.unpack(">I", data[:4])[0]
    if magic == IDX_IMAGES_MAGIC:
        n, rows, cols = struct.unpack(">III", data[4:16])
        body = np.frombuffer(data[16:], dtype=np.uint8)
        if body.size != n * rows * cols:
            raise ValueError("IDX image payload does not match header")
        return body.reshape(n, rows, cols)
    if magic == IDX_LABELS_MAGIC:
        n = struct.unpack(">I", data[4:8])[0]
        body = np.frombuffer(data[8:], dtype=np.uint8)
        if body.size != n:
            raise ValueError("IDX label payload does not match header")
        return body
    raise ValueError(f"unrecognized IDX magic 0x{magic:08x}")


def datasets_from_idx(
    images_path: str,
    labels_path: str,
    n_clients: int,
    examples_per_client: int,
    reference_examples: int,
    seed: int = 0,
) -> tuple[list[Dataset], Dataset]:
    """Subsampled image-regression partition: pixels in [0,1], label = digit.

    Treating the class index as a real-valued target keeps the circuit
    identical to the synthetic case; this is a desk-scale stand-in, not
    a serious classifier.
    """
    images = load_idx(images_path)
    labels = load_idx(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise ValueError("image and label counts differ")
    total = n_clients * examples_per_client + reference_examples
    if total > images.shape[0]:
        raise ValueError("not enough examples for the requested partition")
    rng = np.random.default_rng(seed)
    pick = rng.permutation(images.shape[0])[:total]
    X = images.reshape(images.shape[0], -1)[pick] / 255.0
    y = labels[pick].astype(np.float64)
    datasets = []
    for i in range(n_clients):
        lo = i * examples_per_client
        hi = lo + examples_per_client
        datasets.append(Dataset(X[lo:hi], y[lo:hi], f"idx-client-{i}"))
    d_star = Dataset(X[-reference_examples:], y[-reference_examples:], "idx-reference")
    return datasets, d_star
