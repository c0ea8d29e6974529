"""Constraint gadgets and the three-stage trust-score circuit.

Every gadget both appends rows to a constraint system and, when the
builder carries values, computes the witness entries for the variables
it allocates. The same builder runs in shape mode (no values) so the
verifier can reconstruct an identical circuit, digest and all, without
knowing any witness.

The full client circuit proves, over the scalar field of BLS12-381:

1. trust-score stage: the claimed raw TS and normalized TS match the
   fixed-point cosine computation against the public reference update;
2. weighted-vector stage: the claimed weighted update H is the claimed
   normalized score times the claimed local update, entry by entry;
3. encryption stage (toy moduli only): each public ciphertext is the
   Paillier encryption of the corresponding claimed value under the
   claimed randomness.

All comparisons go through bit decompositions; divisions and square
roots are witnessed and pinned by quotient/remainder range checks, so
flooring is exact and any +-1 perturbation of a witness value breaks a
decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .fixedpoint import FixedPointConfig
from .r1cs import (
    MODULUS,
    Assignment,
    Constraint,
    ConstraintSystem,
    LinComb,
    field_to_signed,
)

ONE: LinComb = ((0, 1),)

STAGE_TRUST_SCORE = "trust_score"
STAGE_WEIGHTED = "weighted_vector"
STAGE_ENCRYPTION = "encryption"
ALL_STAGES = frozenset({STAGE_TRUST_SCORE, STAGE_WEIGHTED, STAGE_ENCRYPTION})

# Normalized scores above 2**TSN_HEADROOM_BITS are unprovable; they only
# arise when a client's update is orders of magnitude shorter than the
# reference update.
TSN_HEADROOM_BITS = 12


class WitnessError(ValueError):
    """A witness value fell outside the range its gadget can decompose."""


def _var(idx: int, coeff: int = 1) -> LinComb:
    return ((idx, coeff % MODULUS),)


def _const(v: int) -> LinComb:
    v %= MODULUS
    return ((0, v),) if v else ()


def _add(*lcs: LinComb) -> LinComb:
    acc: dict[int, int] = {}
    for lc in lcs:
        for idx, coeff in lc:
            acc[idx] = (acc.get(idx, 0) + coeff) % MODULUS
    return tuple((i, c) for i, c in acc.items() if c)


def _scale(lc: LinComb, k: int) -> LinComb:
    k %= MODULUS
    if k == 0:
        return ()
    return tuple((i, c * k % MODULUS) for i, c in lc)


@dataclass(frozen=True)
class CircuitSpec:
    """Shape parameters of one client circuit.

    vector_len: model/update length L.
    fp: fixed-point scale config (frac_bits is what matters here).
    grad_word_bits: signed width of update entries in raw units.
    paillier_bits: modulus size for the encryption stage; None when that
      stage is off. Bounded at 60 so a product of two n^2 residues fits
      one field element with a single quotient witness.
    stages: which of the three stages the circuit includes.
    """

    vector_len: int
    fp: FixedPointConfig = field(default_factory=FixedPointConfig)
    grad_word_bits: int = 40
    paillier_bits: Optional[int] = None
    stages: frozenset[str] = ALL_STAGES

    def __post_init__(self):
        if self.vector_len < 1:
            raise ValueError("vector_len must be positive")
        unknown = self.stages - ALL_STAGES
        if unknown:
            raise ValueError(f"unknown stages {sorted(unknown)}")
        if self.grad_word_bits <= self.fp.frac_bits:
            raise ValueError("grad_word_bits must exceed frac_bits")
        if 2 * self.grad_word_bits + self.vector_len.bit_length() + 2 >= 252:
            raise ValueError("dot products would overflow the field")
        if STAGE_ENCRYPTION in self.stages:
            if self.paillier_bits is None:
                raise ValueError("encryption stage needs paillier_bits")
            if not 4 <= self.paillier_bits <= 60:
                raise ValueError(
                    "encryption stage supports 4..60-bit moduli; larger keys "
                    "overflow the field in one modular product"
                )
            if self.h_bits + 1 > self.paillier_bits:
                raise ValueError(
                    "weighted-update word cannot be encoded as a signed residue mod n"
                )

    # Derived bit widths. All bounds are worst-case magnitudes; witness
    # generation raises if a value escapes them.

    @property
    def log_len(self) -> int:
        return max(1, self.vector_len - 1).bit_length()

    @property
    def accum_bits(self) -> int:
        """Magnitude bound of dot products / squared norms: L * 2^(2(w-1))."""
        return 2 * (self.grad_word_bits - 1) + self.log_len

    @property
    def sqrt_bits(self) -> int:
        return (self.accum_bits + 1) // 2 + 1

    @property
    def h_bits(self) -> int:
        """|H_j| <= ||g*|| <= sqrt(L) * 2^(w-1)."""
        return self.grad_word_bits + (self.log_len + 1) // 2 + 1

    @property
    def ts_bits(self) -> int:
        return self.fp.frac_bits + 3

    @property
    def tsn_bits(self) -> int:
        return self.fp.frac_bits + TSN_HEADROOM_BITS + 1


class Builder:
    """Constraint emitter plus, optionally, the parallel value table.

    With emit=False only allocation counters and values advance; the
    constraint list stays empty. Clients use this to regenerate a
    witness each round against the circuit they built once at setup
    (the emission path is deterministic, so variable order is shared).
    """

    def __init__(self, witness: bool = True, emit: bool = True):
        self.cs = ConstraintSystem()
        self.values: Optional[list[int]] = [1] if witness else None
        self.emit = emit

    @property
    def witness_mode(self) -> bool:
        return self.values is not None

    def alloc_public(self, value: Optional[int] = None) -> int:
        idx = self.cs.alloc_public()
        if self.values is not None:
            if value is None:
                raise ValueError("witness-mode builder needs public values")
            self.values.append(value % MODULUS)
        return idx

    def alloc_witness(self, value: Optional[int] = None) -> int:
        idx = self.cs.alloc_witness()
        if self.values is not None:
            if value is None:
                raise ValueError("witness-mode builder needs witness values")
            self.values.append(value % MODULUS)
        return idx

    def eval_lc(self, lc: LinComb) -> Optional[int]:
        if self.values is None:
            return None
        s = 0
        for idx, coeff in lc:
            s += self.values[idx] * coeff
        return s % MODULUS

    def signed(self, lc: LinComb) -> Optional[int]:
        v = self.eval_lc(lc)
        return None if v is None else field_to_signed(v)

    def enforce(self, a: LinComb, b: LinComb, c: LinComb) -> None:
        if self.emit:
            self.cs.enforce_raw(a, b, c)

    def assignment(self) -> Assignment:
        if self.values is None:
            raise RuntimeError("shape-mode builder has no assignment")
        return Assignment(list(self.values))


# -- bit decompositions ------------------------------------------------------

_MINUS_ONE = MODULUS - 1


def alloc_bits(b: Builder, value: Optional[int], k: int) -> tuple[list[int], LinComb]:
    """k boolean-constrained witnesses; returns (vars, recomposition terms).

    This is the innermost loop of every range check, so it bypasses the
    generic helpers.
    """
    cs = b.cs
    cs._witness_started = True
    cs._digest = None
    values = b.values
    start = cs.num_public + cs.num_witness + 1
    cs.num_witness += k
    bits = list(range(start, start + k))
    if values is not None:
        for j in range(k):
            values.append((value >> j) & 1)
    if b.emit:
        cons = cs.constraints
        for idx in bits:
            one_var = ((idx, 1),)
            cons.append(Constraint(one_var, ((idx, 1), (0, _MINUS_ONE)), ()))
    return bits, tuple((idx, 1 << j) for j, idx in enumerate(bits))


def range_check(b: Builder, lc: LinComb, k: int) -> list[int]:
    """Constrain 0 <= lc < 2^k; unsatisfiable for anything else."""
    v = b.eval_lc(lc)
    if v is not None and v >= (1 << k):
        raise WitnessError(f"value {v} does not fit {k} bits")
    bits, terms = alloc_bits(b, v, k)
    b.enforce(terms, ONE, lc)
    return bits


def signed_range_check(b: Builder, lc: LinComb, k: int) -> tuple[list[int], int]:
    """Constrain -2^(k-1) <= lc < 2^(k-1); returns (bits, sign-ok bit).

    The returned top bit of the shifted decomposition is 1 exactly when
    the signed value is non-negative.
    """
    shifted = _add(lc, _const(1 << (k - 1)))
    sv = b.signed(lc)
    if sv is not None and not -(1 << (k - 1)) <= sv < (1 << (k - 1)):
        raise WitnessError(f"signed value {sv} does not fit {k} bits")
    bits = range_check(b, shifted, k)
    return bits, bits[-1]


def relu_max0(b: Builder, lc: LinComb, k: int) -> int:
    """out = max(0, lc) for signed k-bit lc: out = (sign bit) * lc."""
    _, nonneg = signed_range_check(b, lc, k)
    sv = b.signed(lc)
    out = b.alloc_witness(None if sv is None else max(0, sv))
    b.enforce(_var(nonneg), lc, _var(out))
    return out


def min_const(b: Builder, lc: LinComb, bound: int, k: int) -> int:
    """out = min(lc, bound) via out = lc - max(0, lc - bound)."""
    over = relu_max0(b, _add(lc, _const(-bound)), k)
    sv = b.signed(lc)
    out = b.alloc_witness(None if sv is None else min(sv, bound))
    b.enforce(_add(lc, _var(over, -1)), ONE, _var(out))
    return out


# -- fixed-point arithmetic --------------------------------------------------

def fp_mul_gadget(b: Builder, a: int, bb: int, frac_bits: int, out_bits: int) -> int:
    """out = floor(a * bb / 2^frac_bits), identical to fixedpoint.fp_mul.

    Witnessed as a*bb = out*S + rem with rem pinned to [0, S) and out to
    a signed out_bits word.
    """
    S = 1 << frac_bits
    av, bv = b.signed(_var(a)), b.signed(_var(bb))
    if av is None or bv is None:
        q = rem = None
    else:
        prod = av * bv
        q = prod >> frac_bits
        rem = prod - (q << frac_bits)
    out = b.alloc_witness(q)
    _, rem_terms = alloc_bits(b, rem, frac_bits)
    b.enforce(_var(a), _var(bb), _add(_var(out, S), rem_terms))
    signed_range_check(b, _var(out), out_bits)
    return out


def fp_div_gadget(
    b: Builder,
    a: LinComb,
    divisor: int,
    frac_bits: int,
    out_bits: int,
    divisor_bits: int,
) -> int:
    """out = floor(a * 2^frac_bits / divisor) for a positive divisor.

    Witnessed as a*S = out*divisor + rem with 0 <= rem < divisor; a zero
    divisor makes rem < divisor unsatisfiable.
    """
    av, dv = b.signed(a), b.signed(_var(divisor))
    if av is None or dv is None:
        q = rem = None
    else:
        if dv <= 0:
            raise WitnessError("division gadget needs a positive divisor")
        num = av << frac_bits
        q = num // dv
        rem = num - q * dv
    out = b.alloc_witness(q)
    rem_bits, rem_terms = alloc_bits(b, rem, divisor_bits)
    neg_rem = tuple((i, MODULUS - c) for i, c in rem_terms)
    b.enforce(_var(out), _var(divisor), _add(_scale(a, 1 << frac_bits), neg_rem))
    # rem < divisor
    range_check(b, _add(_var(divisor), _const(-1), neg_rem), divisor_bits)
    signed_range_check(b, _var(out), out_bits)
    return out


def dot_gadget(b: Builder, u: Sequence[int], v: Sequence[int]) -> int:
    """Raw dot product: one multiplication row per entry, linear accumulation."""
    if len(u) != len(v):
        raise ValueError("dot gadget needs equal lengths")
    terms: list[tuple[int, int]] = []
    for ui, vi in zip(u, v):
        uv, vv = b.signed(_var(ui)), b.signed(_var(vi))
        prod = None if uv is None or vv is None else uv * vv
        p = b.alloc_witness(prod)
        b.enforce(_var(ui), _var(vi), _var(p))
        terms.append((p, 1))
    sv = b.eval_lc(tuple(terms))
    out = b.alloc_witness(sv)
    b.enforce(tuple(terms), ONE, _var(out))
    return out


def norm_sq_gadget(b: Builder, v: Sequence[int]) -> int:
    return dot_gadget(b, v, v)


def isqrt_gadget(b: Builder, x: int, x_bits: int) -> int:
    """s = floor(sqrt(x)) pinned by s^2 <= x < (s+1)^2 range checks."""
    xv = b.eval_lc(_var(x))
    s_bits = (x_bits + 1) // 2 + 1
    sv = None if xv is None else math.isqrt(xv)
    s = b.alloc_witness(sv)
    range_check(b, _var(s), s_bits)
    s2 = b.alloc_witness(None if sv is None else sv * sv)
    b.enforce(_var(s), _var(s), _var(s2))
    range_check(b, _add(_var(x), _var(s2, -1)), x_bits)          # x - s^2 >= 0
    range_check(b, _add(_var(s2), _var(s, 2), _var(x, -1)), x_bits + 1)  # (s+1)^2 > x
    return s


def modmul_gadget(
    b: Builder,
    a: LinComb,
    bb: int,
    modulus: int,
    out: Optional[int] = None,
) -> int:
    """out = a * bb mod `modulus` (a public constant below 2^120).

    Witnessed as a*bb = q*modulus + out with q and out range checked.
    When `out` is a preallocated variable (the ciphertext binding), the
    quotient is clamped into range so a mismatched binding still builds
    and simply fails satisfaction.
    """
    if modulus.bit_length() > 120:
        raise ValueError("modulus too large for a single-field modular product")
    k = (modulus - 1).bit_length()
    av, bv = b.eval_lc(a), b.eval_lc(_var(bb))
    bound = out is not None
    if av is None or bv is None:
        q = rem = None
    else:
        prod = av * bv
        if bound:
            rem = b.values[out]
            q = min(max((prod - rem) // modulus, 0), (1 << k) - 1)
        else:
            q, rem = divmod(prod, modulus)
    if not bound:
        out = b.alloc_witness(rem)
    qv = b.alloc_witness(q)
    b.enforce(a, _var(bb), _add(_var(qv, modulus), _var(out)))
    range_check(b, _var(qv), k)
    if not bound:
        range_check(b, _var(out), k)
        range_check(b, _add(_const(modulus - 1), _var(out, -1)), k)
    return out


def paillier_enc_gadget(
    b: Builder,
    m: int,
    r: int,
    n: int,
    c_pub: int,
) -> None:
    """Bind the public ciphertext to (1 + m*n) * r^n mod n^2.

    The exponent is the public modulus n itself, so square-and-multiply
    over its bits uses only public branching; every step is one modular
    product. m and r are range checked below n.
    """
    nb = n.bit_length()
    n_sq = n * n
    for v in (m, r):
        range_check(b, _var(v), nb)
        range_check(b, _add(_const(n - 1), _var(v, -1)), nb)
    # t2 = r^n mod n^2, most-significant bit first (always set).
    acc = r
    for bit in bin(n)[3:]:
        acc = modmul_gadget(b, _var(acc), acc, n_sq)
        if bit == "1":
            acc = modmul_gadget(b, _var(acc), r, n_sq)
    # (1 + m*n) * t2 mod n^2 == c_pub
    t1 = _add(ONE, _var(m, n))
    modmul_gadget(b, t1, acc, n_sq, out=c_pub)


def mean_gadget(b: Builder, v: Sequence[int], frac_bits: int, out_bits: int) -> int:
    """out = floor(sum(v) * S / (len(v) * S)) = the fixed-point mean."""
    total = tuple((idx, 1) for idx in v)
    divisor = len(v) << frac_bits  # encode(len(v))
    k = divisor.bit_length()
    av = b.signed(total)
    if av is None:
        q = rem = None
    else:
        num = av << frac_bits
        q = num // divisor
        rem = num - q * divisor
    out = b.alloc_witness(q)
    _, rem_terms = alloc_bits(b, rem, k)
    neg_rem = tuple((i, MODULUS - c) for i, c in rem_terms)
    b.enforce(_var(out), _const(divisor), _add(_scale(total, 1 << frac_bits), neg_rem))
    range_check(b, _add(_const(divisor - 1), neg_rem), k)
    signed_range_check(b, _var(out), out_bits)
    return out


# -- trust-score stages ------------------------------------------------------

def trust_score_gadget(
    b: Builder,
    g_star: Sequence[int],
    g_i: Sequence[int],
    spec: CircuitSpec,
) -> tuple[int, int]:
    """Fixed-point TS and normalized TS of g_i against the public g*.

    Mirrors fltrust.fixedpoint_scores bit for bit: square roots are
    witnessed only on the cosine path; the normalized score uses the
    identity max(0, dot)/||g_i||^2 and needs no root. A zero-norm g_i
    leaves the division remainders unsatisfiable.
    """
    f = spec.fp.frac_bits
    S = 1 << f
    d = dot_gadget(b, g_star, g_i)
    nsq_i = norm_sq_gadget(b, g_i)
    nsq_s = norm_sq_gadget(b, g_star)
    n_i = isqrt_gadget(b, nsq_i, spec.accum_bits)
    n_s = isqrt_gadget(b, nsq_s, spec.accum_bits)
    pv = b.eval_lc(_var(n_s))
    prod = None if pv is None else pv * b.eval_lc(_var(n_i))
    p = b.alloc_witness(prod)
    b.enforce(_var(n_s), _var(n_i), _var(p))
    q0 = fp_div_gadget(b, _var(d), p, f, spec.ts_bits, 2 * spec.sqrt_bits)
    t0 = relu_max0(b, _var(q0), spec.ts_bits)
    ts = min_const(b, _var(t0), S, spec.ts_bits)
    d_pos = relu_max0(b, _var(d), spec.accum_bits + 1)
    tsn = fp_div_gadget(b, _var(d_pos), nsq_i, f, spec.tsn_bits, spec.accum_bits)
    return ts, tsn


def weighted_vector_gadget(
    b: Builder,
    ts_norm: int,
    g_i: Sequence[int],
    spec: CircuitSpec,
) -> list[int]:
    return [fp_mul_gadget(b, ts_norm, g, spec.fp.frac_bits, spec.h_bits) for g in g_i]


# -- full circuit -------------------------------------------------------------

@dataclass(frozen=True)
class FLTrustPublicInputs:
    """Values the verifier sees: reference update, key, ciphertexts."""

    g_star_raw: list[int]
    n: Optional[int] = None
    c_h: Optional[list[int]] = None
    c_ts: Optional[int] = None


@dataclass(frozen=True)
class FLTrustWitnessInputs:
    """The client's claims plus encryption randomness.

    ts/tsn/h/m are claims the circuit checks against its own
    recomputation; a dishonest claim builds fine and fails verification.
    """

    g_raw: list[int]
    ts_raw: int
    ts_norm_raw: int
    h_raw: list[int]
    m_h: Optional[list[int]] = None
    m_ts: Optional[int] = None
    r_h: Optional[list[int]] = None
    r_ts: Optional[int] = None


@dataclass(frozen=True)
class FLTrustLayout:
    """Variable indices of the named protocol quantities."""

    g_star: list[int]
    n_var: Optional[int]
    c_h: Optional[list[int]]
    c_ts: Optional[int]
    g: list[int]
    ts: int
    tsn: int
    h: list[int]
    m_h: Optional[list[int]]
    m_ts: Optional[int]


@dataclass
class FLTrustCircuit:
    cs: ConstraintSystem
    layout: FLTrustLayout
    assignment: Optional[Assignment] = None


def public_input_values(
    spec: CircuitSpec,
    g_star_raw: Sequence[int],
    n: Optional[int] = None,
    c_h: Optional[Sequence[int]] = None,
    c_ts: Optional[int] = None,
) -> list[int]:
    """Field-encoded public inputs in circuit order; the single source of
    truth shared by prover and verifier."""
    vals = [v % MODULUS for v in g_star_raw]
    if STAGE_ENCRYPTION in spec.stages:
        if n is None or c_h is None or c_ts is None:
            raise ValueError("encryption stage requires n and ciphertexts")
        vals.append(n % MODULUS)
        vals.extend(c % MODULUS for c in c_h)
        vals.append(c_ts % MODULUS)
    return vals


def build_fltrust_circuit(
    spec: CircuitSpec,
    ek_n: Optional[int] = None,
    publics: Optional[FLTrustPublicInputs] = None,
    witness: Optional[FLTrustWitnessInputs] = None,
    emit_constraints: bool = True,
) -> FLTrustCircuit:
    """Compose the enabled stages into one circuit.

    With publics and witness present the returned circuit carries a full
    assignment (a satisfying one, for honest inputs). With both None the
    same rows are emitted shape-only, which is how the two servers build
    their verification copy; digests agree between the two modes.

    ek_n is the Paillier modulus the encryption stage hard-wires into
    its rows (its bit pattern drives the exponentiation schedule), so it
    is required, in both modes, whenever that stage is enabled.
    """
    L = spec.vector_len
    witness_mode = publics is not None or witness is not None
    if witness_mode and (publics is None or witness is None):
        raise ValueError("witness mode needs both publics and witness")
    enc = STAGE_ENCRYPTION in spec.stages
    if enc:
        if ek_n is None:
            raise ValueError("encryption stage needs the Paillier modulus")
        if ek_n.bit_length() != spec.paillier_bits:
            raise ValueError("modulus width disagrees with the circuit spec")
        if witness_mode and publics.n != ek_n:
            raise ValueError("public n disagrees with the circuit's modulus")
    if not emit_constraints and not witness_mode:
        raise ValueError("a shape-only build must emit constraints")
    b = Builder(witness=witness_mode, emit=emit_constraints)

    none_list = [None] * L

    # Publics, in the order public_input_values produces them.
    g_star = [b.alloc_public(v) for v in (publics.g_star_raw if witness_mode else none_list)]
    n_var = c_h_vars = c_ts_var = None
    if enc:
        n_var = b.alloc_public(ek_n if witness_mode else None)
        c_h_vars = [b.alloc_public(v) for v in (publics.c_h if witness_mode else none_list)]
        c_ts_var = b.alloc_public(publics.c_ts if witness_mode else None)

    # Witness claims.
    g = [b.alloc_witness(v) for v in (witness.g_raw if witness_mode else none_list)]
    ts = b.alloc_witness(witness.ts_raw if witness_mode else None)
    tsn = b.alloc_witness(witness.ts_norm_raw if witness_mode else None)
    h = [b.alloc_witness(v) for v in (witness.h_raw if witness_mode else none_list)]
    m_h_vars = m_ts_var = None
    if enc:
        m_h_vars = [b.alloc_witness(v) for v in (witness.m_h if witness_mode else none_list)]
        m_ts_var = b.alloc_witness(witness.m_ts if witness_mode else None)

    layout = FLTrustLayout(
        g_star=g_star, n_var=n_var, c_h=c_h_vars, c_ts=c_ts_var,
        g=g, ts=ts, tsn=tsn, h=h, m_h=m_h_vars, m_ts=m_ts_var,
    )

    def bind(var_a: int, var_b: int) -> None:
        b.enforce(_add(_var(var_a), _var(var_b, -1)), ONE, ())

    for gv in g:
        signed_range_check(b, _var(gv), spec.grad_word_bits)

    if STAGE_TRUST_SCORE in spec.stages:
        ts_out, tsn_out = trust_score_gadget(b, g_star, g, spec)
        bind(ts_out, ts)
        bind(tsn_out, tsn)

    if STAGE_WEIGHTED in spec.stages:
        # Stage 2 consumes the *claimed* score so that an inflated claim
        # stays self-consistent downstream and fails only at its stage-1
        # binding, which is the relation actually being cheated.
        h_out = weighted_vector_gadget(b, tsn, g, spec)
        for hv_out, hv in zip(h_out, h):
            bind(hv_out, hv)

    if enc:
        # Pin the public n to the hard-wired modulus.
        b.enforce(_add(_var(n_var), _const(-ek_n)), ONE, ())
        rs_h = witness.r_h if witness_mode else none_list
        r_ts = witness.r_ts if witness_mode else None
        if witness_mode and (rs_h is None or r_ts is None or len(rs_h) != L):
            raise ValueError("encryption stage needs randomness for every ciphertext")
        for j in range(L):
            # m_j = h_j + n when h_j is negative, else h_j (signed residue).
            _, nonneg = signed_range_check(b, _var(h[j]), spec.h_bits)
            b.enforce(
                _add(_var(h[j]), _const(ek_n), _var(nonneg, -ek_n)),
                ONE,
                _var(m_h_vars[j]),
            )
            r_var = b.alloc_witness(rs_h[j])
            paillier_enc_gadget(b, m_h_vars[j], r_var, ek_n, c_h_vars[j])
        # TS is non-negative by construction, so its residue is itself.
        bind(m_ts_var, ts)
        r_ts_var = b.alloc_witness(r_ts)
        paillier_enc_gadget(b, m_ts_var, r_ts_var, ek_n, c_ts_var)

    return FLTrustCircuit(
        cs=b.cs,
        layout=layout,
        assignment=b.assignment() if witness_mode else None,
    )
