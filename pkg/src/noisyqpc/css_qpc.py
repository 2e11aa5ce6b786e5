"""CSS-code key distribution and the private comparison built on it.

All gates are Clifford and all errors Pauli, so a transmission is tracked as
the prepared code data (v, x, z per block, check values) plus a Pauli frame
over the transmitted slots.  The receiver only touches the state through
measurement methods of :class:`CssTransmission`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .codes import CodeOffsets, CodeValidationError, CssCode, coset_label, encode_key
from .gf2 import BitString, DimensionError, matvec
from .network import EveHook, Network, Party, QuantumPayload, format_record, intercept_resend, quantum_channel, send
from .noise import IDENTITY, INTERCEPT_RESEND, PauliChannel, PauliErrorString, Rng, compose, hadamard_conjugate, make_rng

ABORTED = -1
DEFAULT_CHECK_THRESHOLD = 0.20


@dataclass(frozen=True)
class KeyDistConfig:
    code: CssCode
    key_length: int
    check_bits: int | None = None  # None: as many check bits as code qubits
    check_error_threshold: float = DEFAULT_CHECK_THRESHOLD
    channel: PauliChannel = IDENTITY
    eve: EveHook | None = None
    eve_after_noise: bool = True
    hadamard: bool = True  # False zeroes the mask b after drawing it
    seed: int | None = None

    def __post_init__(self) -> None:
        k = self.code.logical_dim
        if self.key_length < 1 or self.key_length % k:
            raise ValueError(f"key length must be a positive multiple of {k}")
        if self.check_bits is not None and self.check_bits < 0:
            raise ValueError("check bit count must be non-negative")
        if not 0.0 <= self.check_error_threshold <= 1.0:
            raise ValueError("check error threshold must lie in [0, 1]")

    @property
    def blocks(self) -> int:
        return self.key_length // self.code.logical_dim

    @property
    def code_qubits(self) -> int:
        return self.blocks * self.code.n

    @property
    def n_checks(self) -> int:
        return self.code_qubits if self.check_bits is None else self.check_bits

    @property
    def slots(self) -> int:
        return self.code_qubits + self.n_checks


@dataclass(frozen=True)
class EncodedBlock:
    key_part: BitString
    v: BitString
    offsets: CodeOffsets


@dataclass(frozen=True)
class Announcement:
    """What the sender makes public after the receiver acknowledges receipt."""

    mask: np.ndarray
    check_slots: np.ndarray
    code_slots: np.ndarray  # (blocks, n): slot of every code qubit
    check_values: np.ndarray
    offsets: tuple[CodeOffsets, ...]


class CssTransmission(QuantumPayload):
    def __init__(self, code: CssCode, blocks: list[EncodedBlock], code_slots: np.ndarray,
                 check_slots: np.ndarray, check_values: np.ndarray, slots: int):
        self.code = code
        self._blocks = blocks
        self.code_slots = code_slots
        self.check_slots = check_slots
        self._check_values = check_values
        self.shape = (slots,)
        self._fx = np.zeros(slots, np.uint8)
        self._fz = np.zeros(slots, np.uint8)
        self._rotated = np.zeros(slots, np.uint8)

    @property
    def frame(self) -> PauliErrorString:
        return PauliErrorString(self._fx.copy(), self._fz.copy())

    def apply_pauli(self, err: PauliErrorString) -> None:
        if err.shape != self.shape:
            raise DimensionError(f"error shape {err.shape} vs {self.shape} slots")
        self._fx ^= err.xbits
        self._fz ^= err.zbits

    def apply_hadamard(self, mask) -> None:
        mask = np.asarray(mask, dtype=np.uint8)
        conj = hadamard_conjugate(self.frame, mask)
        self._fx, self._fz = conj.xbits, conj.zbits
        self._rotated ^= mask

    def _require_unrotated(self, slots: np.ndarray) -> None:
        if self._rotated[slots].any():
            raise RuntimeError("measuring qubits that are still Hadamard-rotated")

    def _block_errors(self, i: int) -> tuple[BitString, BitString]:
        s = self.code_slots[i]
        return BitString.from_bits(self._fx[s]), BitString.from_bits(self._fz[s])

    def measure_checks(self) -> np.ndarray:
        self._require_unrotated(self.check_slots)
        return self._check_values ^ self._fx[self.check_slots]

    def measure_bit_syndrome(self, i: int) -> BitString:
        """Z-type stabilizers (rows of H1) on block i: H1 (x + e1)."""
        self._require_unrotated(self.code_slots[i])
        e1, _ = self._block_errors(i)
        return matvec(self.code.h1, self._blocks[i].offsets.x ^ e1)

    def measure_phase_syndrome(self, i: int) -> BitString:
        """X-type stabilizers (rows of H2) on block i: H2 (z + e2)."""
        self._require_unrotated(self.code_slots[i])
        _, e2 = self._block_errors(i)
        return matvec(self.code.h2, self._blocks[i].offsets.z ^ e2)

    def correct(self, i: int, e1: BitString | None, e2: BitString | None) -> None:
        s = self.code_slots[i]
        if e1 is not None:
            self._fx[s] ^= e1.to_array()
        if e2 is not None:
            self._fz[s] ^= e2.to_array()

    def measure_block_z(self, i: int, rng: Rng) -> BitString:
        """Z readout of block i: v + x + w + e1 with w uniform over C2."""
        self._require_unrotated(self.code_slots[i])
        block = self._blocks[i]
        w = 0
        for g in self.code.c2.generators.rows:
            if rng.integers(0, 2):
                w ^= g
        e1, _ = self._block_errors(i)
        return block.v ^ block.offsets.x ^ BitString(w, self.code.n) ^ e1


def prepare_transmission(cfg: KeyDistConfig, key: BitString, rng: Rng) -> tuple[CssTransmission, Announcement, list[EncodedBlock]]:
    """Sender side, steps 1-5: check bits, mask, offsets, encoding, placement, Hadamards."""
    code, k = cfg.code, cfg.code.logical_dim
    if key.length != cfg.key_length:
        raise DimensionError(f"key length {key.length}, config expects {cfg.key_length}")
    check_values = rng.integers(0, 2, cfg.n_checks, dtype=np.uint8)
    mask = rng.integers(0, 2, cfg.slots, dtype=np.uint8)
    if not cfg.hadamard:
        mask[:] = 0
    bits = key.to_array()
    blocks = []
    for i in range(cfg.blocks):
        offsets = CodeOffsets(BitString.random(code.n, rng), BitString.random(code.n, rng))
        part = BitString.from_bits(bits[i * k:(i + 1) * k])
        blocks.append(EncodedBlock(part, encode_key(code, part), offsets))
    perm = rng.permutation(cfg.slots)
    check_slots = np.sort(perm[:cfg.n_checks])
    code_slots = np.sort(perm[cfg.n_checks:]).reshape(cfg.blocks, code.n)
    tx = CssTransmission(code, blocks, code_slots, check_slots, check_values, cfg.slots)
    tx.apply_hadamard(mask)
    ann = Announcement(mask, check_slots, code_slots, check_values, tuple(b.offsets for b in blocks))
    return tx, ann, blocks


@dataclass
class KeyDistOutcome:
    delivered_key: BitString | None
    aborted: bool
    check_error_rate: float
    check_errors: int
    bit_syndromes: list[BitString]
    phase_syndromes: list[BitString]
    decode_failures: int
    unreliable_blocks: list[int]
    mask: BitString
    check_slots: tuple[int, ...]
    seed: int | None = None
    received_key: BitString | None = field(default=None, repr=False)

    def to_record(self, verbose: bool = False) -> str:
        fields = {
            "protocol": "css-keydist",
            "seed": self.seed,
            "aborted": self.aborted,
            "check_error_rate": self.check_error_rate,
            "check_errors": self.check_errors,
            "decode_failures": self.decode_failures,
            "delivered_key": self.delivered_key,
        }
        if verbose:
            fields["mask"] = self.mask
            fields["check_slots"] = list(self.check_slots)
            fields["unreliable_blocks"] = self.unreliable_blocks
            for i, (sb, sp) in enumerate(zip(self.bit_syndromes, self.phase_syndromes)):
                fields[f"block{i}.bit_syndrome"] = sb
                fields[f"block{i}.phase_syndrome"] = sp
        return format_record(fields)


def receive_transmission(cfg: KeyDistConfig, tx: CssTransmission, ann: Announcement, rng: Rng) -> KeyDistOutcome:
    """Receiver side, steps 8-10: undo Hadamards, check, syndrome-decode, read the key."""
    code, k = cfg.code, cfg.code.logical_dim
    tx.apply_hadamard(ann.mask)
    measured = tx.measure_checks()
    check_errors = int(np.sum(measured != ann.check_values))
    rate = check_errors / cfg.n_checks if cfg.n_checks else 0.0
    aborted = rate > cfg.check_error_threshold

    bit_syn, phase_syn, unreliable = [], [], []
    parts: list[BitString] = []
    for i, offsets in enumerate(ann.offsets):
        sb = tx.measure_bit_syndrome(i)
        sp = tx.measure_phase_syndrome(i)
        bit_syn.append(sb)
        phase_syn.append(sp)
        # remove the known offsets to get the syndromes of e1 and e2
        e1 = code.bit_table.decode(sb ^ matvec(code.h1, offsets.x))
        e2 = code.phase_table.decode(sp ^ matvec(code.h2, offsets.z))
        tx.correct(i, e1, e2)
        readout = tx.measure_block_z(i, rng) ^ offsets.x
        try:
            part = coset_label(code, readout)
        except CodeValidationError:
            part = BitString.zeros(k)
            e1 = None
        if e1 is None or e2 is None:
            unreliable.append(i)
        parts.append(part)

    key = BitString.from_bits(itertools.chain.from_iterable(parts))
    return KeyDistOutcome(
        delivered_key=None if aborted else key,
        aborted=aborted,
        check_error_rate=rate,
        check_errors=check_errors,
        bit_syndromes=bit_syn,
        phase_syndromes=phase_syn,
        decode_failures=len(unreliable),
        unreliable_blocks=unreliable,
        mask=BitString.from_bits(ann.mask),
        check_slots=tuple(int(s) for s in ann.check_slots),
        seed=cfg.seed,
        received_key=key,
    )


def run_protocol2(cfg: KeyDistConfig, key: BitString, rng: Rng | None = None, *,
                  sender: Party | None = None, receiver: Party | None = None,
                  key_label: str = "k") -> KeyDistOutcome:
    """Distribute a known key from ``sender`` to ``receiver`` through the code."""
    rng = rng if rng is not None else make_rng(cfg.seed)
    sender = sender or Party("Alice")
    receiver = receiver or Party("Charlie")
    public = Network().public
    sender.log(key_label, key)
    tx, ann, _ = prepare_transmission(cfg, key, rng)
    sender.log("check_values", ann.check_values)
    sender.log("b", ann.mask)
    sender.log("s", ann.offsets)
    sender.log("check_positions", ann.check_slots)

    channel = quantum_channel(cfg.channel, cfg.eve, cfg.eve_after_noise, f"{sender.name}->{receiver.name}")
    send(channel, sender, receiver, "qubits", tx, rng)
    send(public, receiver, sender, "ack", True, rng)
    for label, value in (("b", ann.mask), ("check_positions", ann.check_slots),
                         ("check_values", ann.check_values), ("s", ann.offsets)):
        send(public, sender, receiver, label, value, rng)

    outcome = receive_transmission(cfg, tx, ann, rng)
    receiver.log("check_error_rate", outcome.check_error_rate)
    send(public, receiver, sender, "aborted", outcome.aborted, rng)
    if not outcome.aborted:
        receiver.log(key_label, outcome.delivered_key)
    return outcome


def run_eve_on_keydist(cfg: KeyDistConfig, key: BitString, rng: Rng | None = None) -> KeyDistOutcome:
    return run_protocol2(replace(cfg, eve=intercept_resend), key, rng)


@dataclass
class QpcOutcome:
    output: int | str
    aborted: bool
    unreliable: bool
    C_T: BitString
    R_A: BitString
    R_B: BitString
    C_A: BitString | None
    C_B: BitString | None
    C: BitString | None
    R_c: BitString | None
    keydist_a: KeyDistOutcome
    keydist_b: KeyDistOutcome
    network: Network = field(repr=False)

    def to_record(self, verbose: bool = False) -> str:
        fields = {
            "protocol": "css-qpc",
            "aborted": self.aborted,
            "unreliable": self.unreliable,
            "C_A": self.C_A,
            "C_B": self.C_B,
            "C": self.C,
            "R_c": self.R_c,
            "output": self.output,
        }
        if verbose:
            fields["check_error_rate_a"] = self.keydist_a.check_error_rate
            fields["check_error_rate_b"] = self.keydist_b.check_error_rate
            fields["decode_failures_a"] = self.keydist_a.decode_failures
            fields["decode_failures_b"] = self.keydist_b.decode_failures
        return format_record(fields)


def run_protocol3(cfg_a: KeyDistConfig, cfg_b: KeyDistConfig, M_A: BitString, M_B: BitString,
                  rng: Rng | None = None, network: Network | None = None) -> QpcOutcome:
    """Charlie sends R_A to Alice and R_A xor C_T to Bob, then compares C against C_T."""
    n = cfg_a.key_length
    if cfg_b.key_length != n or len(M_A) != n or len(M_B) != n:
        raise DimensionError("messages and both key lengths must agree")
    rng = rng if rng is not None else make_rng(cfg_a.seed)
    net = network or Network()
    alice, bob, charlie = net.alice, net.bob, net.charlie
    alice.log("M_A", M_A)
    bob.log("M_B", M_B)

    R_A = charlie.log("R_A", BitString.random(n, rng))
    out_a = run_protocol2(cfg_a, R_A, rng, sender=charlie, receiver=alice, key_label="R_A")
    C_T = charlie.log("C_T", BitString.random(n, rng))
    R_B = charlie.log("R_B", R_A ^ C_T)
    out_b = run_protocol2(cfg_b, R_B, rng, sender=charlie, receiver=bob, key_label="R_B")
    unreliable = bool(out_a.decode_failures or out_b.decode_failures)

    if out_a.aborted or out_b.aborted:
        return QpcOutcome("aborted", True, unreliable, C_T, R_A, R_B, None, None, None, None, out_a, out_b, net)

    C_A = alice.log("C_A", M_A ^ out_a.delivered_key)
    C_B = bob.log("C_B", M_B ^ out_b.delivered_key)
    send(net.public, alice, bob, "C_A", C_A, rng)
    send(net.public, bob, alice, "C_B", C_B, rng)
    C = alice.log("C", C_A ^ C_B)
    bob.log("C", C_B ^ C_A)
    send(net.public, alice, charlie, "C", C, rng)
    R_c = charlie.log("R_c", C ^ C_T)
    output = charlie.log("output", int(bool(R_c)))
    return QpcOutcome(output, False, unreliable, C_T, R_A, R_B, C_A, C_B, C, R_c, out_a, out_b, net)


# dishonest third party

CHARLIE_STRATEGIES = ("honest", "always-flip", "flip-one", "flip-prob")


@dataclass
class RepetitionOutcome:
    verdict: str  # "honest", "caught" or "undetected"
    secret_round: int
    answers: list[int]
    truths: list[int]


def ideal_compare(M_A: BitString, M_B: BitString, rng: Rng) -> int:
    return int(M_A != M_B)


def protocol3_comparator(cfg_a: KeyDistConfig, cfg_b: KeyDistConfig) -> Callable[[BitString, BitString, Rng], int]:
    """Comparator running the full CSS comparison; aborted rounds report -1."""
    def compare(M_A: BitString, M_B: BitString, rng: Rng) -> int:
        out = run_protocol3(cfg_a, cfg_b, M_A, M_B, rng)
        return ABORTED if out.aborted else int(out.output)
    return compare


def known_strings(m: int, length: int, rng: Rng) -> list[tuple[BitString, BitString]]:
    """m test pairs shared by Alice and Bob; half are equal in expectation."""
    pairs = []
    for _ in range(m):
        a = BitString.random(length, rng)
        b = a if rng.integers(0, 2) else BitString.random(length, rng)
        pairs.append((a, b))
    return pairs


def run_repeated_qpc(m: int, M_A: BitString, M_B: BitString, rng: Rng, *,
                     charlie: str = "honest", rho: float = 0.5,
                     compare: Callable[[BitString, BitString, Rng], int] = ideal_compare,
                     secret_round: int | None = None) -> RepetitionOutcome:
    """Run m + 1 comparisons with the secret pair hidden among m known ones.

    ``charlie`` picks the dishonest strategy: flip every answer, flip one
    uniformly chosen round, or flip each answer with probability ``rho``.
    Any wrong answer on a known round gets Charlie caught.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if charlie not in CHARLIE_STRATEGIES:
        raise ValueError(f"unknown strategy {charlie!r}; choose from {CHARLIE_STRATEGIES}")
    if len(M_A) != len(M_B):
        raise DimensionError("messages must have equal length")
    if secret_round is None:
        secret_round = int(rng.integers(0, m + 1))
    elif not 0 <= secret_round <= m:
        raise ValueError("secret round out of range")

    known = known_strings(m, len(M_A), rng)
    rounds = known[:secret_round] + [(M_A, M_B)] + known[secret_round:]
    flip_round = int(rng.integers(0, m + 1)) if charlie == "flip-one" else -1

    answers, truths = [], []
    for r, (a, b) in enumerate(rounds):
        answer = compare(a, b, rng)
        if charlie == "always-flip" or r == flip_round or (charlie == "flip-prob" and rng.random() < rho):
            answer = 1 - answer if answer != ABORTED else answer
        answers.append(answer)
        truths.append(int(a != b))

    # aborted rounds carry no evidence either way
    caught = any(answers[r] not in (truths[r], ABORTED) for r in range(m + 1) if r != secret_round)
    if caught:
        verdict = "caught"
    elif answers[secret_round] not in (truths[secret_round], ABORTED):
        verdict = "undetected"
    else:
        verdict = "honest"
    return RepetitionOutcome(verdict, secret_round, answers, truths)


def predict_caught_probability(m: int, charlie: str, rho: float = 0.5) -> float:
    if charlie == "honest" or m == 0:
        return 0.0
    if charlie == "always-flip":
        return 1.0
    if charlie == "flip-one":
        return 1 - 1 / (m + 1)
    if charlie == "flip-prob":
        return 1 - (1 - rho) ** m
    raise ValueError(f"unknown strategy {charlie!r}")


# closed-form predictions (exact enumeration over the code)


def effective_channel(cfg: KeyDistConfig) -> PauliChannel:
    if cfg.eve is None:
        return cfg.channel
    if cfg.eve is not intercept_resend:
        raise ValueError("closed forms are only known for the intercept-resend attack")
    return compose(cfg.channel, INTERCEPT_RESEND)


def received_x_rate(cfg: KeyDistConfig) -> float:
    """Per-slot probability of an x component after the receiver's Hadamards."""
    ch = effective_channel(cfg)
    return (ch.x_rate + ch.z_rate) / 2 if cfg.hadamard else ch.x_rate


def block_label_error_distribution(code: CssCode, x_rate: float) -> np.ndarray | None:
    """P(delivered label = sent label xor delta) for each delta, iid bit flips.

    None when some syndrome has no correctable preimage.
    """
    if not code.bit_table.complete:
        return None
    n, k = code.n, code.logical_dim
    dist = np.zeros(1 << k)
    for e in range(1 << n):
        w = e.bit_count()
        e1 = BitString(e, n)
        guess = code.bit_table.decode(matvec(code.h1, e1))
        delta = coset_label(code, e1 ^ guess).value
        dist[delta] += x_rate**w * (1 - x_rate) ** (n - w)
    return dist


def predict_keydist_abort(cfg: KeyDistConfig) -> float:
    c = cfg.n_checks
    if c == 0:
        return 0.0
    pi = received_x_rate(cfg)
    return sum(math.comb(c, j) * pi**j * (1 - pi) ** (c - j)
               for j in range(c + 1) if j / c > cfg.check_error_threshold)


def predict_keydist_failure(cfg: KeyDistConfig) -> float | None:
    """P(run completes but the delivered key is wrong)."""
    dist = block_label_error_distribution(cfg.code, received_x_rate(cfg))
    if dist is None:
        return None
    return (1 - predict_keydist_abort(cfg)) * (1 - dist[0] ** cfg.blocks)


def predict_qpc_failure(cfg_a: KeyDistConfig, cfg_b: KeyDistConfig) -> float | None:
    """P(run completes and Charlie reports 1) for equal inputs."""
    da = block_label_error_distribution(cfg_a.code, received_x_rate(cfg_a))
    db = block_label_error_distribution(cfg_b.code, received_x_rate(cfg_b))
    if da is None or db is None or cfg_a.blocks != cfg_b.blocks:
        return None
    same = float(np.dot(da, db))
    ok = (1 - predict_keydist_abort(cfg_a)) * (1 - predict_keydist_abort(cfg_b))
    return ok * (1 - same**cfg_a.blocks)


__all__ = [
    "ABORTED",
    "Announcement",
    "CssTransmission",
    "EncodedBlock",
    "KeyDistConfig",
    "KeyDistOutcome",
    "QpcOutcome",
    "RepetitionOutcome",
    "ideal_compare",
    "predict_caught_probability",
    "predict_keydist_abort",
    "predict_keydist_failure",
    "predict_qpc_failure",
    "prepare_transmission",
    "protocol3_comparator",
    "receive_transmission",
    "run_eve_on_keydist",
    "run_protocol2",
    "run_protocol3",
    "run_repeated_qpc",
]
