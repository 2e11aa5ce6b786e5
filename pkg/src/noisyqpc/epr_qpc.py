"""EPR-pair based private comparison over noisy channels.

Charlie hands out Bell pairs keyed to a random string C_T, mixed with BB84
decoys.  Alice and Bob check the decoys, measure their halves in Z and
return C = M_A xor M_B xor R_A xor R_B; Charlie outputs whether
C xor C_T is nonzero.

:func:`simulate_protocol1` runs many independent trials at once (every
array carries a leading trials axis); :func:`run_protocol1` is the
single-run view with a full transcript.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .gf2 import BitString, DimensionError
from .network import (
    EveHook,
    Network,
    QuantumPayload,
    classical_channel,
    format_record,
    intercept_resend,
    quantum_channel,
    send,
)
from .noise import IDENTITY, INTERCEPT_RESEND, PauliChannel, PauliErrorString, Rng, compose, make_rng
from .qubitsim import BellPairs, apply_pauli_decoy, measure_decoy, pauli_code

ABORTED = -1


@dataclass(frozen=True)
class EprConfig:
    n: int
    decoys_per_channel: int | None = None  # None means n
    decoy_error_threshold: float = 0.0
    channel_ac: PauliChannel = IDENTITY
    channel_bc: PauliChannel = IDENTITY
    eve_ac: EveHook | None = None
    eve_bc: EveHook | None = None
    eve_after_noise: bool = True
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.decoys_per_channel is not None and self.decoys_per_channel < 0:
            raise ValueError("decoy count must be non-negative")
        if not 0.0 <= self.decoy_error_threshold <= 1.0:
            raise ValueError("decoy error threshold must lie in [0, 1]")

    @property
    def d(self) -> int:
        return self.n if self.decoys_per_channel is None else self.decoys_per_channel


class QubitStream(QuantumPayload):
    """S_A or S_B: one half of every Bell pair interleaved with decoys."""

    def __init__(self, pairs: BellPairs, half: str, decoys: np.ndarray, decoy_mask: np.ndarray):
        self.pairs = pairs
        self.half = half
        self.decoys = decoys
        self.decoy_mask = decoy_mask
        self.shape = decoy_mask.shape

    def apply_pauli(self, err: PauliErrorString) -> None:
        if err.shape != self.shape:
            raise DimensionError(f"error shape {err.shape} vs stream shape {self.shape}")
        trials = self.shape[0]
        mask = self.decoy_mask
        on_decoys = pauli_code(err.xbits[mask], err.zbits[mask]).reshape(trials, -1)
        self.decoys = apply_pauli_decoy(self.decoys, on_decoys).astype(np.uint8)
        pair_err = PauliErrorString(err.xbits[~mask].reshape(trials, -1), err.zbits[~mask].reshape(trials, -1))
        self.pairs.apply_pauli(self.half, pair_err)

    def measure_decoys(self, bases: np.ndarray, rng: Rng) -> np.ndarray:
        return measure_decoy(self.decoys, bases, rng)

    def measure_pairs(self, rng: Rng) -> np.ndarray:
        return self.pairs.measure_z(self.half, rng)


def _interleave_mask(trials: int, n: int, d: int, rng: Rng) -> np.ndarray:
    """Boolean (trials, n + d) mask with d uniformly placed decoy slots per row."""
    mask = np.zeros((trials, n + d), dtype=bool)
    if d:
        slots = np.argsort(rng.random((trials, n + d)), axis=1)[:, :d]
        np.put_along_axis(mask, slots, True, axis=1)
    return mask


@dataclass
class Protocol1Batch:
    C_T: np.ndarray
    R_A: np.ndarray
    R_B: np.ndarray
    C_A: np.ndarray
    C_B: np.ndarray
    C: np.ndarray
    R_c: np.ndarray
    decoy_errors_a: np.ndarray
    decoy_errors_b: np.ndarray
    decoy_error_rate: np.ndarray
    aborted: np.ndarray
    output: np.ndarray
    network: Network = field(repr=False)

    @property
    def trials(self) -> int:
        return self.C_T.shape[0]

    def correlation_record(self) -> np.ndarray:
        """C'_T = R_A xor R_B, the correlations Alice and Bob actually hold."""
        return self.R_A ^ self.R_B


def _as_messages(M, trials: int, n: int) -> np.ndarray:
    if isinstance(M, BitString):
        M = M.to_array()
    M = np.asarray(M, dtype=np.uint8)
    if M.shape[-1] != n:
        raise DimensionError(f"message length {M.shape[-1]} != n = {n}")
    return np.broadcast_to(M, (trials, n))


def simulate_protocol1(cfg: EprConfig, M_A, M_B, trials: int, rng: Rng,
                       network: Network | None = None) -> Protocol1Batch:
    """Run ``trials`` independent executions of all seven protocol steps."""
    n, d = cfg.n, cfg.d
    M_A = _as_messages(M_A, trials, n)
    M_B = _as_messages(M_B, trials, n)
    net = network or Network()
    alice, bob, charlie = net.alice, net.bob, net.charlie
    to_alice = quantum_channel(cfg.channel_ac, cfg.eve_ac, cfg.eve_after_noise, "AC")
    to_bob = quantum_channel(cfg.channel_bc, cfg.eve_bc, cfg.eve_after_noise, "BC")
    ac, bc, ab = classical_channel(name="AC"), classical_channel(name="BC"), classical_channel(name="AB")
    alice.log("M_A", M_A)
    bob.log("M_B", M_B)

    # 1. Bell pairs keyed to C_T; the sign is irrelevant and drawn at random
    C_T = charlie.log("C_T", rng.integers(0, 2, (trials, n), dtype=np.uint8))
    signs = charlie.log("bell_signs", rng.integers(0, 2, (trials, n), dtype=np.uint8))
    pairs = BellPairs(C_T | (signs << 1))

    # 2. decoys interleaved at random positions
    D_A = charlie.log("D_A", rng.integers(0, 4, (trials, d), dtype=np.uint8))
    D_B = charlie.log("D_B", rng.integers(0, 4, (trials, d), dtype=np.uint8))
    pos_A = charlie.log("decoy_positions_A", _interleave_mask(trials, n, d, rng))
    pos_B = charlie.log("decoy_positions_B", _interleave_mask(trials, n, d, rng))
    S_A = send(to_alice, charlie, alice, "S_A", QubitStream(pairs, "A", D_A.copy(), pos_A), rng)
    S_B = send(to_bob, charlie, bob, "S_B", QubitStream(pairs, "B", D_B.copy(), pos_B), rng)

    # 3. receipt acknowledged, Charlie discloses decoy positions and bases
    send(ac, alice, charlie, "ack_A", True, rng)
    send(bc, bob, charlie, "ack_B", True, rng)
    send(ac, charlie, alice, "decoy_positions_A", pos_A, rng)
    bases_A = send(ac, charlie, alice, "decoy_bases_A", D_A >> 1, rng)
    send(bc, charlie, bob, "decoy_positions_B", pos_B, rng)
    bases_B = send(bc, charlie, bob, "decoy_bases_B", D_B >> 1, rng)

    # 4. decoy check
    out_A = alice.log("decoy_outcomes_A", S_A.measure_decoys(bases_A, rng))
    out_B = bob.log("decoy_outcomes_B", S_B.measure_decoys(bases_B, rng))
    send(ac, alice, charlie, "decoy_outcomes_A", out_A, rng)
    send(bc, bob, charlie, "decoy_outcomes_B", out_B, rng)
    errors_a = np.sum(out_A != (D_A & 1), axis=1)
    errors_b = np.sum(out_B != (D_B & 1), axis=1)
    rate = (errors_a + errors_b) / (2 * d) if d else np.zeros(trials)
    aborted = charlie.log("aborted", rate > cfg.decoy_error_threshold)
    send(ac, charlie, alice, "aborted", aborted, rng)
    send(bc, charlie, bob, "aborted", aborted, rng)

    # 5. Z measurements of the pair halves
    R_A = alice.log("R_A", S_A.measure_pairs(rng))
    R_B = bob.log("R_B", S_B.measure_pairs(rng))

    # 6. masked messages, combined by Alice and Bob, sent to Charlie
    C_A = alice.log("C_A", M_A ^ R_A)
    C_B = bob.log("C_B", M_B ^ R_B)
    send(ab, alice, bob, "C_A", C_A, rng)
    send(ab, bob, alice, "C_B", C_B, rng)
    C = alice.log("C", C_A ^ C_B)
    bob.log("C", C_B ^ C_A)
    send(net.public, alice, charlie, "C", C, rng)

    # 7. comparison
    R_c = charlie.log("R_c", C ^ C_T)
    output = np.where(aborted, ABORTED, R_c.any(axis=1).astype(np.int8))
    charlie.log("output", output)

    return Protocol1Batch(C_T, R_A, R_B, C_A, C_B, C, R_c, errors_a, errors_b, rate, aborted, output, net)


@dataclass
class EprTranscript:
    C_T: BitString
    R_A: BitString | None
    R_B: BitString | None
    C_A: BitString | None
    C_B: BitString | None
    C: BitString | None
    R_c: BitString | None
    aborted: bool
    decoy_error_rate: float
    decoy_errors_a: int
    decoy_errors_b: int
    output: int | str
    seed: int | None
    network: Network = field(repr=False)

    def to_record(self) -> str:
        return format_record({
            "protocol": "epr",
            "seed": self.seed,
            "aborted": self.aborted,
            "decoy_error_rate": self.decoy_error_rate,
            "decoy_errors_a": self.decoy_errors_a,
            "decoy_errors_b": self.decoy_errors_b,
            "C_T": self.C_T,
            "R_A": self.R_A,
            "R_B": self.R_B,
            "C_A": self.C_A,
            "C_B": self.C_B,
            "C": self.C,
            "R_c": self.R_c,
            "output": self.output,
        })


def run_protocol1(cfg: EprConfig, M_A: BitString, M_B: BitString, rng: Rng | None = None) -> EprTranscript:
    if len(M_A) != cfg.n or len(M_B) != cfg.n:
        raise DimensionError(f"messages must have length n = {cfg.n}")
    rng = rng if rng is not None else make_rng(cfg.seed)
    b = simulate_protocol1(cfg, M_A, M_B, 1, rng)

    def bits(a: np.ndarray) -> BitString | None:
        return None if b.aborted[0] else BitString.from_bits(a[0])

    return EprTranscript(
        C_T=BitString.from_bits(b.C_T[0]),
        R_A=bits(b.R_A), R_B=bits(b.R_B), C_A=bits(b.C_A), C_B=bits(b.C_B),
        C=bits(b.C), R_c=bits(b.R_c),
        aborted=bool(b.aborted[0]),
        decoy_error_rate=float(b.decoy_error_rate[0]),
        decoy_errors_a=int(b.decoy_errors_a[0]),
        decoy_errors_b=int(b.decoy_errors_b[0]),
        output="aborted" if b.aborted[0] else int(b.output[0]),
        seed=cfg.seed,
        network=b.network,
    )


def run_eve_intercept_resend(cfg: EprConfig, M_A: BitString, M_B: BitString, rng: Rng | None = None,
                             targets: tuple[str, ...] = ("A",)) -> EprTranscript:
    """Protocol 1 with Eve intercepting and resending S_A and/or S_B."""
    if not targets or set(targets) - {"A", "B"}:
        raise ValueError("targets must be a non-empty subset of ('A', 'B')")
    cfg = replace(cfg,
                  eve_ac=intercept_resend if "A" in targets else cfg.eve_ac,
                  eve_bc=intercept_resend if "B" in targets else cfg.eve_bc)
    return run_protocol1(cfg, M_A, M_B, rng)


def comparison(M_A, M_B) -> np.ndarray:
    """f(M_A, M_B): 0 when the strings are equal, 1 otherwise (last axis)."""
    return np.any(np.asarray(M_A) != np.asarray(M_B), axis=-1).astype(np.int8)


# closed-form predictions


def predict_failure_depolarizing(p: float, n: int) -> float:
    """P(C_T != C'_T) with both channels depolarizing at strength p."""
    r = (4 * p / 3) * (1 - 2 * p / 3)
    return 1 - (1 - r) ** n


def predict_failure_bitphase(p: float, q: float, n: int) -> float:
    """Same with bit flips p and phase flips q on both channels; q drops out."""
    return 1 - (1 - 2 * p * (1 - p)) ** n


def effective_channel(noise: PauliChannel, eve: EveHook | None) -> PauliChannel:
    if eve is None:
        return noise
    if eve is not intercept_resend:
        raise ValueError("closed forms are only known for the intercept-resend attack")
    return compose(noise, INTERCEPT_RESEND)


def pair_flip_probability(ch_a: PauliChannel, ch_b: PauliChannel) -> float:
    """Probability that a pair switches between Phi and Psi (odd number of x components)."""
    a, b = ch_a.x_rate, ch_b.x_rate
    return a * (1 - b) + b * (1 - a)


def decoy_error_probability(ch: PauliChannel) -> float:
    """Error rate of a decoy with uniformly random Z/X preparation basis."""
    return (ch.x_rate + ch.z_rate) / 2


def _binomial_pmf(n: int, p: float) -> np.ndarray:
    return np.array([math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)])


def predict_abort_probability(cfg: EprConfig) -> float:
    d = cfg.d
    if d == 0:
        return 0.0
    e_a = decoy_error_probability(effective_channel(cfg.channel_ac, cfg.eve_ac))
    e_b = decoy_error_probability(effective_channel(cfg.channel_bc, cfg.eve_bc))
    pmf = np.convolve(_binomial_pmf(d, e_a), _binomial_pmf(d, e_b))
    k = np.arange(2 * d + 1)
    return float(pmf[k / (2 * d) > cfg.decoy_error_threshold].sum())


def predict_wrong_output(cfg: EprConfig) -> float:
    """P(run completes and Charlie reports 1) for equal inputs."""
    r = pair_flip_probability(effective_channel(cfg.channel_ac, cfg.eve_ac),
                              effective_channel(cfg.channel_bc, cfg.eve_bc))
    return (1 - predict_abort_probability(cfg)) * (1 - (1 - r) ** cfg.n)
