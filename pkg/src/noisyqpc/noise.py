"""Single-qubit Pauli channels and Pauli error strings.

Every flip probability is passed as the probability that the flip
happens.  Errors are kept as (x, z) component arrays; global phases are
dropped, so ``Y`` is just ``x = z = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import BitString, DimensionError

Rng = np.random.Generator

_TOL = 1e-12


def make_rng(seed: int | None) -> Rng:
    """The one generator type used across the package (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def stream_rng(master_seed: int, index: int) -> Rng:
    """Private stream for worker/cell ``index``: seeded with ``master_seed + index``."""
    return make_rng(master_seed + index)


def _check_probability(p: float, name: str = "probability") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class PauliChannel:
    p_i: float
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self) -> None:
        for name in ("p_i", "p_x", "p_y", "p_z"):
            v = getattr(self, name)
            if not -_TOL <= v <= 1 + _TOL:
                raise ValueError(f"{name}={v} outside [0, 1]")
        total = self.p_i + self.p_x + self.p_y + self.p_z
        if abs(total - 1.0) > _TOL:
            raise ValueError(f"probabilities sum to {total}, not 1")

    @property
    def probs(self) -> tuple[float, float, float, float]:
        return (self.p_i, self.p_x, self.p_y, self.p_z)

    @property
    def x_rate(self) -> float:
        """Probability that the error has an x component (X or Y)."""
        return self.p_x + self.p_y

    @property
    def z_rate(self) -> float:
        return self.p_z + self.p_y

    def is_identity(self) -> bool:
        return self.p_i == 1.0


IDENTITY = PauliChannel(1.0, 0.0, 0.0, 0.0)


def bit_flip_channel(flip_prob: float) -> PauliChannel:
    p = _check_probability(flip_prob, "flip_prob")
    return PauliChannel(1.0 - p, p, 0.0, 0.0)


def phase_flip_channel(flip_prob: float) -> PauliChannel:
    p = _check_probability(flip_prob, "flip_prob")
    return PauliChannel(1.0 - p, 0.0, 0.0, p)


def depolarizing_channel(p: float) -> PauliChannel:
    p = _check_probability(p)
    return PauliChannel(1.0 - p, p / 3, p / 3, p / 3)


def compose(first: PauliChannel, second: PauliChannel) -> PauliChannel:
    """Channel applying ``first`` then ``second`` independently.

    Pauli products only shift the (x, z) components by XOR, so composition
    is a convolution over the four components and is order independent.
    For a bit flip p and a phase flip q this gives
    ((1-p)(1-q), p(1-q), pq, (1-p)q).
    """
    a_i, a_x, a_y, a_z = first.probs
    b_i, b_x, b_y, b_z = second.probs
    return PauliChannel(
        a_i * b_i + a_x * b_x + a_y * b_y + a_z * b_z,
        a_i * b_x + a_x * b_i + a_y * b_z + a_z * b_y,
        a_i * b_y + a_y * b_i + a_x * b_z + a_z * b_x,
        a_i * b_z + a_z * b_i + a_x * b_y + a_y * b_x,
    )


@dataclass(frozen=True, eq=False)
class PauliErrorString:
    """Per-qubit error X^x Z^z; arrays may carry leading batch axes."""

    xbits: np.ndarray
    zbits: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.xbits, dtype=np.uint8)
        z = np.asarray(self.zbits, dtype=np.uint8)
        if x.shape != z.shape:
            raise DimensionError(f"x shape {x.shape} != z shape {z.shape}")
        object.__setattr__(self, "xbits", x)
        object.__setattr__(self, "zbits", z)

    @classmethod
    def identity(cls, shape) -> PauliErrorString:
        return cls(np.zeros(shape, np.uint8), np.zeros(shape, np.uint8))

    @classmethod
    def from_str(cls, text: str) -> PauliErrorString:
        text = text.strip().upper()
        if any(c not in "IXYZ" for c in text):
            raise ValueError(f"not a Pauli string: {text!r}")
        return cls(
            np.array([c in "XY" for c in text], np.uint8),
            np.array([c in "YZ" for c in text], np.uint8),
        )

    @classmethod
    def single(cls, n: int, index: int, pauli: str) -> PauliErrorString:
        text = ["I"] * n
        text[index] = pauli
        return cls.from_str("".join(text))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.xbits.shape

    def __len__(self) -> int:
        return self.xbits.shape[-1]

    def __str__(self) -> str:
        if self.xbits.ndim != 1:
            return f"PauliErrorString(shape={self.shape})"
        return "".join("IXZY"[x | (z << 1)] for x, z in zip(self.xbits, self.zbits))

    def __repr__(self) -> str:
        return f"PauliErrorString('{self}')"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliErrorString):
            return NotImplemented
        return np.array_equal(self.xbits, other.xbits) and np.array_equal(self.zbits, other.zbits)

    def __mul__(self, other: PauliErrorString) -> PauliErrorString:
        if self.shape != other.shape:
            raise DimensionError("Pauli strings of different shape")
        return PauliErrorString(self.xbits ^ other.xbits, self.zbits ^ other.zbits)

    def weight(self):
        return np.sum(self.xbits | self.zbits, axis=-1)

    def x_part(self) -> BitString:
        return BitString.from_bits(self.xbits)

    def z_part(self) -> BitString:
        return BitString.from_bits(self.zbits)

    def take(self, index) -> PauliErrorString:
        """Select qubits along the last axis."""
        return PauliErrorString(self.xbits[..., index], self.zbits[..., index])


def sample_error(ch: PauliChannel, n, rng: Rng) -> PauliErrorString:
    """Independent I/X/Y/Z draw per qubit; ``n`` may be an int or a shape."""
    shape = (n,) if np.isscalar(n) else tuple(n)
    if ch.is_identity():
        return PauliErrorString.identity(shape)
    u = rng.random(shape)
    # [0, p_i) I, then X, then Y, then Z
    c_i = ch.p_i
    c_x = c_i + ch.p_x
    c_y = c_x + ch.p_y
    x = (u >= c_i) & (u < c_y)
    z = u >= c_x
    return PauliErrorString(x.astype(np.uint8), z.astype(np.uint8))


def hadamard_conjugate(e: PauliErrorString, mask) -> PauliErrorString:
    """H E H on every qubit where ``mask`` is 1: swaps the x and z parts there."""
    m = np.asarray(mask, dtype=np.uint8)
    if m.shape[-1:] != e.shape[-1:]:
        raise DimensionError(f"mask length {m.shape[-1:]} vs error length {e.shape[-1:]}")
    diff = (e.xbits ^ e.zbits) & m
    return PauliErrorString(e.xbits ^ diff, e.zbits ^ diff)


# Measuring a qubit in a uniformly random Z/X basis and resending the
# outcome state equals, for anyone who never sees the outcome, applying
# Z (Z basis) or X (X basis) with probability 1/2.
INTERCEPT_RESEND = PauliChannel(0.5, 0.25, 0.0, 0.25)
