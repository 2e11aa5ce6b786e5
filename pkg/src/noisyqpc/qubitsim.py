"""Label-level simulation of Bell pairs and BB84 decoy states.

Labels are small integers, so every function here works equally on a
single label or on a numpy array of labels:

* Bell labels: bit 0 is the Phi/Psi (parity) bit, bit 1 the sign bit.
* Decoy labels: bit 0 is the state value, bit 1 the basis (0 = Z, 1 = X).
* Paulis: bit 0 is the x component, bit 1 the z component.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

from .noise import PauliErrorString, Rng


class Pauli(IntEnum):
    I = 0
    X = 1
    Z = 2
    Y = 3


class Basis(IntEnum):
    Z = 0
    X = 1


class BellLabel(IntEnum):
    PHI_PLUS = 0
    PSI_PLUS = 1
    PHI_MINUS = 2
    PSI_MINUS = 3

    @property
    def parity(self) -> int:
        """0 for the correlated Phi states, 1 for the anticorrelated Psi states."""
        return self & 1

    @property
    def sign(self) -> int:
        return self >> 1


class DecoyLabel(IntEnum):
    ZERO = 0
    ONE = 1
    PLUS = 2
    MINUS = 3

    @property
    def basis(self) -> Basis:
        return Basis(self >> 1)

    @property
    def bit(self) -> int:
        return int(self) & 1


def _wrap(result, enum_type):
    if isinstance(result, np.ndarray) and result.ndim:
        return result
    return enum_type(int(result))


def pauli_code(x, z):
    return np.asarray(x, dtype=np.uint8) | (np.asarray(z, dtype=np.uint8) << 1)


def apply_pauli_bell(b, half: str, pauli):
    """Pauli on one half of a Bell pair.

    X (on either half) swaps Phi and Psi, Z swaps the sign, Y does both.
    The half only changes the global phase, which labels ignore.
    """
    if half not in ("A", "B"):
        raise ValueError(f"half must be 'A' or 'B', got {half!r}")
    return _wrap(np.bitwise_xor(b, pauli), BellLabel)


def measure_bell_zz(b, rng: Rng):
    """Z measurement of both halves: uniform bit A, bit B = A xor parity."""
    b = np.asarray(b)
    bit_a = rng.integers(0, 2, size=b.shape, dtype=np.uint8)
    bit_b = bit_a ^ (b & 1).astype(np.uint8)
    if b.ndim == 0:
        return int(bit_a), int(bit_b)
    return bit_a, bit_b


def apply_pauli_decoy(d, pauli):
    """X flips Z-basis states, Z flips X-basis states, Y flips both (up to phase)."""
    d = np.asarray(d)
    pauli = np.asarray(pauli)
    in_x_basis = (d >> 1) & 1
    # the component that acts nontrivially: x for Z-basis states, z for X-basis
    flip = np.where(in_x_basis == 1, (pauli >> 1) & 1, pauli & 1)
    return _wrap(d ^ flip, DecoyLabel)


def measure_decoy(d, basis, rng: Rng):
    """Deterministic value in the preparation basis, a uniform bit otherwise."""
    d = np.asarray(d)
    basis = np.asarray(basis)
    shape = np.broadcast_shapes(d.shape, basis.shape)
    coin = rng.integers(0, 2, size=shape, dtype=np.uint8)
    out = np.where(((d >> 1) & 1) == basis, d & 1, coin).astype(np.uint8)
    return int(out) if out.ndim == 0 else out


class BellPairs:
    """Register of Bell pairs whose two halves travel to different parties.

    Both halves share this object, so a Pauli hitting either half updates
    the same label.  After the first Z measurement of a half the partner's
    outcome is fixed.
    """

    def __init__(self, labels):
        self.labels = np.array(labels, dtype=np.uint8)
        self._partner_outcome: dict[str, np.ndarray] = {}

    @property
    def shape(self) -> tuple[int, ...]:
        return self.labels.shape

    def apply_pauli(self, half: str, err: PauliErrorString) -> None:
        if self._partner_outcome:
            raise RuntimeError("pairs already measured")
        if err.shape != self.labels.shape:
            raise ValueError(f"error shape {err.shape} vs register shape {self.labels.shape}")
        self.labels = apply_pauli_bell(self.labels, half, pauli_code(err.xbits, err.zbits))

    def measure_z(self, half: str, rng: Rng) -> np.ndarray:
        if half in self._partner_outcome:
            return self._partner_outcome.pop(half)
        bit_a, bit_b = measure_bell_zz(self.labels, rng)
        own, other = (bit_a, bit_b) if half == "A" else (bit_b, bit_a)
        self._partner_outcome["B" if half == "A" else "A"] = other
        return own
