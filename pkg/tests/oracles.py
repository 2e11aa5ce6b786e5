"""Independent reference computations used to freeze expected values.

Nothing here imports the package's algorithms: bit strings are plain
tuples/strings, quantum states are explicit numpy vectors and matrices.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
Y = 1j * X @ Z
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
}

BELL = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}


def kron(*ops):
    return reduce(np.kron, ops)


def identify(state: np.ndarray, table: dict[str, np.ndarray]) -> str:
    """Name of the table entry equal to ``state`` up to a global phase."""
    for name, ref in table.items():
        if abs(abs(np.vdot(ref, state)) - 1) < 1e-9:
            return name
    raise AssertionError("state not in table")


def zz_anticorrelation(rho: np.ndarray) -> float:
    """P(Z outcomes of the two qubits differ) for a 2-qubit density matrix."""
    return float(np.real(rho[1, 1] + rho[2, 2]))


def measure_resend(rho: np.ndarray, qubit: int, nqubits: int = 2) -> np.ndarray:
    """Random-basis measure-and-resend on one qubit, averaged over basis and outcome."""
    out = np.zeros_like(rho)
    for basis in ("01", "+-"):
        for outcome in basis:
            proj = np.outer(KET[outcome], KET[outcome].conj())
            ops = [I2] * nqubits
            ops[qubit] = proj
            P = kron(*ops)
            out += 0.5 * P @ rho @ P
    return out


def apply_channel(rho: np.ndarray, probs: dict[str, float], qubit: int, nqubits: int = 2) -> np.ndarray:
    out = np.zeros_like(rho)
    for name, pr in probs.items():
        ops = [I2] * nqubits
        ops[qubit] = PAULI[name]
        U = kron(*ops)
        out += pr * U @ rho @ U.conj().T
    return out


# GF(2) by brute force on tuples of ints


def bits(s: str) -> tuple[int, ...]:
    return tuple(int(c) for c in s)


def to_str(v) -> str:
    return "".join(str(int(b)) for b in v)


def mat_vec(rows: list[str], v: str) -> str:
    return "".join(str(sum(int(a) * int(b) for a, b in zip(r, v)) % 2) for r in rows)


def all_strings(n: int):
    for t in itertools.product("01", repeat=n):
        yield "".join(t)


def add(a: str, b: str) -> str:
    return "".join(str((int(x) + int(y)) % 2) for x, y in zip(a, b))


def span_by_enumeration(rows: list[str], n: int) -> set[str]:
    out = set()
    for coeffs in itertools.product((0, 1), repeat=len(rows)):
        v = "0" * n
        for c, r in zip(coeffs, rows):
            if c:
                v = add(v, r)
        out.add(v)
    return out


def kernel_by_enumeration(rows: list[str], n: int) -> set[str]:
    return {v for v in all_strings(n) if set(mat_vec(rows, v)) <= {"0"}}


# explicit state vectors for Q_s code states on n qubits


def basis_index(s: str) -> int:
    """Index of |s> with qubit 0 as the most significant tensor factor."""
    return int(s, 2)


def code_state(v: str, x: str, z: str, c2: set[str]) -> np.ndarray:
    n = len(v)
    psi = np.zeros(2**n, dtype=complex)
    for w in c2:
        sign = (-1) ** (sum(int(a) * int(b) for a, b in zip(z, w)) % 2)
        psi[basis_index(add(add(v, x), w))] += sign
    return psi / np.linalg.norm(psi)


def pauli_string_op(label: str) -> np.ndarray:
    return kron(*(PAULI[c] for c in label))


def stabilizer_outcome(psi: np.ndarray, row: str, kind: str) -> int:
    """Deterministic outcome bit of sigma_kind^[row]; raises if not an eigenstate."""
    label = "".join(kind if c == "1" else "I" for c in row)
    ev = np.real(np.vdot(psi, pauli_string_op(label) @ psi))
    assert abs(abs(ev) - 1) < 1e-9, f"not an eigenstate (expectation {ev})"
    return 0 if ev > 0 else 1


def z_support(psi: np.ndarray, n: int) -> set[str]:
    return {format(i, f"0{n}b") for i in np.nonzero(np.abs(psi) > 1e-9)[0]}
