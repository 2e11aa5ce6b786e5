"""Linear algebra over GF(2) on packed integer bit strings.

Bit ``i`` of the packed integer holds position ``i`` of the string, and
position 0 is the leftmost character of the textual form, so
``BitString.from_str("100")`` has value ``1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operands have incompatible lengths or shapes."""


class AmbiguousSyndromeError(ValueError):
    """Two correctable errors share a syndrome, so decoding is not unique."""


@dataclass(frozen=True)
class BitString:
    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ValueError("length must be non-negative")
        if self.value < 0 or self.value >> self.length:
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    @classmethod
    def from_str(cls, text: str) -> BitString:
        text = text.strip()
        if any(c not in "01" for c in text):
            raise ValueError(f"not a bit string: {text!r}")
        value = 0
        for i, c in enumerate(text):
            if c == "1":
                value |= 1 << i
        return cls(value, len(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitString:
        value = 0
        length = 0
        for i, b in enumerate(bits):
            b = int(b)
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b}, expected 0 or 1")
            value |= b << i
            length = i + 1
        return cls(value, length)

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(0, length)

    @classmethod
    def unit(cls, length: int, index: int) -> BitString:
        if not 0 <= index < length:
            raise IndexError(index)
        return cls(1 << index, length)

    @classmethod
    def random(cls, length: int, rng: np.random.Generator) -> BitString:
        if length <= 62:
            return cls(int(rng.integers(0, 1 << length)), length)
        return cls.from_bits(rng.integers(0, 2, size=length))

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, index: int) -> int:
        if index < 0:
            index += self.length
        if not 0 <= index < self.length:
            raise IndexError(index)
        return (self.value >> index) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self.length):
            yield (self.value >> i) & 1

    def __str__(self) -> str:
        return "".join("1" if (self.value >> i) & 1 else "0" for i in range(self.length))

    def __repr__(self) -> str:
        return f"BitString('{self}')"

    def __xor__(self, other: BitString) -> BitString:
        return xor(self, other)

    def __bool__(self) -> bool:
        return self.value != 0

    def __array__(self, dtype=None, copy=None) -> np.ndarray:
        return self.to_array() if dtype is None else self.to_array().astype(dtype)

    def weight(self) -> int:
        return self.value.bit_count()

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self.length)

    def lex_key(self) -> str:
        """Sort key giving lexicographic order on the textual form."""
        return str(self)


def xor(a: BitString, b: BitString) -> BitString:
    if a.length != b.length:
        raise DimensionError(f"xor of lengths {a.length} and {b.length}")
    return BitString(a.value ^ b.value, a.length)


def weight(v: BitString) -> int:
    return v.value.bit_count()


@dataclass(frozen=True)
class BitMatrix:
    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self) -> None:
        if not self.rows or self.ncols <= 0:
            raise DimensionError("matrix dimensions must be positive")
        for r in self.rows:
            if r < 0 or r >> self.ncols:
                raise ValueError(f"row {r} does not fit in {self.ncols} columns")

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> BitMatrix:
        bits = [BitString.from_str(r) for r in rows]
        if not bits:
            raise DimensionError("matrix needs at least one row")
        ncols = bits[0].length
        if any(b.length != ncols for b in bits):
            raise DimensionError("ragged rows")
        return cls(tuple(b.value for b in bits), ncols)

    @classmethod
    def from_bitstrings(cls, rows: Sequence[BitString]) -> BitMatrix:
        if not rows:
            raise DimensionError("matrix needs at least one row")
        ncols = rows[0].length
        if any(r.length != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(tuple(r.value for r in rows), ncols)

    @classmethod
    def from_array(cls, arr) -> BitMatrix:
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionError("expected a 2-d array")
        return cls.from_bitstrings([BitString.from_bits(row) for row in arr])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    def row(self, i: int) -> BitString:
        return BitString(self.rows[i], self.ncols)

    def row_strings(self) -> list[BitString]:
        return [BitString(r, self.ncols) for r in self.rows]

    def to_array(self) -> np.ndarray:
        return np.array([self.row(i).to_array() for i in range(self.nrows)], dtype=np.uint8)

    def __matmul__(self, v: BitString) -> BitString:
        return matvec(self, v)

    def __str__(self) -> str:
        return "\n".join(str(self.row(i)) for i in range(self.nrows))

    def rank(self) -> int:
        return len(_echelon(self.rows))

    def to_text(self) -> str:
        return f"{self.nrows} {self.ncols}\n{self}\n"


def matvec(H: BitMatrix, v: BitString) -> BitString:
    """Syndrome ``H v``; entry ``m`` is the parity of row ``m`` dotted with ``v``."""
    if H.ncols != v.length:
        raise DimensionError(f"matrix has {H.ncols} columns, vector has length {v.length}")
    out = 0
    for m, row in enumerate(H.rows):
        out |= ((row & v.value).bit_count() & 1) << m
    return BitString(out, H.nrows)


def _echelon(rows: Iterable[int]) -> list[tuple[int, int, int]]:
    """Reduce rows to echelon form, tracking combinations.

    Returns ``(pivot_bit, reduced_row, combination)`` triples where
    ``combination`` has bit ``j`` set when input row ``j`` contributes.
    Dependent input rows are dropped.
    """
    basis: list[tuple[int, int, int]] = []
    for j, r in enumerate(rows):
        combo = 1 << j
        for pivot, brow, bcombo in basis:
            if r & pivot:
                r ^= brow
                combo ^= bcombo
        if r:
            pivot = r & -r
            # keep earlier rows free of the new pivot so reduction stays one pass
            for i, (p, brow, bcombo) in enumerate(basis):
                if brow & pivot:
                    basis[i] = (p, brow ^ r, bcombo ^ combo)
            basis.append((pivot, r, combo))
    return basis


def express(rows: Sequence[int], v: int) -> int | None:
    """Coefficients (as a bitmask over ``rows``) writing ``v`` as a sum of rows.

    Returns None when ``v`` is outside the span.
    """
    combo = 0
    for pivot, brow, bcombo in _echelon(rows):
        if v & pivot:
            v ^= brow
            combo ^= bcombo
    return combo if v == 0 else None


def in_span(rows: BitMatrix, v: BitString) -> bool:
    if rows.ncols != v.length:
        raise DimensionError(f"rows have {rows.ncols} columns, vector has length {v.length}")
    return express(rows.rows, v.value) is not None


def independent_rows(rows: Sequence[int]) -> list[int]:
    """A maximal linearly independent subset of ``rows``, in input order."""
    kept: list[int] = []
    for r in rows:
        if express(kept, r) is None:
            kept.append(r)
    return kept


def nullspace(H: BitMatrix) -> list[BitString]:
    """Basis of ``{v : H v = 0}``."""
    n = H.ncols
    # reduced row echelon form with pivot columns as bit positions
    basis = _echelon(H.rows)
    pivots = {p.bit_length() - 1: row for p, row, _ in basis}
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        v = 1 << f
        for pc, row in pivots.items():
            if (row >> f) & 1:
                v |= 1 << pc
        out.append(BitString(v, n))
    return out


def span(rows: Sequence[int]) -> list[int]:
    """Every element of the span of ``rows`` (exponential; small inputs only)."""
    out = [0]
    for r in independent_rows(rows):
        out += [x ^ r for x in out]
    return out


class SyndromeTable:
    """Maps every syndrome of an error of weight <= t to that error.

    Construction enumerates all such errors and raises
    :class:`AmbiguousSyndromeError` if two of them collide.
    """

    def __init__(self, H: BitMatrix, t: int):
        if t < 0:
            raise ValueError("t must be non-negative")
        self.H = H
        self.t = t
        table: dict[int, int] = {}
        n = H.ncols
        for w in range(min(t, n) + 1):
            for positions in combinations(range(n), w):
                e = 0
                for p in positions:
                    e |= 1 << p
                s = matvec(H, BitString(e, n)).value
                if s in table:
                    raise AmbiguousSyndromeError(
                        f"errors {BitString(table[s], n)} and {BitString(e, n)} "
                        f"share syndrome {BitString(s, H.nrows)}"
                    )
                table[s] = e
        self._table = table

    def __len__(self) -> int:
        return len(self._table)

    @property
    def complete(self) -> bool:
        """True when every possible syndrome has a correctable preimage."""
        return len(self._table) == 1 << self.H.nrows

    def decode(self, syndrome: BitString) -> BitString | None:
        if syndrome.length != self.H.nrows:
            raise DimensionError(f"syndrome length {syndrome.length}, matrix has {self.H.nrows} rows")
        e = self._table.get(syndrome.value)
        return None if e is None else BitString(e, self.H.ncols)


@lru_cache(maxsize=64)
def syndrome_table(H: BitMatrix, t: int) -> SyndromeTable:
    return SyndromeTable(H, t)


def min_weight_decode(H: BitMatrix, syndrome: BitString, t: int) -> BitString | None:
    """The error of weight <= t with the given syndrome, or None if there is none."""
    if syndrome.length != H.nrows:
        raise DimensionError(f"syndrome length {syndrome.length}, matrix has {H.nrows} rows")
    return syndrome_table(H, t).decode(syndrome)


def parse_matrix(lines: Iterator[str]) -> BitMatrix:
    """Read one matrix ("rows cols" header then rows of 0/1) from ``lines``."""
    header = next(lines).split()
    if len(header) != 2:
        raise ValueError(f"bad matrix header: {' '.join(header)!r}")
    nrows, ncols = int(header[0]), int(header[1])
    rows = []
    for _ in range(nrows):
        try:
            rows.append(next(lines).strip())
        except StopIteration:
            raise ValueError(f"expected {nrows} rows, file ended early") from None
    M = BitMatrix.from_strings(rows)
    if M.ncols != ncols:
        raise DimensionError(f"header says {ncols} columns, rows have {M.ncols}")
    return M


def content_lines(text: str) -> Iterator[str]:
    """Non-blank lines with ``#`` comments stripped."""
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def load_matrix(path: str | Path) -> BitMatrix:
    return parse_matrix(content_lines(Path(path).read_text()))
