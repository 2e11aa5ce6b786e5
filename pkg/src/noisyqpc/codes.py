"""Nested classical code pairs and the CSS codes built from them."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .gf2 import (
    BitMatrix,
    BitString,
    DimensionError,
    SyndromeTable,
    content_lines,
    express,
    independent_rows,
    matvec,
    nullspace,
    parse_matrix,
    span,
    syndrome_table,
)

# 2**k2 coset elements are enumerated to pick lexicographic representatives.
MAX_ENUMERATION_DIM = 20


class CodeValidationError(ValueError):
    pass


@dataclass(frozen=True)
class LinearCode:
    n: int
    k: int
    generators: BitMatrix
    parity_check: BitMatrix

    def __post_init__(self) -> None:
        if self.generators.ncols != self.n or self.parity_check.ncols != self.n:
            raise DimensionError("generator/parity-check width differs from n")
        if self.generators.rank() != self.k or self.generators.nrows != self.k:
            raise CodeValidationError("generator rows must be k linearly independent vectors")
        for g in self.generators.row_strings():
            if matvec(self.parity_check, g).value:
                raise CodeValidationError(f"generator {g} violates the parity checks")
        if self.parity_check.rank() != self.n - self.k:
            raise CodeValidationError("parity check rank must be n - k")

    @classmethod
    def from_parity_check(cls, H: BitMatrix) -> LinearCode:
        gens = nullspace(H)
        if not gens:
            raise CodeValidationError("code is {0}")
        checks = independent_rows(H.rows)
        return cls(H.ncols, len(gens), BitMatrix.from_bitstrings(gens), BitMatrix(tuple(checks), H.ncols))

    @classmethod
    def from_generators(cls, G: BitMatrix) -> LinearCode:
        gens = independent_rows(G.rows)
        checks = nullspace(BitMatrix(tuple(gens), G.ncols))
        if not checks:
            raise CodeValidationError("code is the whole space; it has no parity checks")
        return cls(G.ncols, len(gens), BitMatrix(tuple(gens), G.ncols), BitMatrix.from_bitstrings(checks))

    def contains(self, v: BitString) -> bool:
        return not matvec(self.parity_check, v).value

    def dual(self) -> LinearCode:
        return LinearCode(self.n, self.n - self.k, self.parity_check, self.generators)

    def codewords(self) -> list[BitString]:
        return [BitString(v, self.n) for v in span(self.generators.rows)]


@dataclass(frozen=True)
class CodeOffsets:
    """The pair s = (x, z) selecting the shifted code Q_s."""

    x: BitString
    z: BitString

    def __post_init__(self) -> None:
        if self.x.length != self.z.length:
            raise DimensionError("offset strings must have equal length")


@dataclass(frozen=True)
class CssCode:
    c1: LinearCode
    c2: LinearCode
    t: int
    h1: BitMatrix
    h2: BitMatrix
    # basis of C1 as C2's generators followed by coset generators
    _basis: tuple[int, ...] = field(repr=False, compare=False, default=())

    @property
    def n(self) -> int:
        return self.c1.n

    @property
    def logical_dim(self) -> int:
        return self.c1.k - self.c2.k

    @property
    def bit_table(self) -> SyndromeTable:
        return syndrome_table(self.h1, self.t)

    @property
    def phase_table(self) -> SyndromeTable:
        return syndrome_table(self.h2, self.t)

    @property
    def coset_generators(self) -> list[BitString]:
        return [BitString(v, self.n) for v in self._basis[self.c2.k:]]


def build_css(c1: LinearCode, c2: LinearCode, t: int) -> CssCode:
    """Validate the nesting {0} < C2 < C1 and t-error correction of C1 and C2's dual."""
    if c1.n != c2.n:
        raise CodeValidationError("C1 and C2 have different block lengths")
    if t < 0:
        raise CodeValidationError("t must be non-negative")
    for g in c2.generators.row_strings():
        if not c1.contains(g):
            raise CodeValidationError(f"C2 generator {g} is not in C1")
    if c2.k < 1:
        raise CodeValidationError("C2 must be non-trivial")
    if c2.k >= c1.k:
        raise CodeValidationError("C2 must be a strict subcode of C1")
    h1 = c1.parity_check
    h2 = c2.generators  # parity check of the dual of C2
    try:
        SyndromeTable(h1, t)
        SyndromeTable(h2, t)
    except ValueError as err:
        raise CodeValidationError(f"code does not correct {t} errors: {err}") from err

    basis = list(c2.generators.rows)
    for g in c1.generators.rows:
        if express(basis, g) is None:
            basis.append(g)
    return CssCode(c1, c2, t, h1, h2, tuple(basis))


def coset_label(code: CssCode, v: BitString) -> BitString:
    """Label of the coset v + C2 as coordinates along the coset generators.

    The map is linear, vanishes exactly on C2 and is injective on C1/C2.
    """
    if v.length != code.n:
        raise DimensionError(f"vector length {v.length}, code length {code.n}")
    combo = express(code._basis, v.value)
    if combo is None:
        raise CodeValidationError(f"{v} is not a codeword of C1")
    return BitString(combo >> code.c2.k, code.logical_dim)


def encode_key(code: CssCode, key: BitString) -> BitString:
    """Lexicographically first element of the C1 coset labelled ``key``."""
    if key.length != code.logical_dim:
        raise DimensionError(f"key length {key.length}, code carries {code.logical_dim} bits")
    return _representative(code, key.value)


@lru_cache(maxsize=4096)
def _representative(code: CssCode, key: int) -> BitString:
    shift = 0
    for j, g in enumerate(code._basis[code.c2.k:]):
        if (key >> j) & 1:
            shift ^= g
    if code.c2.k > MAX_ENUMERATION_DIM:
        return BitString(shift, code.n)
    members = (BitString(shift ^ w, code.n) for w in span(code.c2.generators.rows))
    return min(members, key=BitString.lex_key)


def hamming_parity_check() -> BitMatrix:
    """The [7,4] Hamming check matrix whose column j is j in binary."""
    return BitMatrix.from_strings(["0001111", "0110011", "1010101"])


def steane_code() -> CssCode:
    H = hamming_parity_check()
    hamming = LinearCode.from_parity_check(H)
    return build_css(hamming, hamming.dual(), 1)


def parse_css_code(text: str) -> CssCode:
    """Parse a code-pair file.

    Layout (``#`` starts a comment)::

        t 1
        3 7          # H1: parity check of C1
        0001111
        ...
        3 7          # H2: parity check of the dual of C2 (rows span C2)
        ...
    """
    lines = content_lines(text)
    try:
        head = next(lines).split()
    except StopIteration:
        raise ValueError("empty code file") from None
    if len(head) != 2 or head[0] != "t":
        raise ValueError("code file must start with 't <correctable weight>'")
    t = int(head[1])
    try:
        h1 = parse_matrix(lines)
        h2 = parse_matrix(lines)
    except StopIteration:
        raise ValueError("code file needs two matrices") from None
    c1 = LinearCode.from_parity_check(h1)
    c2 = LinearCode.from_generators(h2)
    return build_css(c1, c2, t)


def load_css_code(path: str | Path) -> CssCode:
    return parse_css_code(Path(path).read_text())


def format_css_code(code: CssCode) -> str:
    return f"t {code.t}\n{code.h1.to_text()}{code.h2.to_text()}"


__all__ = [
    "CodeOffsets",
    "CodeValidationError",
    "CssCode",
    "LinearCode",
    "build_css",
    "coset_label",
    "encode_key",
    "format_css_code",
    "hamming_parity_check",
    "load_css_code",
    "parse_css_code",
    "steane_code",
]
