import itertools
from pathlib import Path

import pytest

from noisyqpc.codes import (
    CodeValidationError,
    LinearCode,
    build_css,
    coset_label,
    encode_key,
    format_css_code,
    load_css_code,
    parse_css_code,
    steane_code,
)
from noisyqpc.gf2 import BitMatrix, BitString, DimensionError, matvec

import oracles
from conftest import HAMMING_ROWS

B = BitString.from_str
DATA = Path(__file__).resolve().parent.parent / "data"

# oracle: Hamming codewords = kernel of the check rows; its dual = span of the rows
HAMMING_WORDS = oracles.kernel_by_enumeration(HAMMING_ROWS, 7)
DUAL_WORDS = oracles.span_by_enumeration(HAMMING_ROWS, 7)


class TestLinearCode:
    def test_hamming_from_parity_check(self, hamming_h):
        code = LinearCode.from_parity_check(hamming_h)
        assert (code.n, code.k) == (7, 4)
        assert {str(c) for c in code.codewords()} == HAMMING_WORDS

    def test_dual(self, hamming_h):
        dual = LinearCode.from_parity_check(hamming_h).dual()
        assert (dual.n, dual.k) == (7, 3)
        assert {str(c) for c in dual.codewords()} == DUAL_WORDS

    def test_from_generators_drops_dependent_rows(self):
        code = LinearCode.from_generators(BitMatrix.from_strings(["1100", "0110", "1010"]))
        assert code.k == 2
        assert code.contains(B("1010"))
        assert not code.contains(B("1000"))

    def test_invalid_generator_rejected(self, hamming_h):
        with pytest.raises(CodeValidationError):
            LinearCode(7, 1, BitMatrix.from_strings(["1000000"]), BitMatrix.from_strings(HAMMING_ROWS * 2))

    def test_whole_space_has_no_checks(self):
        with pytest.raises(CodeValidationError):
            LinearCode.from_generators(BitMatrix.from_strings(["10", "01"]))


class TestBuildCss:
    def test_steane(self, steane):
        assert steane.n == 7
        assert (steane.c1.k, steane.c2.k) == (4, 3)
        assert steane.logical_dim == 1
        # |C1| / |C2| = 2^(k1 - k2)
        assert len(steane.c1.codewords()) // len(steane.c2.codewords()) == 2
        assert DUAL_WORDS < HAMMING_WORDS

    def test_equal_codes_rejected(self, hamming_h):
        c = LinearCode.from_parity_check(hamming_h)
        with pytest.raises(CodeValidationError):
            build_css(c, c, 1)

    def test_t2_rejected(self, hamming_h):
        c1 = LinearCode.from_parity_check(hamming_h)
        with pytest.raises(CodeValidationError):
            build_css(c1, c1.dual(), 2)

    def test_oracle_confirms_t2_collision(self):
        weight_le2 = [s for s in oracles.all_strings(7) if s.count("1") <= 2]
        syndromes = [oracles.mat_vec(HAMMING_ROWS, s) for s in weight_le2]
        assert len(set(syndromes)) < len(syndromes)

    def test_not_nested_rejected(self, hamming_h):
        c1 = LinearCode.from_parity_check(hamming_h)
        outsider = LinearCode.from_generators(BitMatrix.from_strings(["1000000"]))
        with pytest.raises(CodeValidationError):
            build_css(c1, outsider, 0)

    def test_length_mismatch_rejected(self, hamming_h):
        c1 = LinearCode.from_parity_check(hamming_h)
        c2 = LinearCode.from_generators(BitMatrix.from_strings(["11"]))
        with pytest.raises(CodeValidationError):
            build_css(c1, c2, 1)

    def test_h2_spans_c2(self, steane):
        assert {str(v) for v in steane.c2.codewords()} == oracles.span_by_enumeration(
            [str(r) for r in steane.h2.row_strings()], 7)

    def test_exhaustive_decoding(self, steane):
        for table, H in ((steane.bit_table, steane.h1), (steane.phase_table, steane.h2)):
            assert table.decode(BitString.zeros(H.nrows)) == BitString.zeros(7)
            for i in range(7):
                e = BitString.unit(7, i)
                assert table.decode(matvec(H, e)) == e


class TestCosetLabel:
    def test_zero(self, steane):
        assert coset_label(steane, B("0000000")) == B("0")

    def test_all_ones(self, steane):
        assert "1111111" in HAMMING_WORDS and "1111111" not in DUAL_WORDS
        assert coset_label(steane, B("1111111")) == B("1")

    def test_outside_c1(self, steane):
        with pytest.raises(CodeValidationError):
            coset_label(steane, B("1000000"))

    def test_wrong_length(self, steane):
        with pytest.raises(DimensionError):
            coset_label(steane, B("111"))

    def test_constant_on_cosets_and_injective(self, steane):
        words = sorted(HAMMING_WORDS)
        for a, b in itertools.product(words, repeat=2):
            same_coset = oracles.add(a, b) in DUAL_WORDS
            assert (coset_label(steane, B(a)) == coset_label(steane, B(b))) == same_coset

    def test_c2_labels_zero(self, steane):
        for w in DUAL_WORDS:
            assert coset_label(steane, B(w)) == B("0")


class TestEncodeKey:
    def test_key_zero(self, steane):
        assert encode_key(steane, B("0")) == B("0000000")

    def test_key_one_is_lexicographically_first(self, steane):
        first = min(w for w in HAMMING_WORDS if w not in DUAL_WORDS)
        assert first == "0010110"
        assert encode_key(steane, B("1")) == B(first)

    def test_round_trip(self, steane):
        for key in ("0", "1"):
            assert coset_label(steane, encode_key(steane, B(key))) == B(key)

    def test_wrong_key_length(self, steane):
        with pytest.raises(DimensionError):
            encode_key(steane, B("01"))

    def test_multi_bit_code_round_trip(self):
        # [15,11] Hamming over its dual [15,4]: 7 logical bits, t = 1
        H = BitMatrix.from_array([[(j >> b) & 1 for j in range(1, 16)] for b in range(4)])
        c1 = LinearCode.from_parity_check(H)
        code = build_css(c1, c1.dual(), 1)
        assert code.logical_dim == 7
        labels = set()
        for key in range(1 << 7):
            k = BitString(key, 7)
            v = encode_key(code, k)
            assert c1.contains(v)
            assert coset_label(code, v) == k
            labels.add(v)
        assert len(labels) == 1 << 7


class TestCodeFile:
    def test_bundled_steane_file(self, steane):
        assert load_css_code(DATA / "steane.code") == steane

    def test_format_round_trip(self, steane):
        assert parse_css_code(format_css_code(steane)) == steane

    @pytest.mark.parametrize("text", [
        "",
        "3 7\n0001111\n",
        "t 1\n3 7\n0001111\n0110011\n1010101\n",
        "t 2\n3 7\n0001111\n0110011\n1010101\n3 7\n0001111\n0110011\n1010101\n",
    ])
    def test_invalid_files(self, text):
        with pytest.raises(ValueError):
            parse_css_code(text)
