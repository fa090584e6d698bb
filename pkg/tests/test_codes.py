"""
Tests for code constructions, CRC arithmetic and code files
"""

import numpy as np
import pytest

from gcdkit.core.exceptions import CodeParseError, InconsistentCode, InvalidOrder
from gcdkit.services.codes import (
    CRC11,
    Code,
    CrcSpec,
    crc_attach,
    crc_check,
    crc_remainder,
    hamming_code,
    load_code,
    random_code,
    rm_code,
    save_code,
)
from gcdkit.services.gf2 import gf2_matmul, rank


def min_distance(code: Code) -> int:
    weights = code.codewords().sum(axis=1)
    return int(weights[weights > 0].min())


class TestReedMuller:
    @pytest.mark.parametrize(
        "m,r,n,k",
        [(5, 1, 32, 6), (6, 3, 64, 42), (2, 2, 4, 4), (3, 0, 8, 1), (4, 2, 16, 11)],
    )
    def test_dimensions(self, m, r, n, k):
        code = rm_code(m, r)
        assert (code.n, code.k) == (n, k)

    def test_full_rate_has_no_parity_rows(self):
        code = rm_code(2, 2)
        assert code.h.shape == (0, 4)
        assert code.is_codeword(np.array([1, 0, 1, 1], dtype=np.uint8))

    @pytest.mark.parametrize("m,r", [(3, 1), (4, 1), (4, 2), (3, 2)])
    def test_minimum_distance(self, m, r):
        assert min_distance(rm_code(m, r)) == 2 ** (m - r)

    def test_generator_orthogonal_to_parity_checks(self):
        code = rm_code(5, 2)
        assert not gf2_matmul(code.g, code.h.T).any()

    def test_invalid_order(self):
        with pytest.raises(InvalidOrder):
            rm_code(3, 4)


class TestOtherCodes:
    def test_hamming(self, hamming):
        assert (hamming.n, hamming.k) == (7, 4)
        assert min_distance(hamming) == 3
        assert len({c.tobytes() for c in hamming.codewords()}) == 16

    def test_random_code_shape(self):
        code = random_code(4, 1, seed=3)
        assert code.h.shape == (3, 4)
        assert rank(code.h) == 3

    def test_random_code_deterministic(self):
        assert random_code(20, 10, seed=7) == random_code(20, 10, seed=7)

    def test_random_64_42_full_rank(self):
        assert rank(random_code(64, 42, seed=1).h) == 22

    def test_random_code_bad_dimension(self):
        with pytest.raises(ValueError):
            random_code(5, 6, seed=0)

    def test_redundant_parity_rows_dropped(self, hamming):
        h = np.vstack([hamming.h, hamming.h[0] ^ hamming.h[1]])
        code = Code.from_parity_check(h)
        assert code.k == 4

    def test_inconsistent_generator(self, hamming):
        g = np.eye(4, 7, dtype=np.uint8)
        with pytest.raises(InconsistentCode):
            Code.from_parity_check(hamming.h, g=g)

    def test_from_generator_round_trip(self):
        code = rm_code(3, 1)
        rebuilt = Code.from_generator(code.g)
        assert rebuilt.k == 4
        assert all(rebuilt.is_codeword(c) for c in code.codewords())

    def test_derived_generator(self, hamming):
        assert hamming.g is None
        g = hamming.generator
        assert g.shape == (4, 7)
        assert rank(g) == 4
        assert all(hamming.is_codeword(row) for row in g)

    def test_encode_is_systematic(self, random24, rng):
        u = rng.integers(0, 2, size=random24.k, dtype=np.uint8)
        c = random24.encode(u)
        assert random24.is_codeword(c)
        np.testing.assert_array_equal(random24.sys.permute(c)[random24.sys.redundancy :], u)


class TestCrc:
    def test_parse_hex_and_binary(self):
        assert CrcSpec.parse("0xE21") == CRC11
        assert CRC11.degree == 11

    @pytest.mark.parametrize("text", ["", "12", "0110x", "0x", "0xZZ", "1"])
    def test_parse_rejects_garbage(self, text):
        with pytest.raises(CodeParseError):
            CrcSpec.parse(text)

    def test_zero_message(self):
        assert not crc_remainder(np.zeros(20, np.uint8), CRC11).any()

    def test_single_one_is_low_order_coefficients(self):
        # x^11 mod p(x) = p(x) - x^11: the 11 low-order coefficients of the polynomial
        np.testing.assert_array_equal(
            crc_remainder(np.array([1], np.uint8), CRC11), np.array(CRC11.poly[1:])
        )

    def test_attach_then_check(self, rng):
        msg = rng.integers(0, 2, size=53, dtype=np.uint8)
        word = crc_attach(msg, CRC11)
        assert word.size == 64
        assert crc_check(word, CRC11)
        word[10] ^= 1
        assert not crc_check(word, CRC11)


class TestCodeFiles:
    def test_save_then_load(self, tmp_path):
        code = rm_code(3, 1)
        path = tmp_path / "rm.txt"
        save_code(code, path)
        assert load_code(path) == code

    def test_parity_check_only(self, tmp_path, hamming):
        path = tmp_path / "h.txt"
        path.write_text("3 7\n" + "\n".join("".join(map(str, row)) for row in hamming.h) + "\n")
        loaded = load_code(path)
        assert loaded.g is None
        assert loaded.k == 4

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 4\n101\n")
        with pytest.raises(CodeParseError):
            load_code(path)

    def test_inconsistent_pair(self, tmp_path, hamming):
        g = np.eye(4, 7, dtype=np.uint8)
        text = "4 7\n" + "\n".join("".join(map(str, row)) for row in g) + "\n"
        text += "3 7\n" + "\n".join("".join(map(str, row)) for row in hamming.h) + "\n"
        path = tmp_path / "pair.txt"
        path.write_text(text)
        with pytest.raises(InconsistentCode):
            load_code(path)
