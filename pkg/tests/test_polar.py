"""
Tests for polar construction and the successive-cancellation kernels
"""

import numpy as np
import pytest

from gcdkit.core.exceptions import CapacityExceeded, CodeParseError, DimensionMismatch
from gcdkit.services.codes import CRC11
from gcdkit.services.gf2 import gf2_matmul
from gcdkit.services.polar import (
    arikan_matrix,
    beta_combine,
    construct_polar,
    f_update,
    g_update,
    load_reliability_sequence,
    log2_length,
    polar_transform,
    reallocate_bits,
)


class TestTransform:
    def test_kernel(self):
        np.testing.assert_array_equal(arikan_matrix(1), [[1, 0], [1, 1]])

    @pytest.mark.parametrize("m", range(7))
    def test_self_inverse(self, m):
        g = arikan_matrix(m)
        np.testing.assert_array_equal(gf2_matmul(g, g), np.eye(1 << m, dtype=np.uint8))

    def test_butterflies_match_matrix(self, rng):
        u = rng.integers(0, 2, size=(5, 32), dtype=np.uint8)
        np.testing.assert_array_equal(polar_transform(u), gf2_matmul(u, arikan_matrix(5)))
        np.testing.assert_array_equal(polar_transform(polar_transform(u)), u)

    def test_length_must_be_power_of_two(self):
        assert log2_length(64) == 6
        with pytest.raises(ValueError):
            log2_length(12)


class TestKernels:
    def test_f(self):
        assert f_update(2.0, -3.0) == -2.0
        assert f_update(0.0, 5.0) == 0.0
        assert f_update(-1.5, 4.0) == f_update(4.0, -1.5)

    def test_g(self):
        assert g_update(2.0, 3.0, 0) == 5.0
        assert g_update(2.0, 3.0, 1) == 1.0
        np.testing.assert_allclose(g_update(np.array([1.0, -2.0]), 0.0, [0, 0]), [1.0, -2.0])

    def test_beta_combine(self):
        np.testing.assert_array_equal(beta_combine([0], [1]), [1, 1])
        np.testing.assert_array_equal(beta_combine([1, 0], [1, 1]), [0, 1, 1, 1])

    def test_beta_combine_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            beta_combine([0, 1], [1])


class TestReliability:
    def test_builtin_is_permutation(self):
        order = load_reliability_sequence()
        assert order.size == 1024
        np.testing.assert_array_equal(np.sort(order), np.arange(1024))

    def test_restricted_order(self):
        np.testing.assert_array_equal(load_reliability_sequence(n=8), [0, 1, 2, 4, 3, 5, 6, 7])

    @pytest.mark.parametrize("text", ["1 2 2", "1 two 3", ""])
    def test_bad_file(self, tmp_path, text):
        path = tmp_path / "order.txt"
        path.write_text(text)
        with pytest.raises(CodeParseError):
            load_reliability_sequence(path)


class TestConstruction:
    def test_small_code(self, polar8):
        assert polar8.active == (3, 5, 6, 7)
        assert polar8.h.shape == (4, 8)
        assert polar8.name == "Polar[8,4]"

    def test_codewords_satisfy_checks(self, polar8, rng):
        for _ in range(10):
            u = rng.integers(0, 2, size=4, dtype=np.uint8)
            c = polar8.encode(u)
            assert not gf2_matmul(c, polar8.h.T).any()
            np.testing.assert_array_equal(polar8.decode_message(c), u)

    def test_full_rate(self):
        code = construct_polar(8, 8)
        assert code.h.shape == (0, 8)

    def test_capacity(self):
        with pytest.raises(CapacityExceeded):
            construct_polar(8, 9)
        with pytest.raises(CapacityExceeded):
            construct_polar(16, 8, crc=CRC11)

    def test_crc(self, rng):
        code = construct_polar(64, 20, crc=CRC11)
        assert code.name == "Polar[64,20]+CRC11"
        assert len(code.active) == 31
        assert code.rate == pytest.approx(20 / 64)
        c = code.encode(rng.integers(0, 2, size=20, dtype=np.uint8))
        assert code.crc_ok(c)
        c ^= polar_transform(np.eye(64, dtype=np.uint8)[code.active[0]])
        assert not code.crc_ok(c)

    def test_custom_order(self):
        code = construct_polar(4, 2, reliability_order=[3, 2, 1, 0])
        assert code.active == (0, 1)
        with pytest.raises(CodeParseError):
            construct_polar(4, 2, reliability_order=[0, 0, 1, 2])

    def test_as_code(self, polar8):
        block = polar8.as_code()
        assert block.k == 4
        frozen = list(polar8.frozen)
        assert not polar_transform(block.codewords())[:, frozen].any()
        assert all(block.is_codeword(polar8.encode(u)) for u in np.eye(4, dtype=np.uint8))


class TestReallocation:
    def test_zero_is_identity(self, polar8):
        assert reallocate_bits(polar8, 0) is polar8

    def test_one_swap(self, polar8):
        moved = reallocate_bits(polar8, 1)
        assert moved.active == (4, 5, 6, 7)
        assert moved.k == polar8.k

    @pytest.mark.parametrize("t", [-1, 5])
    def test_out_of_range(self, polar8, t):
        with pytest.raises(ValueError):
            reallocate_bits(polar8, t)
