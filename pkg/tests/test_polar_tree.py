"""
Tests for decoding trees: complexity, pruning, persistence and latency
"""

import numpy as np
import pytest

from gcdkit.core.constants import LeafMode
from gcdkit.core.exceptions import TreeFormatError
from gcdkit.models.channel import ChannelSpec
from gcdkit.models.decoding import TruncationConfig
from gcdkit.models.polar import PolarTree, TreeNode
from gcdkit.services.codes import CRC11, Code
from gcdkit.services.polar import construct_polar
from gcdkit.services.polar_tree import (
    break_even_queries,
    build_full_tree,
    gcd_complexity,
    genie_avg_queries,
    latency_table,
    leaf_time_steps,
    load_tree,
    node_code,
    node_k,
    prune_tree,
    save_tree,
    scl_complexity,
    single_leaf_tree,
    time_steps,
)


@pytest.fixture(scope="module")
def polar16():
    return construct_polar(16, 8)


def write_leaves(path, lines):
    path.write_text("# test tree\n" + "\n".join(lines) + "\n")
    return path


class TestSubcodes:
    def test_node_dimension(self, polar8):
        assert node_k(polar8, 0, 4) == 1
        assert node_k(polar8, 4, 4) == 3
        assert node_k(polar8, 0, 8) == 4

    def test_node_code(self, polar8):
        sub = node_code(polar8, 4, 4)
        assert (sub.n, sub.k) == (4, 3)
        assert node_code(polar8, 0, 2).k == 0


class TestComplexity:
    def test_break_even(self):
        n, k, L = 128, 64, 8
        target = scl_complexity(n, k, L)
        ell = break_even_queries(n, k, L)
        assert ell >= 1
        assert gcd_complexity(n, k, L, ell) >= target
        if ell > 1:
            assert gcd_complexity(n, k, L, ell - 1) < target

    def test_gcd_cost_grows_with_queries(self):
        costs = [gcd_complexity(64, 32, 4, ell) for ell in (1, 2, 8, 64)]
        assert costs == sorted(costs)


class TestLatency:
    @pytest.mark.parametrize("k,expected", [(32, 297), (64, 329), (96, 361)])
    def test_scl_steps(self, k, expected):
        assert time_steps(construct_polar(128, k, crc=CRC11), 8) == expected

    def test_full_tree_matches_scl_count(self, polar8):
        assert time_steps(build_full_tree(polar8, 4), 4) == time_steps(polar8, 4)

    @pytest.mark.parametrize("L", [1, 2, 8])
    def test_full_tree_bit_leaves_are_exhaustive(self, polar16, L):
        leaves = build_full_tree(polar16, L).leaves()
        assert len(leaves) == 16
        assert all(leaf.n_v == 1 and leaf.mode == LeafMode.ESD_LEAF for leaf in leaves)
        assert sum(leaf.k_v for leaf in leaves) == 8

    def test_esd_leaf(self):
        leaf = TreeNode(level=2, leaf_start=0, n_v=4, k_v=2, mode=LeafMode.ESD_LEAF)
        assert leaf_time_steps(leaf, 8) == 3

    def test_single_bit_and_frozen_leaves(self):
        bit = TreeNode(level=3, leaf_start=0, n_v=1, k_v=1, mode=LeafMode.ESD_LEAF)
        frozen = TreeNode(level=1, leaf_start=0, n_v=8, k_v=0, mode=LeafMode.ESD_LEAF)
        assert leaf_time_steps(bit, 8) == 1
        assert leaf_time_steps(frozen, 8) == 0

    def test_gcd_leaf(self):
        leaf = TreeNode(level=0, leaf_start=0, n_v=128, k_v=64, mode=LeafMode.GCD_LEAF)
        assert leaf_time_steps(leaf, 32, l_avg=8) == 10
        with pytest.raises(ValueError):
            leaf_time_steps(leaf, 32)

    def test_two_leaf_tree(self, tmp_path, polar8):
        path = write_leaves(tmp_path / "t.txt", ["0 4 1 esd_leaf 4 -", "4 4 3 esd_leaf 4 -"])
        assert time_steps(load_tree(path, polar8), 4) == 2 + 2 + 4

    def test_table(self):
        code = construct_polar(128, 64, crc=CRC11)
        root = TreeNode(level=0, leaf_start=0, n_v=128, k_v=75, mode=LeafMode.GCD_LEAF, l_avg=8.0)
        tree = PolarTree(code=code, root=root, list_size=8)
        rows = latency_table(lengths=(128,), crc=CRC11, trees={(128, 64): tree}, L=8)
        assert [row["scl"] for row in rows] == [297, 329, 361]
        assert rows[1]["pruned"] == 16
        assert "pruned" not in rows[0]


class TestPersistence:
    def test_single_leaf_round_trip(self, tmp_path, polar16):
        tree = single_leaf_tree(polar16, 4, TruncationConfig(l_max=7))
        tree.design_snr = 2.5
        path = tmp_path / "tree.txt"
        save_tree(tree, path)
        loaded = load_tree(path, polar16)
        (leaf,) = loaded.leaves()
        assert leaf.mode == LeafMode.GCD_LEAF
        assert leaf.trunc.l_max == 7
        assert loaded.list_size == 4
        assert loaded.design_snr == 2.5

    def test_full_tree_round_trip(self, tmp_path, polar8):
        tree = build_full_tree(polar8, 2)
        path = tmp_path / "full.txt"
        save_tree(tree, path)
        loaded = load_tree(path, polar8, L=2)
        spans = [(leaf.leaf_start, leaf.n_v, leaf.k_v) for leaf in loaded.leaves()]
        assert spans == [(leaf.leaf_start, leaf.n_v, leaf.k_v) for leaf in tree.leaves()]
        assert loaded.internal_count() == 7

    @pytest.mark.parametrize(
        "lines",
        [
            ["0 8 4 esd_leaf 4"],
            ["0 8 3 esd_leaf 4 -"],
            ["0 4 1 esd_leaf 4 -"],
            ["2 4 1 esd_leaf 4 -", "0 2 0 esd_leaf 4 -", "6 2 2 esd_leaf 4 -"],
            ["0 8 4 esd_leaf 4 -", "0 4 1 esd_leaf 4 -"],
            ["0 8 4 internal 4 -"],
            ["0 8 4 esd_leaf four -"],
        ],
        ids=["fields", "dimension", "gap", "unaligned", "overlap", "internal", "number"],
    )
    def test_malformed(self, tmp_path, polar8, lines):
        path = write_leaves(tmp_path / "bad.txt", lines)
        with pytest.raises(TreeFormatError):
            load_tree(path, polar8)


class TestGenie:
    def test_noiseless(self, polar16):
        mean = genie_avg_queries(node_code(polar16, 0, 16), ChannelSpec.awgn(1e-3), 4, 5, 0)
        assert mean == 1.0

    def test_rate_zero(self):
        code = Code.from_parity_check(np.eye(4, dtype=np.uint8))
        assert genie_avg_queries(code, ChannelSpec.awgn(1.0), 4, 3, 0) == 1.0

    def test_noisy_mean_is_bounded(self, polar16):
        sub = node_code(polar16, 0, 16)
        mean = genie_avg_queries(sub, ChannelSpec.at_snr(0.0, 0.5), 2, 30, 1)
        assert 1.0 <= mean <= 2**sub.k

    def test_needs_a_source(self, polar16):
        with pytest.raises(ValueError):
            genie_avg_queries(node_code(polar16, 0, 16), None, 4, 3, 0)


class TestPruning:
    @pytest.fixture(scope="class")
    def pruned(self):
        code = construct_polar(16, 8)
        return prune_tree(code, 4, ChannelSpec.at_snr(3.0, code.rate), trials=20, seed=0)

    def test_leaves_tile_the_code(self, pruned):
        position = 0
        for leaf in pruned.leaves():
            assert leaf.leaf_start == position
            position += leaf.n_v
        assert position == 16

    def test_leaf_modes(self, pruned):
        for leaf in pruned.leaves():
            assert (leaf.mode == LeafMode.ESD_LEAF) == (leaf.k_v <= 2 or leaf.n_v == 1)
            if leaf.mode == LeafMode.ESD_LEAF and leaf.n_v > 1:
                assert leaf.k_v <= 2
            if leaf.mode == LeafMode.GCD_LEAF:
                assert leaf.l_avg is not None and leaf.l_avg >= 1

    def test_last_leaf_keeps_one_path_without_crc(self, pruned):
        assert pruned.leaves()[-1].list_size == 1
        assert all(leaf.list_size is None for leaf in pruned.leaves()[:-1])

    def test_crc_keeps_full_list(self):
        code = construct_polar(32, 8, crc=CRC11)
        tree = prune_tree(code, 4, ChannelSpec.at_snr(3.0, code.rate), trials=10, seed=0)
        assert tree.leaves()[-1].list_size is None
