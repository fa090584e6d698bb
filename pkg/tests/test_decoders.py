"""
Tests for the block decoders against the exhaustive oracle and closed forms
"""

import math
from itertools import product

import numpy as np
import pytest

from gcdkit.core.config import settings
from gcdkit.core.constants import StopReason
from gcdkit.core.exceptions import DimensionMismatch, ListTooLarge, SearchExhausted, TooLarge
from gcdkit.models.decoding import TruncationConfig
from gcdkit.services.analysis import hamming_query_curves
from gcdkit.services.candidates import CandidateList
from gcdkit.services.channel import hard_decision, soft_weight
from gcdkit.services.codes import random_code, rm_code
from gcdkit.services.decoders import (
    GcdSearch,
    esd_decode,
    gcd_decode,
    gnd_decode,
    parallel_gcd_decode,
    tep_posterior,
)
from gcdkit.services.tepgen import pattern_rank


def brute_force_weights(r, code, L):
    z = hard_decision(r)
    weights = sorted(soft_weight(c ^ z, r) for c in code.codewords())
    return weights[:L]


def same_list(a, b):
    return len(a.codewords) == len(b.codewords) and all(
        np.array_equal(x, y) for x, y in zip(a.codewords, b.codewords)
    )


@pytest.fixture(scope="module")
def corpus():
    """(code, LLRs) pairs over random and RM codes at mixed noise levels"""
    codes = [random_code(n, k, seed=s) for s, (n, k) in enumerate([(16, 8), (20, 10), (24, 12)])]
    codes += [rm_code(4, 1), rm_code(4, 2), rm_code(3, 1)]
    out = []
    rng = np.random.default_rng(99)
    for code in codes:
        for _ in range(12):
            sigma = rng.uniform(0.5, 0.8)
            sent = code.encode(rng.integers(0, 2, size=code.k, dtype=np.uint8))
            y = (1.0 - 2.0 * sent) + sigma * rng.standard_normal(code.n)
            out.append((code, 2.0 * y / sigma**2))
    return out


class TestCandidateList:
    def test_worst_is_infinite_until_full(self):
        clist = CandidateList(2)
        clist.offer(3.0, "a")
        assert clist.worst == math.inf
        clist.offer(1.0, "b")
        assert clist.worst == 3.0
        assert clist.payloads() == ["b", "a"]

    def test_only_strictly_lighter_enters_full_list(self):
        clist = CandidateList(1)
        clist.offer(1.0, "a")
        assert not clist.offer(1.0, "b")
        assert clist.offer(0.5, "c")
        assert clist.payloads() == ["c"]

    def test_zero_capacity(self):
        with pytest.raises(ValueError):
            CandidateList(0)


class TestGcd:
    @pytest.mark.parametrize("L", [1, 2, 4])
    def test_matches_exhaustive_search(self, corpus, L):
        for code, r in corpus:
            gcd = gcd_decode(r, code, L)
            esd = esd_decode(r, code, L)
            assert gcd.weights == pytest.approx(esd.weights, abs=1e-12)
            assert same_list(gcd, esd)
            assert gcd.weights == pytest.approx(brute_force_weights(r, code, L), abs=1e-12)

    def test_output_are_codewords_with_their_weights(self, corpus):
        for code, r in corpus[:10]:
            res = gcd_decode(r, code, 3)
            for c, e, w in zip(res.codewords, res.teps, res.weights):
                assert code.is_codeword(c)
                np.testing.assert_array_equal(c ^ e, hard_decision(r))
                assert soft_weight(e, r) == pytest.approx(w)

    def test_hard_decision_is_codeword(self, rm16):
        c = rm16.codewords()[7]
        r = 3.0 * (1.0 - 2.0 * c)
        res = gcd_decode(r, rm16, 1)
        np.testing.assert_array_equal(res.best, c)
        assert res.queries == 1
        assert res.emissions == 2
        assert res.stop_reason == StopReason.OPTIMAL

    def test_full_rate_code_is_ordered_enumeration(self):
        code = rm_code(2, 2)
        r = np.array([0.5, 1.0, -1.2, 1.9])
        res = gcd_decode(r, code, 5)
        z = hard_decision(r)
        supports = [tuple(np.flatnonzero(c ^ z)) for c in res.codewords]
        assert supports == [(), (0,), (1,), (2,), (0, 1)]

    def test_length_mismatch(self, hamming):
        with pytest.raises(DimensionMismatch):
            gcd_decode(np.ones(6), hamming, 1)

    def test_list_size_must_be_positive(self, hamming):
        with pytest.raises(ValueError):
            gcd_decode(np.ones(7), hamming, 0)


class TestTruncation:
    def test_l_max(self, rm16, noisy_word):
        _, r = noisy_word(rm16, 1.0, seed=4)
        res = gcd_decode(r, rm16, 8, TruncationConfig(l_max=3))
        assert res.queries == 3
        assert res.stop_reason == StopReason.L_MAX

    def test_tau_s(self, rm16, noisy_word):
        _, r = noisy_word(rm16, 1.0, seed=5)
        res = gcd_decode(r, rm16, 2, TruncationConfig(tau_s=1e-9))
        assert res.queries == 1
        assert res.stop_reason == StopReason.TAU_S

    def test_tau_p(self, rm16, noisy_word):
        _, r = noisy_word(rm16, 1.0, seed=6)
        res = gcd_decode(r, rm16, 4, TruncationConfig(tau_p=1 - 1e-12))
        assert res.queries == 1
        assert res.stop_reason == StopReason.TAU_P
        assert res.posterior_mass > 0

    def test_tau_p_accumulates_posterior(self, hamming, noisy_word):
        _, r = noisy_word(hamming, 2.0, seed=8)
        res = gcd_decode(r, hamming, 16, TruncationConfig(tau_p=1e-12))
        # the posteriors of all 16 partial patterns sum to one
        assert res.queries >= 15
        assert res.posterior_mass == pytest.approx(1.0, abs=1e-9)

    def test_truncated_list_is_prefix_quality(self, rm16, noisy_word):
        _, r = noisy_word(rm16, 2.0, seed=9)
        full = gcd_decode(r, rm16, 1)
        cut = gcd_decode(r, rm16, 1, TruncationConfig(l_max=2))
        assert cut.weights[0] >= full.weights[0]

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            TruncationConfig(tau_p=1.5)
        with pytest.raises(ValueError):
            TruncationConfig(l_max=0)


class TestGenie:
    def test_stops_at_true_pattern(self, rm16, noisy_word):
        for seed in range(10):
            sent, r = noisy_word(rm16, 1.0, seed=seed)
            res = gcd_decode(r, rm16, 1 << rm16.k, transmitted=sent, genie_stop=True)
            assert res.stop_reason == StopReason.GENIE
            assert res.true_rank == res.queries

            search = GcdSearch(r, rm16)
            e_true = rm16.sys.permute(search.z ^ sent)[search.red :]
            assert res.true_rank == pattern_rank(search.r_p, e_true)

    def test_true_rank_without_stopping(self, rm16, noisy_word):
        sent, r = noisy_word(rm16, 3.0, seed=2)
        res = gcd_decode(r, rm16, 1, transmitted=sent)
        assert res.stop_reason != StopReason.GENIE
        if res.contains(sent):
            assert res.true_rank is not None


class TestParallel:
    @pytest.mark.parametrize("delta_bits", [0, 1, 2, 3, 4])
    def test_matches_sequential(self, corpus, delta_bits):
        for code, r in corpus:
            for L in (1, 3):
                seq = gcd_decode(r, code, L)
                par = parallel_gcd_decode(r, code, L, delta_bits)
                assert par.weights == pytest.approx(seq.weights, abs=1e-12)
                assert same_list(par, seq)

    @pytest.mark.parametrize("delta_bits", [1, 2, 3, 4])
    @pytest.mark.parametrize(
        "trunc",
        [
            TruncationConfig(l_max=5),
            TruncationConfig(l_max=40),
            TruncationConfig(tau_s=6.0),
            TruncationConfig(tau_p=0.05),
            TruncationConfig(l_max=20, tau_p=0.01, tau_s=12.0),
        ],
        ids=["l_max5", "l_max40", "tau_s", "tau_p", "combined"],
    )
    def test_matches_sequential_under_truncation(self, corpus, delta_bits, trunc):
        for code, r in corpus:
            for L in (1, 4):
                seq = gcd_decode(r, code, L, trunc)
                par = parallel_gcd_decode(r, code, L, delta_bits, trunc)
                assert par.weights == pytest.approx(seq.weights, abs=1e-9)

    def test_l_max_bounds_reencoded_patterns(self, corpus):
        trunc = TruncationConfig(l_max=5)
        for code, r in corpus[:24]:
            seq = gcd_decode(r, code, 4, trunc)
            par = parallel_gcd_decode(r, code, 4, 3, trunc)
            assert seq.queries <= 5
            assert par.queries <= 5

    def test_single_branch_counts(self, corpus):
        for code, r in corpus[:20]:
            seq = gcd_decode(r, code, 2)
            par = parallel_gcd_decode(r, code, 2, 0)
            assert par.queries == seq.queries
            assert par.emissions == seq.emissions

    @pytest.mark.slow
    def test_fewer_generator_emissions(self):
        code = rm_code(6, 3)
        rng = np.random.default_rng(17)
        seq_total = par_total = 0
        for _ in range(5):
            sent = code.encode(rng.integers(0, 2, size=code.k, dtype=np.uint8))
            y = (1.0 - 2.0 * sent) + 0.55 * rng.standard_normal(code.n)
            r = 2.0 * y / 0.55**2
            seq_total += gcd_decode(r, code, 1).emissions
            par_total += parallel_gcd_decode(r, code, 1, 4).emissions
        assert par_total < seq_total

    def test_delta_bits_range(self, hamming):
        with pytest.raises(ValueError):
            parallel_gcd_decode(np.ones(7), hamming, 1, 5)


class TestGnd:
    def test_hard_decision_is_codeword(self, hamming):
        c = hamming.codewords()[3]
        res = gnd_decode(3.0 * (1.0 - 2.0 * c), hamming, 1)
        assert res.queries == 1
        np.testing.assert_array_equal(res.best, c)

    def test_same_codeword_as_gcd(self, corpus):
        for code, r in corpus:
            np.testing.assert_array_equal(gnd_decode(r, code, 1).best, gcd_decode(r, code, 1).best)

    def test_query_dominance(self, corpus):
        for code, r in corpus:
            for L in (1, 2):
                assert gcd_decode(r, code, L).queries <= gnd_decode(r, code, L).queries

    def test_search_exhausted_keeps_partial_result(self, hamming):
        r = np.ones(7)
        r[0] = -0.5
        with pytest.raises(SearchExhausted) as info:
            gnd_decode(r, hamming, 1, l_max=1)
        assert info.value.result.queries == 1
        assert info.value.result.codewords == []

    def test_list_too_large(self, hamming):
        with pytest.raises(ListTooLarge):
            gnd_decode(np.ones(7), hamming, 17)


class TestHammingClosedForms:
    """Mean query counts on a BSC, averaged exactly over all 128 error patterns"""

    @pytest.mark.parametrize("p", [0.01, 0.05, 0.2])
    def test_exact_means(self, hamming, p):
        magnitude = math.log((1 - p) / p)
        gnd_mean = gcd_mean = 0.0
        for bits in product((0, 1), repeat=7):
            e = np.array(bits, dtype=np.uint8)
            prob = p ** e.sum() * (1 - p) ** (7 - e.sum())
            r = magnitude * (1.0 - 2.0 * e)
            gnd_mean += prob * gnd_decode(r, hamming, 1).queries
            gcd_mean += prob * gcd_decode(r, hamming, 1).queries
        expected_gnd, expected_gcd = hamming_query_curves(p)
        assert gnd_mean == pytest.approx(expected_gnd, rel=1e-9)
        assert gcd_mean == pytest.approx(expected_gcd, rel=1e-9)

    @pytest.mark.slow
    def test_monte_carlo_within_three_sigma(self, hamming):
        from gcdkit.models.channel import ChannelSpec
        from gcdkit.services.channel import receive_llrs

        p, frames = 0.05, 20_000
        ch = ChannelSpec.bsc(p)
        gnd_q = np.empty(frames)
        gcd_q = np.empty(frames)
        for f in range(frames):
            rng = np.random.default_rng((5, f))
            sent = hamming.encode(rng.integers(0, 2, size=4, dtype=np.uint8))
            r = receive_llrs(sent, ch, rng)
            gnd_q[f] = gnd_decode(r, hamming, 1).queries
            gcd_q[f] = gcd_decode(r, hamming, 1).queries
        expected_gnd, expected_gcd = hamming_query_curves(p)
        for q, expected in ((gnd_q, expected_gnd), (gcd_q, expected_gcd)):
            sem = q.std(ddof=1) / math.sqrt(frames)
            assert abs(q.mean() - expected) <= 3 * sem


class TestEsd:
    def test_full_list_is_every_codeword_sorted(self, hamming, noisy_word):
        _, r = noisy_word(hamming, 1.0, seed=1)
        res = esd_decode(r, hamming, 16)
        assert len({c.tobytes() for c in res.codewords}) == 16
        assert res.weights == sorted(res.weights)
        assert res.queries == 16

    def test_ml_codeword(self, rm16, noisy_word):
        _, r = noisy_word(rm16, 0.0, seed=2)
        best = esd_decode(r, rm16, 1).best
        correlations = [float(np.dot(1.0 - 2.0 * c, r)) for c in rm16.codewords()]
        np.testing.assert_array_equal(best, rm16.codewords()[int(np.argmax(correlations))])

    def test_list_too_large(self, hamming):
        with pytest.raises(ListTooLarge):
            esd_decode(np.ones(7), hamming, 17)

    def test_too_large(self, rm16, monkeypatch):
        monkeypatch.setattr(settings, "ESD_MAX_K", 4)
        with pytest.raises(TooLarge):
            esd_decode(np.ones(16), rm16, 1)


class TestPosterior:
    def test_uninformative_bit(self):
        assert tep_posterior(np.array([0]), np.array([0.0])) == pytest.approx(0.5)

    def test_closed_form(self):
        expected = (math.e**2 / (1 + math.e**2)) ** 2
        assert tep_posterior(np.array([0, 0]), np.array([2.0, -2.0])) == pytest.approx(expected)

    def test_normalized(self):
        r_p = np.array([0.3, -1.1, 2.4])
        total = sum(tep_posterior(np.array(bits), r_p) for bits in product((0, 1), repeat=3))
        assert total == pytest.approx(1.0)
