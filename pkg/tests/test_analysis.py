"""
Tests for rank counting, the saddlepoint estimate and the truncation CCDFs
"""

import csv
import math

import numpy as np
import pytest

from gcdkit.core.constants import CCDF_COLUMNS, CcdfKind, CcdfMethod
from gcdkit.core.exceptions import ResultsWriteError, TooLarge
from gcdkit.models.analysis import CcdfCurve
from gcdkit.models.channel import ChannelSpec
from gcdkit.services.analysis import (
    ccdf,
    exact_D,
    gamma_true,
    hamming_query_curves,
    saddlepoint_D,
    truncation_bound,
    write_ccdf_csv,
)
from gcdkit.services.channel import receive_llrs

RATE = 42 / 64


def llr_draws(k: int, snr_db: float, count: int, seed: int):
    ch = ChannelSpec.at_snr(snr_db, RATE)
    zeros = np.zeros(k, dtype=np.uint8)
    return [receive_llrs(zeros, ch, np.random.default_rng((seed, t))) for t in range(count)]


class TestExactD:
    def test_all_positive(self):
        result = exact_D(np.array([0.3, 1.0, 2.5]))
        assert result.value == 1
        assert not result.capped

    def test_small_example(self):
        assert exact_D(np.array([-1.0, 2.0])).value == 2

    def test_cap(self):
        result = exact_D(-np.arange(1.0, 9.0), cap=10)
        assert result.value == 10
        assert result.capped

    def test_needs_cap_beyond_guard(self):
        with pytest.raises(TooLarge):
            exact_D(np.ones(31))

    def test_gamma_true(self):
        assert gamma_true(np.array([0.5, -1.0, 1.5, -0.25])) == pytest.approx(1.25)

    def test_non_decreasing_in_true_weight(self, rng):
        r = np.abs(rng.normal(size=10)) + 0.1
        counts = []
        for flips in range(5):
            signed = r.copy()
            signed[:flips] *= -1
            counts.append(exact_D(signed).value)
        assert counts == sorted(counts)


class TestSaddlepoint:
    def test_all_positive_is_exact(self):
        result = saddlepoint_D(np.array([0.5, 1.0, 2.0]))
        assert result.boundary
        assert result.d_estimate == 1.0

    def test_zero_llrs_count_both_ways(self):
        assert saddlepoint_D(np.array([0.0, 1.0, 2.0])).d_estimate == 2.0

    def test_no_positive_llrs(self):
        result = saddlepoint_D(-np.arange(1.0, 6.0))
        assert result.boundary
        assert result.d_estimate == 32.0
        assert saddlepoint_D(np.array([-1.0, 0.0])).d_estimate == exact_D(
            np.array([-1.0, 0.0])
        ).value

    def test_symmetric_pair(self):
        r = np.array([1.3, -1.3])
        result = saddlepoint_D(r)
        assert result.s_hat == pytest.approx(0.0, abs=1e-12)
        assert 0.5 <= result.d_estimate / exact_D(r).value <= 2.0

    def test_root_and_curvature(self):
        for r in llr_draws(16, 4.0, 40, seed=3):
            result = saddlepoint_D(r)
            if result.boundary:
                continue
            assert result.kappa2 > 0
            assert abs(result.kappa1) <= 1e-10 * np.abs(r).sum()

    def test_never_exceeds_pattern_count(self):
        for r in llr_draws(8, -2.0, 30, seed=4):
            assert saddlepoint_D(r).d_estimate <= 2.0**8

    def test_median_agreement(self):
        ratios = []
        for r in llr_draws(16, 4.0, 40, seed=5):
            ratios.append(saddlepoint_D(r).d_estimate / exact_D(r).value)
        assert 0.5 <= float(np.median(ratios)) <= 2.0

    @pytest.mark.slow
    def test_factor_two_agreement(self):
        draws = llr_draws(16, 4.0, 500, seed=6)
        within = 0
        for r in draws:
            ratio = saddlepoint_D(r).d_estimate / exact_D(r).value
            within += 0.5 <= ratio <= 2.0
        assert within >= 0.9 * len(draws)


class TestCcdf:
    def test_endpoints(self):
        ch = ChannelSpec.at_snr(2.0, RATE)
        for kind, method in ((CcdfKind.D, CcdfMethod.EXACT), (CcdfKind.D, CcdfMethod.SADDLEPOINT)):
            curve = ccdf(kind, 12, ch, [0.0, math.inf], trials=50, seed=1, method=method)
            assert curve.probabilities == [1.0, 0.0]
        curve = ccdf(CcdfKind.GAMMA, 12, ch, [-1.0, math.inf], trials=50, seed=1)
        assert curve.probabilities == [1.0, 0.0]
        assert curve.method is None

    def test_non_increasing_and_sorted(self):
        ch = ChannelSpec.at_snr(3.0, RATE)
        curve = ccdf(CcdfKind.D, 16, ch, [100, 1, 10, 1000], trials=100, seed=2)
        assert curve.thresholds == [1.0, 10.0, 100.0, 1000.0]
        assert curve.probabilities == sorted(curve.probabilities, reverse=True)

    def test_reproducible(self):
        ch = ChannelSpec.at_snr(3.0, RATE)
        a = ccdf(CcdfKind.GAMMA, 10, ch, [0.5, 2.0], trials=64, seed=9)
        b = ccdf(CcdfKind.GAMMA, 10, ch, [0.5, 2.0], trials=64, seed=9)
        assert a.probabilities == b.probabilities

    def test_invalid_trials(self):
        with pytest.raises(ValueError):
            ccdf(CcdfKind.D, 4, ChannelSpec.awgn(1.0), [1.0], trials=0, seed=0)

    @pytest.mark.slow
    @pytest.mark.parametrize("snr,expected", [(4.0, 0.10), (5.0, 0.02)])
    def test_rank_anchor_points(self, snr, expected):
        curve = ccdf(
            CcdfKind.D, 42, ChannelSpec.at_snr(snr, RATE), [1e3], trials=10_000, seed=2024
        )
        assert curve.probabilities[0] == pytest.approx(expected, abs=0.03)

    def test_truncation_bound(self):
        curve = CcdfCurve(
            kind=CcdfKind.D,
            method=CcdfMethod.EXACT,
            thresholds=[1.0, 10.0, 100.0],
            probabilities=[0.9, 0.5, 0.1],
            trials=10,
            k=4,
        )
        assert truncation_bound(curve, 50) == 0.5
        assert truncation_bound(curve, 100) == 0.1
        assert truncation_bound(curve, 0.5) == 1.0

    def test_write_csv(self, tmp_path):
        ch = ChannelSpec.at_snr(3.0, RATE)
        curves = [
            ccdf(CcdfKind.GAMMA, 8, ch, [0.0, 1.0, 5.0], trials=20, seed=0, snr=3.0),
            ccdf(CcdfKind.D, 8, ch, [1.0, 10.0], trials=20, seed=0, snr=3.0),
        ]
        path = tmp_path / "ccdf.csv"
        write_ccdf_csv(curves, path)
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert tuple(rows[0].keys()) == CCDF_COLUMNS
        assert len(rows) == 5
        assert rows[0]["method"] == ""
        assert rows[-1]["method"] == "saddlepoint"

    def test_write_csv_failure(self, tmp_path):
        curve = ccdf(CcdfKind.GAMMA, 4, ChannelSpec.awgn(1.0), [1.0], trials=5, seed=0)
        with pytest.raises(ResultsWriteError):
            write_ccdf_csv(curve, tmp_path)


class TestHammingCurves:
    def test_low_noise_limit(self):
        gnd, gcd = hamming_query_curves(1e-9)
        assert gnd == pytest.approx(1.0)
        assert gcd == pytest.approx(1.0)

    def test_gcd_needs_fewer_queries(self):
        gnd, gcd = hamming_query_curves(0.05)
        assert gcd < gnd

    def test_formula(self):
        p = 0.05
        p0 = (1 - p) ** 7 + 7 * p**3 * (1 - p) ** 3 + p**7
        p1 = (1 - p0) / 7
        assert hamming_query_curves(p) == pytest.approx((p0 + 35 * p1, p0 + 17 * p1))

    @pytest.mark.parametrize("p", [0.0, 0.5, -0.1])
    def test_invalid_probability(self, p):
        with pytest.raises(ValueError):
            hamming_query_curves(p)
