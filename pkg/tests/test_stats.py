import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from pixelplate.stats import (
    Histogram,
    cdf_from_histogram,
    empirical_histogram,
    gaussian_pdf,
    histogram_to_csv,
    joint_histogram,
    skewness,
    summary,
    summary_to_csv,
)

finite_floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestGaussianPdf:
    def test_standard_normal_peak(self):
        assert gaussian_pdf(0.0, 0.0, 1.0) == pytest.approx(0.3989423, abs=1e-7)

    def test_one_sigma_value_scales_inversely_with_sigma(self):
        for mu, sigma in [(0.0, 1.0), (2.82, 1.17), (-9.4, 2.5)]:
            assert gaussian_pdf(mu + sigma, mu, sigma) == pytest.approx(0.2419707 / sigma, rel=1e-6)

    def test_integrates_to_one(self):
        mu, sigma = 2.82, 1.17
        total, _ = integrate.quad(lambda x: gaussian_pdf(x, mu, sigma), mu - 8 * sigma, mu + 8 * sigma)
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_symmetric_about_mu(self):
        for t in np.linspace(0, 5, 11):
            assert gaussian_pdf(1.5 + t, 1.5, 0.7) == pytest.approx(gaussian_pdf(1.5 - t, 1.5, 0.7), rel=1e-12)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_nonpositive_sigma_rejected(self, sigma):
        with pytest.raises(ValueError):
            gaussian_pdf(0.0, 0.0, sigma)

    def test_vectorized_input(self):
        out = gaussian_pdf(np.array([0.0, 1.0]), 0.0, 1.0)
        assert out.shape == (2,)


class TestSkewness:
    def test_symmetric_sample_is_zero(self):
        assert skewness([-1.0, 0.0, 1.0]) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed_value(self):
        # mean 1/4; m3 = 3/32; m2 = 3/16; s = (3/32) / (3/16)^1.5 = 2/sqrt(3)
        assert skewness([0.0, 0.0, 0.0, 1.0]) == pytest.approx(2.0 / math.sqrt(3.0), abs=1e-9)
        assert skewness([0.0, 0.0, 0.0, 1.0]) == pytest.approx(1.1547, abs=1e-4)

    def test_negation_antisymmetry(self):
        rng = np.random.default_rng(3)
        x = rng.lognormal(size=200)
        assert skewness(-x) == pytest.approx(-skewness(x), rel=1e-12)

    @settings(max_examples=60, deadline=None, derandomize=True)
    @given(
        st.lists(finite_floats, min_size=3, max_size=40),
        st.floats(0.1, 100.0),
        st.floats(-1e3, 1e3),
    )
    def test_affine_invariance(self, xs, a, b):
        x = np.asarray(xs)
        if np.var(x) < 1e-6 or np.abs(x).max() > 1e4:
            return  # keep conditioning sane; degenerate samples are rejected anyway
        assert skewness(a * x + b) == pytest.approx(skewness(x), rel=1e-6, abs=1e-9)

    def test_degenerate_samples_rejected(self):
        with pytest.raises(ValueError):
            skewness([1.0])
        with pytest.raises(ValueError):
            skewness([2.0, 2.0, 2.0])


class TestSummary:
    def test_hand_computed_four_numbers(self):
        s = summary([1.0, 2.0, 3.0, 4.0])
        assert s.mean == pytest.approx(2.5)
        assert s.median == pytest.approx(2.5)
        assert s.std == pytest.approx(math.sqrt(1.25), rel=1e-12)

    def test_translation_moves_mean_not_skew(self):
        rng = np.random.default_rng(7)
        x = rng.exponential(size=500)
        a, b = summary(x), summary(x + 10.0)
        assert b.mean == pytest.approx(a.mean + 10.0, rel=1e-9)
        assert b.skew == pytest.approx(a.skew, rel=1e-9)

    def test_median_even_n_averages_central_pair(self):
        assert summary([1.0, 2.0, 10.0, 20.0]).median == pytest.approx(6.0)

    def test_mode_is_center_of_fullest_bin(self):
        x = [0.0, 1.0, 1.1, 1.2, 4.0]
        s = summary(x, mode_bins=4)  # bins [0,1),[1,2),[2,3),[3,4]; fullest is [1,2)
        assert s.mode == pytest.approx(1.5)

    def test_mode_tie_takes_lowest_bin(self):
        x = [0.0, 0.5, 3.5, 4.0]
        s = summary(x, mode_bins=4)  # bins [0,1) and [3,4] both hold 2
        assert s.mode == pytest.approx(0.5)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            summary([1.0, 1.0])
        with pytest.raises(ValueError):
            summary([1.0, 2.0], mode_bins=0)


class TestEmpiricalHistogram:
    def test_two_bins_split_evenly(self):
        h = empirical_histogram([0.0, 1.0, 2.0, 3.0], bins=2)
        assert h.counts.tolist() == [2.0, 2.0]
        assert h.bin_edges.tolist() == [0.0, 1.5, 3.0]

    def test_rightmost_bin_closed(self):
        h = empirical_histogram([0.0, 1.0, 2.0], bins=2)
        assert h.counts.tolist() == [1.0, 2.0]  # 2.0 lands in the last bin

    def test_normalized_integrates_to_one(self):
        rng = np.random.default_rng(11)
        h = empirical_histogram(rng.normal(size=500), bins=13, normalized=True)
        assert float(np.sum(h.counts * h.bin_widths)) == pytest.approx(1.0, abs=1e-9)

    def test_uniform_draw_has_flat_density(self):
        rng = np.random.default_rng(5)
        h = empirical_histogram(rng.uniform(1.0, 5.0, 10000), bins=20, normalized=True)
        assert (np.abs(h.counts - 0.25) <= 0.2 * 0.25).all()

    def test_count_conservation(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=137)
        for bins in (1, 3, 10):
            assert empirical_histogram(x, bins=bins).counts.sum() == 137

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            empirical_histogram([], bins=2)
        with pytest.raises(ValueError):
            empirical_histogram([1.0], bins=0)


class TestCdf:
    def test_running_sum(self):
        h = Histogram([0.0, 1.0, 2.0], [2.0, 2.0])
        assert cdf_from_histogram(h).counts.tolist() == [2.0, 4.0]

    def test_normalized_cdf_ends_at_one(self):
        rng = np.random.default_rng(9)
        h = empirical_histogram(rng.normal(size=321), bins=17, normalized=True)
        cdf = cdf_from_histogram(h)
        assert cdf.counts[-1] == pytest.approx(1.0, abs=1e-9)

    def test_unnormalized_cdf_ends_at_n(self):
        h = empirical_histogram(np.arange(25.0), bins=7)
        assert cdf_from_histogram(h).counts[-1] == 25.0

    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=30))
    def test_cdf_non_decreasing(self, counts):
        h = Histogram(np.arange(len(counts) + 1, dtype=float), counts)
        assert (np.diff(cdf_from_histogram(h).counts) >= 0).all()


class TestJointHistogram:
    def test_single_point(self):
        jh = joint_histogram([(2.0, -9.0)], 3, 3)
        assert jh.total() == 1
        assert jh.counts.max() == 1

    def test_marginal_matches_1d_histogram(self):
        rng = np.random.default_rng(21)
        f = rng.uniform(1, 5, 400)
        s = rng.uniform(-15, -2, 400)
        jh = joint_histogram(list(zip(f, s)), 8, 6)
        marginal = jh.counts.sum(axis=1)
        counts_1d, _ = np.histogram(f, bins=jh.f_edges)
        assert marginal.tolist() == counts_1d.astype(float).tolist()

    def test_count_conservation_1000_points(self):
        rng = np.random.default_rng(4)
        pts = list(zip(rng.uniform(1, 5, 1000), rng.uniform(-15, -2, 1000)))
        assert joint_histogram(pts, 25, 25).total() == 1000

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            joint_histogram([], 2, 2)
        with pytest.raises(ValueError):
            joint_histogram([(1.0, 2.0)], 0, 2)


class TestCsvEmission:
    def test_histogram_csv_round_trips_counts(self):
        h = empirical_histogram([0.0, 1.0, 2.0, 3.0], bins=2)
        text = histogram_to_csv(h)
        lines = text.strip().split("\n")
        assert lines[0] == "bin_lo,bin_hi,count"
        assert len(lines) == 3
        assert [float(l.split(",")[2]) for l in lines[1:]] == [2.0, 2.0]

    def test_summary_csv_contains_named_rows(self):
        s = summary([1.0, 2.0, 3.0, 5.0])
        text = summary_to_csv({"f_res_ghz": s, "s21_db": s})
        lines = text.strip().split("\n")
        assert lines[0] == "target,mean,std,skew,median,mode"
        assert lines[1].startswith("f_res_ghz,") and lines[2].startswith("s21_db,")
