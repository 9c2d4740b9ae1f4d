import math
import unittest

import numpy as np
import pytest

from src.core.models import BoxCountSeries, PointCloud, ProbabilityVector
from src.exceptions import DomainError, InsufficientScales, LengthMismatch
from src.schemas import Estimator
from src.services.dimension import (
    box_counts,
    correlation_dimension,
    correlation_series,
    entropy_series,
    fit_dimension,
    information_dimension,
    similarity_bound,
)


LOG3_LOG2 = math.log(3.0) / math.log(2.0)


def _diagonal(n: int = 10000) -> PointCloud:
    t = np.linspace(0.0, 1.0, n)
    return PointCloud(np.column_stack([t, t]))


def _square(n: int = 100000, seed: int = 0) -> PointCloud:
    return PointCloud(np.random.default_rng(seed).uniform(0.0, 1.0, size=(n, 2)))


def _single_point(n: int = 500) -> PointCloud:
    return PointCloud(np.tile([0.3, -0.2], (n, 1)))


class TestBoxCounting(unittest.TestCase):
    def test_counts_are_monotone(self):
        series = box_counts(_square(20000), 10)
        self.assertEqual(len(series.counts), 10)
        self.assertTrue((np.diff(series.counts) >= 0).all())
        np.testing.assert_allclose(series.epsilons[1:] / series.epsilons[:-1], 0.5)

    def test_line_has_dimension_one(self):
        fit = fit_dimension(box_counts(_diagonal(), 12))
        self.assertEqual(fit.estimator, Estimator.box)
        self.assertAlmostEqual(fit.value, 1.0, delta=0.02)
        self.assertGreater(fit.r_squared, 0.999)

    def test_square_has_dimension_two(self):
        fit = fit_dimension(box_counts(_square(), 12))
        self.assertAlmostEqual(fit.value, 2.0, delta=0.05)

    def test_single_point_is_zero(self):
        fit = fit_dimension(box_counts(_single_point(), 8))
        self.assertEqual(fit.value, 0.0)
        self.assertEqual(fit.r_squared, 1.0)

    def test_too_few_levels(self):
        with self.assertRaises(InsufficientScales):
            box_counts(_square(1000), 2)

    def test_too_few_points(self):
        cloud = PointCloud(np.random.default_rng(1).uniform(size=(5, 2)))
        with self.assertRaises(InsufficientScales):
            fit_dimension(box_counts(cloud, 8))


def test_sierpinski_box_dimension(sierpinski_cloud):
    fit = fit_dimension(box_counts(sierpinski_cloud, 12))
    assert fit.value == pytest.approx(LOG3_LOG2, abs=0.06)
    assert fit.r_squared >= 0.99


def test_box_dimension_translation_and_scale(sierpinski_cloud):
    base = fit_dimension(box_counts(sierpinski_cloud, 12)).value
    shifted = PointCloud(sierpinski_cloud.points + [3.7, -1.2])
    scaled = PointCloud(sierpinski_cloud.points * 10.0)
    assert abs(fit_dimension(box_counts(shifted, 12)).value - base) <= 0.02
    assert abs(fit_dimension(box_counts(scaled, 12)).value - base) <= 0.02


def test_estimators_stay_in_envelope(sierpinski_cloud):
    for fit in (fit_dimension(box_counts(sierpinski_cloud, 12)),
                information_dimension(sierpinski_cloud, 12),
                correlation_dimension(sierpinski_cloud, max_pairs=100_000)):
        assert 0.0 <= fit.value <= 2.1


def test_sierpinski_information_dimension(sierpinski_cloud):
    fit = information_dimension(sierpinski_cloud, 12)
    assert fit.estimator is Estimator.information
    assert fit.value == pytest.approx(LOG3_LOG2, abs=0.08)


def test_sierpinski_correlation_dimension(sierpinski_cloud):
    fit = correlation_dimension(sierpinski_cloud, seed=0)
    assert abs(fit.value - LOG3_LOG2) <= 0.08


class TestInformation(unittest.TestCase):
    def test_square(self):
        self.assertAlmostEqual(information_dimension(_square(), 12).value, 2.0, delta=0.05)

    def test_entropy_grows_with_resolution(self):
        series = entropy_series(_square(20000), 8)
        self.assertTrue((np.diff(series.entropies) > 0).all())

    def test_single_point(self):
        self.assertEqual(information_dimension(_single_point(), 8).value, 0.0)

    def test_needs_hundred_points(self):
        with self.assertRaises(InsufficientScales):
            entropy_series(_diagonal(99), 8)

    def test_needs_three_levels(self):
        with self.assertRaises(InsufficientScales):
            entropy_series(_square(1000), 2)


class TestCorrelation(unittest.TestCase):
    def test_all_pairs_when_they_fit(self):
        series = correlation_series(_diagonal(200), max_pairs=1_000_000)
        self.assertEqual(series.n_pairs, 200 * 199 // 2)

    def test_sampled_pairs(self):
        series = correlation_series(_square(5000), max_pairs=10000, seed=4)
        self.assertEqual(series.n_pairs, 10000)
        # radii run from coarse to fine, so C never increases
        self.assertTrue((np.diff(series.correlations) <= 0).all())

    def test_filled_square(self):
        self.assertAlmostEqual(correlation_dimension(_square(), seed=1).value, 2.0, delta=0.08)

    def test_line(self):
        t = np.random.default_rng(5).uniform(size=3000)
        fit = correlation_dimension(PointCloud(np.column_stack([t, t])))
        self.assertAlmostEqual(fit.value, 1.0, delta=0.1)

    def test_single_point(self):
        self.assertEqual(correlation_dimension(_single_point()).value, 0.0)

    def test_zero_pairs_refused(self):
        with self.assertRaises(DomainError):
            correlation_series(_square(1000), max_pairs=0)

    def test_reproducible(self):
        cloud = _square(3000)
        a = correlation_series(cloud, max_pairs=5000, seed=2)
        b = correlation_series(cloud, max_pairs=5000, seed=2)
        np.testing.assert_array_equal(a.correlations, b.correlations)


class TestFit(unittest.TestCase):
    def test_exact_dyadic_series(self):
        k = np.arange(1, 11)
        fit = fit_dimension(BoxCountSeries(2.0 ** -k, 2 ** k, 1_000_000))
        self.assertAlmostEqual(fit.value, 1.0, places=12)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=12)


class TestSimilarityBound(unittest.TestCase):
    def test_equal_weights_identity(self):
        for n in range(2, 6):
            for s in (0.2, 0.4, 0.6, 0.8):
                value = similarity_bound(ProbabilityVector.uniform(n), [s] * n)
                self.assertAlmostEqual(value, math.log(n) / math.log(1.0 / s), places=9)

    def test_interval_halves(self):
        self.assertAlmostEqual(similarity_bound(ProbabilityVector.uniform(2), [0.5, 0.5]), 1.0, places=12)

    def test_single_map_standard_form(self):
        self.assertEqual(similarity_bound(ProbabilityVector((1.0,)), [0.5]), 0.0)

    def test_sierpinski(self):
        self.assertAlmostEqual(similarity_bound(ProbabilityVector.uniform(3), [0.5] * 3), LOG3_LOG2, places=12)

    def test_literal_form_is_inverted(self):
        value = similarity_bound(ProbabilityVector.uniform(3), [0.5] * 3, literal=True)
        self.assertAlmostEqual(value, 1.0 / LOG3_LOG2, places=12)

    def test_literal_single_map(self):
        with self.assertRaises(DomainError):
            similarity_bound(ProbabilityVector((1.0,)), [0.5], literal=True)

    def test_validation(self):
        with self.assertRaises(LengthMismatch):
            similarity_bound(ProbabilityVector.uniform(2), [0.5])
        with self.assertRaises(DomainError):
            similarity_bound(ProbabilityVector.uniform(2), [0.5, 1.0])


if __name__ == '__main__':
    unittest.main()
