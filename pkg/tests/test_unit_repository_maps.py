import math
import unittest

import numpy as np
import pytest

from src.core.models import Point2
from src.exceptions import DomainError, NonFiniteResult, UnknownMap
from src.repository.maps import (
    REGISTRY,
    catalog,
    estimate_lipschitz,
    eval_map,
    finite_difference_jacobian,
    jacobian_at,
    jacobian_entries,
    lookup,
    make_affine,
    make_similitude,
    render_catalog,
)


UNIT_SQUARE = (-1.0, 1.0, -1.0, 1.0)


class TestRegistry(unittest.TestCase):
    def test_all_ids_registered(self):
        expected = {f"f{i}" for i in range(1, 13)} | {"sier1", "sier2", "sier3", "sier_nl"}
        self.assertEqual(set(REGISTRY), expected)
        self.assertEqual(len(catalog()), 16)

    def test_lookup_unknown(self):
        with self.assertRaises(UnknownMap) as ctx:
            lookup("f13")
        self.assertIn("f13", ctx.exception.detail)

    def test_lookup_returns_same_descriptor(self):
        self.assertIs(lookup("f4"), lookup("f4"))

    def test_sierpinski_maps_are_affine(self):
        for map_id in ("sier1", "sier2", "sier3"):
            self.assertTrue(lookup(map_id).is_affine)
        self.assertFalse(lookup("sier_nl").is_affine)

    def test_render_catalog(self):
        text = render_catalog()
        self.assertTrue(text.startswith("# Map catalog"))
        for map_id in REGISTRY:
            self.assertIn(f"| {map_id} |", text)


class TestEvaluation(unittest.TestCase):
    def test_sierpinski_vertices(self):
        self.assertEqual(eval_map(lookup("sier1"), (1.0, 1.0)), Point2(0.5, 0.5))
        self.assertEqual(eval_map(lookup("sier2"), (0.0, 0.0)), Point2(0.5, 0.0))
        p = eval_map(lookup("sier3"), (0.0, 0.0))
        self.assertAlmostEqual(p.x, 0.25)
        self.assertAlmostEqual(p.y, math.sqrt(3.0) / 4.0)

    def test_closed_forms(self):
        x, y = 0.3, -0.7
        self.assertAlmostEqual(eval_map(lookup("f1"), (x, y)).y, 0.6 * y * y - 0.4)
        self.assertAlmostEqual(eval_map(lookup("f3"), (x, y)).x, 0.9 * math.sin(y) + 0.1 * x)
        self.assertAlmostEqual(eval_map(lookup("f6"), (x, y)).y, 0.9 * math.tanh(x - y))
        self.assertAlmostEqual(eval_map(lookup("f8"), (x, y)).x, math.sin(x * y) - math.cos(y))
        self.assertAlmostEqual(eval_map(lookup("f12"), (x, y)).y, 0.9 * math.sin(y) * math.cos(x))
        p = eval_map(lookup("sier_nl"), (x, y))
        self.assertAlmostEqual(p.x, math.sin(math.pi * x) * y)
        self.assertAlmostEqual(p.y, math.cos(math.pi * y) * x)

    def test_reference_values(self):
        self.assertEqual(eval_map(lookup("f8"), (0.0, 0.0)), Point2(-1.0, 0.0))
        p = eval_map(lookup("sier_nl"), (0.5, 1.0))
        self.assertAlmostEqual(p.x, 1.0, places=15)
        self.assertAlmostEqual(p.y, -0.5, places=15)

    def test_sier_nl_jacobian(self):
        np.testing.assert_allclose(tuple(jacobian_at(lookup("sier_nl"), (0.5, 1.0))), [0.0, 1.0, -1.0, 0.0], atol=1e-12)

    def test_f11_slope_at_origin(self):
        self.assertAlmostEqual(jacobian_at(lookup("f11"), (0.0, 0.0)).a11, 2.7, places=12)

    def test_non_finite_is_refused(self):
        with self.assertRaises(NonFiniteResult):
            eval_map(lookup("f7"), (1000.0, 0.0))


@pytest.mark.parametrize("map_id", sorted(REGISTRY))
def test_analytic_jacobian_matches_finite_differences(map_id):
    m = lookup(map_id)
    x, y = np.random.default_rng(3).uniform(-2.0, 2.0, size=(2, 100))
    analytic = np.column_stack(np.broadcast_arrays(*jacobian_entries(m, x, y)))
    numeric = np.column_stack(finite_difference_jacobian(m, x, y))
    # atol only guards entries that vanish analytically
    np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-8)


class TestLipschitz(unittest.TestCase):
    def test_sierpinski_exact_half(self):
        for map_id in ("sier1", "sier2", "sier3"):
            self.assertAlmostEqual(estimate_lipschitz(lookup(map_id), UNIT_SQUARE, 1000, 0), 0.5, delta=1e-12)

    def test_similitude_ratio(self):
        m = make_similitude("rot", 0.3, angle=1.1, offset=(2.0, -1.0))
        self.assertAlmostEqual(estimate_lipschitz(m, UNIT_SQUARE, 10, 0), 0.3, delta=1e-12)

    def test_affine_spectral_norm(self):
        m = make_affine("shear", ((1.0, 1.0), (0.0, 1.0)))
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        self.assertAlmostEqual(estimate_lipschitz(m, UNIT_SQUARE, 10, 0), golden, places=12)

    def test_nonlinear_is_lower_bound_of_sup_norm(self):
        # sup of |J| of f12 over the window is 0.9 at the origin
        estimate = estimate_lipschitz(lookup("f12"), UNIT_SQUARE, 5000, 1)
        self.assertLessEqual(estimate, 0.9 + 1e-9)
        self.assertGreater(estimate, 0.8)

    def test_deterministic_in_seed(self):
        m = lookup("f4")
        self.assertEqual(estimate_lipschitz(m, UNIT_SQUARE, 500, 9), estimate_lipschitz(m, UNIT_SQUARE, 500, 9))

    def test_rejects_bad_arguments(self):
        with self.assertRaises(DomainError):
            estimate_lipschitz(lookup("f1"), UNIT_SQUARE, 0, 0)
        with self.assertRaises(DomainError):
            estimate_lipschitz(lookup("f1"), (1.0, 1.0, 0.0, 1.0), 10, 0)


if __name__ == '__main__':
    unittest.main()
