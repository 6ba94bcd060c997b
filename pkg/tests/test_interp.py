import math

import numpy as np
import pytest

from chantwin.interp import (IdwInterpolator, KrigingInterpolator, VariogramModel,
                             fit_variogram)


class TestIdw:
    def test_two_point_hand_computed(self):
        # weights 2.5^-2 = 0.16 and 7.5^-2 = 0.01777..., blend = -62.0 dB
        idw = IdwInterpolator(power=2.0).fit([[0, 0], [10, 0]], [-60.0, -80.0])
        assert idw.predict([[2.5, 0.0]])[0] == pytest.approx(-62.0, abs=1e-9)

    def test_coincident_query_returns_sample(self):
        idw = IdwInterpolator().fit([[0, 0], [10, 0]], [-60.0, -80.0])
        assert idw.predict([[0.0, 0.0]])[0] == -60.0
        assert idw.predict([[10.0, 1e-12]])[0] == -80.0

    def test_equidistant_query_is_mean(self):
        idw = IdwInterpolator().fit([[0, 0], [10, 0]], [-60.0, -80.0])
        assert idw.predict([[5.0, 0.0]])[0] == pytest.approx(-70.0, abs=1e-9)

    def test_convex_combination_bounds(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            pts = rng.uniform(0, 100, (n, 2))
            vals = rng.uniform(-130, -50, n)
            idw = IdwInterpolator(power=float(rng.uniform(0.5, 4))).fit(pts, vals)
            q = rng.uniform(0, 100, (20, 2))
            pred = idw.predict(q)
            assert np.all(pred >= vals.min() - 1e-9)
            assert np.all(pred <= vals.max() + 1e-9)

    def test_translation_invariance(self):
        rng = np.random.default_rng(1)
        pts = rng.uniform(0, 50, (15, 2))
        vals = rng.uniform(-100, -60, 15)
        q = rng.uniform(0, 50, (10, 2))
        shift = np.array([123.0, -45.0])
        a = IdwInterpolator().fit(pts, vals).predict(q)
        b = IdwInterpolator().fit(pts + shift, vals).predict(q + shift)
        assert np.allclose(a, b, atol=1e-9)

    def test_empty_scatter_rejected(self):
        with pytest.raises(ValueError):
            IdwInterpolator().fit(np.empty((0, 2)), [])

    def test_bad_power_rejected(self):
        with pytest.raises(ValueError):
            IdwInterpolator(power=0.0).fit([[0, 0]], [1.0])


class TestKriging:
    def test_single_point_constant(self):
        v = VariogramModel(sill=10.0, range_m=50.0)
        kr = KrigingInterpolator(v).fit([[5.0, 5.0]], [-70.0])
        q = np.array([[0.0, 0.0], [50.0, 80.0], [5.0, 5.0]])
        assert np.allclose(kr.predict(q), -70.0, atol=1e-9)

    def test_two_equidistant_points_mean(self):
        v = VariogramModel(sill=10.0, range_m=50.0)
        kr = KrigingInterpolator(v).fit([[0, 0], [10, 0]], [-60.0, -80.0])
        assert kr.predict([[5.0, 0.0]])[0] == pytest.approx(-70.0, abs=1e-9)
        assert kr.predict([[5.0, 7.0]])[0] == pytest.approx(-70.0, abs=1e-9)

    def test_zero_nugget_exact_at_sites(self):
        rng = np.random.default_rng(2)
        pts = rng.uniform(0, 100, (25, 2))
        vals = rng.uniform(-120, -50, 25)
        kr = KrigingInterpolator().fit(pts, vals)
        assert np.max(np.abs(kr.predict(pts) - vals)) < 1e-6

    def test_matches_independent_dense_solve(self):
        # Independent oracle: assemble and solve the bordered system from scratch.
        rng = np.random.default_rng(3)
        pts = rng.uniform(0, 80, (12, 2))
        vals = rng.uniform(-110, -60, 12)
        sill, rng_m, nugget = 30.0, 40.0, 2.0

        def gamma(h):
            return np.where(h > 0, nugget + sill * (1.0 - np.exp(-h / rng_m)), 0.0)

        q = np.array([17.0, 55.0])
        n = len(pts)
        a = np.zeros((n + 1, n + 1))
        for i in range(n):
            for j in range(n):
                a[i, j] = gamma(math.hypot(*(pts[i] - pts[j])))
        a[n, :n] = 1.0
        a[:n, n] = 1.0
        b = np.zeros(n + 1)
        for i in range(n):
            b[i] = gamma(math.hypot(*(pts[i] - q)))
        b[n] = 1.0
        lam = np.linalg.solve(a, b)[:n]
        expected = float(lam @ vals)

        kr = KrigingInterpolator(VariogramModel(sill, rng_m, nugget)).fit(pts, vals)
        assert kr.predict([q])[0] == pytest.approx(expected, abs=1e-8)

    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(4)
        pts = rng.uniform(0, 100, (30, 2))
        vals = rng.uniform(-120, -50, 30)
        kr = KrigingInterpolator().fit(pts, vals)
        w = kr.weights(rng.uniform(0, 100, (200, 2)))
        assert np.max(np.abs(w.sum(axis=1) - 1.0)) < 1e-9

    def test_translation_invariance(self):
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 60, (18, 2))
        vals = rng.uniform(-100, -60, 18)
        q = rng.uniform(0, 60, (10, 2))
        shift = np.array([-200.0, 77.0])
        v = VariogramModel(sill=20.0, range_m=30.0)
        a = KrigingInterpolator(v).fit(pts, vals).predict(q)
        b = KrigingInterpolator(v).fit(pts + shift, vals).predict(q + shift)
        assert np.allclose(a, b, atol=1e-9)

    def test_duplicate_positions_rejected(self):
        v = VariogramModel(sill=10.0, range_m=50.0)
        with pytest.raises(ValueError, match="singular"):
            KrigingInterpolator(v).fit([[1, 1], [1, 1], [5, 5]], [-60, -61, -70])


class TestVariogram:
    def test_defaults_from_scatter(self):
        # sample variance (ddof=1) of [-5,-5,5,5,0] is exactly 25
        pts = [[0, 0], [120, 0], [0, 120], [120, 120], [60, 60]]
        vals = [-5.0, -5.0, 5.0, 5.0, 0.0]
        v = fit_variogram(pts, vals)
        assert v.sill == pytest.approx(25.0, abs=1e-12)
        assert v.range_m == pytest.approx(math.hypot(120, 120) / 3.0, abs=1e-9)
        assert v.nugget == 0.0
        assert v.kind == "exponential"

    def test_constant_values_rejected(self):
        pts = np.random.default_rng(0).uniform(0, 40, (8, 2))
        with pytest.raises(ValueError, match="explicit"):
            fit_variogram(pts, np.full(8, -70.0))

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError, match=">= 5"):
            fit_variogram([[0, 0], [1, 0], [0, 1], [1, 1]], [1.0, 2.0, 3.0, 4.0])

    def test_invalid_model_params_rejected(self):
        with pytest.raises(ValueError):
            VariogramModel(sill=0.0, range_m=10.0)
        with pytest.raises(ValueError):
            VariogramModel(sill=1.0, range_m=0.0)
        with pytest.raises(ValueError):
            VariogramModel(sill=1.0, range_m=1.0, nugget=-0.1)
