import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from fourieropt.fourier_control import (
    ControlBounds,
    ControlShape,
    DegenerateShape,
    FourierControl,
    NormalizationResult,
    SpanParams,
    apply_span,
    build_control,
    direction_from_angles,
    evaluate_control,
    extend_harmonics,
    normalize_shape,
    shape_extrema,
    shape_value,
)

PI = math.pi


def brute_extrema(direction, omega, t0, tf, n=200_001):
    """Dense sampling of the whole window plus bounded Brent polishing; no period folding."""
    K = len(direction) // 2
    k = np.arange(1, K + 1)

    def f(t):
        t = np.atleast_1d(t)
        wt = np.outer(t, k * omega)
        return np.cos(wt) @ direction[0::2] + np.sin(wt) @ direction[1::2]

    t = np.linspace(t0, tf, n)
    v = f(t)
    dt = t[1] - t[0]
    out = []
    for i, sign in ((np.argmin(v), 1.0), (np.argmax(v), -1.0)):
        a, b = max(t0, t[i] - dt), min(tf, t[i] + dt)
        r = minimize_scalar(lambda s: sign * f(s)[0], bounds=(a, b), method="bounded",
                            options={"xatol": 1e-13})
        out.append(min(sign * v[i], r.fun) * sign)
    return out[0], out[1]


angles_strategy = st.integers(1, 9).flatmap(
    lambda K: st.tuples(
        st.lists(st.floats(0, PI), min_size=2 * K - 2, max_size=2 * K - 2),
        st.floats(0, 2 * PI, exclude_max=True),
    ).map(lambda p: np.array(p[0] + [p[1]]))
)


class TestDirection:
    def test_k1_zero(self):
        np.testing.assert_allclose(direction_from_angles([0.0]), [1.0, 0.0], atol=1e-15)

    def test_k1_half_pi(self):
        np.testing.assert_allclose(direction_from_angles([PI / 2]), [0.0, 1.0], atol=1e-15)

    def test_k2(self):
        np.testing.assert_allclose(direction_from_angles([PI / 2, PI / 2, 0.0]),
                                   [0, 0, 1, 0], atol=1e-12)

    def test_product_formula(self):
        phi = np.array([0.3, 1.1, 2.0, 0.7, 4.0])
        expected = [
            math.cos(0.3),
            math.sin(0.3) * math.cos(1.1),
            math.sin(0.3) * math.sin(1.1) * math.cos(2.0),
            math.sin(0.3) * math.sin(1.1) * math.sin(2.0) * math.cos(0.7),
            math.sin(0.3) * math.sin(1.1) * math.sin(2.0) * math.sin(0.7) * math.cos(4.0),
            math.sin(0.3) * math.sin(1.1) * math.sin(2.0) * math.sin(0.7) * math.sin(4.0),
        ]
        np.testing.assert_allclose(direction_from_angles(phi), expected, atol=1e-15)

    @pytest.mark.parametrize("n", [0, 2, 4])
    def test_even_count_rejected(self, n):
        with pytest.raises(ValueError):
            direction_from_angles(np.zeros(n))

    @settings(max_examples=200, deadline=None)
    @given(angles_strategy)
    def test_unit_norm(self, angles):
        assert abs(np.linalg.norm(direction_from_angles(angles)) - 1.0) <= 1e-12


class TestShapeValue:
    def test_cos_at_zero(self):
        assert shape_value([1.0, 0.0], 1.0, 1, 0.0) == 1.0

    def test_sin_quarter(self):
        assert shape_value([0.0, 1.0], 2.0, 1, PI / 4) == pytest.approx(1.0, abs=1e-15)

    def test_dot_product(self):
        assert shape_value([0.6, 0.8], 1.0, 1, 0.0) == pytest.approx(0.6, abs=1e-15)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            shape_value([1.0, 1.0], 1.0, 1, 0.0)


class TestNormalize:
    def test_full_period_cosine(self):
        r = normalize_shape([1.0, 0.0], 2 * PI / 100, 1, 0.0, 100.0)
        assert r.observed_min == pytest.approx(-1.0, abs=1e-12)
        assert r.observed_max == pytest.approx(1.0, abs=1e-12)
        assert r.beta == pytest.approx(0.5, abs=1e-12)
        assert r.alpha == pytest.approx(1.0, abs=1e-12)

    def test_half_period_sine(self):
        r = normalize_shape([0.0, 1.0], 2 * PI / 100, 1, 0.0, 50.0)
        assert r.observed_min == pytest.approx(0.0, abs=1e-12)
        assert r.observed_max == pytest.approx(1.0, abs=1e-12)
        assert r.beta == pytest.approx(1.0, abs=1e-12)
        assert r.alpha == pytest.approx(0.0, abs=1e-12)

    def test_degenerate(self):
        # sin(w t) over a window of 1e-14 time units barely moves
        with pytest.raises(DegenerateShape):
            normalize_shape([0.0, 1.0], 1.0, 1, 0.0, 1e-14)

    @settings(max_examples=30, deadline=None)
    @given(angles_strategy, st.floats(2 * PI / 100, 10.0), st.floats(1.0, 100.0))
    def test_extrema_match_brute_force(self, angles, omega, tf):
        h = direction_from_angles(angles)
        lo, hi = shape_extrema(h, omega, len(h) // 2, 0.0, tf)
        blo, bhi = brute_extrema(h, omega, 0.0, tf)
        assert lo == pytest.approx(blo, abs=1e-10)
        assert hi == pytest.approx(bhi, abs=1e-10)

    def test_normalized_range_is_unit(self):
        h = direction_from_angles([1.0, 2.0, 3.5])
        r = normalize_shape(h, 0.7, 2, 0.0, 100.0)
        t = np.linspace(0, 100, 50001)
        ubar = r.alpha / 2 + r.beta * shape_value(h, 0.7, 2, t)
        assert ubar.min() >= -1e-9 and ubar.max() <= 1 + 1e-9
        assert ubar.min() == pytest.approx(0.0, abs=1e-4)
        assert ubar.max() == pytest.approx(1.0, abs=1e-4)

    @settings(max_examples=25, deadline=None)
    @given(angles_strategy, st.floats(0.1, 5.0), st.floats(-10, 10), st.floats(0.01, 100))
    def test_shift_and_scale_leave_ubar_unchanged(self, angles, omega, shift, scale):
        # normalising c + s*shape by brute force gives the same u_bar as our normalisation
        h = direction_from_angles(angles)
        K = len(h) // 2
        r = normalize_shape(h, omega, K, 0.0, 100.0)
        blo, bhi = brute_extrema(h, omega, 0.0, 100.0)
        glo, ghi = shift + scale * blo, shift + scale * bhi
        t = np.linspace(0, 100, 997)
        g = shift + scale * shape_value(h, omega, K, t)
        ubar_oracle = (g - glo) / (ghi - glo)
        ubar = r.alpha / 2 + r.beta * shape_value(h, omega, K, t)
        np.testing.assert_allclose(ubar, ubar_oracle, atol=1e-10)


class TestSpan:
    @staticmethod
    def _range(p, q, m=-4.0, M=4.0):
        h = np.array([1.0, 0.0])
        norm = normalize_shape(h, 2 * PI / 100, 1, 0.0, 100.0)
        ctrl = apply_span(h, norm, 2 * PI / 100, SpanParams(p, q), ControlBounds(m, M))
        u = ctrl(np.linspace(0, 100, 100001))
        return u.min(), u.max()

    def test_full_span(self):
        lo, hi = self._range(1.0, 1.0)
        assert lo == pytest.approx(-4.0, abs=1e-9) and hi == pytest.approx(4.0, abs=1e-9)

    def test_half_half(self):
        lo, hi = self._range(0.5, 0.5)
        assert lo == pytest.approx(-2.0, abs=1e-9) and hi == pytest.approx(0.0, abs=1e-9)

    def test_q_to_zero_is_constant_at_max(self):
        lo, hi = self._range(1.0, 1e-12)
        assert lo == pytest.approx(4.0, abs=1e-9) and hi == pytest.approx(4.0, abs=1e-9)

    def test_degenerate_substitutes_midpoint(self):
        norm = NormalizationResult(0.0, 0.0, math.nan, math.nan, degenerate=True)
        ctrl = apply_span(np.array([1.0, 0.0]), norm, 1.0, SpanParams(1.0, 0.5),
                          ControlBounds(-4, 4))
        # u_bar = 0.5 -> m + p(1-q)(M-m) + 0.5 (M-m) p q = -4 + 4 + 2
        assert ctrl(3.0) == pytest.approx(2.0)
        assert np.all(ctrl.a == 0) and np.all(ctrl.b == 0)

    def test_invalid_span(self):
        with pytest.raises(ValueError):
            SpanParams(0.0, 0.5)
        with pytest.raises(ValueError):
            SpanParams(0.5, 1.5)
        with pytest.raises(ValueError):
            ControlBounds(1.0, 1.0)

    @settings(max_examples=60, deadline=None)
    @given(angles_strategy, st.floats(2 * PI / 100, 10.0), st.floats(1e-6, 1.0),
           st.floats(1e-6, 1.0))
    def test_range_containment(self, angles, omega, p, q):
        ctrl = build_control(ControlShape(angles, omega), SpanParams(p, q), ControlBounds(),
                             0.0, 100.0)
        u = ctrl(np.linspace(0, 100, 20001))
        assert u.min() >= -4 - 1e-6 and u.max() <= 4 + 1e-6
        assert u.max() <= -4 + p * 8 + 1e-6
        assert u.min() >= -4 + p * (1 - q) * 8 - 1e-6


class TestEvaluate:
    def test_zero(self):
        ctrl = FourierControl(0.0, [0.0, 0.0], [0.0, 0.0], 1.0)
        assert ctrl(1.234) == 0.0

    def test_a0_half(self):
        assert FourierControl(2.0, [0.0], [0.0], 1.0)(7.0) == 1.0

    def test_cos_pi(self):
        assert FourierControl(0.5, [1.0], [0.0], PI)(1.0) == pytest.approx(0.25 - 1.0)

    def test_scalar_and_vector_paths_agree(self):
        ctrl = FourierControl(0.3, [0.1, -0.7, 0.2], [0.5, 0.05, -0.3], 1.3)
        t = np.linspace(0, 100, 101)
        np.testing.assert_allclose(ctrl(t), [ctrl.value(s) for s in t], atol=1e-13)
        assert evaluate_control(ctrl, 2.0) == pytest.approx(ctrl.value(2.0), abs=1e-14)


class TestExtend:
    def test_plain_branch(self):
        ext = extend_harmonics(ControlShape([PI / 3], 1.0))
        np.testing.assert_allclose(ext.angles, [PI / 3, 0.0, 0.0])
        np.testing.assert_allclose(ext.direction(),
                                   [math.cos(PI / 3), math.sin(PI / 3), 0, 0], atol=1e-15)

    def test_reflection_branch(self):
        ext = extend_harmonics(ControlShape([3 * PI / 2], 1.0))
        np.testing.assert_allclose(ext.angles, [PI / 2, PI, 0.0], atol=1e-15)
        np.testing.assert_allclose(ext.direction(), [0, -1, 0, 0], atol=1e-12)

    def test_keeps_omega_and_leading_angles(self):
        shape = ControlShape([0.4, 2.5, 5.9], 3.3)
        ext = extend_harmonics(shape)
        assert ext.omega == 3.3 and ext.harmonics == 3
        np.testing.assert_array_equal(ext.angles[:2], [0.4, 2.5])
        assert ext.angles[2] == pytest.approx(2 * PI - 5.9)
        assert 0 <= ext.angles[3] <= PI and ext.angles[4] == 0.0

    @settings(max_examples=100, deadline=None)
    @given(angles_strategy, st.floats(0.05, 10.0))
    def test_amplitudes_preserved(self, angles, omega):
        shape = ControlShape(angles, omega)
        ext = extend_harmonics(shape)
        h, he = shape.direction(), ext.direction()
        np.testing.assert_allclose(he[:-2], h, atol=1e-12)
        np.testing.assert_allclose(he[-2:], 0.0, atol=1e-12)
        t = np.random.default_rng(0).uniform(0, 100, 1000)
        np.testing.assert_allclose(shape_value(he, omega, ext.harmonics, t),
                                   shape_value(h, omega, shape.harmonics, t), atol=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(angles_strategy, st.floats(2 * PI / 100, 10.0), st.floats(1e-6, 1.0),
           st.floats(1e-6, 1.0))
    def test_control_preserved(self, angles, omega, p, q):
        shape, span = ControlShape(angles, omega), SpanParams(p, q)
        c0 = build_control(shape, span, ControlBounds(), 0, 100)
        c1 = build_control(extend_harmonics(shape), span, ControlBounds(), 0, 100)
        t = np.linspace(0, 100, 4001)
        np.testing.assert_allclose(c1(t), c0(t), atol=1e-10)


def test_json_round_trip():
    shape = ControlShape([0.1, 0.2, 6.0], 1.5)
    span = SpanParams(0.3, 0.9)
    ctrl = build_control(shape, span, ControlBounds(), 0, 100)
    for obj, cls in ((shape, ControlShape), (span, SpanParams), (ctrl, FourierControl)):
        d = json.loads(json.dumps(obj.to_dict()))
        back = cls.from_dict(d)
        assert json.dumps(back.to_dict()) == json.dumps(obj.to_dict())
    assert set(ctrl.to_dict()) >= {"a0", "a", "b", "omega", "harmonics"}
    assert set(shape.to_dict()) == {"angles", "omega", "harmonics"}
