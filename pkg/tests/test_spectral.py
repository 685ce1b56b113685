import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinker_lab import spectral
from shrinker_lab.jet import Jet


def nodes(n):
    return 2 * np.pi * np.arange(n) / n


@pytest.mark.parametrize("n", [16, 32, 64])
def test_derivatives_of_trig_polynomial_exact(n):
    u = nodes(n)
    f = np.sin(3 * u) + 0.5 * np.cos(5 * u)
    np.testing.assert_allclose(spectral.diff(f, 1), 3 * np.cos(3 * u) - 2.5 * np.sin(5 * u), atol=1e-12)
    np.testing.assert_allclose(spectral.diff(f, 2), -9 * np.sin(3 * u) - 12.5 * np.cos(5 * u), atol=1e-11)


def test_analytic_function_spectral_accuracy():
    u = nodes(64)
    f = np.exp(np.sin(u))
    np.testing.assert_allclose(spectral.diff(f), np.cos(u) * f, atol=1e-12)


def test_odd_derivative_is_skew():
    rng = np.random.default_rng(1)
    n = 32
    eye = np.eye(n)
    D = np.stack([spectral.diff(eye[i]) for i in range(n)])
    np.testing.assert_allclose(D, -D.T, atol=1e-12)


def test_two_dimensional_axis():
    u = nodes(16)
    a, b = np.meshgrid(u, u, indexing="ij")
    f = np.sin(a) * np.cos(2 * b)
    np.testing.assert_allclose(spectral.diff(f, 1, axis=-2), np.cos(a) * np.cos(2 * b), atol=1e-13)
    np.testing.assert_allclose(spectral.diff(f, 1, axis=-1), -2 * np.sin(a) * np.sin(2 * b), atol=1e-13)


def test_jet_input_differentiates_each_coefficient():
    u = nodes(32)
    s = Jet.variable([2])
    j = s * np.sin(u) + s * s * np.cos(2 * u)
    d = spectral.diff(j)
    np.testing.assert_allclose(d.coeffs[1], np.cos(u), atol=1e-13)
    np.testing.assert_allclose(d.coeffs[2], -2 * np.sin(2 * u), atol=1e-13)


def test_band_limit_removes_high_modes():
    u = nodes(32)
    a, b = np.meshgrid(u, u, indexing="ij")
    low = np.cos(a + 2 * b)
    f = low + np.sin(9 * a) + np.cos(10 * b)
    np.testing.assert_allclose(spectral.band_limit(f, 8), low, atol=1e-13)


def test_cumulative_integral():
    u = nodes(64)
    f = 0.7 + np.cos(u) + np.sin(2 * u)
    p, mean = spectral.cumulative_integral(f)
    assert mean == pytest.approx(0.7)
    np.testing.assert_allclose(mean * u + p, 0.7 * u + np.sin(u) + (1 - np.cos(2 * u)) / 2, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-2 * np.pi, 4 * np.pi), min_size=1, max_size=20), st.integers(8, 40))
def test_trig_interpolate_reproduces_band_limited(points, n):
    n += n % 2
    u = nodes(n)
    m = n // 2 - 1
    samples = np.stack([np.cos(m * u) + np.sin(u), np.sin(2 * u)], axis=1)
    x = np.asarray(points)
    expected = np.stack([np.cos(m * x) + np.sin(x), np.sin(2 * x)], axis=1)
    np.testing.assert_allclose(spectral.trig_interpolate(samples, x), expected, atol=1e-11)


def test_trig_interpolate_hits_nodes():
    u = nodes(20)
    rng = np.random.default_rng(3)
    samples = rng.normal(size=20)
    np.testing.assert_allclose(spectral.trig_interpolate(samples, u), samples, atol=1e-13)
