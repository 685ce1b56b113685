import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinker_lab import jet as jt
from shrinker_lab import shrinker, spectral
from shrinker_lab.errors import DegenerateMetric, FitIllConditioned
from shrinker_lab.families import NormalField, generator_field, inner, l2_norm, normal_laplacian
from shrinker_lab.geometry import QuadratureGrid
from shrinker_lab.shrinker import (
    ProjectionBasis,
    kernel_field,
    linearization_check,
    linearized_operator,
    no_nearby_kernel_shrinker_probe,
    obstruction_cubic,
    obstruction_cubic_jet,
    predicted_cubic,
    project_span,
    second_order_correction,
    shrinker_residual,
)


def zero_field(grid):
    z = np.zeros((grid.n, grid.n))
    return NormalField(z, z.copy())


def random_band_field(rng, grid, modes=6, amplitude=1.0):
    def band(x):
        return spectral.band_limit(x, modes)

    return NormalField(band(rng.normal(size=(grid.n, grid.n))), band(rng.normal(size=(grid.n, grid.n)))) * amplitude


def test_clifford_is_a_zero(grid):
    assert shrinker_residual(zero_field(grid)).sup() <= 1e-10


def test_residual_of_kernel_graph_matches_expansion(grid):
    s = 0.05
    a, b = grid.nodes
    S = shrinker_residual(generator_field("VA", grid) * s)
    common = (2 * s**2 * (1 + 5 * np.cos(2 * a + 2 * b)) - 19 * s**3 * np.cos(3 * a + 3 * b)) / 8
    va = generator_field("VA", grid)
    ref = NormalField(common, common.copy()) + va * (s**3 / 8)
    assert l2_norm(S - ref) < 10 * s**4 * 4 * math.pi


def test_non_immersed_graph_raises(grid):
    ones = np.ones((grid.n, grid.n))
    # JX_1 + JX_2 = -X, so this graph collapses to the origin
    with pytest.raises(DegenerateMetric):
        shrinker_residual(NormalField(ones, ones.copy()))


@pytest.mark.parametrize("label,names", [("Y", shrinker.GAUGE_NAMES), ("K", shrinker.KERNEL_NAMES)])
def test_orthonormalized_representatives(grid, label, names):
    basis = ProjectionBasis.named(label, grid)
    assert len(basis.fields) == 4
    np.testing.assert_allclose(basis.orthonormal_gram(), np.eye(4), atol=1e-12)


def test_unknown_basis():
    with pytest.raises(ValueError):
        ProjectionBasis.named("Z")


def test_projection_examples(grid):
    Y = ProjectionBasis.named("Y", grid)
    K = ProjectionBasis.named("K", grid)
    c, _ = project_span(generator_field("Y1", grid), Y)
    np.testing.assert_allclose(c, [1, 0, 0, 0], atol=1e-14)
    c, f = project_span(generator_field("VA", grid), Y)
    np.testing.assert_allclose(c, 0, atol=1e-14)
    assert f.sup() < 1e-14
    W = generator_field("VB", grid) * 2 + generator_field("VC", grid) * 3
    c, _ = project_span(W, K)
    np.testing.assert_allclose(c, [0, 2, 3, 0], atol=1e-14)


def test_projection_idempotent_and_orthogonal(grid, rng):
    for label in ("Y", "K"):
        basis = ProjectionBasis.named(label, grid)
        W = random_band_field(rng, grid, modes=3)
        _, P = project_span(W, basis)
        _, PP = project_span(P, basis)
        assert (PP - P).sup() < 1e-12
        for b in basis.fields:
            assert abs(inner(W - P, b)) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_linearized_operator_self_adjoint(seed):
    rng = np.random.default_rng(seed)
    g = QuadratureGrid(32)
    V, W = random_band_field(rng, g), random_band_field(rng, g)
    lhs = inner(linearized_operator(V), W)
    rhs = inner(V, linearized_operator(W))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 31), st.integers(0, 31))
def test_residual_equivariant_under_torus_shifts(seed, k1, k2):
    rng = np.random.default_rng(seed)
    g = QuadratureGrid(32)
    V = random_band_field(rng, g, modes=4, amplitude=0.01)
    shifted_first = shrinker_residual(V.shifted(k1, k2))
    shifted_after = shrinker_residual(V).shifted(k1, k2)
    assert (shifted_first - shifted_after).sup() <= 1e-10


@pytest.mark.parametrize("name,mu", [("U2", 0.0), ("U1", 0.0), ("VA", 1.0), ("VC", 1.0), ("Y1", 1.0)])
def test_linearization_sign(grid, name, mu):
    eps = 1e-3
    V = generator_field(name, grid)
    slope = (shrinker_residual(V * eps) - shrinker_residual(V * -eps)) * (0.5 / eps)
    assert (slope - V * (mu - 1.0)).sup() < 1e-4


def test_linearization_cos_direction(grid):
    a, _ = grid.nodes
    V = NormalField(np.cos(a), np.zeros_like(a))
    assert linearization_check(V, 1e-3) <= 1e-5


def test_linearization_u2(grid):
    assert linearization_check(generator_field("U2", grid), 1e-3) <= 1e-5


@pytest.mark.parametrize("name", ["VA", "U2", "T10"])
def test_linearization_error_is_quadratic(grid, name):
    V = generator_field(name, grid)
    coarse = linearization_check(V, 1e-2)
    fine = linearization_check(V, 1e-3)
    assert 80 < coarse / fine < 120


def test_kernel_graph_cubic_term_sets_linearization_error(grid):
    # the h^2 error for V_A is the cubic part of S(hV_A), whose norm is known in closed form
    va = generator_field("VA", grid)
    h = 1e-3
    a, b = grid.nodes
    cubic = NormalField(-19 / 8 * np.cos(3 * a + 3 * b), -19 / 8 * np.cos(3 * a + 3 * b)) + va * (1 / 8)
    assert linearization_check(va, h) == pytest.approx(h * h * l2_norm(cubic), rel=1e-2)


def test_predicted_cubic_closed_form():
    np.testing.assert_allclose(predicted_cubic([1, 0, 0, 0]), [1 / 8, 0, 0, 0])
    np.testing.assert_allclose(predicted_cubic([1, 0, 1, 0]), [19 / 8, 0, 19 / 8, 0])
    np.testing.assert_allclose(predicted_cubic([0, 0, 1, 0]), [0, 0, 1 / 8, 0])


@pytest.mark.parametrize("k", [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (1, 0, 1, 0), (0.5, -0.3, 0.2, 0.7)])
def test_exact_cubic_from_jets(k):
    c = obstruction_cubic_jet(k, QuadratureGrid(32))
    np.testing.assert_allclose(c[3], predicted_cubic(k), atol=1e-11)
    np.testing.assert_allclose(c[:3], 0, atol=1e-12)


@pytest.mark.parametrize("k", [(1, 0, 0, 0), (0, 0, 1, 0), (1, 0, 1, 0), (1, 1, 0, 0), (0.5, -0.3, 0.2, 0.7)])
def test_fitted_cubic(grid, k):
    fit = obstruction_cubic(k, grid=grid)
    expected = predicted_cubic(k)
    assert np.max(np.abs(fit.cubic - expected)) <= 1e-3 * max(np.max(np.abs(expected)), 1 / 8)
    assert np.all(fit.spread < 1e-3)


def test_zero_vector_gives_zero_row(grid):
    fit = obstruction_cubic((0, 0, 0, 0), grid=grid)
    assert np.all(fit.cubic == 0)


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_cubic_homogeneity(grid, t):
    k = np.array([0.4, 0.1, -0.6, 0.3])
    base = obstruction_cubic(k, grid=grid).cubic
    scaled = obstruction_cubic(t * k, grid=grid).cubic
    assert np.max(np.abs(scaled - t**3 * base)) <= 1e-6 * np.max(np.abs(t**3 * base))


def test_swap_symmetries(small_grid):
    k = np.array([0.7, -0.2, 0.4, 0.5])
    c = obstruction_cubic_jet(k, small_grid)[3]
    ab = obstruction_cubic_jet(k[[1, 0, 2, 3]], small_grid)[3]
    pairs = obstruction_cubic_jet(k[[2, 3, 0, 1]], small_grid)[3]
    np.testing.assert_allclose(ab, c[[1, 0, 2, 3]], atol=1e-11)
    np.testing.assert_allclose(pairs, c[[2, 3, 0, 1]], atol=1e-11)


def test_ill_conditioned_fit_rejected(grid):
    with pytest.raises(FitIllConditioned):
        obstruction_cubic((1, 0, 0, 0), s_samples=(0.01, 0.0101, 0.0102, 0.0103), grid=grid)


def test_fit_requires_cubic_power(grid):
    with pytest.raises(ValueError):
        obstruction_cubic((1, 0, 0, 0), grid=grid, powers=(1, 5))


@pytest.mark.parametrize("k,slot", [((1, 0, 0, 0), 0), ((0, 1, 0, 0), 1)])
def test_probe_without_correction(grid, k, slot):
    s = 0.05
    r = no_nearby_kernel_shrinker_probe(k, s, with_correction=False, grid=grid)
    assert r.kernel_coefficients[slot] / s**3 == pytest.approx(1 / 8, rel=0.1)
    assert np.max(np.abs(r.gauge_coefficients)) < 1e-12


def corrected_cubic_coefficient(k, grid):
    """s^3 coefficient of pi_K S(sU + W'(s)) by Taylor arithmetic."""
    s = jt.Jet.variable([3])
    U = kernel_field(k, grid)
    W = second_order_correction(1.0, grid)
    V = NormalField(s * U.f1 + (s * s) * W.f1, s * U.f2 + (s * s) * W.f2)
    return shrinker.project_span_jet(shrinker_residual(V), ProjectionBasis.named("K", grid))[3]


@pytest.mark.parametrize("k,slot", [((1, 0, 0, 0), 0), ((0, 1, 0, 0), 1)])
def test_probe_with_correction(grid, k, slot):
    s = 0.05
    r = no_nearby_kernel_shrinker_probe(k, s, with_correction=True, grid=grid)
    exact = corrected_cubic_coefficient(k, grid)[slot]
    assert r.kernel_coefficients[slot] / s**3 == pytest.approx(exact, rel=0.1)
    assert r.delta > 0.1


def test_correction_cancels_quadratic_complement(grid):
    s = 0.05
    plain = no_nearby_kernel_shrinker_probe((1, 0, 0, 0), s, with_correction=False, grid=grid)
    fixed = no_nearby_kernel_shrinker_probe((1, 0, 0, 0), s, with_correction=True, grid=grid)
    assert fixed.complement_norm < 0.05 * plain.complement_norm
