"""Self-shrinker residual on normal graphs over the Clifford torus.

For a normal field ``V`` the graph ``X_V = X + V`` is a shrinker exactly
when ``H(X_V) + X_V^perp / 2 = 0``.  The residual below is that bracket
projected back onto the Clifford normal frame and negated, so that its
linearization at ``V = 0`` is ``Lap^perp - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet as jt
from . import spectral
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import FitIllConditioned
from .families import (
    NormalField,
    clifford_frame,
    generator_field,
    graph_surface,
    inner,
    l2_norm,
    normal_laplacian,
)
from .geometry import FourierTorus, QuadratureGrid, dot, mean_curvature_from, metric_from, normal_part

KERNEL_NAMES = ("VA", "VB", "VC", "VD")
GAUGE_NAMES = ("Y1", "Y2", "Y3", "Y4")


@dataclass(frozen=True)
class GraphDeformation:
    """The immersion ``X + V``; construction fails if it is not immersed."""

    V: NormalField
    surface: FourierTorus

    @classmethod
    def build(cls, V: NormalField, tol: Tolerances = DEFAULT_TOLERANCES) -> "GraphDeformation":
        surface = graph_surface(V)
        metric_from(surface.grid_derivatives(), tol)
        return cls(V, surface)


def _band(V: NormalField) -> NormalField:
    m = V.n // 4
    return NormalField(spectral.band_limit(V.f1, m), spectral.band_limit(V.f2, m))


def shrinker_residual(V: NormalField, tol: Tolerances = DEFAULT_TOLERANCES, band_limit: bool = True) -> NormalField:
    """``-[H(X+V) + (X+V)^perp / 2]`` in the frame ``{JX_1, JX_2}``.

    ``V`` may carry jet-valued coefficients; the result then has jet
    coefficients too.  With ``band_limit`` the input and output are
    truncated to Fourier modes ``|m|, |n| <= N/4``.

    Raises
    ------
    DegenerateMetric
        If the graph is not immersed.
    """
    if band_limit:
        V = _band(V)
    d = GraphDeformation.build(V, tol).surface.grid_derivatives()
    g = metric_from(d, tol)
    bracket = mean_curvature_from(d, g) + normal_part(d, g, d.x) * 0.5
    n1, n2 = clifford_frame(*V.grid.nodes)
    out = NormalField(dot(bracket, n1) * -0.5, dot(bracket, n2) * -0.5)
    return _band(out) if band_limit else out


# -- projections ---------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionBasis:
    """A named span with its Gram matrix and orthonormalized representatives."""

    label: str
    fields: tuple
    gram: np.ndarray
    orthonormal: tuple

    @classmethod
    def named(cls, label: str, grid: QuadratureGrid = QuadratureGrid()) -> "ProjectionBasis":
        names = {"Y": GAUGE_NAMES, "K": KERNEL_NAMES}.get(label)
        if names is None:
            raise ValueError(f"unknown basis {label!r}; expected 'Y' or 'K'")
        fields = tuple(generator_field(n, grid) for n in names)
        gram = np.array([[inner(a, b) for b in fields] for a in fields])
        # G = L L^T, orthonormal reps e_i = sum_j (L^{-1})_{ij} f_j
        Linv = np.linalg.inv(np.linalg.cholesky(gram))
        ortho = tuple(_combination(fields, row) for row in Linv)
        return cls(label, fields, gram, ortho)

    def orthonormal_gram(self) -> np.ndarray:
        return np.array([[inner(a, b) for b in self.orthonormal] for a in self.orthonormal])


def _combination(fields, coefs) -> NormalField:
    out = fields[0] * float(coefs[0])
    for f, c in zip(fields[1:], coefs[1:]):
        out = out + f * float(c)
    return out


def project_span(W: NormalField, basis: ProjectionBasis) -> tuple[np.ndarray, NormalField]:
    """L^2 projection of ``W``; coefficients are in the original basis."""
    rhs = np.array([inner(W, b) for b in basis.fields])
    coefs = np.linalg.solve(basis.gram, rhs)
    return coefs, _combination(basis.fields, coefs)


def project_span_jet(W: NormalField, basis: ProjectionBasis) -> np.ndarray:
    """Jet version of :func:`project_span`: coefficient array ``(order+1, len(basis))``."""
    rhs = [inner(W, b) for b in basis.fields]
    rhs = np.stack([r.coeffs for r in rhs], axis=-1)
    return np.linalg.solve(basis.gram, rhs.T).T


def gaussian_weighted_inner(v: NormalField, w: NormalField) -> float:
    """``int <v, w> exp(-|X|^2 / 4) vol`` on the Clifford torus."""
    from .geometry import integrate

    ones = np.ones((v.n, v.n))
    x = NormalField(-ones, -ones)
    weight = np.exp(-inner_pointwise(x, x) / 4.0)
    return integrate(inner_pointwise(v, w) * weight * 2.0, v.grid.weight)


def inner_pointwise(v: NormalField, w: NormalField):
    return 2.0 * (v.f1 * w.f1 + v.f2 * w.f2)


# -- linearization ---------------------------------------------------------------


def linearized_operator(V: NormalField) -> NormalField:
    """``(Lap^perp - 1) V``."""
    return normal_laplacian(V) - V


def linearization_check(V: NormalField, h: float = 1e-3, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """L^2 norm of ``(S(hV) - S(-hV)) / 2h - (Lap^perp - 1) V``."""
    slope = (shrinker_residual(V * h, tol) - shrinker_residual(V * (-h), tol)) * (0.5 / h)
    return l2_norm(slope - linearized_operator(V))


# -- cubic obstruction -------------------------------------------------------------


DEFAULT_S_SAMPLES = (-0.08, -0.06, -0.04, -0.02, 0.02, 0.04, 0.06, 0.08)


def kernel_field(k, grid: QuadratureGrid = QuadratureGrid()) -> NormalField:
    """``a V_A + b V_B + c V_C + d V_D``."""
    return _combination([generator_field(n, grid) for n in KERNEL_NAMES], np.asarray(k, dtype=float))


def predicted_cubic(k) -> np.ndarray:
    """Closed-form s^3 coefficients of the kernel projection of ``S(sU)``."""
    a, b, c, d = np.asarray(k, dtype=float)
    p = a * a + b * b
    q = c * c + d * d
    return np.array([(p + 18 * q) * a, (p + 18 * q) * b, (18 * p + q) * c, (18 * p + q) * d]) / 8.0


DEFAULT_ODD_POWERS = (1, 3, 5, 7)


@dataclass(frozen=True)
class ObstructionFit:
    cubic: np.ndarray  # s^3 coefficients on (V_A, V_B, V_C, V_D)
    coefficients: np.ndarray  # (len(powers), 4), all fitted odd coefficients
    powers: tuple
    spread: np.ndarray  # leave-one-out max deviation of the cubic coefficients
    condition: float
    samples: tuple


def _odd_fit(s: np.ndarray, y: np.ndarray, powers, max_condition: float):
    A = np.stack([s**p for p in powers], axis=1)
    scale = np.max(np.abs(A), axis=0)
    cond = float(np.linalg.cond(A / scale))
    if not np.isfinite(cond) or cond > max_condition:
        raise FitIllConditioned(f"design matrix condition {cond:.3e} exceeds {max_condition:.1e}")
    coef, *_ = np.linalg.lstsq(A / scale, y, rcond=None)
    return coef / scale[:, None], cond


def obstruction_cubic(k, s_samples=DEFAULT_S_SAMPLES, grid: QuadratureGrid = QuadratureGrid(),
                      powers=DEFAULT_ODD_POWERS, max_condition: float = 1e6,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> ObstructionFit:
    """Fit ``pi_K S(sU)`` by an odd polynomial per kernel direction.

    The samples are amplitudes: ``s`` is divided by ``|k|`` so that
    ``sU`` has the same size for every ``k``.  The fitted coefficients are
    rescaled back to the parameter ``s`` of ``sU``, which keeps the result
    exactly cubic-homogeneous in ``k``.

    Raises
    ------
    FitIllConditioned
        If the scaled odd Vandermonde matrix has condition number above
        ``max_condition``.
    """
    k = np.asarray(k, dtype=float)
    powers = tuple(int(p) for p in powers)
    if 3 not in powers or any(p % 2 == 0 for p in powers):
        raise ValueError(f"odd powers including 3 required, got {powers}")
    samples = tuple(float(s) for s in s_samples)
    s = np.asarray(samples)
    norm = float(np.linalg.norm(k))
    if norm == 0.0:
        _, cond = _odd_fit(s, np.zeros((len(s), 4)), powers, max_condition)
        z = np.zeros(4)
        return ObstructionFit(z, np.zeros((len(powers), 4)), powers, z, cond, samples)
    basis = ProjectionBasis.named("K", grid)
    U = kernel_field(k / norm, grid)
    y = np.array([project_span(shrinker_residual(U * si, tol), basis)[0] for si in s])
    coef, cond = _odd_fit(s, y, powers, max_condition)
    i3 = powers.index(3)
    loo = []
    for i in range(len(s)):
        keep = np.arange(len(s)) != i
        loo.append(_odd_fit(s[keep], y[keep], powers, max_condition)[0][i3])
    spread = np.max(np.abs(np.array(loo) - coef[i3]), axis=0)
    rescale = np.array([norm**p for p in powers])[:, None]
    return ObstructionFit(coef[i3] * norm**3, coef * rescale, powers, spread * norm**3, cond, samples)


def obstruction_cubic_jet(k, grid: QuadratureGrid = QuadratureGrid(), tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Exact Taylor coefficients ``(0..3, 4)`` of ``pi_K S(sU)`` by truncated Taylor arithmetic."""
    s = jt.Jet.variable([3])
    U = kernel_field(k, grid)
    Vs = NormalField(s * U.f1, s * U.f2)
    return project_span_jet(shrinker_residual(Vs, tol), ProjectionBasis.named("K", grid))


def second_order_correction(s: float, grid: QuadratureGrid = QuadratureGrid()) -> NormalField:
    """``W' = s^2 (3 - 5 cos(2 t1 + 2 t2)) / 12 (JX_1 + JX_2)``."""
    a, b = grid.nodes
    f = s * s * (3.0 - 5.0 * np.cos(2 * (a + b))) / 12.0
    return NormalField(f, f.copy())


@dataclass(frozen=True)
class ProbeResult:
    kernel_coefficients: np.ndarray  # pi_K S on (V_A, V_B, V_C, V_D)
    kernel_norm: float
    complement_norm: float  # |(1 - pi_K) S|
    gauge_coefficients: np.ndarray  # pi_Y S, a diagnostic
    delta: float  # kernel_norm / s^3


def no_nearby_kernel_shrinker_probe(k, s: float, with_correction: bool = True, grid: QuadratureGrid = QuadratureGrid(),
                                    tol: Tolerances = DEFAULT_TOLERANCES) -> ProbeResult:
    """Kernel and complementary parts of ``S(sU + W')``."""
    V = kernel_field(k, grid) * s
    if with_correction:
        V = V + second_order_correction(s, grid)
    S = shrinker_residual(V, tol)
    coefs, proj = project_span(S, ProjectionBasis.named("K", grid))
    gauge, _ = project_span(S, ProjectionBasis.named("Y", grid))
    kn = l2_norm(proj)
    return ProbeResult(coefs, kn, l2_norm(S - proj), gauge, kn / abs(s) ** 3)
