"""Differential geometry of doubly periodic immersions into R^4 = C^2.

Ambient vectors are stored with the component axis first, in the order
``(x1, y1, x2, y2)`` where ``z_k = x_k + i y_k``.  Every routine works on
plain arrays or on :class:`~shrinker_lab.jet.Jet` values, so a surface
depending on a Taylor parameter can be pushed through unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import jet as jt
from . import spectral
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateMetric, NotLagrangian

__all__ = [
    "QuadratureGrid",
    "Derivatives",
    "ImmersedTorus",
    "AnalyticTorus",
    "FourierTorus",
    "FirstFundamentalForm",
    "J",
    "omega",
    "dot",
    "first_fundamental_form",
    "mean_curvature_vector",
    "normal_project",
    "surface_integral",
    "integrate",
    "lagrangian_angle",
    "symplectic_residual",
]


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product periodic trapezoid rule with ``n`` nodes per circle."""

    n: int = 64

    def __post_init__(self):
        if self.n < 8 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 8, got {self.n}")

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.angles
        return np.meshgrid(a, a, indexing="ij")

    @property
    def weight(self) -> float:
        return (2.0 * np.pi / self.n) ** 2


class Derivatives(NamedTuple):
    """Position and first/second partial derivatives, each of shape (4, ...)."""

    x: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x11: np.ndarray
    x12: np.ndarray
    x22: np.ndarray


# -- ambient algebra ------------------------------------------------------


def J(v):
    """Complex structure: ``(x1, y1, x2, y2) -> (-y1, x1, -y2, x2)``."""
    return jt.stack([-v[1], v[0], -v[3], v[2]])


def dot(a, b):
    """Euclidean inner product over the component axis."""
    return (a * b).sum(axis=0)


def omega(a, b):
    """Standard symplectic form ``omega(a, b) = <J a, b>``."""
    return dot(J(a), b)


# -- surfaces -------------------------------------------------------------


class ImmersedTorus:
    """A map from the square torus ``[0, 2pi)^2`` into R^4."""

    backend: str = "abstract"

    def derivatives(self, theta1, theta2) -> Derivatives:
        raise NotImplementedError

    def on_grid(self, grid: QuadratureGrid) -> Derivatives:
        return self.derivatives(*grid.nodes)


class AnalyticTorus(ImmersedTorus):
    """Surface given by a hand-differentiated closure.

    ``evaluator(theta1, theta2)`` must return a :class:`Derivatives`.
    """

    backend = "analytic"

    def __init__(self, evaluator: Callable[..., Derivatives], name: str = ""):
        self._evaluator = evaluator
        self.name = name

    def derivatives(self, theta1, theta2) -> Derivatives:
        return self._evaluator(np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float))

    def __repr__(self):
        return f"AnalyticTorus({self.name!r})"


class FourierTorus(ImmersedTorus):
    """Surface sampled on an ``n x n`` grid, differentiated spectrally.

    ``samples`` has shape ``(4, n, n)`` (array or jet) with axis 1 the first
    angle and axis 2 the second.  Derivatives are exact for band-limited
    samples.  Off-grid evaluation uses trigonometric interpolation.
    """

    backend = "fourier-sampled"

    def __init__(self, samples):
        n1, n2 = samples.shape[-2:]
        if n1 != n2:
            raise ValueError("sampled surfaces must use a square grid")
        self.samples = samples
        self.n = n1
        self._cache: Derivatives | None = None

    @property
    def grid(self) -> QuadratureGrid:
        return QuadratureGrid(self.n)

    def grid_derivatives(self) -> Derivatives:
        if self._cache is None:
            x = self.samples
            x1 = spectral.diff(x, 1, axis=-2)
            x2 = spectral.diff(x, 1, axis=-1)
            self._cache = Derivatives(
                x,
                x1,
                x2,
                spectral.diff(x, 2, axis=-2),
                spectral.diff(x1, 1, axis=-1),
                spectral.diff(x, 2, axis=-1),
            )
        return self._cache

    def on_grid(self, grid: QuadratureGrid) -> Derivatives:
        if grid.n == self.n:
            return self.grid_derivatives()
        t1, t2 = grid.nodes
        return self.derivatives(t1, t2)

    def derivatives(self, theta1, theta2) -> Derivatives:
        t1 = np.asarray(theta1, dtype=float)
        t2 = np.asarray(theta2, dtype=float)
        a = self.grid.angles
        if t1.shape == (self.n, self.n) and np.allclose(t1, a[:, None]) and np.allclose(t2, a[None, :]):
            return self.grid_derivatives()
        if jt.is_jet(self.samples):
            raise NotImplementedError("off-grid evaluation of jet-valued samples")
        d = self.grid_derivatives()
        return Derivatives(*(self._interp(f, t1, t2) for f in d))

    def _interp(self, f: np.ndarray, t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
        k = spectral.wavenumbers(self.n)
        fh = np.fft.fft2(f, axes=(-2, -1)) / self.n**2
        if self.n % 2 == 0:
            fh[..., self.n // 2, :] = 0.0
            fh[..., :, self.n // 2] = 0.0
        e1 = np.exp(1j * np.multiply.outer(t1.ravel(), k))
        e2 = np.exp(1j * np.multiply.outer(t2.ravel(), k))
        out = np.einsum("pm,cmn,pn->cp", e1, fh, e2).real
        return out.reshape((f.shape[0],) + t1.shape)

    def __repr__(self):
        return f"FourierTorus(n={self.n})"


# -- first fundamental form ------------------------------------------------


@dataclass(frozen=True)
class FirstFundamentalForm:
    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray
    det: np.ndarray
    inv11: np.ndarray
    inv12: np.ndarray
    inv22: np.ndarray

    @property
    def area_element(self):
        return jt.sqrt(self.det)


def metric_from(d: Derivatives, tol: Tolerances = DEFAULT_TOLERANCES) -> FirstFundamentalForm:
    g11 = dot(d.x1, d.x1)
    g12 = dot(d.x1, d.x2)
    g22 = dot(d.x2, d.x2)
    det = g11 * g22 - g12 * g12
    det0 = np.asarray(jt.constant_term(det))
    if not np.all(det0 > tol.metric_degeneracy):
        raise DegenerateMetric(f"metric determinant {det0.min():.3e} <= {tol.metric_degeneracy}")
    inv = 1.0 / det
    return FirstFundamentalForm(g11, g12, g22, det, g22 * inv, -g12 * inv, g11 * inv)


def first_fundamental_form(surface: ImmersedTorus, theta, tol: Tolerances = DEFAULT_TOLERANCES) -> FirstFundamentalForm:
    """Induced metric ``g_ij = <d_i X, d_j X>`` with its determinant and inverse."""
    return metric_from(surface.derivatives(*theta), tol)


# -- normal projection and mean curvature ----------------------------------


def normal_part(d: Derivatives, g: FirstFundamentalForm, w):
    """``w - g^{ij} <w, X_i> X_j``."""
    a1 = dot(w, d.x1)
    a2 = dot(w, d.x2)
    c1 = g.inv11 * a1 + g.inv12 * a2
    c2 = g.inv12 * a1 + g.inv22 * a2
    return w - d.x1 * c1 - d.x2 * c2


def normal_project(surface: ImmersedTorus, theta, w, tol: Tolerances = DEFAULT_TOLERANCES):
    """Project the ambient vector(s) ``w`` onto the normal plane at ``theta``."""
    d = surface.derivatives(*theta)
    g = metric_from(d, tol)
    w = np.asarray(w, dtype=float) if not jt.is_jet(w) else w
    if not jt.is_jet(w) and w.ndim == 1:
        w = w.reshape((4,) + (1,) * np.ndim(d.x[0])) + 0.0 * d.x
    return normal_part(d, g, w)


def mean_curvature_from(d: Derivatives, g: FirstFundamentalForm):
    """``H = g^{ij} (X_ij)^perp``."""
    trace = d.x11 * g.inv11 + d.x12 * (2.0 * g.inv12) + d.x22 * g.inv22
    return normal_part(d, g, trace)


def mean_curvature_vector(surface: ImmersedTorus, theta, tol: Tolerances = DEFAULT_TOLERANCES):
    d = surface.derivatives(*theta)
    return mean_curvature_from(d, metric_from(d, tol))


# -- quadrature ------------------------------------------------------------


def _fsum_last2(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    lead = a.shape[:-2]
    flat = a.reshape((-1, a.shape[-2] * a.shape[-1]))
    return np.array([math.fsum(row) for row in flat]).reshape(lead)


def integrate(values, weight: float):
    """Compensated (exactly rounded) sum over the two trailing grid axes."""
    if jt.is_jet(values):
        return jt.Jet(_fsum_last2(values.coeffs) * weight, values.orders)
    out = _fsum_last2(values) * weight
    return float(out) if out.ndim == 0 else out


def surface_integral(surface: ImmersedTorus, f, grid: QuadratureGrid, tol: Tolerances = DEFAULT_TOLERANCES):
    """``sum f * sqrt(det g) * (2pi/N)^2`` over the grid nodes.

    ``f`` is an array (or jet) of grid values, or a callable taking the
    surface :class:`Derivatives` and returning one.
    """
    d = surface.on_grid(grid)
    g = metric_from(d, tol)
    values = f(d) if callable(f) else f
    if not jt.is_jet(values):
        values = np.broadcast_to(np.asarray(values, dtype=float), (grid.n, grid.n))
        if not np.all(np.isfinite(values)):
            raise ValueError("integrand is not finite on every node")
    return integrate(values * g.area_element, grid.weight)


# -- Lagrangian diagnostics --------------------------------------------------


def _holomorphic_volume(a, b):
    """``dz1 ^ dz2`` evaluated on the pair (a, b); returns a complex array."""
    za1 = a[0] + 1j * a[1]
    za2 = a[2] + 1j * a[3]
    zb1 = b[0] + 1j * b[1]
    zb2 = b[2] + 1j * b[3]
    return za1 * zb2 - za2 * zb1


def symplectic_residual(surface: ImmersedTorus, grid: QuadratureGrid) -> float:
    """``max |omega(X_1, X_2)|`` over the grid; zero for Lagrangian surfaces."""
    d = surface.on_grid(grid)
    return float(np.max(np.abs(omega(d.x1, d.x2))))


def lagrangian_angle(surface: ImmersedTorus, theta, tol: Tolerances = DEFAULT_TOLERANCES):
    """Phase of ``dz1 ^ dz2`` on an oriented orthonormal tangent frame, in ``[0, 2pi)``."""
    d = surface.derivatives(*theta)
    g = metric_from(d, tol)
    res = np.abs(omega(d.x1, d.x2)) / np.sqrt(g.det)
    if np.max(res) > tol.lagrangian_residual:
        raise NotLagrangian(f"symplectic residual {np.max(res):.3e}")
    phase = np.angle(_holomorphic_volume(d.x1, d.x2))
    return np.mod(phase, 2.0 * np.pi)
