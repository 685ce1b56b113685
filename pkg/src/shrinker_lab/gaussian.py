"""Gaussian density functionals: F, entropy, second variation, Taylor jets."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import jet as jt
from .config import DEFAULT_TOLERANCES, Tolerances, worker_count
from .errors import OptimizerDidNotConverge
from .families import (
    GENERATOR_NAMES,
    FamilyId,
    NormalField,
    clifford_frame,
    generator_field,
    inner,
    is_hamiltonian,
    make_surface,
    normal_laplacian,
)
from .geometry import ImmersedTorus, QuadratureGrid, dot, metric_from, surface_integral

CLIFFORD_F = 2.0 * np.pi / np.e
"""``F`` of the Clifford torus at ``(0, 1)``, which is also its entropy."""

CLIFFORD_SEXTIC = -4.0 * np.pi / (9.0 * np.e)
"""Coefficient of ``s^6`` in ``F(X(s), 0, 1)`` for family A."""

CYLINDER_ENTROPY = math.sqrt(2.0 * math.pi / math.e)
"""Entropy of the round shrinking cylinder ``S^1 x R``; recorded, not computed."""


@dataclass(frozen=True)
class SpaceTimeCenter:
    x0: np.ndarray = field(default_factory=lambda: np.zeros(4))
    t0: float = 1.0

    def __post_init__(self):
        if not jt.is_jet(self.t0) and not self.t0 > 0:
            raise ValueError(f"t0 must be positive, got {self.t0}")


def f_functional(surface: ImmersedTorus, center: SpaceTimeCenter = SpaceTimeCenter(), grid: QuadratureGrid = QuadratureGrid(),
                 tol: Tolerances = DEFAULT_TOLERANCES):
    """``(1/4 pi t0) * integral of exp(-|X - x0|^2 / 4 t0)``.

    Works with jet-valued surfaces and jet-valued centers.
    """
    t0 = center.t0
    x0 = center.x0

    def gauss(d):
        diff = d.x - _column(x0, d.x)
        return jt.exp(-dot(diff, diff) / (4.0 * t0)) / (4.0 * np.pi * t0)

    return surface_integral(surface, gauss, grid, tol)


def _column(x0, like):
    """Reshape a 4-vector (array or jet) to broadcast against ``(4, n, n)``."""
    extra = like.ndim - 1
    if jt.is_jet(x0):
        lead = x0.coeffs.shape[: x0.nvar]
        return jt.Jet(x0.coeffs.reshape(lead + (4,) + (1,) * extra), x0.orders)
    return np.asarray(x0, dtype=float).reshape((4,) + (1,) * extra)


# -- entropy -------------------------------------------------------------------


@dataclass(frozen=True)
class EntropyOptions:
    """Multistart quasi-Newton settings over ``(x0, log t0)``."""

    x_range: float = 1.0
    x_points: int = 3
    t_range: tuple = (0.25, 4.0)
    t_points: int = 5
    gtol: float = 1e-10
    max_iter: int = 400
    grad_tol: float = 1e-7

    def starts(self) -> list[np.ndarray]:
        xs = np.linspace(-self.x_range, self.x_range, self.x_points)
        ls = np.linspace(math.log(self.t_range[0]), math.log(self.t_range[1]), self.t_points)
        return [np.array(p) for p in itertools.product(xs, xs, xs, xs, ls)]


@dataclass(frozen=True)
class EntropyResult:
    value: float
    center: SpaceTimeCenter
    gradient_norm: float
    runs: int
    converged_runs: int


class _GaussianObjective:
    """``-F`` and its gradient in ``p = (x0, log t0)`` on frozen surface samples."""

    def __init__(self, surface: ImmersedTorus, grid: QuadratureGrid, tol: Tolerances):
        d = surface.on_grid(grid)
        g = metric_from(d, tol)
        self.x = d.x.reshape(4, -1)
        self.w = (g.area_element * grid.weight).ravel()

    def value_and_grad(self, p):
        x0, t = p[:4], math.exp(p[4])
        diff = self.x - x0[:, None]
        r2 = np.einsum("ij,ij->j", diff, diff)
        e = self.w * np.exp(-r2 / (4.0 * t)) / (4.0 * np.pi * t)
        F = e.sum()
        gx = diff @ e / (2.0 * t)
        gl = (e * (r2 / (4.0 * t) - 1.0)).sum()
        return -F, -np.concatenate([gx, [gl]])

    def exact(self, p) -> float:
        x0, t = p[:4], math.exp(p[4])
        diff = self.x - x0[:, None]
        r2 = np.einsum("ij,ij->j", diff, diff)
        return math.fsum(self.w * np.exp(-r2 / (4.0 * t)) / (4.0 * np.pi * t))


def entropy(surface: ImmersedTorus, opt: EntropyOptions = EntropyOptions(), grid: QuadratureGrid = QuadratureGrid(),
            tol: Tolerances = DEFAULT_TOLERANCES, starts=None) -> EntropyResult:
    """Supremum of ``F`` over space-time centers by multistart BFGS.

    ``starts`` overrides the grid of initial points ``(x0, log t0)``.

    Raises
    ------
    OptimizerDidNotConverge
        If the best local maximum still has gradient norm above ``opt.grad_tol``.
    """
    obj = _GaussianObjective(surface, grid, tol)

    def run(p0):
        res = minimize(obj.value_and_grad, p0, jac=True, method="BFGS",
                       options={"gtol": opt.gtol, "maxiter": opt.max_iter})
        gnorm = float(np.linalg.norm(obj.value_and_grad(res.x)[1]))
        return res.x, gnorm

    starts = opt.starts() if starts is None else [np.asarray(p, dtype=float) for p in starts]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(run, starts))
    scored = [(-obj.exact(p), tuple(np.round(p, 12)), p, gn) for p, gn in results]
    scored.sort(key=lambda r: (r[0], r[1]))
    neg, _, best, gnorm = scored[0]
    if gnorm > opt.grad_tol:
        raise OptimizerDidNotConverge(f"gradient norm {gnorm:.3e} at the best center exceeds {opt.grad_tol}")
    converged = sum(gn <= opt.grad_tol for _, gn in results)
    return EntropyResult(-neg, SpaceTimeCenter(best[:4].copy(), math.exp(best[4])), gnorm, len(starts), converged)


# -- second variation --------------------------------------------------------


@dataclass(frozen=True)
class SecondVariationInput:
    V: NormalField
    xi: np.ndarray = field(default_factory=lambda: np.zeros(4))
    tau: float = 0.0


def constant_normal_part(xi, grid: QuadratureGrid) -> NormalField:
    """Frame coefficients of the normal part of a constant vector on the Clifford torus."""
    n1, n2 = clifford_frame(*grid.nodes)
    col = np.asarray(xi, dtype=float).reshape(4, 1, 1)
    return NormalField(dot(n1, col) * 0.5, dot(n2, col) * 0.5)


def second_variation(data: SecondVariationInput, grid: QuadratureGrid | None = None) -> float:
    """``4 pi e`` times the second derivative of ``F`` at the Clifford torus and ``(0, 1)``.

    Along ``(X + s V, s xi, 1 + s tau)`` this is
    ``<V, (Lap - 1) V + xi + tau X> - |xi^perp|^2 / 2 - 8 pi^2 tau^2``.
    """
    V = data.V
    grid = grid or V.grid
    xi_perp = constant_normal_part(data.xi, grid)
    ones = np.ones((grid.n, grid.n))
    position = NormalField(-ones, -ones)  # X = -JX_1 - JX_2
    LV = normal_laplacian(V) - V
    return float(inner(V, LV + xi_perp + data.tau * position) - 0.5 * inner(xi_perp, xi_perp)
                 - 8.0 * np.pi**2 * data.tau**2)


@dataclass(frozen=True)
class StabilityRow:
    name: str
    value: float
    classification: str
    hamiltonian: bool


def _classify(value: float, scale: float, zero_tol: float = 1e-10) -> str:
    """Sign of a second variation, treating |value| <= zero_tol * max(1, |V|^2) as zero."""
    if abs(value) <= zero_tol * max(1.0, scale):
        return "zero"
    return "negative" if value < 0 else "positive"


def hamiltonian_stability_report(grid: QuadratureGrid = QuadratureGrid()) -> dict:
    """Second variation of every generator plus an eigenvalue-2 probe.

    Returns a dict with ``rows`` (list of :class:`StabilityRow`) and
    ``negative_hamiltonian_are_translations``.
    """
    rows = []
    fields = [(name, generator_field(name, grid)) for name in GENERATOR_NAMES]
    a, _ = grid.nodes
    fields.append(("cos2t1_JX1", NormalField(np.cos(2 * a), np.zeros_like(a))))
    for name, V in fields:
        value = second_variation(SecondVariationInput(V), grid)
        rows.append(StabilityRow(name, value, _classify(value, inner(V, V)), is_hamiltonian(V)))
    translations = {"T10", "Ti0", "T01", "T0i"}
    ok = all(r.name in translations for r in rows if r.hamiltonian and r.classification == "negative")
    return {"rows": rows, "negative_hamiltonian_are_translations": ok}


# -- Taylor jets ---------------------------------------------------------------


def integrand_I_jet(phi, order: int = 8) -> jt.Jet:
    """Jet in ``s`` of ``sqrt(cosh^2 2s - sinh^2 2s cos^2 phi) exp(1 - cosh 2s - sinh 2s cos phi)``."""
    s = jt.Jet.variable([order])
    c = np.cos(np.asarray(phi, dtype=float))
    ch, sh = jt.cosh(2.0 * s), jt.sinh(2.0 * s)
    return jt.sqrt(ch * ch - sh * sh * (c * c)) * jt.exp(1.0 - ch - sh * c)


def integrand_reference(phi) -> np.ndarray:
    """Closed-form Taylor coefficients ``I^(k)(0)/k!`` for ``k = 0..6``, stacked on axis 0."""
    c = np.cos(np.asarray(phi, dtype=float))
    one = np.ones_like(c)
    return np.stack([
        one,
        -2.0 * c,
        0.0 * c,
        -4.0 / 3.0 * c + 8.0 / 3.0 * c**3,
        -2.0 + 8.0 * c**2 - 16.0 / 3.0 * c**4,
        56.0 / 15.0 * c - 32.0 / 3.0 * c**3 + 32.0 / 5.0 * c**5,
        4.0 / 3.0 - 32.0 / 3.0 * c**2 + 160.0 / 9.0 * c**4 - 416.0 / 45.0 * c**6,
    ])


def f_jet(tag: str = "A", order: int = 8, grid: QuadratureGrid = QuadratureGrid(),
          center: SpaceTimeCenter = SpaceTimeCenter()) -> np.ndarray:
    """Taylor coefficients ``c_0..c_order`` of ``s -> F(X(s), x0, t0)``.

    The whole pipeline (metric, square root, exponential, quadrature) runs
    in truncated Taylor arithmetic, so the coefficients are exact up to
    quadrature and rounding error.
    """
    s = jt.Jet.variable([order])
    F = f_functional(make_surface(FamilyId(tag, s)), center, grid)
    return np.asarray(F.coeffs, dtype=float)


def f_center_expansion(xi, tau: float, orders: tuple = (3, 7), grid: QuadratureGrid = QuadratureGrid(),
                       tag: str = "A") -> np.ndarray:
    """Bivariate coefficients ``[i, j]`` of ``r^i s^j`` in ``f(r, s) = 2 pi e F(X(s), r xi, 1 + r tau)``."""
    r = jt.Jet.variable(orders, 0)
    s = jt.Jet.variable(orders, 1)
    xi = np.asarray(xi, dtype=float)
    x0 = r * xi
    t0 = r * tau + 1.0
    F = f_functional(make_surface(FamilyId(tag, s)), SpaceTimeCenter(x0, t0), grid)
    return 2.0 * np.pi * np.e * np.asarray(F.coeffs, dtype=float)


@dataclass(frozen=True)
class EvenFit:
    coefficients: np.ndarray  # one per entry of ``powers``
    powers: tuple
    condition: float


def sextic_by_least_squares(tag: str = "A", s_values=(0.05, 0.1, 0.15, 0.2), grid: QuadratureGrid = QuadratureGrid(),
                            powers=(4, 6, 8, 10)) -> EvenFit:
    """Fit ``F(s) - F(0)`` by an even polynomial over ``+-s_values``.

    The default basis starts at ``s^4`` because the quadratic term vanishes
    (the family is tangent to a kernel direction of the second variation).
    """
    s_all = np.concatenate([-np.asarray(s_values), np.asarray(s_values)])
    f0 = f_functional(make_surface(FamilyId(tag, 0.0)), grid=grid)
    y = np.array([f_functional(make_surface(FamilyId(tag, float(s))), grid=grid) - f0 for s in s_all])
    A = np.stack([s_all**p for p in powers], axis=1)
    scale = np.max(np.abs(A), axis=0)
    coef, *_ = np.linalg.lstsq(A / scale, y, rcond=None)
    return EvenFit(coef / scale, tuple(powers), float(np.linalg.cond(A / scale)))
