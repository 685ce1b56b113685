"""Curve shortening flow on a round 2-sphere and the Hopf correspondence.

A closed curve is stored as ``M`` samples of a smooth periodic map
``u -> x(u)`` with ``u`` uniform in ``[0, 2pi)``.  Derivatives, length and
enclosed area are spectral; after every flow step the curve is pushed back
to the sphere and resampled at uniform arclength.

Hopf-invariant tori in ``S^3(2)`` correspond to closed curves on
``S^2(2)`` through ``h(z1, z2) = (z1 conj(z2), (|z1|^2 - |z2|^2) / 2)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import spectral
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import DegenerateCurve, LiftODEFailed, ResolutionLost, StepRejected
from .geometry import FourierTorus, QuadratureGrid, surface_integral

HOPF_RADIUS = 2.0


# -- curves --------------------------------------------------------------------


@dataclass(frozen=True)
class SphereCurve:
    """Closed curve sampled at ``M`` nodes on the sphere of radius ``radius``."""

    points: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 8:
            raise ValueError(f"expected (M, 3) points with M >= 8, got {p.shape}")
        off = np.max(np.abs(np.linalg.norm(p, axis=1) - self.radius))
        if off > DEFAULT_TOLERANCES.sphere_radius * max(1.0, self.radius):
            raise ValueError(f"points are {off:.2e} off the sphere of radius {self.radius}")
        object.__setattr__(self, "points", p)

    @property
    def M(self) -> int:
        return self.points.shape[0]

    def derivative(self, order: int = 1) -> np.ndarray:
        return spectral.diff(self.points, order, axis=0)

    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.derivative(1), axis=1)

    def length(self) -> float:
        return math.fsum(self.speed()) * 2.0 * math.pi / self.M

    def scaled(self, radius: float) -> "SphereCurve":
        return SphereCurve(self.points * (radius / self.radius), radius)

    def node_spacing(self) -> np.ndarray:
        return np.linalg.norm(np.roll(self.points, -1, axis=0) - self.points, axis=1)


def _on_sphere(points: np.ndarray, radius: float) -> np.ndarray:
    return points * (radius / np.linalg.norm(points, axis=1, keepdims=True))


def equator(M: int = 128, radius: float = 1.0) -> SphereCurve:
    u = 2.0 * np.pi * np.arange(M) / M
    return SphereCurve(radius * np.stack([np.cos(u), np.sin(u), np.zeros(M)], axis=1), radius)


def latitude(alpha: float, M: int = 128, radius: float = 1.0) -> SphereCurve:
    """Circle at polar angle ``alpha``, counterclockwise seen from the north pole."""
    u = 2.0 * np.pi * np.arange(M) / M
    s, c = math.sin(alpha), math.cos(alpha)
    return SphereCurve(radius * np.stack([s * np.cos(u), s * np.sin(u), c * np.ones(M)], axis=1), radius)


def perturbed_equator(amplitude: float = 0.2, mode: int = 3, M: int = 128, radius: float = 1.0) -> SphereCurve:
    """Graph ``latitude = amplitude * sin(mode * lon)`` over the equator.

    For odd ``mode`` the curve is invariant under the antipodal map, so it
    splits the sphere into two regions of equal area.
    """
    u = 2.0 * np.pi * np.arange(M) / M
    b = amplitude * np.sin(mode * u)
    pts = radius * np.stack([np.cos(b) * np.cos(u), np.cos(b) * np.sin(u), np.sin(b)], axis=1)
    return redistribute(SphereCurve(pts, radius))


# -- curvature and area ----------------------------------------------------------


def _check_nondegenerate(c: SphereCurve):
    gaps = c.node_spacing()
    if np.min(gaps) <= 1e-14 * c.radius:
        raise DegenerateCurve("consecutive nodes coincide")
    speed = c.speed()
    if np.min(speed) <= 1e-12 * max(np.mean(speed), 1e-300):
        raise DegenerateCurve("curve has a stationary point")
    return speed


def geodesic_curvature(c: SphereCurve) -> tuple[np.ndarray, float]:
    """Per-node geodesic curvature against the left normal ``(x/R) x T`` and its integral."""
    speed = _check_nondegenerate(c)
    xu = c.derivative(1)
    xuu = c.derivative(2)
    T = xu / speed[:, None]
    n = np.cross(c.points / c.radius, T)
    kappa = np.einsum("ij,ij->i", xuu, n) / speed**2
    total = math.fsum(kappa * speed) * 2.0 * math.pi / c.M
    return kappa, total


def _basis(p: np.ndarray):
    p = p / np.linalg.norm(p)
    helper = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(p, helper)
    e1 /= np.linalg.norm(e1)
    return p, e1, np.cross(p, e1)


def _reference(c: SphereCurve, pole) -> np.ndarray:
    """Reference pole nudged off the curve (and its antipode off the curve)."""
    p = np.array([0.0, 0.0, 1.0]) if pole is None else np.asarray(pole, dtype=float)
    p = p / np.linalg.norm(p)
    x = c.points / c.radius
    for _ in range(10):
        gap = min(np.min(np.linalg.norm(x - p, axis=1)), np.min(np.linalg.norm(x + p, axis=1)))
        if gap > 1e-8:
            return p
        _, e1, _ = _basis(p)
        p = p + 1e-6 * e1
        p /= np.linalg.norm(p)
    raise DegenerateCurve("could not place a reference pole off the curve")


def winding_number(c: SphereCurve, pole=None) -> int:
    """Turns of the curve around the axis through ``pole``."""
    p, e1, e2 = _basis(_reference(c, pole))
    lam = np.arctan2(c.points @ e2, c.points @ e1)
    steps = np.angle(np.exp(1j * (np.roll(lam, -1) - lam)))
    return int(round(math.fsum(steps) / (2.0 * math.pi)))


def _signed_area_spectral(c: SphereCurve, p: np.ndarray) -> float:
    """``integral (R^2 - R z) d lambda`` with ``z`` and ``lambda`` taken about ``p``."""
    p, e1, e2 = _basis(p)
    a, b, z = c.points @ e1, c.points @ e2, c.points @ p
    da, db = spectral.diff(a, 1), spectral.diff(b, 1)
    lam_u = (a * db - b * da) / (a * a + b * b)
    R = c.radius
    return math.fsum((R * R - R * z) * lam_u) * 2.0 * math.pi / c.M


def _signed_area_polygon(c: SphereCurve, p: np.ndarray) -> float:
    """Signed solid angle of the triangle fan from ``p`` (Van Oosterom-Strackee)."""
    a = c.points / c.radius
    b = np.roll(a, -1, axis=0)
    num = np.einsum("j,ij->i", p, np.cross(a, b))
    den = 1.0 + a @ p + np.einsum("ij,ij->i", a, b) + b @ p
    return math.fsum(2.0 * np.arctan2(num, den)) * c.radius**2


def _far_axis(c: SphereCurve) -> np.ndarray:
    """A coordinate or best-fit axis whose poles are both far from the curve."""
    x = c.points / c.radius
    candidates = [np.eye(3)[i] for i in range(3)] + [great_circle_normal(c)]
    gaps = [1.0 - np.max(np.abs(x @ q)) for q in candidates]
    return candidates[int(np.argmax(gaps))]


def _left_of_curve(c: SphereCurve, p: np.ndarray) -> bool:
    """Whether the point ``p`` lies to the left of the curve.

    Decided at the closest point of the trigonometric interpolant, where the
    offset to ``p`` is normal to the curve.
    """
    R = c.radius
    target = R * p / np.linalg.norm(p)
    coeffs = spectral.trig_coefficients(c.points)
    d1 = spectral.trig_coefficients(c.derivative(1))
    d2 = spectral.trig_coefficients(c.derivative(2))
    n = 8 * c.M
    fine_u = 2.0 * np.pi * np.arange(n) / n
    fine = spectral.trig_evaluate(coeffs, fine_u)
    u = fine_u[int(np.argmin(np.linalg.norm(fine - target, axis=1)))]
    for _ in range(30):
        x, x1, x2 = (spectral.trig_evaluate(a, u)[0] for a in (coeffs, d1, d2))
        g = (x - target) @ x1
        dg = x1 @ x1 + (x - target) @ x2
        if dg <= 0:
            break
        step = g / dg
        u -= step
        if abs(step) < 1e-15:
            break
    x, x1 = (spectral.trig_evaluate(a, u)[0] for a in (coeffs, d1))
    return bool((target - x) @ np.cross(x / R, x1) > 0)


def enclosed_area(c: SphereCurve, pole=None, method: str = "spectral") -> tuple[float, float]:
    """``(A_plus, A_minus)`` where ``A_plus`` is the region containing the reference pole.

    ``method="spectral"`` integrates the smooth interpolant;
    ``method="polygon"`` uses the spherical polygon through the nodes.
    """
    _check_nondegenerate(c)
    p = _reference(c, pole)
    total = 4.0 * math.pi * c.radius**2
    left = left_area(c, method)
    plus = left if _left_of_curve(c, p) else total - left
    return plus, total - plus


def left_area(c: SphereCurve, method: str = "spectral") -> float:
    """Area of the region to the left of the oriented curve.

    The area form is integrated about an axis far from the curve; the
    result is correct modulo the sphere area whichever side the axis is on.

    Raises
    ------
    DegenerateCurve
        If the curve winds more than once about that axis.
    """
    total = 4.0 * math.pi * c.radius**2
    q = _far_axis(c)
    w = winding_number(c, q)
    if abs(w) > 1:
        raise DegenerateCurve(f"winding number {w} about the reference axis; curve is not simple")
    signed = {"spectral": _signed_area_spectral, "polygon": _signed_area_polygon}[method](c, q)
    return signed % total


# -- great circle fit ------------------------------------------------------------


def great_circle_normal(c: SphereCurve) -> np.ndarray:
    """Unit normal of the best plane through the origin (smallest singular direction)."""
    _, _, vt = np.linalg.svd(c.points, full_matrices=False)
    return vt[-1]


def distance_to_great_circle(c: SphereCurve) -> float:
    """Hausdorff distance between the curve and its best-fit great circle.

    When the curve winds around the fitted axis every point of the circle
    is matched by a curve point at the same longitude, so the curve-to-circle
    distance is the Hausdorff distance.  Otherwise both directions are
    evaluated on an 8x oversampled interpolant.
    """
    nu = great_circle_normal(c)
    x = c.points
    proj = x - np.outer(x @ nu, nu)
    r = np.linalg.norm(proj, axis=1)
    if winding_number(c, nu) != 0 and np.all(r > 0):
        return float(np.max(np.linalg.norm(x - c.radius * proj / r[:, None], axis=1)))
    t = 2.0 * np.pi * np.arange(8 * c.M) / (8 * c.M)
    fine = spectral.trig_interpolate(x, t)
    _, e1, e2 = _basis(nu)
    circle = c.radius * (np.outer(np.cos(t), e1) + np.outer(np.sin(t), e2))
    d_curve = cKDTree(circle).query(fine)[0]
    d_circle = cKDTree(fine).query(circle)[0]
    return float(max(d_curve.max(), d_circle.max()))


# -- flow --------------------------------------------------------------------------


def redistribute(c: SphereCurve, newton_steps: int = 12) -> SphereCurve:
    """Resample at uniform arclength, keeping node 0 fixed."""
    speed = c.speed()
    M = c.M
    if np.max(np.abs(speed - speed.mean())) <= 1e-15 * speed.mean():
        return c
    p, mean = spectral.cumulative_integral(speed)
    ch = spectral.trig_coefficients(np.column_stack([p, speed, c.points]))
    u0 = 2.0 * np.pi * np.arange(M) / M
    target = mean * u0  # arclength L j / M with L = 2 pi mean
    u = u0
    for _ in range(newton_steps):
        vals = spectral.trig_evaluate(ch, u)
        step = (mean * u + vals[:, 0] - target) / vals[:, 1]
        u = u - step
        if np.max(np.abs(step)) < 1e-14:
            break
    pts = spectral.trig_evaluate(ch[:, 2:], u)
    return SphereCurve(_on_sphere(pts, c.radius), c.radius)


def csf_step(c: SphereCurve, dt: float, length_slack: float = 1e-12) -> SphereCurve:
    """One step of ``x_t = x_ss + x / R^2`` followed by reprojection and resampling.

    With the curve parametrized proportionally to arclength the equation is
    linear and diagonal in Fourier space for frozen length, and each mode is
    advanced by its exact exponential factor.

    Raises
    ------
    StepRejected
        If the length increases.
    """
    R = c.radius
    L = c.length()
    sigma = L / (2.0 * np.pi)
    k = spectral.wavenumbers(c.M)
    xh = np.fft.fft(c.points, axis=0)
    xh *= np.exp(dt * (1.0 / R**2 - k**2 / sigma**2))[:, None]
    pts = _on_sphere(np.fft.ifft(xh, axis=0).real, R)
    new = redistribute(SphereCurve(pts, R))
    L_new = new.length()
    if L_new > L * (1.0 + length_slack):
        raise StepRejected(f"length increased from {L!r} to {L_new!r}")
    return new


@dataclass(frozen=True)
class FlowConfig:
    dt_factor: float = 0.25
    t_end: float = 2.0
    cadence: int = 20
    length_tol: float = 1e-2
    hausdorff_tol: float = 1e-3
    spacing_ratio: float = 1.5
    time_scale: float = 1.0
    track_energy: bool = True

    def __post_init__(self):
        for name in ("dt_factor", "t_end", "cadence", "length_tol", "hausdorff_tol", "time_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.spacing_ratio > 1:
            raise ValueError("spacing_ratio must exceed 1")


TRACE_COLUMNS = ("t", "tau", "length", "area_plus", "area_minus", "total_curvature", "distance", "energy")


@dataclass
class FlowTrace:
    rows: list = field(default_factory=list)
    verdict: str = "undecided"
    final: SphereCurve | None = None
    steps: int = 0
    max_displacement: float = 0.0

    def column(self, name: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for r in self.rows:
                w.writerow([repr(float(v)) for v in r])


def _row(c: SphereCurve, t: float, cfg: FlowConfig) -> tuple:
    plus, minus = enclosed_area(c)
    _, total = geodesic_curvature(c)
    energy = rescaled_energy(c) if cfg.track_energy else float("nan")
    return (t, cfg.time_scale * t, c.length(), plus, minus, total, distance_to_great_circle(c), energy)


def run_flow(c0: SphereCurve, cfg: FlowConfig = FlowConfig()) -> FlowTrace:
    """Evolve until ``t_end`` or until the curve shrinks below ``length_tol``.

    Verdicts: ``stationary`` (no node moved more than 1e-10),
    ``shrinking-to-point``, ``converged-to-great-circle`` or ``undecided``.

    Raises
    ------
    ResolutionLost
        If the ratio of largest to smallest node spacing exceeds
        ``cfg.spacing_ratio`` after resampling.
    """
    trace = FlowTrace()
    c = c0
    t = 0.0
    trace.rows.append(_row(c, t, cfg))
    step = 0
    while t < cfg.t_end * (1.0 - 1e-14):
        h = c.length() / c.M
        dt = min(cfg.dt_factor * h * h, cfg.t_end - t)
        c = csf_step(c, dt)
        t += dt
        step += 1
        gaps = c.node_spacing()
        if np.max(gaps) > cfg.spacing_ratio * np.min(gaps):
            raise ResolutionLost(f"node spacing ratio {np.max(gaps) / np.min(gaps):.3f} at t={t:.6g}")
        trace.max_displacement = max(trace.max_displacement, float(np.max(np.linalg.norm(c.points - c0.points, axis=1))))
        small = c.length() < cfg.length_tol
        if step % cfg.cadence == 0 or small or t >= cfg.t_end * (1.0 - 1e-14):
            trace.rows.append(_row(c, t, cfg))
        if small:
            trace.verdict = "shrinking-to-point"
            break
    trace.steps = step
    trace.final = c
    if trace.verdict == "undecided":
        if trace.max_displacement <= 1e-10:
            trace.verdict = "stationary"
        elif distance_to_great_circle(c) <= cfg.hausdorff_tol:
            trace.verdict = "converged-to-great-circle"
    return trace


def latitude_polar_angle(alpha0: float, t: float) -> float:
    """Exact polar angle of a latitude on the unit sphere: ``cos a(t) = cos a0 e^t``."""
    return math.acos(math.cos(alpha0) * math.exp(t))


# -- Hopf fibration ------------------------------------------------------------------


def hopf_project(p) -> np.ndarray:
    """``(x1, y1, x2, y2) -> (Re w, Im w, z)`` with ``w = z1 conj(z2)``, ``z = (|z1|^2 - |z2|^2)/2``.

    The component axis is the last one.
    """
    p = np.asarray(p, dtype=float)
    z1 = p[..., 0] + 1j * p[..., 1]
    z2 = p[..., 2] + 1j * p[..., 3]
    w = z1 * np.conj(z2)
    return np.stack([w.real, w.imag, (np.abs(z1) ** 2 - np.abs(z2) ** 2) / 2.0], axis=-1)


def _section(w: np.ndarray, z: np.ndarray, north: bool):
    """A point of the fiber over ``(w, z)``; smooth away from ``z = -2`` (north) or ``z = 2``."""
    if north:
        a = np.sqrt(HOPF_RADIUS + z)
        return a + 0j, np.conj(w) / a
    a = np.sqrt(HOPF_RADIUS - z)
    return w / a, a + 0j


def hopf_lift(c: SphereCurve, margin: float = 1e-3) -> FourierTorus:
    """Hopf-invariant torus over a curve on ``S^2(2)``.

    The base point is lifted horizontally (the connection equation is
    integrated spectrally) and every lifted point is swept by the full fiber
    ``e^{i phi}``; the linear part of the lift phase (the holonomy) is
    absorbed into the fiber coordinate so the torus is doubly periodic.
    """
    if abs(c.radius - HOPF_RADIUS) > 1e-12:
        raise ValueError(f"curve must lie on the sphere of radius {HOPF_RADIUS}")
    w = c.points[:, 0] + 1j * c.points[:, 1]
    z = c.points[:, 2]
    if np.min(z) > -HOPF_RADIUS + margin:
        s1, s2 = _section(w, z, True)
    elif np.max(z) < HOPF_RADIUS - margin:
        s1, s2 = _section(w, z, False)
    else:
        raise LiftODEFailed("curve passes near both poles; no single smooth section")
    d1, d2 = spectral.diff(s1, 1), spectral.diff(s2, 1)
    # alpha' = -<sigma', i sigma> / |sigma|^2 with <a, b> = Re(a conj b)
    rate = -np.real(d1 * np.conj(1j * s1) + d2 * np.conj(1j * s2)) / HOPF_RADIUS**2
    periodic, _ = spectral.cumulative_integral(rate)
    if not np.all(np.isfinite(periodic)):
        raise LiftODEFailed("non-finite connection phase")
    M = c.M
    phi = 2.0 * np.pi * np.arange(M) / M
    phase = np.exp(1j * (periodic[:, None] + phi[None, :]))
    z1 = phase * s1[:, None]
    z2 = phase * s2[:, None]
    return FourierTorus(np.stack([z1.real, z1.imag, z2.real, z2.imag]))


def lift_volume(c: SphereCurve) -> float:
    torus = hopf_lift(c)
    return surface_integral(torus, 1.0, QuadratureGrid(torus.n))


def rescaled_energy(c: SphereCurve) -> float:
    """``Vol(lift(c)) / (4 pi e)``; curves on other spheres are first scaled to radius 2."""
    if abs(c.radius - HOPF_RADIUS) > 1e-12:
        c = c.scaled(HOPF_RADIUS)
    return lift_volume(c) / (4.0 * np.pi * np.e)
