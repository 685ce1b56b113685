"""Explicit torus families through the Clifford torus and its normal fields.

The Clifford torus is ``sqrt(2) (e^{i t1}, e^{i t2})`` and the normal frame
used throughout is ``{JX_1, JX_2}`` with ``JX_1 = -sqrt(2) (e^{i t1}, 0)``
and ``JX_2 = -sqrt(2) (0, e^{i t2})``.  A normal field is stored as its two
frame coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jet as jt
from . import spectral
from .errors import UnsupportedEigenvalue
from .geometry import AnalyticTorus, Derivatives, FourierTorus, QuadratureGrid, dot, metric_from, normal_part

SQRT2 = np.sqrt(2.0)

FAMILY_TAGS = ("Clifford", "A", "B", "C", "D", "Dilation")

GENERATOR_NAMES = (
    "U1", "U2",
    "T10", "Ti0", "T01", "T0i",
    "Y1", "Y2", "Y3", "Y4",
    "VA", "VB", "VC", "VD",
)


@dataclass(frozen=True)
class FamilyId:
    """A member of one of the cataloged one-parameter families.

    ``s`` may be a float or a one-variable :class:`~shrinker_lab.jet.Jet`.
    """

    tag: str
    s: object = 0.0

    def __post_init__(self):
        if self.tag not in FAMILY_TAGS:
            raise ValueError(f"unknown family {self.tag!r}; expected one of {FAMILY_TAGS}")


# -- immersions -------------------------------------------------------------


def _realvec(z1, z2):
    return np.stack([z1.real, z1.imag, z2.real, z2.imag])


def _mode(t, k):
    """Derivatives (0, d/dt, d^2/dt^2) of e^{i k t}."""
    e = np.exp(1j * k * t)
    return e, 1j * k * e, -(k * k) * e


def _combine(terms):
    """Sum of coefficient * real-vector terms; coefficients may be jets."""
    out = None
    for c, v in terms:
        piece = v * c if not jt.is_jet(c) else c * v
        out = piece if out is None else out + piece
    return out


def _two_term_family(ch, sh, alpha1, alpha2, sigma):
    """``sqrt2 (ch e^{it1} + sh a1 e^{i sig t2}, sh a2 e^{i sig t1} + ch e^{it2})``."""

    def evaluate(t1, t2):
        p1 = _mode(t1, 1)
        p2 = _mode(t2, 1)
        q1 = _mode(t2, sigma)  # second term of z1 depends on t2
        q2 = _mode(t1, sigma)
        zero = np.zeros_like(t1, dtype=complex)
        # (derivative index in t1, index in t2) for x, x1, x2, x11, x12, x22
        pattern = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        out = []
        for a, b in pattern:
            P = _realvec(SQRT2 * (p1[a] if b == 0 else zero), SQRT2 * (p2[b] if a == 0 else zero))
            Q = _realvec(
                SQRT2 * alpha1 * (q1[b] if a == 0 else zero),
                SQRT2 * alpha2 * (q2[a] if b == 0 else zero),
            )
            out.append(_combine([(ch, P), (sh, Q)]))
        return Derivatives(*out)

    return evaluate


def _dilation_family(s):
    cosh2s = jt.cosh(2.0 * s)
    a = jt.exp(-s) / jt.sqrt(cosh2s)
    b = jt.exp(s) / jt.sqrt(cosh2s)

    def evaluate(t1, t2):
        p1 = _mode(t1, 1)
        p2 = _mode(t2, 1)
        zero = np.zeros_like(t1, dtype=complex)
        pattern = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        out = []
        for i, j in pattern:
            P = _realvec(SQRT2 * (p1[i] if j == 0 else zero), zero)
            Q = _realvec(zero, SQRT2 * (p2[j] if i == 0 else zero))
            out.append(_combine([(a, P), (b, Q)]))
        return Derivatives(*out)

    return evaluate


_TWO_TERM = {
    # tag: (alpha1, alpha2, sigma)
    "A": (1.0, 1.0, -1),
    "B": (1j, 1j, -1),
    "C": (1.0, 1.0, 1),
    "D": (-1j, 1j, 1),
}


def make_surface(family: FamilyId) -> AnalyticTorus:
    """Analytic immersion (with exact derivatives) of a family member."""
    s = family.s
    if family.tag == "Clifford":
        return AnalyticTorus(_two_term_family(1.0, 0.0, 1.0, 1.0, -1), "Clifford")
    if family.tag == "Dilation":
        return AnalyticTorus(_dilation_family(s), f"Dilation({_label(s)})")
    a1, a2, sig = _TWO_TERM[family.tag]
    return AnalyticTorus(_two_term_family(jt.cosh(s), jt.sinh(s), a1, a2, sig), f"{family.tag}({_label(s)})")


def _label(s):
    return "jet" if jt.is_jet(s) else f"{float(s):g}"


def clifford_torus() -> AnalyticTorus:
    return make_surface(FamilyId("Clifford"))


def transformed(surface: AnalyticTorus, scale: float = 1.0, rotation=None, translation=None) -> AnalyticTorus:
    """The surface ``scale * R X + b``."""
    R = np.eye(4) if rotation is None else np.asarray(rotation, dtype=float)
    b = np.zeros(4) if translation is None else np.asarray(translation, dtype=float)

    def evaluate(t1, t2):
        d = surface.derivatives(t1, t2)
        moved = [scale * np.tensordot(R, v, axes=1) for v in d]
        moved[0] = moved[0] + b.reshape((4,) + (1,) * (moved[0].ndim - 1))
        return Derivatives(*moved)

    return AnalyticTorus(evaluate, f"transformed({surface!r})")


# -- normal fields ------------------------------------------------------------


def clifford_frame(theta1, theta2):
    """``(JX_1, JX_2)`` on the Clifford torus."""
    z = np.zeros_like(np.asarray(theta1, dtype=float))
    n1 = -SQRT2 * np.stack([np.cos(theta1), np.sin(theta1), z, z])
    n2 = -SQRT2 * np.stack([z, z, np.cos(theta2), np.sin(theta2)])
    return n1, n2


@dataclass(frozen=True)
class NormalField:
    """``V = f1 JX_1 + f2 JX_2`` on the Clifford torus, sampled on a square grid."""

    f1: object
    f2: object

    @property
    def n(self) -> int:
        return self.f1.shape[-1]

    @property
    def grid(self) -> QuadratureGrid:
        return QuadratureGrid(self.n)

    def __add__(self, other: "NormalField") -> "NormalField":
        return NormalField(self.f1 + other.f1, self.f2 + other.f2)

    def __sub__(self, other: "NormalField") -> "NormalField":
        return NormalField(self.f1 - other.f1, self.f2 - other.f2)

    def __neg__(self):
        return NormalField(-self.f1, -self.f2)

    def __mul__(self, c) -> "NormalField":
        return NormalField(c * self.f1, c * self.f2)

    __rmul__ = __mul__

    def to_ambient(self):
        n1, n2 = clifford_frame(*self.grid.nodes)
        return _combine([(self.f1, n1), (self.f2, n2)])

    @classmethod
    def from_ambient(cls, w) -> "NormalField":
        """Frame coefficients of the normal part of an ambient field ``w``."""
        n = w.shape[-1]
        n1, n2 = clifford_frame(*QuadratureGrid(n).nodes)
        return cls(dot(w, n1) * 0.5, dot(w, n2) * 0.5)

    def shifted(self, k1: int, k2: int) -> "NormalField":
        """Translate by ``(2 pi k1 / n, 2 pi k2 / n)`` in the angles."""
        return NormalField(np.roll(self.f1, (k1, k2), (-2, -1)), np.roll(self.f2, (k1, k2), (-2, -1)))

    def sup(self) -> float:
        return float(max(np.max(np.abs(jt.constant_term(self.f1))), np.max(np.abs(jt.constant_term(self.f2)))))


def graph_surface(v: NormalField) -> FourierTorus:
    """The normal graph ``X + V`` over the Clifford torus as a sampled surface."""
    t1, t2 = v.grid.nodes
    x = clifford_torus().derivatives(t1, t2).x
    return FourierTorus(v.to_ambient() + x)


def inner(v: NormalField, w: NormalField) -> float:
    """L^2(vol_L) inner product on the Clifford torus (|JX_k|^2 = 2, vol = 2 dt1 dt2)."""
    from .geometry import integrate

    g = v.grid
    return integrate(2.0 * (v.f1 * w.f1 + v.f2 * w.f2) * 2.0, g.weight)


def l2_norm(v: NormalField) -> float:
    return float(np.sqrt(inner(v, v)))


_C = np.cos
_S = np.sin

_GENERATORS: dict[str, Callable] = {
    "U1": lambda a, b: (np.ones_like(a), np.ones_like(a)),
    "U2": lambda a, b: (np.ones_like(a), -np.ones_like(a)),
    "T10": lambda a, b: (-_C(a) / SQRT2, np.zeros_like(a)),
    "Ti0": lambda a, b: (-_S(a) / SQRT2, np.zeros_like(a)),
    "T01": lambda a, b: (np.zeros_like(a), -_C(b) / SQRT2),
    "T0i": lambda a, b: (np.zeros_like(a), -_S(b) / SQRT2),
    "Y1": lambda a, b: (_C(a - b), -_C(a - b)),
    "Y2": lambda a, b: (-_S(a - b), _S(a - b)),
    "Y3": lambda a, b: (_C(a + b), -_C(a + b)),
    "Y4": lambda a, b: (_S(a + b), -_S(a + b)),
    "VA": lambda a, b: (-_C(a + b), -_C(a + b)),
    "VB": lambda a, b: (-_S(a + b), -_S(a + b)),
    "VC": lambda a, b: (-_C(a - b), -_C(a - b)),
    "VD": lambda a, b: (_S(a - b), _S(a - b)),
}

# Potentials f with V = J grad f, i.e. (f1, f2) = (d1 f, d2 f) / 2.
HAMILTONIAN_POTENTIALS: dict[str, Callable] = {
    "T10": lambda a, b: -SQRT2 * _S(a),
    "Ti0": lambda a, b: SQRT2 * _C(a),
    "T01": lambda a, b: -SQRT2 * _S(b),
    "T0i": lambda a, b: SQRT2 * _C(b),
    "Y1": lambda a, b: 2.0 * _S(a - b),
    "Y2": lambda a, b: 2.0 * _C(a - b),
    "VA": lambda a, b: -2.0 * _S(a + b),
    "VB": lambda a, b: 2.0 * _C(a + b),
}


def generator_field(name: str, grid: QuadratureGrid = QuadratureGrid()) -> NormalField:
    """Closed-form generator field sampled on ``grid``."""
    try:
        fn = _GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; expected one of {GENERATOR_NAMES}") from None
    f1, f2 = fn(*grid.nodes)
    return NormalField(f1, f2)


def field_from_function(fn: Callable, grid: QuadratureGrid = QuadratureGrid()) -> NormalField:
    f1, f2 = fn(*grid.nodes)
    t = np.zeros((grid.n, grid.n))
    return NormalField(f1 + t, f2 + t)


def hamiltonian_field(potential: Callable, grid: QuadratureGrid = QuadratureGrid()) -> NormalField:
    """``J grad f`` for a potential ``f(theta1, theta2)``, differentiated spectrally."""
    f = potential(*grid.nodes)
    return NormalField(0.5 * spectral.diff(f, 1, -2), 0.5 * spectral.diff(f, 1, -1))


def is_hamiltonian(v: NormalField, tol: float = 1e-10) -> bool:
    """True when ``f1 dt1 + f2 dt2`` is exact: closed and with zero periods."""
    curl = spectral.diff(v.f1, 1, -1) - spectral.diff(v.f2, 1, -2)
    periods = abs(np.mean(v.f1)) + abs(np.mean(v.f2))
    return bool(np.max(np.abs(curl)) <= tol and periods <= tol)


def normal_laplacian(v: NormalField) -> NormalField:
    """``Delta^perp`` acting componentwise as ``-(1/2)(d11 + d22)``."""

    def lap(f):
        return -0.5 * (spectral.diff(f, 2, -2) + spectral.diff(f, 2, -1))

    return NormalField(lap(v.f1), lap(v.f2))


def eigenspace_basis(eigenvalue: float, grid: QuadratureGrid = QuadratureGrid()) -> list[NormalField]:
    """Spanning sets of the normal-Laplacian eigenspaces for 0, 1/2 and 1."""
    n = 2.0 * eigenvalue
    if abs(n - round(n)) > 1e-12 or round(n) not in (0, 1, 2):
        raise UnsupportedEigenvalue(f"eigenvalue {eigenvalue} is not cataloged (only 0, 1/2, 1)")
    n = int(round(n))
    a, b = grid.nodes
    z = np.zeros_like(a)
    if n == 0:
        return [generator_field("U1", grid), generator_field("U2", grid)]
    if n == 1:
        out = []
        for g in (_C(a), _S(a), _C(b), _S(b)):
            out.append(NormalField(g, z))
            out.append(NormalField(z, g))
        return out
    out = []
    for phase in (a + b, a - b):
        for trig in (_C, _S):
            g = trig(phase)
            out.append(NormalField(g, g))
            out.append(NormalField(g, -g))
    return out


def cataloged_eigenfields(grid: QuadratureGrid = QuadratureGrid()) -> list[tuple[float, NormalField]]:
    """All 18 cataloged fields paired with their eigenvalues."""
    return [(mu, v) for mu in (0.0, 0.5, 1.0) for v in eigenspace_basis(mu, grid)]


# -- variation fields of the families ------------------------------------------


def variation_field(tag: str, grid: QuadratureGrid = QuadratureGrid(), method: str = "jet") -> NormalField:
    """Normal part of ``dX(s)/ds`` at ``s = 0``.

    ``method="jet"`` differentiates the analytic family in forward mode;
    ``method="fd"`` uses Richardson-extrapolated fourth-order central
    differences with step 1e-3.
    """
    t1, t2 = grid.nodes
    if method == "jet":
        s = jt.Jet.variable([1])
        w = make_surface(FamilyId(tag, s)).derivatives(t1, t2).x.coefficient(1)
    elif method == "fd":
        w = _richardson_derivative(lambda s: make_surface(FamilyId(tag, s)).derivatives(t1, t2).x, 1e-3)
    else:
        raise ValueError(f"unknown method {method!r}")
    d = make_surface(FamilyId("Clifford")).derivatives(t1, t2)
    return NormalField.from_ambient(normal_part(d, metric_from(d), w))


def _central4(fn, h):
    return (-fn(2 * h) + 8 * fn(h) - 8 * fn(-h) + fn(-2 * h)) / (12 * h)


def _richardson_derivative(fn, h):
    d_h = _central4(fn, h)
    d_2h = _central4(fn, 2 * h)
    return (16 * d_h - d_2h) / 15
