"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the Taylor coefficients of a quantity in one or more
small parameters, each truncated at its own order.  Coefficients may be
array valued, so a whole grid of surface data can be carried through a
computation at once; the trailing axes of ``coeffs`` are the value axes.

Elementary functions are composed through the nilpotent series

    f(c + h) = sum_k f^(k)(c) / k! * h^k,

where ``c`` is the constant term and ``h`` has no constant term, so the
series terminates after ``sum(orders)`` terms.

The module-level helpers (:func:`exp`, :func:`sqrt`, ...) dispatch to numpy
for plain arrays, which lets geometry code be written once and run on
either floats or jets.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

__all__ = [
    "Jet",
    "exp",
    "sqrt",
    "cos",
    "sin",
    "cosh",
    "sinh",
    "log",
    "stack",
    "constant_term",
    "is_jet",
]


class Jet:
    """Truncated Taylor polynomial with array-valued coefficients.

    Parameters
    ----------
    coeffs : array_like
        Shape ``(orders[0]+1, ..., orders[-1]+1, *value_shape)``.
    orders : sequence of int
        Truncation order per variable.
    """

    __array_ufunc__ = None  # make ndarray <op> Jet defer to Jet

    def __init__(self, coeffs, orders: Sequence[int]):
        self.orders = tuple(int(o) for o in orders)
        coeffs = np.asarray(coeffs)
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        lead = tuple(o + 1 for o in self.orders)
        if coeffs.shape[: len(lead)] != lead:
            raise ValueError(
                f"coefficient shape {coeffs.shape} does not start with {lead}"
            )
        self.coeffs = coeffs

    # -- construction ---------------------------------------------------

    @classmethod
    def variable(cls, orders: Sequence[int], index: int = 0, value=0.0) -> "Jet":
        """The jet of ``value + t_index`` (a seed for forward propagation)."""
        orders = tuple(orders)
        value = np.asarray(value, dtype=float)
        c = np.zeros(tuple(o + 1 for o in orders) + value.shape)
        c[(0,) * len(orders)] = value
        if orders[index] >= 1:
            idx = [0] * len(orders)
            idx[index] = 1
            c[tuple(idx)] = 1.0
        return cls(c, orders)

    @classmethod
    def constant(cls, value, orders: Sequence[int]) -> "Jet":
        value = np.asarray(value)
        c = np.zeros(tuple(o + 1 for o in orders) + value.shape, dtype=np.result_type(value, float))
        c[(0,) * len(orders)] = value
        return cls(c, orders)

    # -- shape helpers --------------------------------------------------

    @property
    def nvar(self) -> int:
        return len(self.orders)

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[self.nvar :]

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def value(self):
        return self.coeffs[(0,) * self.nvar]

    def coefficient(self, *index):
        """Coefficient of ``t_0^index[0] * t_1^index[1] * ...``."""
        if len(index) != self.nvar:
            raise IndexError(f"expected {self.nvar} indices, got {len(index)}")
        return self.coeffs[tuple(index)]

    def _pad(self, ndim: int) -> np.ndarray:
        """Coefficients with value axes left-padded to ``ndim``."""
        extra = ndim - self.ndim
        if extra <= 0:
            return self.coeffs
        lead = self.coeffs.shape[: self.nvar]
        return self.coeffs.reshape(lead + (1,) * extra + self.shape)

    def _coerce(self, other):
        """Return (self_coeffs, other_coeffs) broadcast-compatible."""
        if isinstance(other, Jet):
            if other.orders != self.orders:
                raise ValueError(f"jet orders differ: {self.orders} vs {other.orders}")
            nd = max(self.ndim, other.ndim)
            return self._pad(nd), other._pad(nd)
        other = np.asarray(other)
        nd = max(self.ndim, other.ndim)
        return self._pad(nd), other

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(a + b, self.orders)
        b = np.asarray(other)
        vshape = np.broadcast_shapes(self.shape, b.shape)
        lead = self.coeffs.shape[: self.nvar]
        a = np.broadcast_to(self._pad(len(vshape)), lead + vshape)
        out = np.array(a, dtype=np.result_type(a, b))
        out[(0,) * self.nvar] += b
        return Jet(out, self.orders)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coeffs, self.orders)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if not isinstance(other, Jet):
            return Jet(a * b, self.orders)
        return Jet(_truncated_product(a, b, self.orders), self.orders)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(np.ones(self.shape), self.orders)
            base = self
            while p:
                if p & 1:
                    out = out * base
                base = base * base
                p >>= 1
            return out
        return self.power(float(p))

    # -- value-axis operations ------------------------------------------

    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.coeffs[(slice(None),) * self.nvar + key], self.orders)

    def sum(self, axis=None):
        if axis is None:
            axes = tuple(range(self.nvar, self.coeffs.ndim))
        else:
            axes = np.atleast_1d(axis)
            axes = tuple(int(a) % self.ndim + self.nvar for a in axes)
        return Jet(self.coeffs.sum(axis=axes), self.orders)

    def map_values(self, fn) -> "Jet":
        """Apply a linear map acting on value arrays to every coefficient."""
        lead = self.coeffs.shape[: self.nvar]
        flat = self.coeffs.reshape((-1,) + self.shape)
        out = np.stack([fn(c) for c in flat])
        return Jet(out.reshape(lead + out.shape[1:]), self.orders)

    @property
    def real(self):
        return Jet(self.coeffs.real, self.orders)

    # -- elementary functions -------------------------------------------

    def _series(self, derivs) -> "Jet":
        """Compose with f given derivs[k] = f^(k)(c) / k! at the constant term."""
        c0 = self.value
        h = self - c0
        deg = sum(self.orders)
        out = Jet.constant(np.broadcast_to(derivs[deg], self.shape), self.orders)
        for k in range(deg - 1, -1, -1):
            out = out * h + derivs[k]
        return out

    @property
    def _degree(self) -> int:
        return sum(self.orders)

    def exp(self):
        e = np.exp(self.value)
        return self._series([e / math.factorial(k) for k in range(self._degree + 1)])

    def log(self):
        c = self.value
        d = [np.log(c)] + [(-1.0) ** (k + 1) / (k * c**k) for k in range(1, self._degree + 1)]
        return self._series(d)

    def power(self, p: float):
        c = self.value
        d = []
        binom = 1.0
        for k in range(self._degree + 1):
            d.append(binom * c ** (p - k))
            binom *= (p - k) / (k + 1)
        return self._series(d)

    def sqrt(self):
        return self.power(0.5)

    def reciprocal(self):
        c = self.value
        return self._series([(-1.0) ** k / c ** (k + 1) for k in range(self._degree + 1)])

    def cos(self):
        c = self.value
        cyc = [np.cos(c), -np.sin(c), -np.cos(c), np.sin(c)]
        return self._series([cyc[k % 4] / math.factorial(k) for k in range(self._degree + 1)])

    def sin(self):
        c = self.value
        cyc = [np.sin(c), np.cos(c), -np.sin(c), -np.cos(c)]
        return self._series([cyc[k % 4] / math.factorial(k) for k in range(self._degree + 1)])

    def cosh(self):
        return (self.exp() + (-self).exp()) * 0.5

    def sinh(self):
        return (self.exp() - (-self).exp()) * 0.5

    def __repr__(self):
        return f"Jet(orders={self.orders}, shape={self.shape})"


def _truncated_product(a: np.ndarray, b: np.ndarray, orders) -> np.ndarray:
    lead = tuple(o + 1 for o in orders)
    nv = len(orders)
    vshape = np.broadcast_shapes(a.shape[nv:], b.shape[nv:])
    out = np.zeros(lead + vshape, dtype=np.result_type(a, b))
    for idx in np.ndindex(*lead):
        ai = a[idx]
        if not np.any(ai):
            continue
        dst = tuple(slice(i, None) for i in idx)
        src = tuple(slice(0, o + 1 - i) for o, i in zip(orders, idx))
        out[dst] += ai * b[src]
    return out


def is_jet(x) -> bool:
    return isinstance(x, Jet)


def constant_term(x):
    return x.value if isinstance(x, Jet) else x


def _dispatch(name, npfn):
    def fn(x):
        if isinstance(x, Jet):
            return getattr(x, name)()
        return npfn(x)

    fn.__name__ = name
    fn.__doc__ = f"``{name}`` on arrays or jets."
    return fn


exp = _dispatch("exp", np.exp)
sqrt = _dispatch("sqrt", np.sqrt)
cos = _dispatch("cos", np.cos)
sin = _dispatch("sin", np.sin)
cosh = _dispatch("cosh", np.cosh)
sinh = _dispatch("sinh", np.sinh)
log = _dispatch("log", np.log)


def stack(items, axis: int = 0):
    """Stack arrays and/or jets along a new value axis."""
    jets = [x for x in items if isinstance(x, Jet)]
    if not jets:
        return np.stack([np.asarray(x) for x in items], axis=axis)
    orders = jets[0].orders
    shape = np.broadcast_shapes(*[x.shape if isinstance(x, Jet) else np.shape(x) for x in items])
    cs = []
    for x in items:
        if not isinstance(x, Jet):
            x = Jet.constant(np.broadcast_to(x, shape), orders)
        lead = x.coeffs.shape[: len(orders)]
        cs.append(np.broadcast_to(x.coeffs, lead + shape))
    nv = len(orders)
    ax = axis if axis < 0 else axis + nv
    return Jet(np.stack(cs, axis=ax), orders)
