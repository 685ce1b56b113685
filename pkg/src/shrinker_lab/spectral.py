"""Fourier differentiation and filtering of periodic samples.

Fields live on a uniform grid over ``[0, 2*pi)`` along one or two trailing
axes.  All routines accept :class:`~shrinker_lab.jet.Jet` inputs and act on
every Taylor coefficient.
"""

from __future__ import annotations

import numpy as np

from .jet import Jet


def wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def diff(f, order: int = 1, axis: int = -1):
    """``order``-th derivative of periodic samples along ``axis``.

    The Nyquist mode is dropped for odd orders so that real input stays real
    and the operator remains skew.
    """
    if isinstance(f, Jet):
        ax = axis if axis < 0 else axis + f.nvar
        return Jet(_diff(f.coeffs, order, ax), f.orders)
    return _diff(np.asarray(f), order, axis)


def _diff(f: np.ndarray, order: int, axis: int) -> np.ndarray:
    if order == 0:
        return f
    n = f.shape[axis]
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    out = np.fft.ifft(np.fft.fft(f, axis=axis) * mult.reshape(shape), axis=axis)
    return out.real if np.isrealobj(f) else out


def band_limit(f, max_mode: int):
    """Zero every Fourier mode with ``|m| > max_mode`` or ``|n| > max_mode``."""
    if isinstance(f, Jet):
        return Jet(band_limit(f.coeffs, max_mode), f.orders)
    f = np.asarray(f)
    n1, n2 = f.shape[-2:]
    mask = (np.abs(wavenumbers(n1))[:, None] <= max_mode) & (np.abs(wavenumbers(n2))[None, :] <= max_mode)
    out = np.fft.ifft2(np.fft.fft2(f, axes=(-2, -1)) * mask, axes=(-2, -1))
    return out.real if np.isrealobj(f) else out


def cumulative_integral(f: np.ndarray) -> tuple[np.ndarray, float]:
    """Periodic antiderivative of 1-D samples.

    Returns ``(p, mean)`` with ``int_0^u f = mean * u + p(u) - p(0)``, ``p``
    periodic and sampled on the same grid.
    """
    n = f.shape[-1]
    fh = np.fft.fft(f, axis=-1)
    mean = fh[..., 0].real / n
    k = wavenumbers(n)
    with np.errstate(divide="ignore", invalid="ignore"):
        ph = np.where(k != 0, fh / (1j * k), 0.0)
    if n % 2 == 0:
        ph[..., n // 2] = 0.0
    p = np.fft.ifft(ph, axis=-1).real
    return p - p[..., :1], mean


def trig_coefficients(samples: np.ndarray) -> np.ndarray:
    """One-sided coefficients ``a_k`` of the real trigonometric interpolant.

    ``samples`` (real) has the periodic axis first; the interpolant is
    ``Re sum_{k=0}^{n/2} a_k e^{iku}``, with the Nyquist mode split evenly.
    """
    n = samples.shape[0]
    ch = np.fft.rfft(samples, axis=0) / n
    ch[1 : (n + 1) // 2] *= 2.0
    return ch


def trig_evaluate(coeffs: np.ndarray, u) -> np.ndarray:
    """Evaluate coefficients from :func:`trig_coefficients` at the points ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    m = coeffs.shape[0]
    z = np.exp(1j * u)
    powers = np.empty((len(u), m), dtype=complex)
    powers[:, 0] = 1.0
    if m > 1:
        powers[:, 1:] = np.cumprod(np.broadcast_to(z[:, None], (len(u), m - 1)), axis=1)
    out = (powers @ coeffs.reshape(m, -1)).real
    return out.reshape((len(u),) + coeffs.shape[1:])


def trig_interpolate(samples: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of real periodic samples at ``u``.

    ``samples`` has the periodic axis first; trailing axes are carried.
    """
    return trig_evaluate(trig_coefficients(np.asarray(samples, dtype=float)), u)
