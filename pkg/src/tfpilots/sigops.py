"""Correlation, ambiguity and (twisted) convolution on complex grids.

The twisted convolution used throughout is

    z[m, n] = sum_{l,k} x[l, k] y[m-l, n-k] exp(j 2 pi alpha (m-l) k)

with ``alpha`` the Doppler-delay phase coupling (``delta_f * T`` for a
physical grid). ``alpha = 0`` is ordinary 2D convolution. The operation is
neither commutative nor associative, so operand order is always as written.
"""

from __future__ import annotations

from math import gcd, pi, sin, sqrt

import numpy as np
from scipy.signal import convolve2d

from .grid import ComplexGrid


def _energy_norm(x: np.ndarray, y: np.ndarray) -> float:
    ex = float(np.vdot(x, x).real)
    ey = float(np.vdot(y, y).real)
    norm = sqrt(ex * ey)
    if norm == 0:
        raise ValueError("correlation of an all-zero sequence")
    return norm


def periodic_xcorr(x, y) -> np.ndarray:
    """Energy-normalised periodic correlation.

    ``R[k] = sum_n y[n] conj(x[(n + k) mod L]) / sqrt(E_x E_y)`` for
    ``k = 0..L-1``.
    """
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"periodic_xcorr needs equal-length 1D inputs, got {x.shape} and {y.shape}")
    L = x.size
    out = np.array([np.vdot(np.roll(x, -k), y) for k in range(L)])
    return out / _energy_norm(x, y)


def _pad_pair(x, y):
    x = np.asarray(x, dtype=np.complex128).ravel()
    y = np.asarray(y, dtype=np.complex128).ravel()
    L = max(x.size, y.size)
    return np.pad(x, (0, L - x.size)), np.pad(y, (0, L - y.size))


def linear_xcorr(x, y) -> np.ndarray:
    """Aperiodic correlation ``sum_n x[n] conj(y[n + k])`` over ``k = -(L-1)..L-1``.

    The shorter input is zero-padded to the longer one's length; entry ``i``
    of the result is lag ``i - (L - 1)``. Normalised by ``sqrt(E_x E_y)``
    so the lag-0 value is the normalised inner product.
    """
    x, y = _pad_pair(x, y)
    # np.correlate(y, x)[i] = sum_n y[n + k] conj(x[n]), k = i - (L-1)
    return np.conj(np.correlate(y, x, mode="full")) / _energy_norm(x, y)


def xcorr_lags(L: int) -> np.ndarray:
    return np.arange(-(L - 1), L)


def discrete_caf(x, y, l_range: tuple[int, int], doppler_step: float, t_step: float = 1.0) -> ComplexGrid:
    """Discrete cross-ambiguity function over Doppler rows ``l_range``.

    ``A[l, k] = sum_{n=0}^{L-1} x[n] conj(y[n + k]) exp(-j 2 pi (l doppler_step)(n t_step)) / E``

    with aperiodic (zero-padded) reads of ``y``. Columns are lags
    ``-(L-1)..L-1``; row ``l = 0`` equals :func:`linear_xcorr`.
    """
    x, y = _pad_pair(x, y)
    L = x.size
    norm = _energy_norm(x, y)
    ls = np.arange(l_range[0], l_range[1] + 1)
    n = np.arange(L)
    out = np.empty((ls.size, 2 * L - 1), dtype=np.complex128)
    for i, l in enumerate(ls):
        xl = x * np.exp(-2j * pi * (l * doppler_step) * (n * t_step))
        out[i] = np.conj(np.correlate(y, xl, mode="full"))
    return ComplexGrid(out / norm, l_range[0], -(L - 1), doppler_step, t_step)


def conv2d(x: ComplexGrid, y: ComplexGrid) -> ComplexGrid:
    """Full 2D linear convolution; output ranges are the Minkowski sums."""
    z = convolve2d(x.data, y.data, mode="full")
    return ComplexGrid(z, x.row_min + y.row_min, x.col_min + y.col_min, x.delta_f, x.delta_t)


def twisted_conv(x: ComplexGrid, y: ComplexGrid, alpha: float = 0.0) -> ComplexGrid:
    """Twisted convolution of ``x`` with ``y``.

    Loops over the smaller operand's nonzero samples and accumulates
    phase-weighted shifted copies of the larger one. Output metadata
    (bin sizes) is taken from ``x``.
    """
    zr0 = x.row_min + y.row_min
    zc0 = x.col_min + y.col_min
    z = np.zeros((x.shape[0] + y.shape[0] - 1, x.shape[1] + y.shape[1] - 1), dtype=np.complex128)
    two_pi_a = 2 * pi * alpha
    if y.data.size <= x.data.size:
        # term (a, b) of y: z[a + l, b + k] += y[a, b] x[l, k] e^{j2pi alpha a k}
        kx = x.cols()
        for i, j in zip(*np.nonzero(y.data)):
            a = y.row_min + i
            phase = np.exp(1j * two_pi_a * a * kx) if alpha else 1.0
            z[i:i + x.shape[0], j:j + x.shape[1]] += y.data[i, j] * (x.data * phase)
    else:
        # term (l, k) of x: z[l + a, k + b] += x[l, k] y[a, b] e^{j2pi alpha a k}
        ay = y.rows()
        for i, j in zip(*np.nonzero(x.data)):
            k = x.col_min + j
            phase = np.exp(1j * two_pi_a * k * ay)[:, None] if alpha else 1.0
            z[i:i + y.shape[0], j:j + y.shape[1]] += x.data[i, j] * (y.data * phase)
    return ComplexGrid(z, zr0, zc0, x.delta_f, x.delta_t)


def matched_filter_gamma(X: ComplexGrid, alpha: float = 0.0) -> ComplexGrid:
    """Twisted matched filter ``Gamma[l, k] = conj(X[-l, -k]) exp(j 2 pi alpha l k)``."""
    flipped = np.conj(X.data[::-1, ::-1])
    l = np.arange(-X.row_max, -X.row_min + 1)
    k = np.arange(-X.col_max, -X.col_min + 1)
    phase = np.exp(2j * pi * alpha * np.outer(l, k))
    return ComplexGrid(flipped * phase, -X.row_max, -X.col_max, X.delta_f, X.delta_t)


def twisted_acf(x: ComplexGrid, alpha: float = 0.0) -> ComplexGrid:
    """Matched-filter self response; equals ``energy(x)`` at the origin."""
    return twisted_conv(x, matched_filter_gamma(x, alpha), alpha)


def linear_acf2d(x: ComplexGrid) -> ComplexGrid:
    """2D linear ACF ``x *_2 conj(x[-m, -n])``; equals ``energy(x)`` at the origin."""
    return conv2d(x, matched_filter_gamma(x, 0.0))


def zc_acf_closed_form(u: int, w: int, N: int, r: int) -> float:
    """Magnitude of a length-``w`` windowed ZC autocorrelation at lag ``u``.

    ``|sin(pi w (-r u)_N / N)| / sin(pi (-r u)_N / N)``, with the limit
    value ``w`` when ``r u = 0 mod N``. Independent of where the window
    starts.
    """
    if N % 2 == 0 or gcd(r, N) != 1:
        raise ValueError("N must be odd and r coprime to N")
    x = (-r * u) % N
    if x == 0:
        return float(w)
    return abs(sin(pi * w * x / N)) / sin(pi * x / N)
