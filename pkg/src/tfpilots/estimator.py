"""Twisted matched filter, peak search, and closed-sum reference evaluations.

``filter_output`` is the production path. ``appendix_oracle_q`` evaluates
the fully expanded filter-output sum term by term and exists to check it;
``interference_sep`` and ``interference_stack`` evaluate the interference
term for the two 2D pilot families.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt
from typing import Sequence

import numpy as np

from .grid import ComplexGrid, GridIndex
from .sigops import matched_filter_gamma, twisted_conv
from .zc import zc_sequence

__all__ = [
    "EstimationResult",
    "matched_filter_gamma",
    "filter_output",
    "appendix_oracle_q",
    "interference_sep",
    "interference_stack",
    "estimate_dd",
]


@dataclass(frozen=True)
class EstimationResult:
    l_hat: int
    k_hat: int
    nu_hat: float
    tau_hat: float
    peak_magnitude: float
    q_grid: ComplexGrid | None = None

    def csv_line(self) -> str:
        return f"{self.l_hat},{self.k_hat},{self.nu_hat:.9g},{self.tau_hat:.9g},{self.peak_magnitude:.9g}"


def filter_output(Y: ComplexGrid, X: ComplexGrid, alpha: float = 0.0) -> ComplexGrid:
    """``Q = Y *_sigma Gamma`` with ``Gamma`` the twisted matched filter of ``X``."""
    return twisted_conv(Y, matched_filter_gamma(X, alpha), alpha)


def q_support(H: ComplexGrid, X: ComplexGrid) -> tuple[tuple[int, int], tuple[int, int]]:
    """Index ranges of ``filter_output(H *_sigma X, X)``."""
    rows = (H.row_min + X.row_min - X.row_max, H.row_max + X.row_max - X.row_min)
    cols = (H.col_min + X.col_min - X.col_max, H.col_max + X.col_max - X.col_min)
    return rows, cols


def appendix_oracle_q(H: ComplexGrid, X: ComplexGrid, alpha: float = 0.0) -> ComplexGrid:
    """Noiseless filter output by direct evaluation of the expanded sum.

    ``Q[l,k] = sum_{p,q} H[p,q] e^{j2pi alpha (lk - pq)}
    sum_a e^{j2pi alpha a (q - k)} sum_b X[a-p, b-q] conj(X[a-l, b-k])``

    Every (tap, a, b, l, k) term is formed explicitly, so memory grows as
    the product of all supports. Meant for small test cases only.
    """
    (r0, r1), (c0, c1) = q_support(H, X)
    ls = np.arange(r0, r1 + 1)
    ks = np.arange(c0, c1 + 1)
    a = np.arange(H.row_min + X.row_min, H.row_max + X.row_max + 1)
    b = np.arange(H.col_min + X.col_min, H.col_max + X.col_max + 1)
    # Xs[a, l, b, k] = X[a - l, b - k]
    da = a[:, None] - ls[None, :]
    db = b[:, None] - ks[None, :]
    W = X.window((da.min(), da.max()), (db.min(), db.max()))
    Xs = W[(da - da.min())[:, :, None, None], (db - db.min())[None, None, :, :]]
    Xs_conj = np.conj(Xs)
    out = np.zeros((ls.size, ks.size), dtype=np.complex128)
    for i, j in zip(*np.nonzero(H.data)):
        p, q = H.row_min + i, H.col_min + j
        C = X.window((a[0] - p, a[-1] - p), (b[0] - q, b[-1] - q))
        phase_ak = np.exp(2j * pi * alpha * np.outer(a, q - ks))
        inner = np.einsum("ab,albk,ak->lk", C, Xs_conj, phase_ak)
        out += H.data[i, j] * np.exp(2j * pi * alpha * (np.outer(ls, ks) - p * q)) * inner
    return ComplexGrid(out, r0, c0, H.delta_f, H.delta_t)


def _aperiodic(v: np.ndarray, lag: int) -> complex:
    """``sum_b v[b] conj(v[b + lag])`` with zero padding."""
    n = v.size
    if abs(lag) >= n:
        return 0j
    if lag >= 0:
        return complex(np.sum(v[:n - lag] * np.conj(v[lag:])))
    return complex(np.sum(v[-lag:] * np.conj(v[:n + lag])))


def interference_sep(H: ComplexGrid, M: int, N: int, r_f: int = 1, r_t: int = 1,
                     alpha: float = 0.0, at: GridIndex = GridIndex(0, 0)) -> complex:
    """Interference at ``at`` for the separable ZC pilot.

    Every tap other than the probed cell contributes its channel value
    times a frequency-axis self-ambiguity term (with the delay-dependent
    phase, evaluated numerically) and the time-axis ZC autocorrelation at
    the delay offset.
    """
    l, k = at
    u = zc_sequence(M, r_f)
    v = zc_sequence(N, r_t)
    total = 0j
    for i, j in zip(*np.nonzero(H.data)):
        p, q = H.row_min + i, H.col_min + j
        if (p, q) == (l, k):
            continue
        # sum_a e^{j2pi alpha a (q-k)} u[a-p] conj(u[a-l]) over rows where both exist
        a = np.arange(max(p, l), min(p, l) + M)
        if a.size == 0:
            continue
        amb = np.sum(np.exp(2j * pi * alpha * a * (q - k)) * u[a - p] * np.conj(u[a - l]))
        acf = _aperiodic(v, q - k)
        total += H.data[i, j] * np.exp(2j * pi * alpha * (l * k - p * q)) * amb * acf
    return complex(total)


def interference_stack(H: ComplexGrid, M: int, N: int, roots: Sequence[int],
                       alpha: float = 0.0, at: GridIndex = GridIndex(0, 0)) -> complex:
    """Approximate interference at ``at`` for the stacked ZC pilot.

    Each row-pair cross-correlation is replaced by its typical magnitude
    ``1/sqrt(N)`` (with the ``1/M`` row normalisation of a unit-energy
    pilot), leaving only the phase-coupling sum over overlapping rows.
    This is an approximation; the exact residual is
    ``appendix_oracle_q(H, X) - H``.
    """
    if len(roots) != M:
        raise ValueError(f"need {M} roots, got {len(roots)}")
    l, k = at
    scale = 1.0 / (M * sqrt(N))
    total = 0j
    for i, j in zip(*np.nonzero(H.data)):
        p, q = H.row_min + i, H.col_min + j
        if (p, q) == (l, k):
            continue
        a = np.arange(max(p, l), min(p, l) + M)
        if a.size == 0:
            continue
        rows_sum = np.sum(np.exp(2j * pi * alpha * a * (q - k)))
        total += H.data[i, j] * np.exp(2j * pi * alpha * (l * k - p * q)) * rows_sum
    return complex(scale * total)


def _pick_peak(mag: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> tuple[int, int]:
    """Argmax with ties broken by smaller delay, then smaller |Doppler|, then smaller Doppler."""
    idx = np.argwhere(mag == mag.max())
    if len(idx) == 1:
        i, j = idx[0]
        return int(rows[i]), int(cols[j])
    cands = [(int(cols[j]), abs(int(rows[i])), int(rows[i])) for i, j in idx]
    k, _, l = min(cands)
    return l, k


def estimate_dd(Y: ComplexGrid, X: ComplexGrid, alpha: float = 0.0,
                search: tuple[tuple[int, int], tuple[int, int]] | None = None,
                delta_f: float | None = None, T: float | None = None,
                keep_q: bool = False) -> EstimationResult:
    """LoS delay-Doppler estimate from the peak of ``|Q|``.

    Parameters
    ----------
    Y : ComplexGrid
        Received signal.
    X : ComplexGrid
        Pilot.
    alpha : float
        Phase coupling used by the channel.
    search : ((l_min, l_max), (k_min, k_max)), optional
        Inclusive Doppler and delay index region. Defaults to the whole
        filter output; cells outside it read as zero.
    delta_f, T : float, optional
        Bin sizes for the physical estimates; default to ``Y``'s metadata.
    keep_q : bool
        Attach the filter output to the result.
    """
    Q = filter_output(Y, X, alpha)
    if search is None:
        search = (Q.row_range, Q.col_range)
    (l0, l1), (k0, k1) = search
    if l0 > l1 or k0 > k1:
        raise ValueError(f"empty search region {search}")
    mag = np.abs(Q.window((l0, l1), (k0, k1)))
    l_hat, k_hat = _pick_peak(mag, np.arange(l0, l1 + 1), np.arange(k0, k1 + 1))
    delta_f = Y.delta_f if delta_f is None else delta_f
    T = Y.delta_t if T is None else T
    return EstimationResult(
        l_hat, k_hat, l_hat * delta_f, k_hat * T,
        float(mag[l_hat - l0, k_hat - k0]),
        Q if keep_q else None,
    )
