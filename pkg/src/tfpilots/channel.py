"""Rician delay-Doppler channel and the noisy twisted-convolution link."""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, exp, inf, isfinite, sqrt

import numpy as np

from .grid import ComplexGrid, GridIndex, energy
from .sigops import twisted_conv

SNR_REFERENCES = ("total", "per_sample")


class ChannelError(ValueError):
    """Invalid channel configuration."""


class TruthOutsideGrid(ChannelError):
    """A LoS delay or Doppler does not fit the channel grid."""


def snap(x: float) -> int:
    """Nearest integer, ties toward zero."""
    n = int(ceil(abs(x) - 0.5))
    return n if x >= 0 else -n


def pdp(tau: float, tau_los: float, beta: float) -> float:
    """Exponential power-delay profile, zero before the LoS delay."""
    if beta < 0:
        raise ChannelError("beta must be non-negative")
    if tau < tau_los:
        return 0.0
    return exp(-beta * tau)


@dataclass(frozen=True)
class DDChannelConfig:
    """Delay-Doppler grid and Rician channel parameters.

    Delays are ``k = 0..delay_bins-1`` (step ``T`` seconds); Doppler rows
    span ``doppler_range`` inclusive (step ``delta_f`` Hz).

    With ``normalize_nlos`` (default) the power-delay profile is referenced
    to the LoS delay, so the LoS tap is 1, and the NLoS part is scaled to
    unit expected total power. Otherwise the LoS tap is ``pdp(k_los T)``
    and every NLoS cell has variance ``pdp(k T)`` as written.
    """

    delay_bins: int
    doppler_range: tuple[int, int]
    T: float
    delta_f: float
    tau_los: float
    nu_los: float
    kappa: float
    beta: float
    normalize_nlos: bool = True
    alpha: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "doppler_range", (int(self.doppler_range[0]), int(self.doppler_range[1])))
        if self.alpha is None:
            object.__setattr__(self, "alpha", self.delta_f * self.T)

    @property
    def los_index(self) -> GridIndex:
        return GridIndex(snap(self.nu_los / self.delta_f), snap(self.tau_los / self.T))

    def validate(self) -> None:
        if self.delay_bins < 1:
            raise ChannelError("delay_bins must be positive")
        lo, hi = self.doppler_range
        if lo > hi:
            raise ChannelError(f"empty Doppler range {self.doppler_range}")
        if not (self.T > 0 and self.delta_f > 0):
            raise ChannelError("T and delta_f must be positive")
        if not (0.0 <= self.kappa <= 1.0):
            raise ChannelError(f"kappa must lie in [0, 1], got {self.kappa}")
        if self.beta < 0:
            raise ChannelError(f"beta must be non-negative, got {self.beta}")
        # allow half a bin of slack: the grid-snapped index is what must fit
        if not (0.0 <= self.tau_los <= (self.delay_bins - 1) * self.T * (1 + 1e-12)):
            raise TruthOutsideGrid(
                f"tau_los={self.tau_los:.9g} s outside [0, {(self.delay_bins - 1) * self.T:.9g}] s"
            )
        if not (lo * self.delta_f * (1 + 1e-12) <= self.nu_los <= hi * self.delta_f * (1 + 1e-12)):
            raise TruthOutsideGrid(
                f"nu_los={self.nu_los:.9g} Hz outside [{lo * self.delta_f:.9g}, {hi * self.delta_f:.9g}] Hz"
            )
        if not np.isfinite(self.alpha):
            raise ChannelError("alpha must be finite")


@dataclass(frozen=True)
class DDChannel:
    grid: ComplexGrid
    los_index: GridIndex
    config: DDChannelConfig

    @property
    def alpha(self) -> float:
        return self.config.alpha


def nlos_variances(cfg: DDChannelConfig) -> np.ndarray:
    """Per-cell NLoS variance on the channel grid, LoS cell excluded."""
    l_los, k_los = cfg.los_index
    tau_grid = k_los * cfg.T
    n_rows = cfg.doppler_range[1] - cfg.doppler_range[0] + 1
    k = np.arange(cfg.delay_bins)
    if cfg.normalize_nlos:
        prof = np.array([pdp(kk * cfg.T - tau_grid, 0.0, cfg.beta) if kk >= k_los else 0.0 for kk in k])
    else:
        prof = np.array([pdp(kk * cfg.T, tau_grid, cfg.beta) if kk >= k_los else 0.0 for kk in k])
    var = np.tile(prof, (n_rows, 1))
    var[l_los - cfg.doppler_range[0], k_los] = 0.0
    if cfg.normalize_nlos:
        total = var.sum()
        if total > 0:
            var = var / total
    return var


def los_amplitude(cfg: DDChannelConfig) -> float:
    if cfg.normalize_nlos:
        return 1.0
    k_los = cfg.los_index.col
    return pdp(k_los * cfg.T, k_los * cfg.T, cfg.beta)


def sample_channel(cfg: DDChannelConfig, rng: np.random.Generator) -> DDChannel:
    """Draw ``H = kappa H_LoS + sqrt(1 - kappa^2) H_NLoS``.

    The LoS tap sits at the grid cell nearest ``(nu_los, tau_los)``. The
    power-delay profile starts at that snapped delay, so no tap precedes
    the LoS tap. NLoS cells are independent circular complex Gaussians;
    the LoS cell's NLoS draw is zeroed.
    """
    cfg.validate()
    l_los, k_los = cfg.los_index
    lo, hi = cfg.doppler_range
    if not (lo <= l_los <= hi and 0 <= k_los < cfg.delay_bins):
        raise TruthOutsideGrid(f"snapped LoS index {(l_los, k_los)} outside the channel grid")
    shape = (hi - lo + 1, cfg.delay_bins)
    g = rng.standard_normal((2,) + shape)
    nlos = (g[0] + 1j * g[1]) * np.sqrt(nlos_variances(cfg) / 2.0)
    h = sqrt(max(1.0 - cfg.kappa ** 2, 0.0)) * nlos
    h[l_los - lo, k_los] += cfg.kappa * los_amplitude(cfg)
    grid = ComplexGrid(h, lo, 0, cfg.delta_f, cfg.T)
    return DDChannel(grid, GridIndex(l_los, k_los), cfg)


def noise_variance(X: ComplexGrid, snr_db: float, snr_reference: str = "total") -> float:
    """Per-sample noise variance for ``snr_db``.

    ``"total"``: ``1 / SNR`` regardless of the pilot. ``"per_sample"``:
    SNR is relative to the pilot's mean sample power ``energy(X) / X.size``.
    """
    if snr_reference not in SNR_REFERENCES:
        raise ChannelError(f"snr_reference must be one of {SNR_REFERENCES}, got {snr_reference!r}")
    if not isfinite(snr_db):
        if snr_db > 0:
            return 0.0
        raise ChannelError("SNR of -inf dB")
    var = 10.0 ** (-snr_db / 10.0)
    if snr_reference == "per_sample":
        var *= energy(X) / X.data.size
    return var


def apply_channel(H: DDChannel | ComplexGrid, X: ComplexGrid, snr_db: float = inf,
                  rng: np.random.Generator | None = None, *, alpha: float | None = None,
                  snr_reference: str = "total") -> ComplexGrid:
    """``Y = H *_sigma X + W`` over the full output support.

    ``W`` is i.i.d. circular complex Gaussian with the variance from
    :func:`noise_variance`; nothing is drawn when the SNR is infinite.
    """
    if isinstance(H, DDChannel):
        alpha = H.alpha if alpha is None else alpha
        H = H.grid
    elif alpha is None:
        alpha = H.delta_f * H.delta_t
    Y = twisted_conv(H, X, alpha)
    var = noise_variance(X, snr_db, snr_reference)
    if var == 0.0:
        return Y
    if rng is None:
        raise ValueError("a random generator is required for finite SNR")
    g = rng.standard_normal((2,) + Y.shape)
    return Y.replace(data=Y.data + (g[0] + 1j * g[1]) * sqrt(var / 2.0))
