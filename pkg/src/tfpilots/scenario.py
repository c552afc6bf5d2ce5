"""Circular-trajectory experiment and the Monte Carlo NMSE sweep.

A UE moves on a circle; at each sampling instant the LoS delay and Doppler
towards a fixed BS are computed from geometry, a Rician channel is drawn
around that LoS tap, the pilot is sent through it, and the twisted matched
filter estimates the LoS cell. NMSE is accumulated per (pilot, kappa, SNR).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .channel import (SNR_REFERENCES, DDChannelConfig, TruthOutsideGrid, apply_channel,
                      sample_channel, snap)
from .estimator import estimate_dd
from .zc import FAMILIES, PilotSpec, make_pilot, pilot_for_family

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_KAPPAS = tuple(round(0.1 * i, 10) for i in range(1, 11))
DEFAULT_SNRS = (-5.0, 0.0, 5.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a sweep needs; ``None`` fields are derived by :meth:`resolved`.

    Derived defaults: ``carrier_freq = nu_max c / speed``, ``beta =
    ln(100) / tau_max``, ``alpha = delta_f T``. ``angular_rate=None`` picks
    the rate that makes the UE move at ``speed_kmph`` on the circle; the
    default 0.014 rad/s follows the trajectory equations (176.4 km/h).
    """

    bs_position: tuple[float, float] = (9500.0, 9500.0)
    circle_center: tuple[float, float] = (4000.0, 4000.0)
    circle_radius: float = 3500.0
    angular_rate: float | None = 0.014
    carrier_freq: float | None = None
    nu_max: float = 1500.0
    speed_kmph: float = 200.0
    num_instants: int = 36

    T: float = 0.5e-6
    delta_f: float = 10.0
    delay_bins: int = 100
    doppler_bins: int = 150
    doppler_span: str = "signed"
    alpha: float | None = None

    tau_max: float = 50e-6
    beta: float | None = None
    normalize_nlos: bool = True
    snr_reference: str = "per_sample"

    kappa_list: tuple[float, ...] = DEFAULT_KAPPAS
    snr_db_list: tuple[float, ...] = DEFAULT_SNRS
    trials_per_point: int = 100
    master_seed: int = 0
    pilot: PilotSpec = field(default_factory=lambda: PilotSpec("separable", M=23, N=17))
    families: tuple[str, ...] = ("separable", "stacked", "zc1d")
    nmse_truth: str = "continuous"
    workers: int = 1

    def resolved(self) -> "ScenarioConfig":
        out = self
        if out.angular_rate is None:
            out = replace(out, angular_rate=out.speed_kmph / 3.6 / out.circle_radius)
        if out.carrier_freq is None:
            out = replace(out, carrier_freq=out.nu_max * SPEED_OF_LIGHT / (out.speed_kmph / 3.6))
        if out.beta is None:
            out = replace(out, beta=math.log(100.0) / out.tau_max)
        if out.alpha is None:
            out = replace(out, alpha=out.delta_f * out.T)
        return replace(out, pilot=out.pilot.resolved())

    @property
    def doppler_range(self) -> tuple[int, int]:
        if self.doppler_span == "signed":
            return (-self.doppler_bins, self.doppler_bins)
        # "total": doppler_bins counts every row, centred on zero
        lo = -(self.doppler_bins // 2)
        return (lo, lo + self.doppler_bins - 1)

    @property
    def search_region(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.doppler_range, (0, self.delay_bins - 1))

    def instants(self) -> np.ndarray:
        period = 2 * math.pi / self.resolved().angular_rate
        return np.arange(self.num_instants) * (period / self.num_instants)

    def validate(self) -> None:
        cfg = self.resolved()
        if cfg.trials_per_point < 1:
            raise ValueError("trials_per_point must be at least 1")
        if cfg.num_instants < 1:
            raise ValueError("num_instants must be at least 1")
        if cfg.doppler_span not in ("signed", "total"):
            raise ValueError(f"doppler_span must be 'signed' or 'total', got {cfg.doppler_span!r}")
        if cfg.snr_reference not in SNR_REFERENCES:
            raise ValueError(f"snr_reference must be one of {SNR_REFERENCES}, got {cfg.snr_reference!r}")
        if cfg.nmse_truth not in ("continuous", "snapped"):
            raise ValueError(f"nmse_truth must be 'continuous' or 'snapped', got {cfg.nmse_truth!r}")
        for fam in cfg.families:
            if fam not in FAMILIES:
                raise ValueError(f"unknown pilot family {fam!r}")
        for k in cfg.kappa_list:
            if not 0.0 <= k <= 1.0:
                raise ValueError(f"kappa {k} outside [0, 1]")
        for fam in cfg.families:
            pilot_for_family(fam, cfg.pilot).validate()
        lo, hi = cfg.doppler_range
        tau_lim = (cfg.delay_bins - 1) * cfg.T
        for t in cfg.instants():
            tau, nu = true_delay_doppler(t, cfg)
            if tau > tau_lim:
                raise TruthOutsideGrid(f"true delay {tau:.9g} s at t={t:.9g} s exceeds {tau_lim:.9g} s")
            if not lo * cfg.delta_f <= nu <= hi * cfg.delta_f:
                raise TruthOutsideGrid(
                    f"true Doppler {nu:.9g} Hz at t={t:.9g} s outside "
                    f"[{lo * cfg.delta_f:.9g}, {hi * cfg.delta_f:.9g}] Hz"
                )


def desk_preset(**overrides) -> ScenarioConfig:
    """Reduced grid that runs in seconds: 40 delay bins, Doppler +-40, 11x7 pilots."""
    cfg = ScenarioConfig(
        T=1.0e-6, delta_f=37.5, delay_bins=40, doppler_bins=40,
        pilot=PilotSpec("separable", M=11, N=7), trials_per_point=100,
    )
    return replace(cfg, **overrides)


def paper_preset(**overrides) -> ScenarioConfig:
    """Full-size grid: 100 delay bins of 0.5 us, Doppler +-150 bins of 10 Hz, 23x17 pilots."""
    return replace(ScenarioConfig(), **overrides)


PRESETS = {"desk": desk_preset, "paper": paper_preset}


# -- geometry ---------------------------------------------------------------

def ue_position(t: float, cfg: ScenarioConfig) -> tuple[float, float]:
    cfg = cfg.resolved() if cfg.angular_rate is None else cfg
    w = cfg.angular_rate * t
    cx, cy = cfg.circle_center
    return (cx + cfg.circle_radius * math.cos(w), cy + cfg.circle_radius * math.sin(w))


def ue_velocity(t: float, cfg: ScenarioConfig) -> tuple[float, float]:
    cfg = cfg.resolved() if cfg.angular_rate is None else cfg
    w = cfg.angular_rate * t
    s = cfg.circle_radius * cfg.angular_rate
    return (-s * math.sin(w), s * math.cos(w))


def true_delay_doppler(t: float, cfg: ScenarioConfig) -> tuple[float, float]:
    """LoS delay (s) and Doppler (Hz, positive when approaching) at time ``t``."""
    if cfg.carrier_freq is None or cfg.angular_rate is None:
        cfg = cfg.resolved()
    x, y = ue_position(t, cfg)
    vx, vy = ue_velocity(t, cfg)
    dx, dy = x - cfg.bs_position[0], y - cfg.bs_position[1]
    d = math.hypot(dx, dy)
    radial = (dx * vx + dy * vy) / d
    return d / SPEED_OF_LIGHT, -cfg.carrier_freq * radial / SPEED_OF_LIGHT


# -- metric -----------------------------------------------------------------

def nmse(true_vals: Iterable[float], est_vals: Iterable[float]) -> float:
    """``sum |true - est|^2 / sum |true|^2`` with compensated summation."""
    t = np.asarray(list(true_vals), dtype=float)
    e = np.asarray(list(est_vals), dtype=float)
    if t.shape != e.shape:
        raise ValueError(f"length mismatch: {t.size} true vs {e.size} estimated values")
    den = math.fsum(t * t)
    if den == 0.0:
        raise ValueError("NMSE undefined for an all-zero truth vector")
    return math.fsum((t - e) ** 2) / den


# -- sweep ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    pilot: str
    kappa: float
    snr_db: float
    trials: int
    nmse_tau: float
    nmse_nu: float
    hit_rate: float = float("nan")


@dataclass
class SweepResult:
    rows: list[SweepRow]

    HEADER = "pilot,kappa,snr_db,trials,nmse_tau,nmse_nu"

    def to_csv(self) -> str:
        lines = [self.HEADER]
        for r in self.rows:
            lines.append(
                f"{r.pilot},{r.kappa:.9g},{r.snr_db:.9g},{r.trials},{r.nmse_tau:.9g},{r.nmse_nu:.9g}"
            )
        return "\n".join(lines) + "\n"

    def get(self, pilot: str, kappa: float, snr_db: float) -> SweepRow:
        for r in self.rows:
            if r.pilot == pilot and math.isclose(r.kappa, kappa) and math.isclose(r.snr_db, snr_db):
                return r
        raise KeyError((pilot, kappa, snr_db))


def trial_rng(master_seed: int, kappa_idx: int, snr_idx: int, trial: int) -> np.random.Generator:
    """Per-trial generator; independent of the pilot so all pilots see the same channels."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, kappa_idx, snr_idx, trial]))


def channel_config(cfg: ScenarioConfig, tau: float, nu: float, kappa: float) -> DDChannelConfig:
    return DDChannelConfig(
        delay_bins=cfg.delay_bins, doppler_range=cfg.doppler_range, T=cfg.T,
        delta_f=cfg.delta_f, tau_los=tau, nu_los=nu, kappa=kappa, beta=cfg.beta,
        normalize_nlos=cfg.normalize_nlos, alpha=cfg.alpha,
    )


def run_trial(cfg: ScenarioConfig, pilot, kappa: float, snr_db: float, rng, t: float):
    """One estimate; returns ``(tau, nu, tau_hat, nu_hat, hit)``."""
    tau, nu = true_delay_doppler(t, cfg)
    ch_cfg = channel_config(cfg, tau, nu, kappa)
    H = sample_channel(ch_cfg, rng)
    Y = apply_channel(H, pilot, snr_db, rng, snr_reference=cfg.snr_reference)
    est = estimate_dd(Y, pilot, cfg.alpha, search=cfg.search_region, delta_f=cfg.delta_f, T=cfg.T)
    hit = (est.l_hat, est.k_hat) == tuple(H.los_index)
    if cfg.nmse_truth == "snapped":
        tau, nu = H.los_index.col * cfg.T, H.los_index.row * cfg.delta_f
    return tau, nu, est.tau_hat, est.nu_hat, hit


def _run_point(args) -> SweepRow:
    cfg, family, ki, si = args
    kappa, snr_db = cfg.kappa_list[ki], cfg.snr_db_list[si]
    pilot = make_pilot(pilot_for_family(family, cfg.pilot), cfg.delta_f, cfg.T)
    instants = cfg.instants()
    out = []
    for trial in range(cfg.trials_per_point):
        rng = trial_rng(cfg.master_seed, ki, si, trial)
        out.append(run_trial(cfg, pilot, kappa, snr_db, rng, instants[trial % cfg.num_instants]))
    tau, nu, tau_hat, nu_hat, hit = (np.array(col) for col in zip(*out))
    return SweepRow(family, kappa, snr_db, cfg.trials_per_point,
                    nmse(tau, tau_hat), nmse(nu, nu_hat), float(np.mean(hit)))


def run_sweep(cfg: ScenarioConfig) -> SweepResult:
    """NMSE for every (pilot family, kappa, SNR) in ``cfg``.

    Deterministic given ``master_seed``; ``workers > 1`` spreads points over
    processes without changing any result.
    """
    cfg = cfg.resolved()
    cfg.validate()
    tasks = [
        (cfg, fam, ki, si)
        for fam in cfg.families
        for si in range(len(cfg.snr_db_list))
        for ki in range(len(cfg.kappa_list))
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_point, tasks))
    else:
        rows = [_run_point(t) for t in tasks]
    return SweepResult(rows)


def quantization_nmse(cfg: ScenarioConfig, instants: np.ndarray | None = None) -> tuple[float, float]:
    """NMSE of perfectly detected, grid-snapped estimates (the resolution floor)."""
    cfg = cfg.resolved()
    ts = cfg.instants() if instants is None else instants
    truth = [true_delay_doppler(t, cfg) for t in ts]
    tau = [tt for tt, _ in truth]
    nu = [nn for _, nn in truth]
    tau_hat = [snap(tt / cfg.T) * cfg.T for tt in tau]
    nu_hat = [snap(nn / cfg.delta_f) * cfg.delta_f for nn in nu]
    return nmse(tau, tau_hat), nmse(nu, nu_hat)
