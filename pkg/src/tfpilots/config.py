"""Flat ``section.key=value`` run configuration.

Resolution order: preset, then config file, then command-line overrides,
then derived defaults. :func:`format_config` writes every field back out,
and feeding that file in again reproduces the same run.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Callable

from .scenario import PRESETS, ScenarioConfig
from .zc import PilotSpec


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in s.split(",") if tok.strip())


def _parse_ints(s: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in s.split(",") if tok.strip())


def _parse_words(s: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in s.split(",") if tok.strip())


def _opt(parse: Callable) -> Callable:
    def inner(s: str):
        return None if s.strip().lower() in ("auto", "none", "") else parse(s)
    return inner


def _parse_rate(s: str):
    # "match_speed": the rate that moves the UE at scenario.speed_kmph
    return None if s.strip().lower() in ("match_speed", "auto") else float(s)


def _fmt(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


# key -> (ScenarioConfig attribute or "pilot.<attr>" / "bs.<i>" / "center.<i>", parser)
KEYS: dict[str, tuple[str, Callable]] = {
    "scenario.bs_x": ("bs_position.0", float),
    "scenario.bs_y": ("bs_position.1", float),
    "scenario.center_x": ("circle_center.0", float),
    "scenario.center_y": ("circle_center.1", float),
    "scenario.radius": ("circle_radius", float),
    "scenario.angular_rate": ("angular_rate", _parse_rate),
    "scenario.carrier_freq": ("carrier_freq", _opt(float)),
    "scenario.nu_max": ("nu_max", float),
    "scenario.speed_kmph": ("speed_kmph", float),
    "scenario.num_instants": ("num_instants", int),
    "grid.delay_step": ("T", float),
    "grid.doppler_step": ("delta_f", float),
    "grid.delay_bins": ("delay_bins", int),
    "grid.doppler_bins": ("doppler_bins", int),
    "grid.doppler_span": ("doppler_span", str),
    "grid.alpha": ("alpha", _opt(float)),
    "channel.tau_max": ("tau_max", float),
    "channel.beta": ("beta", _opt(float)),
    "channel.normalize_nlos": ("normalize_nlos", _parse_bool),
    "channel.snr_reference": ("snr_reference", str),
    "sweep.kappa": ("kappa_list", _parse_floats),
    "sweep.snr_db": ("snr_db_list", _parse_floats),
    "sweep.trials": ("trials_per_point", int),
    "sweep.seed": ("master_seed", int),
    "sweep.families": ("families", _parse_words),
    "sweep.nmse_truth": ("nmse_truth", str),
    "sweep.workers": ("workers", int),
    "pilot.family": ("pilot.family", str),
    "pilot.m": ("pilot.M", int),
    "pilot.n": ("pilot.N", int),
    "pilot.l": ("pilot.L", _opt(int)),
    "pilot.r": ("pilot.r", int),
    "pilot.r_f": ("pilot.r_f", int),
    "pilot.r_t": ("pilot.r_t", int),
    "pilot.roots": ("pilot.roots", _opt(_parse_ints)),
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> value`` strings; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def apply_values(cfg: ScenarioConfig, values: dict[str, str]) -> ScenarioConfig:
    """Apply raw string values to ``cfg``; errors name the key."""
    top: dict = {}
    pilot: dict = {}
    for key, raw in values.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        attr, parse = KEYS[key]
        try:
            val = parse(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
        if attr.startswith("pilot."):
            pilot[attr.split(".", 1)[1]] = val
        elif "." in attr:
            name, idx = attr.split(".")
            cur = list(top.get(name, getattr(cfg, name)))
            cur[int(idx)] = val
            top[name] = tuple(cur)
        else:
            top[attr] = val
    out = replace(cfg, **top)
    if pilot:
        base = out.pilot
        # a different family invalidates family-specific derived choices
        if "family" in pilot and pilot["family"] != base.family:
            base = PilotSpec(family=pilot["family"], M=base.M, N=base.N,
                             r=base.r, r_f=base.r_f, r_t=base.r_t)
        if ("M" in pilot or "N" in pilot) and "L" not in pilot:
            pilot.setdefault("L", None)
        if ("M" in pilot or "N" in pilot) and "roots" not in pilot:
            pilot.setdefault("roots", None)
        out = replace(out, pilot=replace(base, **pilot))
    return out


def resolve_config(preset: str = "desk", config_path=None,
                   overrides: dict[str, str] | None = None) -> ScenarioConfig:
    """Preset, then file, then overrides, then derived defaults; validated."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; expected one of {', '.join(PRESETS)}")
    cfg = PRESETS[preset]()
    if config_path is not None:
        cfg = apply_values(cfg, load_config_file(config_path))
    if overrides:
        cfg = apply_values(cfg, overrides)
    try:
        return cfg.resolved()
    except ValueError as exc:
        raise ConfigError(f"pilot: {exc}") from exc


def config_values(cfg: ScenarioConfig) -> dict[str, str]:
    out = {}
    for key, (attr, _) in KEYS.items():
        if attr.startswith("pilot."):
            val = getattr(cfg.pilot, attr.split(".", 1)[1])
        elif "." in attr:
            name, idx = attr.split(".")
            val = getattr(cfg, name)[int(idx)]
        else:
            val = getattr(cfg, attr)
        out[key] = _fmt(val)
    return out


def format_config(cfg: ScenarioConfig) -> str:
    """Fully materialised config text, loadable by :func:`load_config_file`."""
    lines = ["# resolved configuration"]
    lines += [f"{k}={v}" for k, v in config_values(cfg).items()]
    return "\n".join(lines) + "\n"
