"""Command-line entry point.

Subcommands ``gen-pilot``, ``acf``, ``caf``, ``dump-channel``, ``estimate``
and ``sweep``. Settings come from a preset, then ``--config``, then
``--set key=value`` and the dedicated flags. Exit status is 0 on success,
2 for configuration errors and 3 when a ground truth falls outside the grid.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .channel import TruthOutsideGrid, apply_channel, sample_channel
from .config import ConfigError, format_config, resolve_config
from .estimator import estimate_dd
from .grid import ComplexGrid, energy, fmt_num, format_grid, load_grid, write_triplets
from .scenario import channel_config, run_sweep, true_delay_doppler
from .sigops import discrete_caf, linear_acf2d, twisted_acf
from .zc import make_pilot

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temp file next to ``path``, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return v


# flag dest -> config key
_FLAG_KEYS = {
    "family": "pilot.family", "m": "pilot.m", "n": "pilot.n", "l": "pilot.l",
    "r": "pilot.r", "rf": "pilot.r_f", "rt": "pilot.r_t", "roots": "pilot.roots",
    "kappa_list": "sweep.kappa", "snr_list": "sweep.snr_db", "trials": "sweep.trials",
    "workers": "sweep.workers", "families": "sweep.families", "seed": "sweep.seed",
}


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--preset", choices=("desk", "paper"), default="desk")
    p.add_argument("--seed", type=_seed, help="master seed (overrides sweep.seed)")
    p.add_argument("--out", help="output path")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key; may repeat")
    p.add_argument("--echo-config", metavar="PATH", help="also write the fully resolved config here")
    return p


def _pilot_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--family", choices=("zc1d", "separable", "stacked", "stacked_transposed"))
    p.add_argument("--m", type=int, help="Doppler-axis size")
    p.add_argument("--n", type=int, help="delay-axis size")
    p.add_argument("--l", type=int, help="1D sequence length")
    p.add_argument("--r", type=int, help="1D root")
    p.add_argument("--rf", type=int, help="separable Doppler-axis root")
    p.add_argument("--rt", type=int, help="separable delay-axis root")
    p.add_argument("--roots", help="comma-separated stacked roots")
    return p


def build_parser() -> argparse.ArgumentParser:
    common, pilot = _common_parser(), _pilot_parser()
    parser = argparse.ArgumentParser(prog="tfpilots", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-pilot", parents=[common, pilot], help="write a pilot grid dump")
    p.set_defaults(func=cmd_gen_pilot)

    p = sub.add_parser("acf", parents=[common, pilot], help="ACF (or 1D CAF) magnitude surface")
    p.add_argument("--twisted", action="store_true", help="twisted ACF instead of the 2D linear ACF")
    p.add_argument("--alpha", type=float, help="phase coupling (default: grid.alpha)")
    p.add_argument("--caf", action="store_true", help="ambiguity surface of a 1D pilot")
    _caf_flags(p)
    p.add_argument("--physical", action="store_true", help="axes in seconds and Hz instead of bins")
    p.set_defaults(func=cmd_acf)

    p = sub.add_parser("caf", parents=[common, pilot], help="ambiguity surface of a 1D ZC pilot")
    _caf_flags(p)
    p.add_argument("--physical", action="store_true", help="axes in seconds and Hz instead of bins")
    p.set_defaults(func=cmd_caf)

    p = sub.add_parser("dump-channel", parents=[common], help="draw one channel realisation")
    p.add_argument("--kappa", type=float, default=1.0, help="Rician factor (default 1)")
    p.add_argument("--t", type=float, default=0.0, help="trajectory time in seconds (default 0)")
    p.add_argument("--tau", type=float, help="LoS delay in seconds (overrides --t)")
    p.add_argument("--nu", type=float, help="LoS Doppler in Hz (overrides --t)")
    p.add_argument("--triplets", help="also write |H| as x y z triplets")
    p.set_defaults(func=cmd_dump_channel)

    p = sub.add_parser("estimate", parents=[common, pilot], help="single-shot LoS estimate")
    p.add_argument("--pilot", help="pilot dump (default: generate from pilot flags)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--channel", help="channel dump; the pilot is sent through it")
    src.add_argument("--received", help="received-signal dump")
    p.add_argument("--snr", type=float, default=math.inf, help="SNR in dB when using --channel")
    p.add_argument("--alpha", type=float, help="phase coupling (default: grid.alpha)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", parents=[common], help="Monte Carlo NMSE sweep")
    p.add_argument("--kappa", dest="kappa_list", help="comma-separated kappa grid")
    p.add_argument("--snr", dest="snr_list", help="comma-separated SNRs in dB")
    p.add_argument("--trials", type=int, help="trials per point")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--families", help="comma-separated pilot families")
    p.set_defaults(func=cmd_sweep)
    return parser


def _caf_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--doppler-rows", type=int, help="Doppler rows -R..R (default L-1)")
    p.add_argument("--doppler-step", type=float,
                   help="Doppler step in cycles per sample (default 1/L)")


def _overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    for dest, key in _FLAG_KEYS.items():
        val = getattr(args, dest, None)
        if val is not None:
            out[key] = str(val)
    return out


def _config(args):
    cfg = resolve_config(args.preset, args.config, _overrides(args))
    if args.echo_config:
        atomic_write(args.echo_config, format_config(cfg))
    return cfg


def _triplets_text(g: ComplexGrid, physical: bool) -> str:
    buf = io.StringIO()
    write_triplets(g, buf, physical=physical)
    return buf.getvalue()


def _write_surface(g: ComplexGrid, out: str, physical: bool) -> None:
    """``x y z`` magnitude triplets at ``out`` plus the complex dump beside it."""
    out = Path(out)
    dump = out.with_suffix(".grid")
    if dump == out:
        dump = out.with_name(out.name + ".grid")
    atomic_write(out, _triplets_text(g, physical))
    atomic_write(dump, format_grid(g))
    print(f"wrote {out} and {dump}")


def _surface_report(g: ComplexGrid) -> list[str]:
    """Origin magnitude, largest sidelobe, and largest sidelobe on the delay axis."""
    mag = np.abs(g.data)
    side = mag.copy()
    if g.contains(0, 0):
        side[-g.row_min, -g.col_min] = 0.0
    i, j = np.unravel_index(np.argmax(side), side.shape)
    lines = [
        f"peak={fmt_num(abs(g.at(0, 0)))}",
        f"max_sidelobe={fmt_num(side[i, j])} at l={g.row_min + i},k={g.col_min + j}",
    ]
    if g.row_min <= 0 <= g.row_max:
        lines.append(f"max_sidelobe_delay_axis={fmt_num(side[-g.row_min].max())}")
    return lines


def cmd_gen_pilot(args) -> int:
    cfg = _config(args)
    X = make_pilot(cfg.pilot, cfg.delta_f, cfg.T)
    atomic_write(args.out or "pilot.grid", format_grid(X))
    spec = cfg.pilot
    print(f"family={spec.family}")
    print(f"shape={X.shape[0]}x{X.shape[1]}")
    if spec.family in ("stacked", "stacked_transposed"):
        print("roots=" + ",".join(str(r) for r in spec.roots))
    if spec.family == "zc1d":
        print(f"L={spec.L} r={spec.r}")
    print(f"energy={energy(X):.9f}")
    return EXIT_OK


def _caf_surface(args, cfg) -> ComplexGrid:
    X = make_pilot(cfg.pilot)
    if X.shape[0] != 1:
        raise ConfigError("the ambiguity surface needs a 1D pilot; use --family zc1d")
    x = X.data[0]
    L = x.size
    rows = L - 1 if args.doppler_rows is None else args.doppler_rows
    step = 1.0 / L if args.doppler_step is None else args.doppler_step
    if rows < 0:
        raise ConfigError("--doppler-rows must be non-negative")
    caf = discrete_caf(x, x, (-rows, rows), step)
    # attach physical bin sizes: Doppler step in Hz for a sample spacing T
    return ComplexGrid(caf.data, caf.row_min, caf.col_min, step / cfg.T, cfg.T)


def cmd_acf(args) -> int:
    cfg = _config(args)
    if args.caf:
        S = _caf_surface(args, cfg)
    else:
        X = make_pilot(cfg.pilot, cfg.delta_f, cfg.T)
        if args.twisted:
            alpha = cfg.alpha if args.alpha is None else args.alpha
            S = twisted_acf(X, alpha)
        else:
            S = linear_acf2d(X)
    _write_surface(S, args.out or "acf.dat", args.physical)
    for line in _surface_report(S):
        print(line)
    return EXIT_OK


def cmd_caf(args) -> int:
    if args.family is None:
        args.family = "zc1d"
    cfg = _config(args)
    S = _caf_surface(args, cfg)
    _write_surface(S, args.out or "caf.dat", args.physical)
    for line in _surface_report(S):
        print(line)
    return EXIT_OK


def cmd_dump_channel(args) -> int:
    cfg = _config(args)
    tau, nu = true_delay_doppler(args.t, cfg)
    tau = tau if args.tau is None else args.tau
    nu = nu if args.nu is None else args.nu
    rng = np.random.default_rng(cfg.master_seed)
    H = sample_channel(channel_config(cfg, tau, nu, args.kappa), rng)
    atomic_write(args.out or "channel.grid", format_grid(H.grid))
    if args.triplets:
        atomic_write(args.triplets, _triplets_text(H.grid, True))
    print(f"tau_los={fmt_num(tau)}")
    print(f"nu_los={fmt_num(nu)}")
    print(f"los_index={H.los_index.row},{H.los_index.col}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg = _config(args)
    X = load_grid(args.pilot) if args.pilot else make_pilot(cfg.pilot, cfg.delta_f, cfg.T)
    alpha = cfg.alpha if args.alpha is None else args.alpha
    if args.channel:
        H = load_grid(args.channel)
        rng = np.random.default_rng(cfg.master_seed)
        Y = apply_channel(H, X, args.snr, rng, alpha=alpha, snr_reference=cfg.snr_reference)
        search = (H.row_range, H.col_range)
        delta_f, T = H.delta_f, H.delta_t
    else:
        Y = load_grid(args.received)
        search = cfg.search_region
        delta_f, T = cfg.delta_f, cfg.T
    est = estimate_dd(Y, X, alpha, search=search, delta_f=delta_f, T=T, keep_q=bool(args.out))
    if args.out:
        atomic_write(args.out, _triplets_text(est.q_grid, True))
    print("l_hat,k_hat,nu_hat_hz,tau_hat_s,peak")
    print(est.csv_line())
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    result = run_sweep(cfg)
    out = Path(args.out or "sweep.csv")
    atomic_write(out, result.to_csv())
    sidecar = out.with_name(out.name + ".config")
    atomic_write(sidecar, format_config(cfg))
    print(f"wrote {out} ({len(result.rows)} rows)")
    print(f"wrote {sidecar}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruthOutsideGrid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
