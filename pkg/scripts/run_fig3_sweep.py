"""NMSE versus kappa for the three pilot families, printed as a table.

    python scripts/run_fig3_sweep.py --preset desk --seed 0 --out results/fig3_desk.csv
"""

import argparse
from pathlib import Path

from tfpilots.cli import atomic_write
from tfpilots.config import format_config, resolve_config
from tfpilots.scenario import run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", choices=("desk", "paper"), default="desk")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/fig3.csv")
    args = ap.parse_args()

    overrides = {"sweep.seed": str(args.seed), "sweep.workers": str(args.workers)}
    if args.trials:
        overrides["sweep.trials"] = str(args.trials)
    cfg = resolve_config(args.preset, overrides=overrides)
    res = run_sweep(cfg)
    out = Path(args.out)
    atomic_write(out, res.to_csv())
    atomic_write(out.with_name(out.name + ".config"), format_config(cfg))

    for snr in cfg.snr_db_list:
        print(f"\nSNR {snr:g} dB   (nmse_tau / nmse_nu)")
        print("kappa  " + "  ".join(f"{fam:>21}" for fam in cfg.families))
        for kappa in cfg.kappa_list:
            cells = []
            for fam in cfg.families:
                r = res.get(fam, kappa, snr)
                cells.append(f"{r.nmse_tau:9.3e} / {r.nmse_nu:9.3e}")
            print(f"{kappa:5.2f}  " + "  ".join(cells))
    print(f"\nwrote {out}")


if __name__ == "__main__":
    main()
