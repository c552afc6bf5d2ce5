"""Check the NMSE-versus-kappa trend properties over several master seeds.

Each seed runs the full desk sweep (about a minute on one core) and reports
which of the trend checks hold, so a single seed's luck is visible.

    python scripts/trend_seeds.py --seeds 0 1 2 3 4
"""

import argparse

from tfpilots.config import resolve_config
from tfpilots.scenario import run_sweep


def trend_checks(res, snr=5.0):
    two_d = ("separable", "stacked")
    out = {}
    out["a: kappa 0.9 beats 0.1"] = all(
        getattr(res.get(f, 0.9, snr), m) < getattr(res.get(f, 0.1, snr), m)
        for f in two_d for m in ("nmse_tau", "nmse_nu"))
    kappas = sorted({r.kappa for r in res.rows})
    spreads = []
    for m in ("nmse_tau", "nmse_nu"):
        vals = [getattr(res.get("zc1d", k, snr), m) for k in kappas]
        spreads.append(max(vals) / min(vals))
    out["b: 1D spread < 10x"] = max(spreads) < 10
    out["c: sep nu <= stacked nu at 0.5"] = (
        res.get("separable", 0.5, snr).nmse_nu <= res.get("stacked", 0.5, snr).nmse_nu)
    out["d: non-increasing in SNR at 0.7"] = all(
        getattr(res.get(f, 0.7, -5.0), m) >= getattr(res.get(f, 0.7, 0.0), m)
        >= getattr(res.get(f, 0.7, 5.0), m)
        for f in two_d for m in ("nmse_tau", "nmse_nu"))
    return out, spreads


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    args = ap.parse_args()
    for seed in args.seeds:
        res = run_sweep(resolve_config("desk", overrides={"sweep.seed": str(seed)}))
        checks, spreads = trend_checks(res)
        flags = "  ".join(f"{k}={'ok' if v else 'NO'}" for k, v in checks.items())
        print(f"seed {seed}: {flags}  1D spread tau={spreads[0]:.3g}x nu={spreads[1]:.3g}x", flush=True)


if __name__ == "__main__":
    main()
