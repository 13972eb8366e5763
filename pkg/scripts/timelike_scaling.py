"""Timelike failure rate against d_m at fixed layout, with the ansatz fit.

The default settings are the long acceptance run (10^6 trials per point).
"""
import argparse
import json
import math
import time

from surgekit.montecarlo import TrialConfig, fit_ansatz, run_trials, wilson_interval

CLASS = (0, 1, 0, 0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dx", type=int, default=5)
    ap.add_argument("--dz", type=int, default=7)
    ap.add_argument("--ell", type=int, default=3)
    ap.add_argument("--r", type=int, default=7)
    ap.add_argument("--dm", default="3,5,7")
    ap.add_argument("--p", type=float, default=1e-3)
    ap.add_argument("--eta", type=float, default=100.0)
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", help="write the results as JSON here")
    args = ap.parse_args()

    points = []
    for i, d_m in enumerate(int(x) for x in args.dm.split(",")):
        t0 = time.time()
        cfg = TrialConfig(args.dx, args.dz, args.ell, args.r, d_m, args.p, args.eta,
                          trials=args.trials, seed=args.seed + i)
        tally = run_trials(cfg, workers=args.workers)
        n = tally.count(CLASS)
        lo, hi = wilson_interval(n, args.trials)
        points.append({"d_m": d_m, "count": n, "trials": args.trials, "rate": n / args.trials,
                       "ci": [lo, hi], "all_classes": {"".join(map(str, c)): k
                                                       for c, k in sorted(tally.counts.items())},
                       "seconds": round(time.time() - t0, 1)})
        print(f"d_m={d_m}: {n}/{args.trials} rate {n / args.trials:.3e} "
              f"[{lo:.2e}, {hi:.2e}] ({points[-1]['seconds']} s)", flush=True)

    out = {"config": vars(args), "points": points}
    series = [(q["d_m"], q["rate"], math.sqrt(q["rate"] * (1 - q["rate"]) / q["trials"]))
              for q in points if q["count"] > 0]
    if len(series) >= 3:
        fit = fit_ansatz(series, args.p, "d_m", args.dx * args.ell)
        out["fit"] = fit.to_dict()
        print(f"fit: A={fit.A:.4g} B={fit.B:.4g} slope per d_m {math.log(fit.B * args.p) / 2:.3f}")
    else:
        print(f"fit skipped: only {len(series)} point(s) with nonzero counts")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(out, fh, indent=2)


if __name__ == "__main__":
    main()
