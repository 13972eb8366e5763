"""Runtime per Pauli of each measurement-code family against k, plus the best family per k."""
import argparse

from surgekit.tels import DEFAULT_FAMILIES, TimelikeModel, best_family, sweep_families


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=40)
    ap.add_argument("--delta", type=float, default=1e-15)
    ap.add_argument("--p", type=float, default=1e-3)
    ap.add_argument("--shortened", action="store_true")
    args = ap.parse_args()
    model = TimelikeModel(p=args.p)
    ks = range(2, args.kmax + 1)
    rows = sweep_families(ks, model, args.delta, shortened=args.shortened)
    fams = [f for f in DEFAULT_FAMILIES if any(r["family"] == f for r in rows)]
    print(f"{'k':>3} " + " ".join(f"{f:>10}" for f in fams) + "  best")
    for k in ks:
        cells = {r["family"]: r["runtime_per_pauli"] for r in rows if r["k"] == k}
        line = " ".join(f"{cells[f]:>10.2f}" if f in cells else f"{'-':>10}" for f in fams)
        print(f"{k:>3} {line}  {best_family(rows, k)}")


if __name__ == "__main__":
    main()
