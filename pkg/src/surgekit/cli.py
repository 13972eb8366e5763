"""Command-line entry point: ``surgekit {simulate,fit,tels,estimate,verify}``.

Exit codes: 0 success, 1 bad input or configuration, 2 budget infeasible,
3 internal error (including a failed verification).
"""
import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BudgetInfeasible, InternalError, SurgekitError

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_INTERNAL = 0, 1, 2, 3

SIM_COLUMNS = ["d_x", "d_z", "l", "r", "dm", "p", "eta", "trials", "class", "count", "rate",
               "ci_low", "ci_high"]
GEOMETRY = {"d_m": ("dm", lambda r: int(r["d_x"]) * int(r["l"])),
            "d_z": ("d_z", lambda r: int(r["d_x"])),
            "d_x": ("d_x", lambda r: int(r["d_z"]))}


class UsageError(SurgekitError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("SURGEKIT_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def _int_range(text: str) -> list:
    out = []
    for part in text.split(","):
        if ".." in part:
            a, b = part.split("..")
            out += list(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return out


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"bad JSON in {path}: {e}") from None


def _emit(args, name: str, text: str, config, started: float):
    """Write ``text`` to --out/name (plus a manifest) or to stdout."""
    if not args.out:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8", newline="\n")
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    manifest = {
        "subcommand": args.command,
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_clock_s": round(time.time() - started, 3),
        "outputs": [name],
    }
    (out / f"{Path(name).stem}.manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                                          encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .montecarlo import TrialConfig, run_trials

    started = time.time()
    raw = _load_json(args.config) if args.config else {}
    configs = raw if isinstance(raw, list) else raw.get("runs", [raw])
    rows = []
    for i, c in enumerate(configs):
        c = dict(c)
        if args.seed is not None:
            c["seed"] = args.seed + i
        if args.trials is not None:
            c["trials"] = args.trials
        cfg = TrialConfig.from_dict(c)
        tally = run_trials(cfg, workers=_threads(args))
        for cls, n, rate, lo, hi in tally.rows():
            rows.append([cfg.d_x, cfg.d_z, cfg.ell, cfg.r, cfg.d_m, cfg.p, cfg.eta, cfg.trials,
                         cls, n, f"{rate:.6e}", f"{lo:.6e}", f"{hi:.6e}"])
    _emit(args, "simulate.csv", _csv_text(SIM_COLUMNS, rows), {"configs": configs, "seed": args.seed},
          started)
    return EXIT_OK


def cmd_fit(args) -> int:
    from .montecarlo import fit_ansatz

    started = time.time()
    try:
        with open(args.csv, encoding="utf-8") as fh:
            data = [r for r in csv.DictReader(fh) if r["class"] == args.failure_class]
    except FileNotFoundError:
        raise UsageError(f"csv not found: {args.csv}") from None
    col, geom = GEOMETRY[args.exponent]
    ps = {float(r["p"]) for r in data}
    if len(ps) > 1:
        raise UsageError("fit needs a single value of p")
    series, g = [], []
    for r in data:
        n, t = int(r["count"]), int(r["trials"])
        if n == 0:
            continue
        rate = n / t
        series.append((int(r[col]), rate, np.sqrt(rate * (1 - rate) / t)))
        g.append(geom(r))
    fit = fit_ansatz(series, ps.pop() if ps else 1.0, args.exponent, g if g else 1.0)
    out = {"A": fit.A, "B": fit.B, "exponent": fit.exponent, "covariance": fit.covariance,
           "points": len(series)}
    _emit(args, "fit.json", json.dumps(out, indent=2) + "\n", vars(args), started)
    return EXIT_OK


def cmd_tels(args) -> int:
    from .tels import (DEFAULT_FAMILIES, MeasurementCode, TimelikeModel, plan_tels, plan_unencoded,
                       sweep_families)

    started = time.time()
    model = TimelikeModel(A=args.A, B=args.B, area=args.area, p=args.p)
    if args.code:
        # a single custom code against the unencoded baseline at the same k
        code = MeasurementCode.from_json(_load_json(args.code))
        plan = plan_tels(code, model, args.delta, per_pauli=not args.per_block)
        base = plan_unencoded(code.k, model, args.delta, per_pauli=not args.per_block)
        rows = [{"k": code.k, "family": code.family, "n": code.n, "d": code.d, "dm": plan.d_m,
                 "runtime_per_pauli": plan.runtime_per_pauli,
                 "ratio": plan.runtime / base.runtime}]
    else:
        fams = args.families.split(",") if args.families else DEFAULT_FAMILIES
        rows = sweep_families(_int_range(args.k), model, args.delta, fams, shortened=args.shortened)
    text = _csv_text(["k", "family", "n", "d", "dm", "runtime_per_pauli", "ratio"],
                     [[r["k"], r["family"], r["n"], r["d"], r["dm"], f"{r['runtime_per_pauli']:.6f}",
                       f"{r['ratio']:.6f}"] for r in rows])
    _emit(args, "tels.csv", text, vars(args), started)
    return EXIT_OK


def cmd_estimate(args) -> int:
    from . import resources as res

    started = time.time()
    if args.table1:
        rows = []
        for e in res.table1():
            o = e.O_total
            rows.append([e.L, e.h, e.w, e.d_x, e.d_z, e.d_m, e.N_phys, e.N_core, e.N_2,
                         f"{float(o):.4f}", f"{o.numerator}/{o.denominator}"])
        text = _csv_text(["L", "h", "w", "d_x", "d_z", "d_m", "N_phys", "N_core", "N_cache",
                          "O_total", "O_total_exact"], rows)
        _emit(args, "table1.csv", text, {"table1": True}, started)
        return EXIT_OK
    if not args.config:
        raise UsageError("estimate needs --config or --table1")
    cfg = _load_json(args.config)
    try:
        L, h, w = cfg["L"], cfg["h"], cfg["w"]
    except KeyError as e:
        raise UsageError(f"missing key {e}") from None
    d_x, d_z, d_m = cfg.get("d_x"), cfg.get("d_z"), cfg.get("d_m")
    if None in (d_x, d_z, d_m):
        if "mu" not in cfg:
            raise UsageError("mu is required when distances are not given")
        d_x, d_z, d_m = res.select_distances(cfg["mu"], cfg.get("p", 1e-3), cfg.get("delta", 0.01),
                                             h, w, L)
    est = res.hubbard_pipeline(L, h, w, d_x, d_z, d_m, cfg.get("t_magic"), cfg.get("mu"))
    _emit(args, "estimate.json", json.dumps(est.to_dict(), indent=2) + "\n", cfg, started)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .pauli import PauliOperator
    from .protocols import verify_cache_swap, verify_pbc_equivalence, verify_twist_free

    started = time.time()
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    reports = []
    if args.protocol in ("twist-free", "all"):
        for s in args.pauli or ["YY", "YXZ", "XZY"]:
            reports.append(verify_twist_free(PauliOperator.from_string(s), args.trials,
                                             max(1, args.trials // 10), rng))
    if args.protocol in ("pbc", "all"):
        reports.append(verify_pbc_equivalence(rng, trials=min(args.trials, 100)))
    if args.protocol in ("cache", "all"):
        reports.append(verify_cache_swap(rng, trials=min(args.trials, 20)))
    text = json.dumps([r.to_json() for r in reports], indent=2, default=float) + "\n"
    _emit(args, "verify.json", text, vars(args), started)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="surgekit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True, threads=False):
        sp.add_argument("--out", help="output directory (default: stdout)")
        if seed:
            sp.add_argument("--seed", type=int)
        if threads:
            sp.add_argument("--threads", type=int)

    s = sub.add_parser("simulate", help="Monte Carlo X⊗X surgery trials")
    s.add_argument("--config", help="JSON config (object, list, or {'runs': [...]})")
    s.add_argument("--trials", type=int)
    common(s, threads=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit", help="fit A (B p)^((d+1)/2) to a simulate CSV")
    s.add_argument("--csv", required=True)
    s.add_argument("--class", dest="failure_class", default="0100")
    s.add_argument("--exponent", choices=sorted(GEOMETRY), default="d_m")
    common(s, seed=False)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("tels", help="measurement-code family sweep")
    s.add_argument("--k", default="2..40")
    s.add_argument("--delta", type=float, default=1e-15)
    s.add_argument("--p", type=float, default=1e-3)
    s.add_argument("--area", type=float, default=100.0)
    s.add_argument("--A", type=float, default=0.01634)
    s.add_argument("--B", type=float, default=21.93)
    s.add_argument("--families")
    s.add_argument("--shortened", action="store_true")
    s.add_argument("--code", help="JSON {'G': [[...]], 'family': name} for a custom code")
    s.add_argument("--per-block", action="store_true", help="delta is per block, not per Pauli")
    common(s, seed=False, threads=True)
    s.set_defaults(func=cmd_tels)

    s = sub.add_parser("estimate", help="core-cache resource estimate")
    s.add_argument("--config")
    s.add_argument("--table1", action="store_true")
    common(s, seed=False)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("verify", help="logical-level protocol checks")
    s.add_argument("protocol", nargs="?", default="all", choices=["twist-free", "pbc", "cache", "all"])
    s.add_argument("--pauli", action="append")
    s.add_argument("--trials", type=int, default=1000)
    common(s)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as e:          # --help / --version
        return int(e.code or 0)
    except BudgetInfeasible as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except InternalError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (SurgekitError, ValueError, KeyError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {e!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
