"""Command-line interface: ``truncvar {simulate,compute,closed-form,verify,trade}``.

Exit codes: 0 success, 1 a verified claim failed, 2 usage or domain error,
3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path as FsPath

import numpy as np

from . import bounds
from . import closed_forms as cf
from .errors import ConsistencyError, DomainError, InfeasibleError, ParameterError, SeriesTruncationError
from .paths import ModelParams, SimConfig, generate_bm_path, generate_gbm_price_path, read_path_csv, write_path_csv
from .trading import commission_threshold, max_return_bound, optimal_trades, realized_return
from .variation import dtv_linear, tv_linear, utv_argmax_partition, utv_linear

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_CONSISTENCY = 0, 1, 2, 3
IDENTITY_TOL = 1e-9
SEED_ENV = "TRUNCVAR_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True, default=_json_default) + "\n"


def _emit(text: str, out_file: str | None):
    if out_file:
        try:
            with open(out_file, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out_file}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def _table(rows: list[dict], columns: list[str]) -> str:
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) if cells else len(c) for k, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([r.get(c) for c in columns])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return "" if v is None else str(v)


def _render(payload, rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return _dump_json(payload)
    if fmt == "csv":
        return _csv(rows, columns)
    return _table(rows, columns)


# --- simulate ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    params = ModelParams(mu=args.mu, sigma=args.sigma, c=1.0, horizon_T=args.T)
    sim = SimConfig(args.steps, args.paths, _seed(args))
    out_dir = FsPath(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create {out_dir}: {exc.strerror}") from None
    gen = generate_gbm_price_path if args.process == "gbm" else generate_bm_path
    files = []
    for i in range(sim.n_paths):
        target = out_dir / f"path_{i:05d}.csv"
        try:
            write_path_csv(gen(params, sim.n_steps, sim.seed, i), target)
        except OSError as exc:
            raise UsageError(f"cannot write {target}: {exc.strerror}") from None
        files.append(target.name)
    meta = {
        "command": "simulate",
        "config": {"mu": params.mu, "sigma": params.sigma, "horizon_T": params.horizon_T,
                   "process": args.process, **asdict(sim)},
        "files": files,
    }
    _emit(_dump_json(meta), None)
    return EXIT_OK


# --- compute ----------------------------------------------------------------------------


def cmd_compute(args) -> int:
    path = read_path_csv(args.input)
    c = args.c
    kinds = ("tv", "utv", "dtv") if args.kind == "all" else (args.kind,)
    funcs = {"tv": tv_linear, "utv": utv_linear, "dtv": dtv_linear}
    result = {k: funcs[k](path, c) for k in kinds}
    if args.partition:
        if args.kind == "dtv":
            part = utv_argmax_partition(-path.values, c)
        else:
            part = utv_argmax_partition(path, c)
        result["partition"] = [list(p) for p in part.pairs]
    payload = {"command": "compute", "config": {"input": str(args.input), "c": c, "kind": args.kind,
                                                 "n_samples": len(path)}, **result}
    rows = [{"quantity": k, "value": result[k]} for k in kinds]
    _emit(_render(payload, rows, ["quantity", "value"], args.format), args.out)
    return EXIT_OK


# --- closed-form ------------------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.formula} needs --{' --'.join(missing)}")


def cmd_closed_form(args) -> int:
    f = args.formula
    out: dict = {"formula": f}
    if f == "expected-tc":
        _need(args, "c")
        out["value"] = cf.expected_tc(args.mu, args.c)
    elif f == "ratio":
        _need(args, "c")
        out["value"] = cf.tc_moment_ratio(args.mu, args.c)
    elif f == "hv-tail":
        _need(args, "c", "y")
        out["value"] = cf.hv_tail(args.mu, args.c, args.y)
    elif f == "hv-mean":
        _need(args, "c")
        out["value"] = cf.hv_mean(args.mu, args.c)
    elif f == "gdbar":
        _need(args, "y", "T")
        cfg = cf.SeriesConfig(args.max_terms, args.tol)
        sv = cf.drawup_cdf_complement(args.y, args.mu, args.T, cfg)
        out.update(value=sv.value, n_terms=sv.n_terms, residual=sv.residual, form=sv.form)
    elif f == "eigenroots":
        _need(args, "mu_y")
        roots = cf.eigenroots(args.mu_y, args.n)
        out.update(theta=list(roots.theta), eta=roots.eta, mu_y=roots.mu_y)
    elif f == "sup-mgf":
        _need(args, "alpha", "T")
        out["value"] = cf.sup_bm_mgf(args.alpha, args.mu, args.T)
    elif f == "exp-bound":
        _need(args, "alpha", "c", "T")
        b = cf.exp_moment_upper_bound(args.alpha, ModelParams(mu=args.mu, c=args.c, horizon_T=args.T))
        out.update(value=b.value, delta=b.delta, n_factors=b.n_factors, denominator=b.denominator)
    out["config"] = {k: getattr(args, k) for k in ("mu", "c", "y", "T", "alpha", "mu_y", "n")
                     if getattr(args, k) is not None}
    rows = [{"key": k, "value": v} for k, v in out.items() if k not in ("config", "formula")]
    _emit(_render(out, rows, ["key", "value"], args.format), args.out)
    return EXIT_OK


# --- verify -----------------------------------------------------------------------------


def _plot_rows(reports) -> list[dict]:
    rows = []
    for r in reports:
        mu, c = r.config.get("mu"), r.config.get("c")
        for x, lhs, rhs in r.points:
            rows.append({"claim_id": r.claim_id, "mu": mu, "c": c, "x": x, "lhs": lhs, "rhs": rhs})
    return rows


def cmd_verify(args) -> int:
    sim = SimConfig(args.steps, args.paths, _seed(args))
    claims = tuple(args.claim or ())
    unknown = [c for c in claims if not any(bounds.claim_selected(a, [c]) for a in bounds.ALL_CLAIMS)]
    if unknown:
        raise UsageError(f"unknown claim filter(s): {', '.join(unknown)}")
    cfg = bounds.VerifyConfig(sim=sim, horizon_T=args.T, alpha=args.alpha,
                              threads=args.threads, refine=args.refine, claims=claims)
    reports = bounds.run_verification(cfg)
    low_power = sim.n_paths < bounds.LOW_POWER_PATHS
    if low_power:
        print(f"warning: {sim.n_paths} paths is below {bounds.LOW_POWER_PATHS}; "
              "statistical reports are low-power and advisory", file=sys.stderr)
    payload = [r.as_dict() for r in reports]
    rows = [
        {"claim_id": r.claim_id, "mu": r.config.get("mu"), "c": r.config.get("c"),
         "lhs": bounds._value(r.lhs), "rhs": bounds._value(r.rhs), "margin": r.margin,
         "se": r.combined_se, "passed": r.passed}
        for r in reports
    ]
    _emit(_render(payload, rows, ["claim_id", "mu", "c", "lhs", "rhs", "margin", "se", "passed"], args.format), args.out)
    if args.plot_csv:
        _emit(_csv(_plot_rows(reports), ["claim_id", "mu", "c", "x", "lhs", "rhs"]), args.plot_csv)
    failed = [r.claim_id for r in reports if r.counts_as_failure]
    if failed:
        print(f"failed: {', '.join(sorted(set(failed)))}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


# --- trade ------------------------------------------------------------------------------


def cmd_trade(args) -> int:
    path = read_path_csv(args.input)
    gamma = args.gamma
    c = commission_threshold(gamma)
    plan = optimal_trades(path, gamma)
    realized = realized_return(path, plan)
    bound = max_return_bound(path, gamma)
    utv = utv_linear(np.log(path.values), c) if len(path) else 0.0
    if not math.isclose(realized, bound, rel_tol=IDENTITY_TOL, abs_tol=IDENTITY_TOL):
        raise ConsistencyError(f"optimal return {realized!r} differs from the bound {bound!r}")
    payload = {
        "command": "trade",
        "config": {"input": str(args.input), "gamma": gamma, "n_samples": len(path)},
        "c": c,
        "utv": utv,
        "max_return": bound,
        "realized_return": realized,
        "trades": [list(t) for t in plan.trades],
    }
    rows = [{"buy": t, "sell": s} for t, s in plan.trades]
    _emit(_render(payload, rows, ["buy", "sell"], args.format), args.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="truncvar", description="Truncated variation of Brownian paths.")
    sub = p.add_subparsers(dest="command", required=True)

    def common_out(sp, formats=True):
        sp.add_argument("--out", help="write the report here instead of stdout")
        if formats:
            sp.add_argument("--format", choices=("json", "csv", "table"), default="json")

    s = sub.add_parser("simulate", help="write simulated paths as CSV files")
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--paths", type=int, default=1)
    s.add_argument("--seed", type=int)
    s.add_argument("--process", choices=("bm", "gbm"), default="bm")
    s.add_argument("--out", default=".", help="output directory")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("compute", help="TV / UTV / DTV of a path CSV")
    s.add_argument("input")
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--kind", choices=("all", "tv", "utv", "dtv"), default="all")
    s.add_argument("--partition", action="store_true", help="include the maximising partition")
    common_out(s)
    s.set_defaults(func=cmd_compute)

    s = sub.add_parser("closed-form", help="evaluate an analytic formula")
    s.add_argument("formula", choices=("expected-tc", "ratio", "hv-tail", "hv-mean", "gdbar",
                                       "eigenroots", "sup-mgf", "exp-bound"))
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--c", type=float)
    s.add_argument("--y", type=float)
    s.add_argument("--T", type=float)
    s.add_argument("--alpha", type=float)
    s.add_argument("--mu-y", dest="mu_y", type=float)
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--max-terms", type=int, default=cf.SeriesConfig().max_terms)
    s.add_argument("--tol", type=float, default=cf.SeriesConfig().term_tolerance)
    common_out(s)
    s.set_defaults(func=cmd_closed_form)

    s = sub.add_parser("verify", help="run the bound-verification harness")
    s.add_argument("--paths", type=int, default=2000)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--seed", type=int)
    s.add_argument("--T", type=float, default=1.0, help="horizon for the fixed-T checks")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--claim", action="append", help="claim id or prefix, e.g. THM_3_4 (repeatable)")
    s.add_argument("--refine", action="store_true", help="add an n / 2n grid comparison")
    s.add_argument("--plot-csv", help="write tidy (claim_id, x, lhs, rhs) rows here")
    common_out(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("trade", help="optimal trades under a flat commission")
    s.add_argument("input", help="price CSV (time,value)")
    s.add_argument("--gamma", type=float, required=True)
    common_out(s)
    s.set_defaults(func=cmd_trade)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConsistencyError as exc:
        print(f"error: internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (UsageError, ParameterError, DomainError, InfeasibleError, SeriesTruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
