"""Run the bound-verification harness and print a one-line-per-claim summary.

Same engine as ``truncvar verify``; this script adds a compact table grouped
by claim, with the worst grid point per claim.

    python scripts/run_verification.py --paths 2000 --steps 1000 --seed 42
"""

from __future__ import annotations

import argparse
import json
import time

from truncvar import bounds
from truncvar.paths import SimConfig


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--claim", action="append", default=[])
    ap.add_argument("--json", help="also write the full reports here")
    args = ap.parse_args(argv)

    cfg = bounds.VerifyConfig(sim=SimConfig(args.steps, args.paths, args.seed),
                              threads=args.threads, claims=tuple(args.claim))
    start = time.perf_counter()
    reports = bounds.run_verification(cfg)
    elapsed = time.perf_counter() - start

    worst: dict[str, bounds.BoundReport] = {}
    for r in reports:
        prev = worst.get(r.claim_id)
        if prev is None or (prev.passed and not r.passed) or (prev.passed == r.passed and r.margin < prev.margin):
            worst[r.claim_id] = r
    print(f"{'claim':<24} {'kind':<11} {'ok':<5} {'worst margin':>13} {'SE':>10}  at (mu, c)")
    for cid in bounds.ALL_CLAIMS:
        r = worst.get(cid)
        if r is None:
            continue
        n_fail = sum(1 for x in reports if x.claim_id == cid and not x.passed)
        where = (r.config.get("mu"), r.config.get("c"))
        print(f"{cid:<24} {r.kind:<11} {str(r.passed):<5} {r.margin:13.4g} {r.combined_se:10.3g}  {where}"
              + (f"  [{n_fail} failing]" if n_fail else ""))
    print(f"{len(reports)} reports in {elapsed:.1f} s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([r.as_dict() for r in reports], fh, indent=2, sort_keys=True, default=float)
    return 0 if not any(r.counts_as_failure for r in reports) else 1


if __name__ == "__main__":
    raise SystemExit(main())
