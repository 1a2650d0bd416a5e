#!/usr/bin/env python3
"""Run the golden verification suite and print the bound table.

Writes the canonical suite config next to this script (golden_suite.json),
then executes it into the chosen output directory.  Exit status is nonzero
iff some case violates its bound beyond the discretization tolerance.

Usage: python scripts/run_golden_suite.py [--out OUT_DIR] [--jobs K]
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fingap.harness import golden_cases, run_suite  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/golden")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg_path = os.path.join(os.path.dirname(__file__), "golden_suite.json")
    config = {"cases": golden_cases()}
    with open(cfg_path, "w") as f:
        json.dump(config, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {cfg_path}")

    result = run_suite(config, out_dir=args.out, jobs=args.jobs)
    print(f"{'case':24s} {'lambda':>10s} {'bound':>10s} {'margin':>11s} verdict")
    for s in result.summaries:
        if s.get("error") is not None:
            print(f"{s['id']:24s} ERROR: {s['error']}")
            continue
        r = s["bound_report"]
        print(f"{r['case_id']:24s} {r['lambda_numeric']:10.6f} "
              f"{r['bound']:10.6f} {r['margin']:+11.3e} {r['verdict']}")
    print(f"outputs in {result.out_dir}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
