#!/usr/bin/env python3
"""Empirical sweep of lambda_1(K, N, d) in the curvature bound K.

Monotonicity in d (fixed K, N) is guaranteed and asserted in the tests;
monotonicity in K (fixed N, d) is only observed, so this script reports it
without asserting.  Rows marked '<' decrease relative to the previous K.

Usage: python scripts/curvature_sweep.py [--N 3] [--d 1.5]
"""

import argparse
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from fingap.model1d import lambda1_model, myers_length  # noqa: E402


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=float, default=3.0)
    ap.add_argument("--d", type=float, default=1.5)
    args = ap.parse_args()

    Ks = [-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0]
    print(f"N = {args.N}, d = {args.d}")
    print(f"{'K':>6s} {'lambda1(K,N,d)':>16s}  trend")
    prev = None
    monotone = True
    for K in Ks:
        if K > 0 and math.isfinite(args.N) and args.d > myers_length(K, args.N):
            print(f"{K:6.2f} {'(beyond max length)':>16s}")
            continue
        lam = lambda1_model(K, args.N, args.d)
        trend = ""
        if prev is not None:
            trend = ">" if lam > prev else "<"
            monotone &= lam >= prev
        print(f"{K:6.2f} {lam:16.8f}  {trend}")
        prev = lam
    print("observed: " + ("nondecreasing in K" if monotone
                          else "NOT monotone in K"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
