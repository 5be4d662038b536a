#!/usr/bin/env python3
"""Cross-check curvature routes on random polynomial metrics.

Prints the worst relative error per p and route pair, plus Ricci and
square residuals of the Jacobi operator at each point.
"""
import argparse
import json
import time

import numpy as np

from nilcurv.metrics import GradientMetric, PsiMetric, metric_at
from nilcurv.operators import jacobi_op, sample_unit
from nilcurv.polyfunc import random_poly
from nilcurv.tensor_engine import curvature
from nilcurv.verifier import point_streams, random_point, square_residual


def rel_err(a, b):
    return float(np.abs(a - b).max()) / max(float(np.abs(b).max()), np.finfo(float).tiny)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--specs", type=int, default=30)
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = {}
    t0 = time.perf_counter()
    for k in range(args.specs):
        p = 2 + k % 3
        psi = PsiMetric.from_entries(p, {(i, j): random_poly(p, args.degree, rng) for i in range(p) for j in range(i, p)})
        grad = GradientMetric(p, random_poly(p, args.degree, rng))
        row = rows.setdefault(p, {"closed_psi": 0.0, "hypersurface": 0.0, "ricci": 0.0, "jacobi_sq": 0.0})
        for spec, route in ((psi, "closed_psi"), (grad, "hypersurface")):
            for prng in point_streams(args.seed + k, args.points):
                P = random_point(spec, prng)
                general = curvature(spec, P, "general")
                row[route] = max(row[route], rel_err(curvature(spec, P, route).R, general.R))
                row["ricci"] = max(row["ricci"], float(np.abs(general.ricci).max()))
                gP = metric_at(spec, P)
                Z = sample_unit(spec, P, 1, prng, gP)
                row["jacobi_sq"] = max(row["jacobi_sq"], square_residual(jacobi_op(general, gP, Z).mat))
    print(json.dumps({str(p): r for p, r in sorted(rows.items())}, indent=2))
    print(f"{args.specs} specs x {args.points} points in {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
