#!/usr/bin/env python3
"""Look for Szabo rank variation on random metrics.

For each spec a probe point with nonzero nabla R is chosen and the
witness search runs on both pseudo-spheres. Reports how often plain
sampling sufficed and how often the inertia bisection was needed.
"""
import argparse
from collections import Counter

import numpy as np

from nilcurv.metrics import GradientMetric, PsiMetric
from nilcurv.polyfunc import random_poly
from nilcurv.verifier import Tolerances, refute_jordan_szabo, szabo_probe_point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--specs", type=int, default=30)
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    tol = Tolerances()
    rng = np.random.default_rng(args.seed)
    status, methods = Counter(), Counter()
    for k in range(args.specs):
        p = 2 + k % 3
        if k % 2:
            spec = GradientMetric(p, random_poly(p, 3, rng))
        else:
            spec = PsiMetric.from_entries(p, {(i, j): random_poly(p, 3, rng) for i in range(p) for j in range(i, p)})
        P = szabo_probe_point(spec, k, tol)
        rep = refute_jordan_szabo(spec, P, args.samples, tol, k)
        status[rep.status] += 1
        methods.update(rep.details.get("search", {}).values())
        if rep.status == "fail":
            print(f"spec {k} ({spec.family}, p={p}): {rep.details['ranks_found']}")
    print("status:", dict(status))
    print("search method per sign:", dict(methods))


if __name__ == "__main__":
    main()
