"""Acceptance criteria 1-10.

Each criterion is a plain function returning (ok, summary) so the file also
runs as a script: ``python3 tests/test_acceptance.py`` prints one line per
criterion. Under pytest the same lines are collected and printed in the
terminal summary.
"""
import functools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, quadratic_f, random_gradient, random_psi  # noqa: E402
from nilcurv.cli import run as cli_run  # noqa: E402
from nilcurv.metrics import (  # noqa: E402
    AffineMetric,
    FlatMetric,
    GradientMetric,
    ProductMetric,
    load_metric,
    metric_at,
)
from nilcurv.operators import make_plane, skew_op  # noqa: E402
from nilcurv.polyfunc import PolyMap  # noqa: E402
from nilcurv.spectral import jordan_equivalent  # noqa: E402
from nilcurv.tensor_engine import curvature, second_fundamental  # noqa: E402
from nilcurv.verifier import (  # noqa: E402
    Tolerances,
    ip_counterexample_planes,
    point_streams,
    random_point,
    refute_jordan_szabo,
    szabo_rank,
    verify_affine_link,
    verify_all,
    verify_ip_class,
    verify_jordan_osserman_class,
    verify_product_theorem,
    verify_rank_law_jacobi,
    verify_ricci_flat,
    verify_trinity_nilpotent,
)

METRICS = Path(__file__).resolve().parents[1] / "scripts" / "metrics"
N_SPECS = 100
N_GRADIENT = 30
TOL = Tolerances(rank=1e-8, zero=1e-10)


@functools.lru_cache(maxsize=None)
def psi_sweep():
    rng = np.random.default_rng(20240601)
    return [random_psi(2 + k % 3, rng) for k in range(N_SPECS)]


@functools.lru_cache(maxsize=None)
def gradient_sweep():
    rng = np.random.default_rng(20240602)
    return [random_gradient(2 + k % 3, rng) for k in range(N_GRADIENT)]


def rel_err(a, b):
    denom = max(float(np.abs(b).max()), np.finfo(float).tiny)
    return float(np.abs(a - b).max()) / denom


def criterion_1():
    t0 = time.perf_counter()
    worst_psi = worst_grad = 0.0
    for k, spec in enumerate(psi_sweep()):
        for rng in point_streams(k, 10):
            P = random_point(spec, rng)
            worst_psi = max(worst_psi, rel_err(curvature(spec, P, "closed_psi").R, curvature(spec, P, "general").R))
    for k, spec in enumerate(gradient_sweep()):
        for rng in point_streams(1000 + k, 10):
            P = random_point(spec, rng)
            worst_grad = max(worst_grad,
                             rel_err(curvature(spec, P, "hypersurface").R, curvature(spec, P, "general").R))
    elapsed = time.perf_counter() - t0
    ok = worst_psi <= 1e-9 and worst_grad <= 1e-9 and elapsed < 30.0
    return ok, (f"{N_SPECS} psi specs x 10 points, closed vs general rel err {worst_psi:.2e}; "
                f"{N_GRADIENT} gradient specs, hypersurface vs general {worst_grad:.2e}; {elapsed:.1f} s")


def criterion_2():
    worst, vectors, planes, failed = 0.0, None, None, 0
    for k, spec in enumerate(psi_sweep()):
        rep = verify_trinity_nilpotent(spec, n_points=10, n_samples=25, tol=TOL, seed=k, n_planes=10)
        worst = max(worst, *rep.details["max_square_residual"].values())
        vectors = rep.samples["unit_vectors"] if vectors is None else min(vectors, rep.samples["unit_vectors"])
        planes = rep.samples["planes"] if planes is None else min(planes, rep.samples["planes"])
        failed += rep.status != "pass"
    ok = failed == 0 and vectors >= 500 and planes >= 300
    return ok, (f"{N_SPECS} specs, >= {vectors} unit vectors and >= {planes} planes each; "
                f"max ||A^2||/(1+||A||^2) = {worst:.2e}; spectra all {{0}}; {failed} failing specs")


def criterion_3():
    worst = 0.0
    for k, spec in enumerate(psi_sweep()):
        worst = max(worst, verify_ricci_flat(spec, 10, TOL, k).details["max_abs_ricci"])
    return worst <= 1e-10, f"max |rho_ij| = {worst:.2e} over {N_SPECS} specs x 10 points"


def criterion_4():
    parts, ok = [], True
    for p in (2, 3, 4):
        rep = verify_rank_law_jacobi(GradientMetric(p, quadratic_f([1] * p)), 200, TOL, seed=p)
        seen = rep.details["ranks_observed"]
        good = rep.status == "pass" and all(seen[s] == [p - 1] for s in ("1", "-1"))
        ok &= good
        parts.append(f"definite p={p}: ranks {seen['1']}/{seen['-1']}")
    rep = verify_rank_law_jacobi(GradientMetric(3, quadratic_f([1, 1, -1])), 200, TOL, seed=3)
    drawn = rep.details["ranks_observed_random_draws"]
    good = rep.status == "pass" and all(drawn[s] == [1, 2] for s in ("1", "-1"))
    ok &= good
    parts.append(f"indefinite p=3: ranks from random draws {drawn['1']}/{drawn['-1']}")
    rep = verify_rank_law_jacobi(GradientMetric(2, quadratic_f([1, -1])), 200, TOL, seed=2)
    seen = rep.details["ranks_observed"]
    good = rep.status == "pass" and all(seen[s] == [1] for s in ("1", "-1"))
    ok &= good
    parts.append(f"indefinite p=2: ranks {seen['1']}/{seen['-1']}")
    return ok, "; ".join(parts)


def criterion_5():
    rep = verify_jordan_osserman_class(GradientMetric(3, quadratic_f([1, 1, 1])), 200, TOL, seed=5)
    profiles = {}
    for pt in rep.details["per_point"]:
        for s, counts in pt["profiles"].items():
            for key, c in counts.items():
                profiles[key] = profiles.get(key, 0) + c
    ok = rep.status == "pass" and set(profiles) == {"2,2,1,1"}
    return ok, f"p=3 definite, profiles over S+ and S-: {profiles}"


def criterion_6():
    spec = GradientMetric(3, quadratic_f([1, 1, 1]))
    rep = verify_ip_class(spec, 200, TOL, seed=6, eps_values=(0.1,))
    tally = rep.details["rank_tally"]
    block = rep.details["mixed_counterexample"]
    pi2 = block["pi2"][0]
    ok = (tally == {"spacelike": {"2": 200}, "timelike": {"2": 200}}
          and block["pi1"]["norm"] <= 1e-12
          and pi2["eps"] == 0.1 and pi2["type"] == "mixed"
          and abs(pi2["gram_det"] + 4) <= 0.1 and pi2["rank"] == 2
          and not pi2["jordan_equivalent_to_pi1"])
    # independent recheck of the equivalence call on freshly built operators
    P = np.asarray(block["point"])
    gP, curv = metric_at(spec, P), curvature(spec, P)
    pi1, pi2_vecs = ip_counterexample_planes(3, 0.1)
    A1 = skew_op(curv, gP, make_plane(gP, *pi1)).mat
    A2 = skew_op(curv, gP, make_plane(gP, *pi2_vecs)).mat
    ok = ok and not jordan_equivalent(A1, A2, TOL.rank)
    return ok, (f"rank tally {tally}; ||R(pi1)|| = {block['pi1']['norm']:.1e}; pi2(0.1) {pi2['type']}, "
                f"det {pi2['gram_det']:.4f}, rank {pi2['rank']}, Jordan equivalent {pi2['jordan_equivalent_to_pi1']}")


def szabo_example():
    f = PolyMap(3, {(3, 0, 0): 1.0, (1, 2, 0): 1.0, (2, 0, 0): 0.5, (0, 2, 0): 0.5, (0, 0, 2): 0.5})
    return GradientMetric(3, f)


def criterion_7():
    spec = szabo_example()
    P = np.array([0.1, -0.2, 0.3, 0.4, -0.5, 0.6])
    curv = curvature(spec, P, nabla=True)
    gP = metric_at(spec, P)
    assert np.abs(curv.nablaR).max() > 1e-6 and second_fundamental(spec.f, P).nondegenerate
    rep = refute_jordan_szabo(spec, P, 1000, TOL, seed=7)
    by_sign: dict[int, set] = {1: set(), -1: set()}
    recheck = True
    for w in rep.witnesses:
        Z = np.asarray(w["vector"])
        recheck &= abs(Z @ gP.g @ Z - w["sign"]) <= 1e-9
        recheck &= szabo_rank(spec, P, Z, TOL) == w["measured"]["rank"]
        by_sign[w["sign"]].add(w["measured"]["rank"])
    ok = rep.status == "refuted-as-expected" and recheck and all(len(v) >= 2 for v in by_sign.values())
    return ok, (f"ranks on S+ {sorted(by_sign[1])}, on S- {sorted(by_sign[-1])}; search {rep.details['search']}; "
                f"random draws used {rep.samples['used']}; witnesses re-verified: {bool(recheck)}")


def criterion_8():
    base = GradientMetric(2, quadratic_f([1, 1]))
    parts, ok = [], True
    for a, b in ((2, 0), (0, 2), (1, 1)):
        rep = verify_product_theorem(ProductMetric(base, FlatMetric(a, b)), 200, TOL, seed=10 * a + b)
        table = rep.details["table"]
        varying = [k for k, v in table.items() if not v["expected_constant"]]
        # every varying cell must carry witnesses of at least two distinct ranks
        witnessed = len({w["measured"]["rank"] for w in rep.witnesses}) >= 2 if varying else True
        ok &= rep.status == "pass" and witnessed
        cells = ", ".join(f"{k} {v['observed']}" for k, v in sorted(table.items()))
        parts.append(f"({a},{b}): {cells}")
    return ok, "; ".join(parts)


def criterion_9():
    cases = {
        "gamma=0": AffineMetric.from_entries(2, {}),
        "triangular p=3": load_metric(str(METRICS / "affine_nilpotent.json")),
        "non-nilpotent control": load_metric(str(METRICS / "affine_non_nilpotent.json")),
    }
    want = {"gamma=0": True, "triangular p=3": True, "non-nilpotent control": False}
    parts, ok = [], True
    for name, spec in cases.items():
        d = verify_affine_link(spec, 200, TOL, seed=9).details
        good = d["verdicts_match"] and d["affine_nilpotent"] is want[name]
        ok &= good
        parts.append(f"{name}: affine {d['affine_nilpotent']}, metric {d['metric_nilpotent']}")
    return ok, "; ".join(parts)


def criterion_10(tmp_dir: Path | None = None):
    specs = [psi_sweep()[0], GradientMetric(3, quadratic_f([1, 1, -1]))]
    same = all(
        [r.to_json() for r in verify_all(s, 3, 30, TOL, seed=4)] == [r.to_json() for r in verify_all(s, 3, 30, TOL, seed=4)]
        for s in specs)
    cli_same = True
    if tmp_dir is not None:
        outs = []
        out = tmp_dir / "run.json"  # identical argv, so the same --out path
        for _ in range(2):
            cli_run(["verify-all", "--metric", str(METRICS / "gradient_indefinite.json"), "--samples", "30",
                     "--points", "3", "--seed", "11", "--out", str(out)])
            outs.append(out.read_bytes())
        cli_same = outs[0] == outs[1]
    return same and cli_same, f"verify_all reports byte-identical: {same}; CLI output files identical: {cli_same}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def record(n, ok, summary):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {summary}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n):
    ok, summary = CRITERIA[n - 1]()
    record(n, ok, summary)
    assert ok, summary


def test_criterion_10_reproducible(tmp_path):
    ok, summary = criterion_10(tmp_path)
    record(10, ok, summary)
    assert ok, summary


if __name__ == "__main__":
    import tempfile

    results = []
    for n, crit in enumerate(CRITERIA, start=1):
        if n == 10:
            with tempfile.TemporaryDirectory() as d:
                ok, summary = crit(Path(d))
        else:
            ok, summary = crit()
        record(n, ok, summary)
        results.append(ok)
    sys.exit(0 if all(results) else 1)
