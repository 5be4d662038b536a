import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import poly, quadratic_f, random_gradient, random_psi
from nilcurv.metrics import AffineMetric, FlatMetric, GradientMetric, ProductMetric, PsiMetric
from nilcurv.polyfunc import PolyMap
from nilcurv.verifier import (
    Tolerances,
    applicable_properties,
    attainable_plane_types,
    check_local_symmetry,
    expected_ranks,
    refute_jordan_szabo,
    split_budget,
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

CUBIC_F = poly(3, ((3, 0, 0), 1.0), ((1, 2, 0), 1.0), ((2, 0, 0), 0.5), ((0, 2, 0), 0.5), ((0, 0, 2), 0.5))


def zero_psi(p):
    return PsiMetric.from_entries(p, {})


def triangular_affine():
    return AffineMetric.from_entries(3, {(0, 0, 2): poly(3, ((0, 2, 0), 1.0))})


def non_nilpotent_affine():
    return AffineMetric.from_entries(2, {(0, 0, 1): poly(2, ((0, 1), 1.0))})


def assert_witnessed(report):
    if report.status in ("fail", "refuted-as-expected"):
        assert report.witnesses, f"{report.property} {report.status} without witness"
        for w in report.witnesses:
            assert "point" in w and "measured" in w


# -- trinity / Ricci -------------------------------------------------------------------------

@settings(max_examples=5)
@given(st.integers(0, 1000), st.integers(2, 3))
def test_trinity_passes_on_random_psi(seed, p):
    spec = random_psi(p, np.random.default_rng(seed))
    r = verify_trinity_nilpotent(spec, n_points=2, n_samples=10, seed=seed, n_planes=4)
    assert r.status == "pass"
    assert r.samples["unit_vectors"] == 2 * 2 * 10


def test_trinity_trivial_cases():
    r = verify_trinity_nilpotent(zero_psi(2), 2, 5, seed=1)
    assert r.status == "pass" and r.details["max_square_residual"]["jacobi"] == 0.0
    prod = ProductMetric(GradientMetric(2, quadratic_f([1, 1])), FlatMetric(1, 1))
    assert verify_trinity_nilpotent(prod, 2, 10, seed=1).status == "pass"


def test_trinity_fails_with_witness_on_non_nilpotent_affine():
    r = verify_trinity_nilpotent(non_nilpotent_affine(), 2, 10, seed=0, n_planes=2)
    assert r.status == "fail"
    assert_witnessed(r)


def test_gradient_and_expanded_psi_give_identical_verdicts():
    g = random_gradient(3, np.random.default_rng(3))
    a = verify_trinity_nilpotent(g, 2, 10, seed=5, n_planes=3)
    b = verify_trinity_nilpotent(g.expanded, 2, 10, seed=5, n_planes=3)
    assert a.status == b.status == "pass"
    assert a.samples == b.samples


def test_ricci_flat_cases():
    assert verify_ricci_flat(random_psi(3, np.random.default_rng(0)), 5).status == "pass"
    assert verify_ricci_flat(zero_psi(2), 2).status == "pass"
    assert verify_ricci_flat(FlatMetric(1, 2), 2).status == "pass"


def test_ricci_flat_fails_on_non_flat_affine_extension():
    # the Riemannian extension of a non Ricci-flat connection is not Ricci flat
    r = verify_ricci_flat(non_nilpotent_affine(), 3)
    assert r.status == "fail"
    assert_witnessed(r)


# -- rank law and Jordan Osserman ------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 4])
def test_rank_law_definite(p):
    r = verify_rank_law_jacobi(GradientMetric(p, quadratic_f([1] * p)), n=30, n_points=3)
    assert r.status == "pass"
    assert r.details["ranks_observed"] == {"1": [p - 1], "-1": [p - 1]}


def test_rank_law_indefinite_hits_both_branches():
    r = verify_rank_law_jacobi(GradientMetric(3, quadratic_f([1, -1, 1])), n=30, n_points=3)
    assert r.status == "pass"
    assert r.details["ranks_observed"] == {"1": [1, 2], "-1": [1, 2]}
    assert sum(r.details["tally"]["1"]["null"].values()) > 0


def test_rank_law_skips_degenerate_points():
    f = poly(2, ((3, 0), 1.0), ((0, 2), 0.5))  # Hessian degenerate on x1 = 0 only
    r = verify_rank_law_jacobi(GradientMetric(2, f), n=10, n_points=2)
    assert r.status == "pass"
    with pytest.raises(ValueError):
        verify_rank_law_jacobi(zero_psi(2))


def test_jordan_osserman_cases():
    r2 = verify_jordan_osserman_class(GradientMetric(2, quadratic_f([1, -1])), n=20, n_points=2)
    assert r2.status == "pass"
    r3 = verify_jordan_osserman_class(GradientMetric(3, quadratic_f([1, 1, 1])), n=20, n_points=2)
    assert r3.status == "pass"
    assert all(set(pt["profiles"]["1"]) == {"2,2,1,1"} for pt in r3.details["per_point"])
    r3i = verify_jordan_osserman_class(GradientMetric(3, quadratic_f([1, -1, 1])), n=20, n_points=2)
    assert r3i.status == "refuted-as-expected"
    ranks = {w["measured"]["rank"] for w in r3i.witnesses}
    assert ranks == {1, 2}
    assert_witnessed(r3i)


# -- skew-symmetric curvature -----------------------------------------------------------------

def test_ip_class_gradient_counterexample_block():
    r = verify_ip_class(GradientMetric(3, quadratic_f([1, 1, 1])), n=20, n_points=2)
    assert r.status == "pass"
    block = r.details["mixed_counterexample"]
    assert block["pi1"]["type"] == "mixed" and block["pi1"]["rank"] == 0
    for entry in block["pi2"]:
        assert entry["type"] == "mixed" and entry["rank"] == 2
        assert abs(entry["gram_det"] + 4) <= 0.1
        assert entry["jordan_equivalent_to_pi1"] is False
    assert r.details["verdicts"]["mixed_jordan_ip"] is False
    assert r.details["rank_tally"]["spacelike"] == {"2": 20}


def test_ip_class_psi_only_checks_nilpotency():
    r = verify_ip_class(random_psi(2, np.random.default_rng(1)), n=6, n_points=2)
    assert r.status == "pass" and "mixed_counterexample" not in r.details


def test_ip_eps_is_halved_until_mixed():
    # psi_22 = 600 at the origin turns pi2(0.1) spacelike; halving restores a mixed plane
    f = poly(2, ((2, 0), 0.5), ((0, 2), 0.5), ((0, 1), np.sqrt(600.0)))
    r = verify_ip_class(GradientMetric(2, f), n=2, n_points=1, eps_values=(0.1,))
    block = r.details["mixed_counterexample"]
    assert block["log"] and block["pi2"][0]["eps"] < 0.1
    assert block["pi2"][0]["type"] == "mixed"


# -- Szabo ------------------------------------------------------------------------------------

def test_szabo_refutation_and_witness_recheck():
    spec = GradientMetric(3, CUBIC_F)
    P = np.zeros(6)
    r = refute_jordan_szabo(spec, P, n=1000, seed=0)
    assert r.status == "refuted-as-expected"
    for sign in ("1", "-1"):
        assert len(r.details["ranks_found"][sign]) >= 2
    for w in r.witnesses:
        assert szabo_rank(spec, w["point"], w["vector"]) == w["measured"]["rank"]
        assert abs(w["measured"]["unit_norm"] - w["sign"]) <= 1e-12


def test_szabo_vacuous_on_locally_symmetric():
    r = refute_jordan_szabo(GradientMetric(2, quadratic_f([1, 1])), np.zeros(4), n=10)
    assert r.status == "pass" and "vacuous" in r.details["verdict"]


# -- products ---------------------------------------------------------------------------------

@pytest.mark.parametrize("a, b", [(2, 0), (0, 2), (1, 1)])
def test_product_theorem_table(a, b):
    spec = ProductMetric(GradientMetric(2, quadratic_f([1, 1])), FlatMetric(a, b))
    r = verify_product_theorem(spec, n=40, n_points=2)
    assert r.status == "pass", r.details["table"]
    table = r.details["table"]
    assert table["jacobi/spacelike"]["observed_constant"] == (b == 0)
    assert table["jacobi/timelike"]["observed_constant"] == (a == 0)
    if a and b:
        assert not table["skew/spacelike"]["observed_constant"]
        assert not table["skew/timelike"]["observed_constant"]
    assert r.witnesses


def test_product_decision_table():
    base = GradientMetric(2, quadratic_f([1, 1]))
    assert expected_ranks(ProductMetric(base, FlatMetric(2, 0)), "jacobi", "spacelike") == {1}
    assert expected_ranks(ProductMetric(base, FlatMetric(2, 0)), "jacobi", "timelike") == {0, 1}
    assert expected_ranks(ProductMetric(base, FlatMetric(0, 1)), "skew", "spacelike") == {0, 2}
    assert expected_ranks(GradientMetric(3, quadratic_f([1, 1, 1])), "jacobi", "spacelike", "indefinite") == {1, 2}
    assert expected_ranks(zero_psi(2), "jacobi", "spacelike") is None


# -- symmetry and affine link --------------------------------------------------------------------

def test_local_symmetry_cases():
    cubic = PsiMetric.from_entries(2, {(0, 0): poly(2, ((0, 3), 1.0))})
    r = check_local_symmetry(cubic, n_points=3)
    assert r.details["verdict"] == "not locally symmetric"
    assert abs(r.witnesses[0]["measured"]["value"]) == pytest.approx(3.0)
    quad = PsiMetric.from_entries(2, {(0, 0): poly(2, ((0, 2), 1.0))})
    assert check_local_symmetry(quad).details["verdict"] == "locally symmetric (sampled)"
    assert check_local_symmetry(GradientMetric(2, quadratic_f([1, -1]))).details["verdict"].startswith("locally")


def test_affine_link_cases():
    zero = [[[PolyMap(2)] * 2 for _ in range(2)] for _ in range(2)]
    r0 = verify_affine_link(zero, n=20, n_points=2)
    assert r0.status == "pass" and r0.details["affine_nilpotent"] and r0.details["metric_nilpotent"]
    r1 = verify_affine_link(triangular_affine(), n=20, n_points=2)
    assert r1.status == "pass" and r1.details["affine_nilpotent"] and r1.details["metric_nilpotent"]
    r2 = verify_affine_link(non_nilpotent_affine(), n=20, n_points=2)
    assert r2.status == "pass"
    assert not r2.details["affine_nilpotent"] and not r2.details["metric_nilpotent"]


# -- report plumbing ----------------------------------------------------------------------------

def test_reports_are_deterministic_and_untimed_by_default():
    spec = GradientMetric(3, quadratic_f([1, -1, 1]))
    a = verify_rank_law_jacobi(spec, n=20, seed=9, n_points=2)
    b = verify_rank_law_jacobi(spec, n=20, seed=9, n_points=2)
    assert a.to_json() == b.to_json()
    assert "elapsed_ms" not in json.loads(a.to_json())
    assert json.loads(a.to_json(timing=True))["elapsed_ms"] >= 0
    c = verify_rank_law_jacobi(spec, n=20, seed=10, n_points=2)
    assert c.to_json() != a.to_json()


def test_report_schema():
    r = verify_ricci_flat(zero_psi(2), 2, Tolerances(zero=1e-9), seed=4)
    d = r.to_dict()
    assert set(d) >= {"property", "status", "spec_digest", "seed", "tolerances", "samples", "witnesses"}
    assert d["tolerances"] == {"rank": 1e-8, "zero": 1e-9}
    assert d["seed"] == 4


def test_verify_all_runs_family_specific_suites():
    psi = random_psi(2, np.random.default_rng(2))
    reports = verify_all(psi, n_points=2, n_samples=10, seed=7)
    assert [r.property for r in reports][:3] == ["trinity_nilpotent", "ricci_flat", "local_symmetry"]
    assert all(r.status != "fail" for r in reports)
    for r in reports:
        assert_witnessed(r)
    assert "affine" in applicable_properties(triangular_affine())
    assert "product" in applicable_properties(ProductMetric(GradientMetric(2, quadratic_f([1, 1])), FlatMetric(1, 0)))


def test_helpers():
    assert split_budget(10, 3) == [4, 3, 3]
    assert sum(split_budget(7, 7)) == 7
    assert attainable_plane_types((1, 1)) == ["mixed"]
    assert attainable_plane_types((0, 3)) == ["spacelike"]
    assert attainable_plane_types((2, 2)) == ["spacelike", "timelike", "mixed"]
