"""Sampling-based certificates for the spectral and Jordan claims.

Each ``verify_*`` function returns a :class:`VerificationReport`. Expected
outcomes (constant rank versus rank variation) come from
:func:`expected_ranks`, a single decision table keyed on the family data, so
a mismatch is reported as ``fail`` with the offending samples attached.

Randomness: one ``SeedSequence(seed)`` is spawned into independent child
streams, one per sampled point, so every report is reproducible from
(spec, seed, tolerances).
"""
from __future__ import annotations

import itertools
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .metrics import (
    AffineMetric,
    FlatMetric,
    GradientMetric,
    MetricSpec,
    ProductMetric,
    PsiMetric,
    metric_at,
    underlying_f,
)
from .operators import (
    PLANE_TYPES,
    draw_direction,
    jacobi_op,
    make_plane,
    normalize_unit,
    sample_plane,
    sample_unit,
    skew_op,
    szabo_op,
)
from .spectral import jordan_equivalent, jordan_profile, nilpotency_index, numerical_rank, spectrum
from .tensor_engine import affine_curvature, curvature, second_fundamental

MAX_WITNESSES = 5


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-8
    zero: float = 1e-10


@dataclass
class VerificationReport:
    property: str
    status: str  # "pass" | "fail" | "refuted-as-expected"
    spec_digest: str
    seed: int
    tolerances: Tolerances
    samples: dict
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    elapsed_ms: float | None = None

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "property": self.property,
            "status": self.status,
            "spec_digest": self.spec_digest,
            "seed": self.seed,
            "tolerances": asdict(self.tolerances),
            "samples": self.samples,
            "witnesses": self.witnesses,
            "details": self.details,
        }
        if timing:
            out["elapsed_ms"] = self.elapsed_ms
        return _plain(out)

    def to_json(self, timing: bool = False) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True, indent=2)


def _plain(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = round((time.perf_counter() - self.t0) * 1e3, 3)


# -- helpers ------------------------------------------------------------------

def point_streams(seed: int, n_points: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_points)]


def random_point(spec: MetricSpec, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, spec.dim)


def split_budget(total: int, parts: int) -> list[int]:
    return [total // parts + (1 if i < total % parts else 0) for i in range(parts)]


def square_residual(A: np.ndarray) -> float:
    """||A^2||_F / (1 + ||A||_F^2)."""
    return float(np.linalg.norm(A @ A) / (1.0 + np.sum(A * A)))


def attainable_plane_types(signature: tuple[int, int]) -> list[str]:
    neg, pos = signature
    kinds = []
    if pos >= 2:
        kinds.append("spacelike")
    if neg >= 2:
        kinds.append("timelike")
    if neg >= 1 and pos >= 1:
        kinds.append("mixed")
    return kinds


def attainable_signs(signature: tuple[int, int]) -> list[int]:
    neg, pos = signature
    return [s for s, k in ((1, pos), (-1, neg)) if k]


def _witness(point, measured: dict, **kw) -> dict:
    w = {"point": np.asarray(point).tolist(), "measured": measured}
    for k, v in kw.items():
        w[k] = v.tolist() if isinstance(v, np.ndarray) else v
    return w


def _op_rank(A: np.ndarray, tol: Tolerances, ref: float) -> int:
    return numerical_rank(A, tol.rank, ref)


def _is_zero_spectrum(A: np.ndarray, tol: Tolerances) -> bool:
    return all(z == 0 for z in spectrum(A, tol.rank))


# -- decision table -------------------------------------------------------------

def expected_ranks(spec: MetricSpec, operator: str, domain: str, L_kind: str = "definite") -> set[int] | None:
    """Rank values the theory predicts for ``operator`` over ``domain``.

    ``operator`` is "jacobi" or "skew"; ``domain`` is "spacelike" or
    "timelike" (unit vectors or planes of that causal type). A singleton
    means the Jordan form is constant there; two values mean it varies.
    Returns None when the table has no entry.
    """
    if isinstance(spec, ProductMetric):
        p = spec.p
        a, b = spec.flat.a, spec.flat.b
        # the flat factor contributes directions of its own sign with zero x-part
        extra = b if domain == "spacelike" else a
        full = p - 1 if operator == "jacobi" else 2
        return {full} if extra == 0 else {0, full}
    if isinstance(spec, GradientMetric):
        p = spec.p
        if operator == "jacobi":
            if p == 2 or L_kind == "definite":
                return {p - 1}
            return {1, p - 1}
        return {2}
    return None


# -- trinity / Ricci / symmetry -----------------------------------------------------

def verify_trinity_nilpotent(spec: MetricSpec, n_points: int = 10, n_samples: int = 100,
                             tol: Tolerances = Tolerances(), seed: int = 0,
                             n_planes: int | None = None) -> VerificationReport:
    """J(Z)^2, S(Z)^2 and R(pi)^2 vanish and spectra are {0} on sampled domains."""
    n_planes = n_samples if n_planes is None else n_planes
    worst = {"jacobi": 0.0, "szabo": 0.0, "skew": 0.0}
    counts = {"points": n_points, "unit_vectors": 0, "planes": 0}
    witnesses, failures = [], 0
    with _Timer() as timer:
        for rng in point_streams(seed, n_points):
            P = random_point(spec, rng)
            gP = metric_at(spec, P)
            curv = curvature(spec, P, "general", nabla=True)
            for sign in attainable_signs(gP.signature):
                for _ in range(n_samples):
                    Z = sample_unit(spec, P, sign, rng, gP)
                    counts["unit_vectors"] += 1
                    for op in (jacobi_op(curv, gP, Z), szabo_op(curv.nablaR, gP, Z)):
                        r = square_residual(op.mat)
                        worst[op.kind] = max(worst[op.kind], r)
                        if r > tol.zero or not _is_zero_spectrum(op.mat, tol):
                            failures += 1
                            if len(witnesses) < MAX_WITNESSES:
                                witnesses.append(_witness(P, {"operator": op.kind, "square_residual": r,
                                                              "spectrum": spectrum(op.mat, tol.rank)},
                                                          vector=Z, sign=sign))
            for kind in attainable_plane_types(gP.signature):
                for _ in range(n_planes):
                    plane = sample_plane(spec, P, kind, rng, gP)
                    counts["planes"] += 1
                    A = skew_op(curv, gP, plane).mat
                    r = square_residual(A)
                    worst["skew"] = max(worst["skew"], r)
                    if r > tol.zero or not _is_zero_spectrum(A, tol):
                        failures += 1
                        if len(witnesses) < MAX_WITNESSES:
                            witnesses.append(_witness(P, {"operator": "skew", "square_residual": r,
                                                          "spectrum": spectrum(A, tol.rank)},
                                                      plane=plane.to_dict()))
    return VerificationReport(
        "trinity_nilpotent", "fail" if failures else "pass", spec.digest(), seed, tol, counts,
        witnesses, {"max_square_residual": worst, "failures": failures}, timer.ms)


def verify_ricci_flat(spec: MetricSpec, n_points: int = 10, tol: Tolerances = Tolerances(),
                      seed: int = 0) -> VerificationReport:
    worst, worst_at = 0.0, None
    with _Timer() as timer:
        for rng in point_streams(seed, n_points):
            P = random_point(spec, rng)
            rho = curvature(spec, P, "general").ricci
            m = float(np.abs(rho).max())
            if worst_at is None or m > worst:
                worst, worst_at = m, P
    ok = worst <= tol.zero
    witnesses = [] if ok else [_witness(worst_at, {"max_abs_ricci": worst})]
    return VerificationReport("ricci_flat", "pass" if ok else "fail", spec.digest(), seed, tol,
                              {"points": n_points}, witnesses, {"max_abs_ricci": worst}, timer.ms)


def check_local_symmetry(spec: MetricSpec, n_points: int = 10, tol: Tolerances = Tolerances(),
                         seed: int = 0) -> VerificationReport:
    """Largest |nabla R| component over sampled points; reported, not judged."""
    worst, witness = 0.0, None
    with _Timer() as timer:
        for rng in point_streams(seed, n_points):
            P = random_point(spec, rng)
            curv = curvature(spec, P, "general", nabla=True)
            idx = np.unravel_index(np.argmax(np.abs(curv.nablaR)), curv.nablaR.shape)
            m = float(abs(curv.nablaR[idx]))
            rel = m / curv.scale
            if witness is None or rel > worst:
                worst = rel
                witness = _witness(P, {"component": [int(i) for i in idx],
                                       "value": float(curv.nablaR[idx]), "relative": rel})
    symmetric = worst <= tol.zero
    return VerificationReport(
        "local_symmetry", "pass", spec.digest(), seed, tol, {"points": n_points},
        [] if symmetric else [witness],
        {"verdict": "locally symmetric (sampled)" if symmetric else "not locally symmetric",
         "max_relative_nabla_R": worst}, timer.ms)


# -- Jacobi rank law and Jordan-Osserman class -----------------------------------------

def _gradient_points(spec: GradientMetric, n_points: int, seed: int, log: list):
    """Yield (rng, P, gP, curv, L) at sampled points where L is nondegenerate."""
    for k, rng in enumerate(point_streams(seed, n_points)):
        P = random_point(spec, rng)
        form = second_fundamental(spec.f, P)
        if not form.nondegenerate:
            log.append({"point_index": k, "point": P.tolist(), "reason": "degenerate second fundamental form"})
            continue
        yield k, rng, P, metric_at(spec, P), curvature(spec, P, "general"), form


def null_unit_vectors(spec: GradientMetric, gP, L: np.ndarray, sign: int) -> list[np.ndarray]:
    """Unit vectors of the given sign whose x-part is L-null (empty when L is definite).

    Random draws essentially never land on the L-null cone, so these are
    added explicitly wherever the rank law predicts a drop.
    """
    lam, V = np.linalg.eigh(L)
    if lam[0] >= 0 or lam[-1] <= 0:
        return []
    p = spec.p
    out = []
    for t in (1.0, -1.0):
        X = V[:, -1] / np.sqrt(lam[-1]) + t * V[:, 0] / np.sqrt(-lam[0])
        Z = np.zeros(spec.dim)
        Z[:p] = X
        Z = normalize_unit(spec, gP, Z, sign)
        if Z is not None:
            out.append(Z)
    return out


def _require_gradient(spec: MetricSpec, what: str) -> GradientMetric:
    if not isinstance(spec, GradientMetric):
        raise ValueError(f"{what} needs a gradient metric, got {spec.family!r}")
    return spec


def verify_rank_law_jacobi(spec: MetricSpec, n: int = 200, tol: Tolerances = Tolerances(),
                           seed: int = 0, n_points: int = 10) -> VerificationReport:
    """rank J(Z) = p-1 when L(X,X) != 0 and 1 when L(X,X) = 0 (X the x-part of Z)."""
    spec = _require_gradient(spec, "rank law")
    p = spec.p
    skipped: list = []
    tally = {str(s): {"generic": {}, "null": {}} for s in (1, -1)}
    sampled: dict[str, set] = {"1": set(), "-1": set()}
    witnesses, mismatches, used = [], 0, 0
    budget = split_budget(n, n_points)
    with _Timer() as timer:
        for k, rng, P, gP, curv, form in _gradient_points(spec, n_points, seed, skipped):
            L = form.L
            Lnorm = float(np.linalg.norm(L, 2))
            for sign in (1, -1):
                draws = [sample_unit(spec, P, sign, rng, gP) for _ in range(budget[k])]
                built = null_unit_vectors(spec, gP, L, sign)
                for j, Z in enumerate(draws + built):
                    X = Z[:p]
                    lxx = float(X @ L @ X)
                    branch = "null" if abs(lxx) <= tol.rank * Lnorm * float(X @ X) else "generic"
                    want = 1 if branch == "null" else p - 1
                    got = _op_rank(jacobi_op(curv, gP, Z).mat, tol, curv.scale)
                    bucket = tally[str(sign)][branch]
                    bucket[str(got)] = bucket.get(str(got), 0) + 1
                    if j < len(draws):
                        sampled[str(sign)].add(got)
                    used += 1
                    if got != want:
                        mismatches += 1
                        if len(witnesses) < MAX_WITNESSES:
                            witnesses.append(_witness(P, {"rank": got, "expected": want, "L_XX": lxx},
                                                      vector=Z, sign=sign))
    observed = {s: sorted({int(r) for b in tally[s].values() for r in b}) for s in tally}
    details = {
        "tally": tally,
        "ranks_observed": observed,
        "ranks_observed_random_draws": {s_: sorted(v) for s_, v in sampled.items()},
        "branch_rule": "rank p-1 when L(X,X) != 0, rank 1 when L(X,X) == 0",
        "skipped_points": skipped,
        "mismatches": mismatches,
    }
    return VerificationReport("rank_law_jacobi", "fail" if mismatches else "pass", spec.digest(), seed, tol,
                              {"points": n_points, "per_sign": n, "used": used}, witnesses, details, timer.ms)


def verify_jordan_osserman_class(spec: MetricSpec, n: int = 200, tol: Tolerances = Tolerances(),
                                 seed: int = 0, n_points: int = 10) -> VerificationReport:
    """Is the Jordan form of J constant on S+ and on S- at each sampled point?

    The answer is compared point by point with the decision table (constant
    iff p = 2 or L definite there). Indefinite points get constructed
    L-null unit vectors in addition to the random draws.
    """
    spec = _require_gradient(spec, "Jordan-Osserman check")
    skipped: list = []
    per_point, witnesses = [], []
    mismatches, any_refuted = 0, False
    budget = split_budget(n, n_points)
    with _Timer() as timer:
        for k, rng, P, gP, curv, form in _gradient_points(spec, n_points, seed, skipped):
            want = expected_ranks(spec, "jacobi", "spacelike", form.classification)
            expected_constant = len(want) == 1
            profiles: dict[str, dict] = {}
            for sign in (1, -1):
                seen = profiles.setdefault(str(sign), {})
                draws = [sample_unit(spec, P, sign, rng, gP) for _ in range(budget[k])]
                for Z in draws + null_unit_vectors(spec, gP, form.L, sign):
                    prof = jordan_profile(jacobi_op(curv, gP, Z).mat, tol.rank, curv.scale)
                    key = ",".join(map(str, prof.nilpotent_partition))
                    slot = seen.setdefault(key, {"count": 0, "example": None})
                    slot["count"] += 1
                    if slot["example"] is None:
                        slot["example"] = _witness(P, {"profile": prof.to_dict(),
                                                       "rank": prof.rank_sequence[0]}, vector=Z, sign=sign)
            observed = {s_: len(v) == 1 for s_, v in profiles.items()}
            ok = all(c == expected_constant for c in observed.values())
            mismatches += not ok
            any_refuted |= ok and not expected_constant
            if not ok or (not expected_constant and len(witnesses) < 2 * MAX_WITNESSES):
                witnesses.extend(slot["example"] for d in profiles.values() for slot in d.values())
            per_point.append({"point_index": k, "L_classification": form.classification,
                              "expected_constant": expected_constant, "observed_constant": observed,
                              "profiles": {s_: {key: v["count"] for key, v in d.items()}
                                           for s_, d in profiles.items()}})
    if mismatches or not per_point:
        status = "fail"
    else:
        status = "refuted-as-expected" if any_refuted else "pass"
    details = {"per_point": per_point, "mismatches": mismatches, "skipped_points": skipped,
               "jordan_osserman_at_all_points": not any_refuted and not mismatches}
    return VerificationReport("jordan_osserman", status, spec.digest(), seed, tol,
                              {"points": n_points, "per_sign": n}, witnesses[:2 * MAX_WITNESSES],
                              details, timer.ms)


# -- skew-symmetric curvature -------------------------------------------------------------

def ip_counterexample_planes(p: int, eps: float, n: int | None = None):
    """The null-first plane span{dy1, dx1} and span{dy1/eps + eps dx1, -dy2/eps + eps dx2}."""
    n = 2 * p if n is None else n
    e = np.eye(n)
    pi1 = (e[p], e[0])
    pi2 = (e[p] / eps + eps * e[0], -e[p + 1] / eps + eps * e[1])
    return pi1, pi2


def mixed_plane_block(spec: MetricSpec, P, curv, gP, tol: Tolerances,
                      eps_values: Sequence[float] = (0.05, 0.1)) -> dict:
    """Certify that two mixed planes give Jordan-inequivalent skew operators."""
    p = spec.p
    (u1, v1), _ = ip_counterexample_planes(p, 1.0, spec.dim)
    plane1 = make_plane(gP, u1, v1)
    A1 = skew_op(curv, gP, plane1).mat
    block = {"point": np.asarray(P).tolist(),
             "pi1": {"type": plane1.type, "gram": plane1.gram.tolist(),
                     "gram_det": float(np.linalg.det(plane1.gram)),
                     "norm": float(np.abs(A1).max()), "rank": _op_rank(A1, tol, curv.scale)},
             "pi2": [], "log": []}
    for eps in eps_values:
        e = float(eps)
        for _ in range(30):
            _, (u2, v2) = ip_counterexample_planes(p, e, spec.dim)
            plane2 = make_plane(gP, u2, v2)
            if plane2.type == "mixed":
                break
            block["log"].append(f"eps={e:g} gives a {plane2.type} plane; halving")
            e /= 2.0
        A2 = skew_op(curv, gP, plane2).mat
        block["pi2"].append({
            "eps": e, "type": plane2.type, "gram": plane2.gram.tolist(),
            "gram_det": float(np.linalg.det(plane2.gram)),
            "rank": _op_rank(A2, tol, curv.scale),
            "jordan_equivalent_to_pi1": jordan_equivalent(A1, A2, tol.rank),
        })
    block["not_mixed_jordan_ip"] = (
        plane1.type == "mixed"
        and all(b["type"] == "mixed" and not b["jordan_equivalent_to_pi1"] for b in block["pi2"])
    )
    return block


def verify_ip_class(spec: MetricSpec, n: int = 200, tol: Tolerances = Tolerances(), seed: int = 0,
                    n_points: int = 10, eps_values: Sequence[float] = (0.05, 0.1)) -> VerificationReport:
    """Rank 2 skew operators on spacelike/timelike planes, and a mixed-plane counterexample.

    For a psi metric that is not of gradient type only nilpotency of the
    skew operator is checked.
    """
    if not isinstance(spec, (GradientMetric, PsiMetric)):
        raise ValueError(f"IP check needs a psi or gradient metric, got {spec.family!r}")
    gradient = isinstance(spec, GradientMetric)
    budget = split_budget(n, n_points)
    tally: dict[str, dict] = {k: {} for k in PLANE_TYPES}
    witnesses, failures, skipped = [], 0, []
    first = None
    with _Timer() as timer:
        for k, rng in enumerate(point_streams(seed, n_points)):
            P = random_point(spec, rng)
            if gradient and not second_fundamental(spec.f, P).nondegenerate:
                skipped.append({"point_index": k, "reason": "degenerate second fundamental form"})
                continue
            gP = metric_at(spec, P)
            curv = curvature(spec, P, "general")
            if first is None:
                first = (P, curv, gP)
            kinds = ("spacelike", "timelike") if gradient else PLANE_TYPES
            for kind in kinds:
                for _ in range(budget[k]):
                    plane = sample_plane(spec, P, kind, rng, gP)
                    A = skew_op(curv, gP, plane).mat
                    r = _op_rank(A, tol, curv.scale)
                    tally[kind][str(r)] = tally[kind].get(str(r), 0) + 1
                    bad = square_residual(A) > tol.zero or (gradient and r != 2)
                    if bad:
                        failures += 1
                        if len(witnesses) < MAX_WITNESSES:
                            witnesses.append(_witness(P, {"rank": r, "square_residual": square_residual(A)},
                                                      plane=plane.to_dict()))
        details = {"rank_tally": {k: v for k, v in tally.items() if v}, "skipped_points": skipped}
        if gradient and first is not None and spec.p >= 2:
            block = mixed_plane_block(spec, *first, tol, eps_values)
            details["mixed_counterexample"] = block
            witnesses.append(_witness(first[0], {"pi1_rank": block["pi1"]["rank"],
                                                 "pi2_ranks": [b["rank"] for b in block["pi2"]]},
                                      planes="pi1=span{dy1,dx1}; pi2(eps)=span{dy1/eps+eps*dx1,-dy2/eps+eps*dx2}"))
            if not block["not_mixed_jordan_ip"]:
                failures += 1
            details["verdicts"] = {"spacelike_jordan_ip": not failures, "timelike_jordan_ip": not failures,
                                   "mixed_jordan_ip": not block["not_mixed_jordan_ip"]}
    return VerificationReport("ip", "fail" if failures else "pass", spec.digest(), seed, tol,
                              {"points": n_points, "per_type": n}, witnesses, details, timer.ms)


# -- Szabo rank variation -------------------------------------------------------------------

def szabo_rank(spec: MetricSpec, P, Z, tol: Tolerances = Tolerances()) -> int:
    """Recompute rank S(Z) at P from scratch (used to re-check witnesses)."""
    gP = metric_at(spec, P)
    curv = curvature(spec, P, "general", nabla=True)
    ref = 1.0 + float(np.abs(curv.nablaR).max())
    return _op_rank(szabo_op(curv.nablaR, gP, np.asarray(Z, dtype=float)).mat, tol, ref)


def _compressed_szabo(nablaR, gP, frame: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Szabo operator of Z = frame @ c compressed to span(frame): a symmetric k x k matrix."""
    Z = frame @ c
    S = szabo_op(nablaR, gP, Z).mat
    C = frame.T @ gP.g @ S @ frame
    return 0.5 * (C + C.T)


def _inertia(C: np.ndarray, cut: float) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(C)
    return int(np.sum(ev > cut)), int(np.sum(ev < -cut))


def bisect_rank_drop(nablaR, gP, sign: int, rng: np.random.Generator, tol: Tolerances, ref: float,
                     n_dirs: int = 64) -> np.ndarray | None:
    """Unit vector of the given sign where rank S drops, found by inertia bisection.

    On a maximal definite subspace V of that sign the compression of S(Z)
    to V is symmetric, has the same rank as S(Z), and is odd in Z, so the
    inertia at -Z is the reverse of the inertia at Z. Between two directions
    with different inertia some eigenvalue crosses zero; bisection along the
    connecting arc pins the crossing down to rounding level.
    """
    lam, vecs = np.linalg.eigh(gP.g)
    keep = lam > 0 if sign > 0 else lam < 0
    frame = vecs[:, keep] / np.sqrt(np.abs(lam[keep]))
    k = frame.shape[1]
    if k < 2:
        return None
    # far below the rank threshold, far above rounding noise on structural zeros
    cut = 1e-13 * ref

    def positives(c):
        return _inertia(_compressed_szabo(nablaR, gP, frame, c), cut)[0]

    def unit(c):
        return c / np.linalg.norm(c)

    dirs = [unit(rng.standard_normal(k)) for _ in range(n_dirs)]
    counts = [positives(c) for c in dirs]
    pairs = [(a, b) for a, b in itertools.combinations(range(n_dirs), 2) if counts[a] != counts[b]]
    if not pairs:
        # inertia constant on the sample: use the reversal at the antipode
        pairs = [(a, None) for a in range(n_dirs) if counts[a] != _inertia(
            _compressed_szabo(nablaR, gP, frame, dirs[a]), cut)[1]]
    for a, b in pairs[:16]:
        ca = dirs[a]
        if b is None:
            w = rng.standard_normal(k)
            w = unit(w - (w @ ca) * ca)

            def at(t, ca=ca, w=w):
                return np.cos(np.pi * t) * ca + np.sin(np.pi * t) * w
        else:
            cb = dirs[b]

            def at(t, ca=ca, cb=cb):
                return unit((1 - t) * ca + t * cb)
        lo, hi = 0.0, 1.0
        pos_lo = positives(at(lo))
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            if positives(at(mid)) == pos_lo:
                lo = mid
            else:
                hi = mid
        base = numerical_rank(szabo_op(nablaR, gP, frame @ ca).mat, tol.rank, ref)
        for t in (lo, hi):
            Z = frame @ at(t)
            if numerical_rank(szabo_op(nablaR, gP, Z).mat, tol.rank, ref) < base:
                return Z
    return None


def refute_jordan_szabo(spec: MetricSpec, P, n: int = 1000, tol: Tolerances = Tolerances(),
                        seed: int = 0) -> VerificationReport:
    """Search S+ and S- at P for two unit vectors with different rank S(.).

    Random stratified draws come first (up to ``n`` per sign). If they show
    a single rank, an inertia bisection on a maximal definite subspace
    looks for the rank drop that sampling is unlikely to hit.
    """
    P = np.asarray(P, dtype=float)
    with _Timer() as timer:
        gP = metric_at(spec, P)
        curv = curvature(spec, P, "general", nabla=True)
        nmax = float(np.abs(curv.nablaR).max())
        if nmax <= tol.zero * curv.scale:
            return VerificationReport(
                "jordan_szabo_refutation", "pass", spec.digest(), seed, tol, {"per_sign": 0}, [],
                {"verdict": "locally symmetric at P, lemma vacuous", "max_abs_nabla_R": nmax}, None)
        ref = 1.0 + nmax
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        found: dict[str, dict] = {}
        used, methods = {}, {}
        for sign in attainable_signs(gP.signature):
            ranks: dict[int, dict] = {}
            k = 0
            while k < n and len(ranks) < 2:
                Z = sample_unit(spec, P, sign, rng, gP)
                k += 1
                r = _op_rank(szabo_op(curv.nablaR, gP, Z).mat, tol, ref)
                if r not in ranks:
                    ranks[r] = _witness(P, {"rank": r, "unit_norm": float(Z @ gP.g @ Z)}, vector=Z, sign=sign,
                                        method="sampled")
            methods[str(sign)] = "sampled"
            if len(ranks) < 2:
                Z = bisect_rank_drop(curv.nablaR, gP, sign, rng, tol, ref)
                if Z is not None:
                    r = _op_rank(szabo_op(curv.nablaR, gP, Z).mat, tol, ref)
                    ranks.setdefault(r, _witness(P, {"rank": r, "unit_norm": float(Z @ gP.g @ Z)}, vector=Z,
                                                 sign=sign, method="inertia-bisection"))
                    methods[str(sign)] = "inertia-bisection"
            found[str(sign)] = ranks
            used[str(sign)] = k
    ok = all(len(r) >= 2 for r in found.values()) and len(found) == 2
    witnesses = [w for s in ("1", "-1") for _, w in sorted(found.get(s, {}).items())]
    details = {"ranks_found": {s: sorted(int(r) for r in v) for s, v in found.items()},
               "search": methods,
               "max_abs_nabla_R": nmax,
               "verdict": ("rank of the Szabo operator varies on both pseudo-spheres" if ok
                           else "no rank variation found within the sample budget")}
    return VerificationReport("jordan_szabo_refutation", "refuted-as-expected" if ok else "fail",
                              spec.digest(), seed, tol, {"per_sign": n, "used": used}, witnesses, details, timer.ms)


# -- products ---------------------------------------------------------------------------------

def verify_product_theorem(spec: MetricSpec, n: int = 200, tol: Tolerances = Tolerances(), seed: int = 0,
                           n_points: int = 10) -> VerificationReport:
    """Observed rank sets of J on S+/S- and of the skew operator on spacelike/timelike planes vs the table."""
    if not isinstance(spec, ProductMetric) or not isinstance(spec.base, GradientMetric):
        raise ValueError("product theorem needs a product whose base is a gradient metric")
    f = spec.base.f
    budget = split_budget(n, n_points)
    observed: dict[str, dict] = {f"jacobi/{d}": {} for d in ("spacelike", "timelike")}
    observed.update({f"skew/{d}": {} for d in ("spacelike", "timelike")})
    skipped = []
    with _Timer() as timer:
        for k, rng in enumerate(point_streams(seed, n_points)):
            P = random_point(spec, rng)
            form = second_fundamental(f, P)
            if not (form.nondegenerate and form.classification == "definite" and np.all(np.diag(form.L) > 0)):
                skipped.append({"point_index": k, "reason": "second fundamental form not positive definite"})
                continue
            gP = metric_at(spec, P)
            curv = curvature(spec, P, "general")
            for sign, dom in ((1, "spacelike"), (-1, "timelike")):
                if sign not in attainable_signs(gP.signature):
                    continue
                for _ in range(budget[k]):
                    Z = sample_unit(spec, P, sign, rng, gP)
                    r = _op_rank(jacobi_op(curv, gP, Z).mat, tol, curv.scale)
                    observed[f"jacobi/{dom}"].setdefault(r, _witness(P, {"rank": r}, vector=Z, sign=sign))
            for dom in ("spacelike", "timelike"):
                if dom not in attainable_plane_types(gP.signature):
                    continue
                for _ in range(budget[k]):
                    plane = sample_plane(spec, P, dom, rng, gP)
                    r = _op_rank(skew_op(curv, gP, plane).mat, tol, curv.scale)
                    observed[f"skew/{dom}"].setdefault(r, _witness(P, {"rank": r}, plane=plane.to_dict()))
    table, verdicts, witnesses, ok = {}, {}, [], True
    for key, seen in observed.items():
        op, dom = key.split("/")
        want = expected_ranks(spec, op, dom)
        got = set(seen)
        table[key] = {"expected": sorted(want), "observed": sorted(got),
                      "expected_constant": len(want) == 1, "observed_constant": len(got) == 1}
        verdicts[key] = got == want
        ok = ok and got == want
        if len(got) > 1 or got != want:
            witnesses.extend(w for _, w in sorted(seen.items()))
    details = {"a": spec.flat.a, "b": spec.flat.b, "p": spec.p, "table": table,
               "matches": verdicts, "skipped_points": skipped}
    return VerificationReport("product_theorem", "pass" if ok else "fail", spec.digest(), seed, tol,
                              {"points": n_points, "per_domain": n}, witnesses, details, timer.ms)


# -- affine link ------------------------------------------------------------------------------

def affine_jacobi(gamma, x, X) -> np.ndarray:
    """Matrix of Y -> R_nabla(Y, X)X on R^p."""
    Rn = affine_curvature(gamma, x)
    return np.einsum("bcdm,c,d->mb", Rn, X, X)


def verify_affine_link(gamma, n: int = 200, tol: Tolerances = Tolerances(), seed: int = 0,
                       n_points: int = 10) -> VerificationReport:
    """Compare nilpotency of the affine Jacobi operator with that of the associated metric."""
    spec = gamma if isinstance(gamma, AffineMetric) else AffineMetric(len(gamma), gamma)
    p = spec.p
    budget = split_budget(n, n_points)
    affine_bad, metric_bad, witnesses = 0, 0, []
    counts = {"points": n_points, "affine_vectors": 0, "metric_vectors": 0}
    with _Timer() as timer:
        for k, rng in enumerate(point_streams(seed, n_points)):
            P = random_point(spec, rng)
            for _ in range(budget[k]):
                X = draw_direction(FlatMetric(0, p), rng)
                if not X.any():
                    continue
                counts["affine_vectors"] += 1
                A = affine_jacobi(spec.gamma, P[:p], X)
                if nilpotency_index(A, tol.zero) is None:
                    affine_bad += 1
                    if len(witnesses) < MAX_WITNESSES:
                        witnesses.append(_witness(P[:p], {"side": "affine", "spectrum": spectrum(A, tol.rank)},
                                                  vector=X))
            gP = metric_at(spec, P)
            curv = curvature(spec, P, "general")
            for sign in (1, -1):
                for _ in range(budget[k]):
                    Z = sample_unit(spec, P, sign, rng, gP)
                    counts["metric_vectors"] += 1
                    J = jacobi_op(curv, gP, Z).mat
                    if nilpotency_index(J, tol.zero) is None:
                        metric_bad += 1
                        if len(witnesses) < 2 * MAX_WITNESSES:
                            witnesses.append(_witness(P, {"side": "metric", "spectrum": spectrum(J, tol.rank)},
                                                      vector=Z, sign=sign))
    affine_nil = affine_bad == 0
    metric_nil = metric_bad == 0
    details = {"affine_nilpotent": affine_nil, "metric_nilpotent": metric_nil,
               "verdicts_match": affine_nil == metric_nil,
               "non_nilpotent_counts": {"affine": affine_bad, "metric": metric_bad}}
    return VerificationReport("affine_link", "pass" if affine_nil == metric_nil else "fail", spec.digest(),
                              seed, tol, counts, witnesses, details, timer.ms)


# -- suites -------------------------------------------------------------------------------------

PROPERTIES = ("trinity", "ricci", "symmetry", "rank-law", "jordan-osserman", "ip", "szabo", "product", "affine")


def szabo_probe_point(spec: MetricSpec, seed: int, tol: Tolerances, tries: int = 20) -> np.ndarray:
    """First sampled point where nabla R does not vanish and L (if any) is nondegenerate."""
    rng = point_streams(seed, 1)[0]
    P = random_point(spec, rng)
    f = underlying_f(spec)
    for _ in range(tries):
        curv = curvature(spec, P, "general", nabla=True)
        good_L = f is None or second_fundamental(f, P).nondegenerate
        if good_L and np.abs(curv.nablaR).max() > tol.zero * curv.scale:
            return P
        P = random_point(spec, rng)
    return P


def run_property(name: str, spec: MetricSpec, n_points: int = 10, n_samples: int = 100,
                 tol: Tolerances = Tolerances(), seed: int = 0, point=None) -> VerificationReport:
    if name == "trinity":
        return verify_trinity_nilpotent(spec, n_points, n_samples, tol, seed)
    if name == "ricci":
        return verify_ricci_flat(spec, n_points, tol, seed)
    if name == "symmetry":
        return check_local_symmetry(spec, n_points, tol, seed)
    if name == "rank-law":
        return verify_rank_law_jacobi(spec, n_samples, tol, seed, n_points)
    if name == "jordan-osserman":
        return verify_jordan_osserman_class(spec, n_samples, tol, seed, n_points)
    if name == "ip":
        return verify_ip_class(spec, n_samples, tol, seed, n_points)
    if name == "szabo":
        P = szabo_probe_point(spec, seed, tol) if point is None else np.asarray(point, dtype=float)
        return refute_jordan_szabo(spec, P, max(n_samples, 1000), tol, seed)
    if name == "product":
        return verify_product_theorem(spec, n_samples, tol, seed, n_points)
    if name == "affine":
        if not isinstance(spec, AffineMetric):
            raise ValueError(f"affine link needs an affine metric, got {spec.family!r}")
        return verify_affine_link(spec, n_samples, tol, seed, n_points)
    raise ValueError(f"unknown property {name!r}; expected one of {PROPERTIES}")


def applicable_properties(spec: MetricSpec) -> list[str]:
    if isinstance(spec, GradientMetric):
        return ["trinity", "ricci", "symmetry", "szabo", "rank-law", "jordan-osserman", "ip"]
    if isinstance(spec, PsiMetric):
        return ["trinity", "ricci", "symmetry", "szabo", "ip"]
    if isinstance(spec, AffineMetric):
        return ["affine", "symmetry"]
    if isinstance(spec, ProductMetric):
        props = ["trinity", "ricci", "symmetry"]
        if isinstance(spec.base, GradientMetric):
            props.append("product")
        return props
    return ["trinity", "ricci"]


def verify_all(spec: MetricSpec, n_points: int = 10, n_samples: int = 100, tol: Tolerances = Tolerances(),
               seed: int = 0) -> list[VerificationReport]:
    reports = []
    for name in applicable_properties(spec):
        if name == "szabo":
            P = szabo_probe_point(spec, seed, tol)
            reports.append(refute_jordan_szabo(spec, P, max(n_samples, 1000), tol, seed))
        else:
            reports.append(run_property(name, spec, n_points, n_samples, tol, seed))
    return reports
