"""Metric families on R^{2p} (and products with flat factors).

Chart order is ``(x_1..x_p, y_1..y_p, w_1..w_{a+b})``. Every family is
stored as polynomial metric components in the full chart, so the general
curvature route never needs to know which family it is looking at.

Coordinate matrix of the balanced families is ``[[psi(x), I], [I, 0]]``:
``g(d_x_i, d_y_j) = delta_ij`` and ``g(d_x_i, d_x_j) = psi_ij``.
Flat factor signature ``(a, b)`` means ``a`` entries ``-1`` then ``b``
entries ``+1``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import ClassVar, Mapping, Sequence

import numpy as np

from .polyfunc import PolyBatch, PolyError, PolyMap


class MetricError(ValueError):
    """Invalid metric data (asymmetry, nvars mismatch, bad descriptor)."""


class MetricSpec:
    """Base class for the metric families. Subclasses are frozen dataclasses."""

    family: str = ""

    p: int

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def x_slots(self) -> range:
        return range(0, self.p)

    def y_slots(self) -> range:
        return range(self.p, 2 * self.p)

    def w_slots(self) -> range:
        return range(2 * self.p, self.dim)

    def components(self) -> dict[tuple[int, int], PolyMap]:
        """Nonzero metric components ``g_ab`` (a <= b) as polynomials in ``dim`` variables."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @cached_property
    def _component_batch(self) -> tuple[list[tuple[int, int]], PolyBatch]:
        comps = self.components()
        keys = sorted(comps)
        return keys, PolyBatch([comps[k] for k in keys], self.dim)


def _sym_matrix(p: int, entries: Mapping[tuple[int, int], PolyMap], nvars: int, what: str):
    rows = [[PolyMap.zero(nvars) for _ in range(p)] for _ in range(p)]
    for (i, j), q in entries.items():
        if not (0 <= i < p and 0 <= j < p):
            raise MetricError(f"{what} index ({i},{j}) out of range for p={p}")
        if not isinstance(q, PolyMap):
            raise MetricError(f"{what}[{i},{j}] must be a PolyMap")
        if q.nvars != nvars:
            raise MetricError(f"{what}[{i},{j}] has nvars={q.nvars}, expected {nvars}")
        rows[i][j] = q
    for i in range(p):
        for j in range(i + 1, p):
            a, b = rows[i][j], rows[j][i]
            if a != b:
                if b.is_zero() and (j, i) not in entries:
                    rows[j][i] = a
                elif a.is_zero() and (i, j) not in entries:
                    rows[i][j] = b
                else:
                    raise MetricError(f"{what} is not symmetric at ({i},{j})")
    return tuple(tuple(r) for r in rows)


def _walker_components(p: int, n: int, xx: Sequence[Sequence[PolyMap]]) -> dict[tuple[int, int], PolyMap]:
    comps = {}
    for i in range(p):
        for j in range(i, p):
            if not xx[i][j].is_zero():
                comps[(i, j)] = xx[i][j]
        comps[(i, p + i)] = PolyMap.constant(n, 1.0)
    return comps


@dataclass(frozen=True, eq=False)
class PsiMetric(MetricSpec):
    """``sum dx^i dy^i + sum psi_ij(x) dx^i dx^j`` on R^{2p}."""

    psi: tuple[tuple[PolyMap, ...], ...]
    family = "psi"

    def __post_init__(self):
        p = len(self.psi)
        if p < 1 or any(len(r) != p for r in self.psi):
            raise MetricError("psi must be a nonempty square array")
        for i in range(p):
            for j in range(p):
                if self.psi[i][j].nvars != p:
                    raise MetricError(f"psi[{i}][{j}] has nvars={self.psi[i][j].nvars}, expected p={p}")
                if self.psi[i][j] != self.psi[j][i]:
                    raise MetricError(f"psi is not symmetric at ({i},{j})")

    @classmethod
    def from_entries(cls, p: int, entries: Mapping[tuple[int, int], PolyMap]) -> "PsiMetric":
        return cls(_sym_matrix(p, entries, p, "psi"))

    @property
    def p(self) -> int:
        return len(self.psi)

    @property
    def dim(self) -> int:
        return 2 * self.p

    def components(self):
        p, n = self.p, self.dim
        xs = list(range(p))
        xx = [[q.embed(n, xs) for q in row] for row in self.psi]
        return _walker_components(p, n, xx)

    def to_dict(self):
        p = self.p
        psi = {f"{i + 1},{j + 1}": self.psi[i][j].to_dict()
               for i in range(p) for j in range(i, p) if not self.psi[i][j].is_zero()}
        return {"family": "psi", "p": p, "psi": psi}

    def __eq__(self, other):
        return isinstance(other, PsiMetric) and type(other) is type(self) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.digest())


@dataclass(frozen=True, eq=False)
class GradientMetric(MetricSpec):
    """Psi metric with ``psi_ij = (d_i f)(d_j f)``; the expanded form is kept in ``expanded``."""

    p: int
    f: PolyMap
    family = "gradient"

    def __post_init__(self):
        if self.f.nvars != self.p:
            raise MetricError(f"f has nvars={self.f.nvars}, expected p={self.p}")

    @property
    def dim(self) -> int:
        return 2 * self.p

    @cached_property
    def expanded(self) -> PsiMetric:
        grad = [self.f.diff(i) for i in range(self.p)]
        return PsiMetric(tuple(tuple(grad[i] * grad[j] for j in range(self.p)) for i in range(self.p)))

    @property
    def psi(self):
        return self.expanded.psi

    def components(self):
        return self.expanded.components()

    def to_dict(self):
        return {"family": "gradient", "p": self.p, "f": self.f.to_dict()}

    def __eq__(self, other):
        return isinstance(other, GradientMetric) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.digest())


@dataclass(frozen=True, eq=False)
class AffineMetric(MetricSpec):
    """``sum dx^i dy^i - 2 sum y_k Gamma_ij^k(x) dx^i dx^j`` built from a torsion-free connection on R^p."""

    p: int
    gamma: tuple  # gamma[i][j][k] = Gamma_ij^k, PolyMap in x (nvars = p)
    family = "affine"

    def __post_init__(self):
        p = self.p
        g = self.gamma
        if len(g) != p or any(len(r) != p or any(len(c) != p for c in r) for r in g):
            raise MetricError("gamma must be a p x p x p array")
        for i in range(p):
            for j in range(p):
                for k in range(p):
                    if g[i][j][k].nvars != p:
                        raise MetricError(f"gamma[{i}][{j}][{k}] has nvars={g[i][j][k].nvars}, expected {p}")
                    if g[i][j][k] != g[j][i][k]:
                        raise MetricError(f"gamma is not symmetric in its lower indices at ({i},{j},{k})")

    @classmethod
    def from_entries(cls, p: int, entries: Mapping[tuple[int, int, int], PolyMap]) -> "AffineMetric":
        z = PolyMap.zero(p)
        arr = [[[z for _ in range(p)] for _ in range(p)] for _ in range(p)]
        for (i, j, k), q in entries.items():
            if not all(0 <= t < p for t in (i, j, k)):
                raise MetricError(f"gamma index ({i},{j},{k}) out of range for p={p}")
            if not isinstance(q, PolyMap) or q.nvars != p:
                raise MetricError(f"gamma[{i},{j},{k}] must be a PolyMap with nvars={p}")
            other = entries.get((j, i, k))
            if other is not None and other != q:
                raise MetricError(f"gamma is not symmetric in its lower indices at ({i},{j},{k})")
            arr[i][j][k] = q
            arr[j][i][k] = q
        return cls(p, tuple(tuple(tuple(c) for c in r) for r in arr))

    @property
    def dim(self) -> int:
        return 2 * self.p

    def components(self):
        p, n = self.p, self.dim
        xs = list(range(p))
        xx = [[PolyMap.zero(n) for _ in range(p)] for _ in range(p)]
        for i in range(p):
            for j in range(p):
                acc = PolyMap.zero(n)
                for k in range(p):
                    gk = self.gamma[i][j][k]
                    if not gk.is_zero():
                        acc = acc + gk.embed(n, xs) * PolyMap.variable(n, p + k) * -2.0
                xx[i][j] = acc
        return _walker_components(p, n, xx)

    def to_dict(self):
        p = self.p
        gamma = {f"{i + 1},{j + 1},{k + 1}": self.gamma[i][j][k].to_dict()
                 for i in range(p) for j in range(i, p) for k in range(p)
                 if not self.gamma[i][j][k].is_zero()}
        return {"family": "affine", "p": p, "gamma": gamma}

    def __eq__(self, other):
        return isinstance(other, AffineMetric) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.digest())


@dataclass(frozen=True)
class FlatMetric(MetricSpec):
    """diag(-1 x a, +1 x b)."""

    a: int
    b: int
    family = "flat"
    p: ClassVar[int] = 0

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise MetricError(f"flat factor needs a, b >= 0 and a + b >= 1, got ({self.a}, {self.b})")

    @property
    def dim(self) -> int:
        return self.a + self.b

    def components(self):
        n = self.dim
        return {(i, i): PolyMap.constant(n, -1.0 if i < self.a else 1.0) for i in range(n)}

    def to_dict(self):
        return {"family": "flat", "a": self.a, "b": self.b}


@dataclass(frozen=True, eq=False)
class ProductMetric(MetricSpec):
    """Isometric product of a balanced-family base with a flat factor."""

    base: MetricSpec
    flat: FlatMetric
    family = "product"

    def __post_init__(self):
        if not isinstance(self.base, (PsiMetric, GradientMetric, AffineMetric)):
            raise MetricError("product base must be a psi, gradient or affine metric")

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def dim(self) -> int:
        return self.base.dim + self.flat.dim

    def components(self):
        n, nb = self.dim, self.base.dim
        comps = {k: q.embed(n, list(range(nb))) for k, q in self.base.components().items()}
        for (i, j), q in self.flat.components().items():
            comps[(nb + i, nb + j)] = PolyMap.constant(n, q.terms[(0,) * self.flat.dim])
        return comps

    def to_dict(self):
        return {"family": "product", "base": self.base.to_dict(), "a": self.flat.a, "b": self.flat.b}

    def __eq__(self, other):
        return isinstance(other, ProductMetric) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(self.digest())


# -- construction from descriptors --------------------------------------

def _parse_key(key: str, arity: int, p: int, what: str) -> tuple[int, ...]:
    try:
        idx = tuple(int(t) - 1 for t in key.split(","))
    except ValueError:
        raise MetricError(f"{what} key {key!r} must be {arity} comma-separated 1-based indices") from None
    if len(idx) != arity or not all(0 <= t < p for t in idx):
        raise MetricError(f"{what} key {key!r} must be {arity} comma-separated indices in 1..{p}")
    return idx


def _poly(data, where: str) -> PolyMap:
    try:
        return PolyMap.from_dict(data)
    except PolyError as exc:
        raise MetricError(f"{where}: {exc}") from None


def _positive_int(d: Mapping, key: str, minimum: int = 1) -> int:
    if key not in d:
        raise MetricError(f"missing field {key!r}")
    v = d[key]
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise MetricError(f"field {key!r} must be an integer >= {minimum}, got {v!r}")
    return v


def build_metric(descriptor: Mapping) -> MetricSpec:
    """Build and validate a metric from its JSON-style descriptor (1-based index keys)."""
    if not isinstance(descriptor, Mapping):
        raise MetricError("metric descriptor must be a JSON object")
    family = descriptor.get("family")
    if family == "psi":
        p = _positive_int(descriptor, "p")
        entries = {}
        for key, val in (descriptor.get("psi") or {}).items():
            i, j = _parse_key(key, 2, p, "psi")
            if i > j:
                raise MetricError(f"psi key {key!r} must have i <= j")
            entries[(i, j)] = _poly(val, f"psi[{key}]")
        return PsiMetric.from_entries(p, entries)
    if family == "gradient":
        p = _positive_int(descriptor, "p")
        if "f" not in descriptor:
            raise MetricError("gradient metric needs field 'f'")
        return GradientMetric(p, _poly(descriptor["f"], "f"))
    if family == "affine":
        p = _positive_int(descriptor, "p")
        entries = {}
        for key, val in (descriptor.get("gamma") or {}).items():
            entries[_parse_key(key, 3, p, "gamma")] = _poly(val, f"gamma[{key}]")
        return AffineMetric.from_entries(p, entries)
    if family == "flat":
        return FlatMetric(_positive_int(descriptor, "a", 0), _positive_int(descriptor, "b", 0))
    if family == "product":
        if "base" not in descriptor:
            raise MetricError("product metric needs field 'base'")
        base = build_metric(descriptor["base"])
        return ProductMetric(base, FlatMetric(_positive_int(descriptor, "a", 0), _positive_int(descriptor, "b", 0)))
    raise MetricError(f"unknown family {family!r}; expected psi, gradient, affine, flat or product")


def load_metric(path: str) -> MetricSpec:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MetricError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return build_metric(data)


# -- evaluation ------------------------------------------------------------

@dataclass(frozen=True)
class MetricAtPoint:
    g: np.ndarray
    g_inv: np.ndarray
    signature: tuple[int, int]
    point: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def check_point(spec: MetricSpec, point: Sequence[float]) -> np.ndarray:
    P = np.asarray(point, dtype=float)
    if P.shape != (spec.dim,):
        raise MetricError(f"point has {P.size} coordinates, metric dimension is {spec.dim}")
    if not np.all(np.isfinite(P)):
        raise MetricError("point has non-finite coordinates")
    return P


def metric_matrix(spec: MetricSpec, point: Sequence[float]) -> np.ndarray:
    P = check_point(spec, point)
    keys, batch = spec._component_batch
    vals = batch(P)
    g = np.zeros((spec.dim, spec.dim))
    for (a, b), v in zip(keys, vals):
        g[a, b] = v
        g[b, a] = v
    return g


def signature_of(g: np.ndarray) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(g)
    tol = 1e-12 * max(1.0, np.abs(ev).max())
    return int(np.sum(ev < -tol)), int(np.sum(ev > tol))


def metric_at(spec: MetricSpec, point: Sequence[float]) -> MetricAtPoint:
    P = check_point(spec, point)
    g = metric_matrix(spec, P)
    g_inv = np.linalg.inv(g)
    resid = np.abs(g @ g_inv - np.eye(spec.dim)).max()
    assert resid <= 1e-10, f"metric inverse residual {resid:.3g} at {P}"
    return MetricAtPoint(g, g_inv, signature_of(g), P)


def inner(gP: MetricAtPoint, u: Sequence[float], v: Sequence[float]) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (gP.dim,) or v.shape != (gP.dim,):
        raise MetricError(f"vectors must have length {gP.dim}")
    return float(u @ gP.g @ v)


def basis_vector(n: int, i: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return e


def underlying_psi(spec: MetricSpec):
    """The psi array of a psi/gradient metric (or product over one), else None."""
    if isinstance(spec, ProductMetric):
        spec = spec.base
    if isinstance(spec, (PsiMetric, GradientMetric)):
        return spec.psi
    return None


def underlying_f(spec: MetricSpec):
    if isinstance(spec, ProductMetric):
        spec = spec.base
    if isinstance(spec, GradientMetric):
        return spec.f
    return None
