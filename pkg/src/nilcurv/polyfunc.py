"""Sparse multivariate polynomials with float coefficients.

A :class:`PolyMap` is an immutable map from exponent tuples to nonzero
coefficients. Variable indices are 0-based in the Python API; the JSON
encoding carries exponent vectors only, so no index convention leaks into
files.
"""
from __future__ import annotations

import itertools
import json
import math
from typing import Iterable, Mapping, Sequence

import numpy as np


class PolyError(ValueError):
    """Malformed polynomial input (dimension mismatch, bad index, bad JSON)."""


def _grlex_key(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), exps)


class PolyMap:
    __slots__ = ("_nvars", "_terms", "_exps", "_coefs")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], float] | None = None):
        if int(nvars) != nvars or nvars < 1:
            raise PolyError(f"nvars must be a positive integer, got {nvars!r}")
        nvars = int(nvars)
        merged: dict[tuple[int, ...], float] = {}
        for exps, coef in (terms or {}).items():
            key = tuple(int(e) for e in exps)
            if len(key) != nvars:
                raise PolyError(f"exponent vector {key} has length {len(key)}, expected {nvars}")
            if any(e < 0 for e in key):
                raise PolyError(f"negative exponent in {key}")
            c = float(coef)
            if not math.isfinite(c):
                raise PolyError(f"non-finite coefficient {coef!r}")
            merged[key] = merged.get(key, 0.0) + c
        items = sorted(((k, c) for k, c in merged.items() if c != 0.0), key=lambda kc: _grlex_key(kc[0]))
        self._nvars = nvars
        self._terms = tuple(items)
        if items:
            self._exps = np.array([k for k, _ in items], dtype=np.int64)
            self._coefs = np.array([c for _, c in items], dtype=float)
        else:
            self._exps = np.zeros((0, nvars), dtype=np.int64)
            self._coefs = np.zeros(0)

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "PolyMap":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: float) -> "PolyMap":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def monomial(cls, nvars: int, exps: Sequence[int], coef: float = 1.0) -> "PolyMap":
        return cls(nvars, {tuple(exps): coef})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "PolyMap":
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): 1.0})

    # -- accessors ------------------------------------------------------
    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((sum(k) for k, _ in self._terms), default=-1)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self._nvars == other._nvars and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._nvars, self._terms))

    def __repr__(self) -> str:
        if not self._terms:
            return f"PolyMap({self._nvars}, 0)"
        parts = []
        for exps, c in self._terms:
            mono = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}" for i, e in enumerate(exps) if e)
            parts.append(f"{c:g}*{mono}" if mono else f"{c:g}")
        return f"PolyMap({self._nvars}, {' + '.join(parts)})"

    # -- arithmetic -----------------------------------------------------
    def _check_same(self, other: "PolyMap") -> None:
        if not isinstance(other, PolyMap):
            raise PolyError(f"expected PolyMap, got {type(other).__name__}")
        if other._nvars != self._nvars:
            raise PolyError(f"nvars mismatch: {self._nvars} vs {other._nvars}")

    def __add__(self, other: "PolyMap | float") -> "PolyMap":
        if isinstance(other, (int, float)):
            other = PolyMap.constant(self._nvars, other)
        self._check_same(other)
        out = dict(self._terms)
        for k, c in other._terms:
            out[k] = out.get(k, 0.0) + c
        return PolyMap(self._nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "PolyMap":
        return PolyMap(self._nvars, {k: -c for k, c in self._terms})

    def __sub__(self, other: "PolyMap | float") -> "PolyMap":
        if isinstance(other, (int, float)):
            return self + (-float(other))
        return self + (-other)

    def __rsub__(self, other: float) -> "PolyMap":
        return (-self) + other

    def __mul__(self, other: "PolyMap | float") -> "PolyMap":
        if isinstance(other, (int, float)):
            return PolyMap(self._nvars, {k: c * other for k, c in self._terms})
        self._check_same(other)
        # fsum keeps a*b == b*a exactly, independent of accumulation order
        parts: dict[tuple[int, ...], list[float]] = {}
        for (ka, ca), (kb, cb) in itertools.product(self._terms, other._terms):
            k = tuple(a + b for a, b in zip(ka, kb))
            parts.setdefault(k, []).append(ca * cb)
        return PolyMap(self._nvars, {k: math.fsum(v) for k, v in parts.items()})

    __rmul__ = __mul__

    # -- calculus and evaluation ---------------------------------------
    def diff(self, i: int) -> "PolyMap":
        if not 0 <= i < self._nvars:
            raise PolyError(f"variable index {i} out of range for nvars={self._nvars}")
        out = {}
        for k, c in self._terms:
            e = k[i]
            if e:
                out[k[:i] + (e - 1,) + k[i + 1:]] = c * e
        return PolyMap(self._nvars, out)

    def __call__(self, point: Sequence[float]) -> float:
        x = np.asarray(point, dtype=float)
        if x.shape != (self._nvars,):
            raise PolyError(f"point has shape {x.shape}, expected ({self._nvars},)")
        if not self._terms:
            return 0.0
        return float(self._coefs @ np.prod(x ** self._exps, axis=1))

    def embed(self, nvars: int, slots: Sequence[int]) -> "PolyMap":
        """Re-express in ``nvars`` variables, sending variable ``i`` to ``slots[i]``."""
        if len(slots) != self._nvars:
            raise PolyError("slot map length must equal nvars")
        out = {}
        for k, c in self._terms:
            e = [0] * nvars
            for i, s in enumerate(slots):
                e[s] += k[i]
            out[tuple(e)] = c
        return PolyMap(nvars, out)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {"nvars": self._nvars, "terms": [{"exps": list(k), "coef": c} for k, c in self._terms]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolyMap":
        try:
            nvars = data["nvars"]
            raw_terms = data["terms"]
        except (KeyError, TypeError) as exc:
            raise PolyError(f"polynomial JSON needs 'nvars' and 'terms': {exc}") from None
        if not isinstance(nvars, int) or isinstance(nvars, bool) or nvars < 1:
            raise PolyError(f"'nvars' must be a positive integer, got {nvars!r}")
        terms: dict[tuple[int, ...], float] = {}
        for n, term in enumerate(raw_terms):
            try:
                exps = term["exps"]
                coef = term["coef"]
            except (KeyError, TypeError):
                raise PolyError(f"terms[{n}] needs 'exps' and 'coef'") from None
            if not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in exps):
                raise PolyError(f"terms[{n}].exps must be nonnegative integers, got {exps!r}")
            if isinstance(coef, bool) or not isinstance(coef, (int, float)):
                raise PolyError(f"terms[{n}].coef must be a number, got {coef!r}")
            if not math.isfinite(coef) or coef == 0:
                raise PolyError(f"terms[{n}].coef must be finite and nonzero, got {coef!r}")
            key = tuple(exps)
            if len(key) != nvars:
                raise PolyError(f"terms[{n}].exps has length {len(key)}, expected {nvars}")
            if key in terms:
                raise PolyError(f"duplicate exponent vector {list(key)} at terms[{n}]")
            terms[key] = float(coef)
        return cls(nvars, terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PolyMap":
        return cls.from_dict(json.loads(text))


def poly_eval(poly: PolyMap, point: Sequence[float]) -> float:
    return poly(point)


def poly_diff(poly: PolyMap, i: int) -> PolyMap:
    return poly.diff(i)


def poly_arith(a: PolyMap, b: PolyMap, op: str) -> PolyMap:
    a._check_same(b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise PolyError(f"unknown op {op!r}; expected 'add' or 'mul'")


def poly_diff_multi(poly: PolyMap, indices: Iterable[int]) -> PolyMap:
    for i in indices:
        poly = poly.diff(i)
    return poly


class PolyBatch:
    """Evaluate many polynomials in the same variables with one numpy pass."""

    def __init__(self, polys: Sequence[PolyMap], nvars: int):
        for q in polys:
            if q.nvars != nvars:
                raise PolyError(f"nvars mismatch in batch: {q.nvars} vs {nvars}")
        self.nvars = nvars
        self.size = len(polys)
        exps = [q._exps for q in polys]
        self._exps = np.concatenate(exps) if exps else np.zeros((0, nvars), dtype=np.int64)
        self._coefs = np.concatenate([q._coefs for q in polys]) if polys else np.zeros(0)
        self._seg = np.repeat(np.arange(self.size), [len(q) for q in polys]).astype(np.int64)

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.nvars,):
            raise PolyError(f"point has shape {x.shape}, expected ({self.nvars},)")
        if not len(self._coefs):
            return np.zeros(self.size)
        vals = self._coefs * np.prod(x ** self._exps, axis=1)
        return np.bincount(self._seg, weights=vals, minlength=self.size)


def random_poly(nvars: int, degree: int, rng: np.random.Generator, scale: float = 2.0) -> PolyMap:
    """Dense random polynomial: every monomial of total degree <= ``degree``, coefficients U[-scale, scale]."""
    terms = {}
    for exps in itertools.product(range(degree + 1), repeat=nvars):
        if sum(exps) <= degree:
            terms[exps] = rng.uniform(-scale, scale)
    return PolyMap(nvars, terms)
