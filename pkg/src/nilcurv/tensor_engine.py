"""Christoffel symbols, curvature, its covariant derivative and Ricci.

Index conventions (0-based, chart order x, y, w):

* ``gamma[i, j, k]`` is Gamma_ij^k, so that nabla_{d_i} d_j = gamma[i, j, k] d_k.
* ``R[i, j, k, l] = g(R(d_i, d_j) d_k, d_l)`` with
  ``R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]``.
* ``nablaR[i, j, k, l, m] = (nabla_{d_m} R)(d_i, d_j, d_k, d_l)``; the
  differentiation slot is last.

Three curvature routes are provided. ``general`` works for any polynomial
metric: the metric components are differentiated exactly and the inverse
metric is differentiated with the product rule, so no finite differences
enter. ``closed_psi`` uses the second-derivative formula for psi metrics,
and ``hypersurface`` uses the Gauss equation with the Hessian of ``f``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .metrics import (
    GradientMetric,
    MetricError,
    MetricSpec,
    check_point,
    metric_at,
    underlying_f,
    underlying_psi,
)
from .polyfunc import PolyBatch, PolyMap

ROUTES = ("general", "closed_psi", "hypersurface")


class RouteError(ValueError):
    """Requested curvature route does not apply to the metric family."""


@dataclass(frozen=True)
class CurvatureData:
    R: np.ndarray
    ricci: np.ndarray
    point: np.ndarray
    route: str
    nablaR: np.ndarray | None = None

    @property
    def scale(self) -> float:
        return 1.0 + float(np.abs(self.R).max(initial=0.0))


@dataclass(frozen=True)
class SecondForm:
    L: np.ndarray
    nondegenerate: bool
    classification: str  # "definite" | "indefinite" | "degenerate"


# -- derivative tables ------------------------------------------------------

class DerivativeTables:
    """All partial derivatives up to ``order`` of a symmetric array of polynomials.

    ``entries`` maps index pairs ``(a, b)`` with ``a <= b`` to polynomials in
    ``nvars`` variables. Calling the object at a point returns a list
    ``[T0, T1, ...]`` where ``T_k`` has shape ``(size, size) + (nvars,)*k``
    and is symmetric in the pair and in the derivative slots.
    """

    def __init__(self, entries: Mapping[tuple[int, int], PolyMap], size: int, nvars: int, order: int):
        self.size, self.nvars, self.order = size, nvars, order
        polys: list[PolyMap] = []
        scatter: list[list[tuple[tuple[int, ...], int]]] = [[] for _ in range(order + 1)]
        for (a, b), q in sorted(entries.items()):
            frontier = {(): q}
            for level in range(order + 1):
                for derivs, poly in frontier.items():
                    src = len(polys)
                    polys.append(poly)
                    for d in set(itertools.permutations(derivs)):
                        scatter[level].append(((a, b) + d, src))
                        if a != b:
                            scatter[level].append(((b, a) + d, src))
                if level == order:
                    break
                nxt = {}
                for derivs, poly in frontier.items():
                    for i in range(derivs[-1] if derivs else 0, nvars):
                        dq = poly.diff(i)
                        if not dq.is_zero():
                            nxt[derivs + (i,)] = dq
                frontier = nxt
        self._batch = PolyBatch(polys, nvars)
        self._index = []
        for level in range(order + 1):
            if scatter[level]:
                idx = np.array([t for t, _ in scatter[level]], dtype=np.int64).T
                src = np.array([s for _, s in scatter[level]], dtype=np.int64)
            else:
                idx = np.zeros((2 + level, 0), dtype=np.int64)
                src = np.zeros(0, dtype=np.int64)
            self._index.append((tuple(idx), src))

    def __call__(self, point: Sequence[float]) -> list[np.ndarray]:
        vals = self._batch(point)
        out = []
        for level, (idx, src) in enumerate(self._index):
            arr = np.zeros((self.size, self.size) + (self.nvars,) * level)
            arr[idx] = vals[src]
            out.append(arr)
        return out


def _cached(spec: MetricSpec, key, build):
    cache = spec.__dict__.setdefault("_engine_cache", {})
    if key not in cache:
        cache[key] = build()
    return cache[key]


def metric_jets(spec: MetricSpec, point: Sequence[float], order: int) -> list[np.ndarray]:
    """``[g, dg, ddg, ...]`` at ``point``; derivative slots last."""
    tables = _cached(spec, ("metric", order),
                     lambda: DerivativeTables(spec.components(), spec.dim, spec.dim, order))
    return tables(point)


def psi_jets(spec: MetricSpec, x: Sequence[float], order: int) -> list[np.ndarray]:
    """``[psi, d psi, dd psi, ...]`` evaluated at the x-part of a point (psi-type metrics only)."""
    psi = underlying_psi(spec)
    p = len(psi)
    entries = {(i, j): psi[i][j] for i in range(p) for j in range(i, p) if not psi[i][j].is_zero()}
    tables = _cached(spec, ("psi", order), lambda: DerivativeTables(entries, p, p, order))
    return tables(x)


# -- general route ------------------------------------------------------------

def _general(spec: MetricSpec, P: np.ndarray, with_nabla: bool):
    jets = metric_jets(spec, P, 3 if with_nabla else 2)
    g, dg, ddg = jets[0], jets[1], jets[2]
    G = np.linalg.inv(g)
    C = 0.5 * (np.einsum("jli->ijl", dg) + np.einsum("ilj->ijl", dg) - dg)
    dC = 0.5 * (np.einsum("jlin->ijln", ddg) + np.einsum("iljn->ijln", ddg) - ddg)
    gam = np.einsum("ml,ijl->ijm", G, C)
    dG = -np.einsum("ma,abn,bl->mln", G, dg, G, optimize=True)
    dgam = np.einsum("mln,ijl->ijmn", dG, C) + np.einsum("ml,ijln->ijmn", G, dC)
    Rup = (np.einsum("jkmi->ijkm", dgam) - np.einsum("ikmj->ijkm", dgam)
           + np.einsum("iqm,jkq->ijkm", gam, gam) - np.einsum("jqm,ikq->ijkm", gam, gam))
    R = np.einsum("ijkm,ml->ijkl", Rup, g)
    nablaR = None
    if with_nabla:
        dddg = jets[3]
        ddC = 0.5 * (np.einsum("jlino->ijlno", dddg) + np.einsum("iljno->ijlno", dddg) - dddg)
        ddG = -(np.einsum("mao,abn,bl->mlno", dG, dg, G, optimize=True)
                + np.einsum("ma,abno,bl->mlno", G, ddg, G, optimize=True)
                + np.einsum("ma,abn,blo->mlno", G, dg, dG, optimize=True))
        ddgam = (np.einsum("mlno,ijl->ijmno", ddG, C) + np.einsum("mln,ijlo->ijmno", dG, dC)
                 + np.einsum("mlo,ijln->ijmno", dG, dC) + np.einsum("ml,ijlno->ijmno", G, ddC))
        dRup = (np.einsum("jkmin->ijkmn", ddgam) - np.einsum("ikmjn->ijkmn", ddgam)
                + np.einsum("iqmn,jkq->ijkmn", dgam, gam) + np.einsum("iqm,jkqn->ijkmn", gam, dgam)
                - np.einsum("jqmn,ikq->ijkmn", dgam, gam) - np.einsum("jqm,ikqn->ijkmn", gam, dgam))
        dR = np.einsum("ijkmn,ml->ijkln", dRup, g) + np.einsum("ijkm,mln->ijkln", Rup, dg)
        nablaR = (dR - np.einsum("niq,qjkl->ijkln", gam, R) - np.einsum("njq,iqkl->ijkln", gam, R)
                  - np.einsum("nkq,ijql->ijkln", gam, R) - np.einsum("nlq,ijkq->ijkln", gam, R))
    return G, gam, R, nablaR


def christoffel(spec: MetricSpec, point: Sequence[float]) -> np.ndarray:
    """Gamma_ij^k of the Levi-Civita connection, shape (n, n, n)."""
    P = check_point(spec, point)
    g, dg = metric_jets(spec, P, 1)
    C = 0.5 * (np.einsum("jli->ijl", dg) + np.einsum("ilj->ijl", dg) - dg)
    return np.einsum("ml,ijl->ijm", np.linalg.inv(g), C)


# -- closed forms -------------------------------------------------------------

def _require_psi(spec: MetricSpec, route: str):
    if underlying_psi(spec) is None:
        raise RouteError(f"route {route!r} needs a psi or gradient metric (or a product over one), got {spec.family!r}")


def _closed_psi_R(spec: MetricSpec, P: np.ndarray, with_nabla: bool):
    p, n = spec.p, spec.dim
    jets = psi_jets(spec, P[:p], 3 if with_nabla else 2)
    d2 = jets[2]
    Rx = -0.5 * (np.einsum("iljk->ijkl", d2) + np.einsum("jkil->ijkl", d2)
                 - np.einsum("ikjl->ijkl", d2) - np.einsum("jlik->ijkl", d2))
    R = np.zeros((n,) * 4)
    R[:p, :p, :p, :p] = Rx
    nablaR = None
    if with_nabla:
        d3 = jets[3]
        Nx = -0.5 * (np.einsum("iljkm->ijklm", d3) + np.einsum("jkilm->ijklm", d3)
                     - np.einsum("ikjlm->ijklm", d3) - np.einsum("jlikm->ijklm", d3))
        nablaR = np.zeros((n,) * 5)
        nablaR[:p, :p, :p, :p, :p] = Nx
    return R, nablaR


def second_fundamental(f: PolyMap, point: Sequence[float]) -> SecondForm:
    """Hessian of ``f`` at the x-part of ``point``, with a definiteness label."""
    p = f.nvars
    x = np.asarray(point, dtype=float)[:p]
    if x.shape != (p,):
        raise MetricError(f"point needs at least {p} coordinates")
    L = np.array([[f.diff(i).diff(j)(x) for j in range(p)] for i in range(p)])
    ev = np.linalg.eigvalsh(L)
    top = np.abs(ev).max()
    if top == 0.0 or np.any(np.abs(ev) <= 1e-8 * top):
        return SecondForm(L, False, "degenerate")
    kind = "definite" if (np.all(ev > 0) or np.all(ev < 0)) else "indefinite"
    return SecondForm(L, True, kind)


def _hypersurface_R(spec: MetricSpec, P: np.ndarray):
    f = underlying_f(spec)
    if f is None:
        raise RouteError(f"route 'hypersurface' needs a gradient metric (or a product over one), got {spec.family!r}")
    p, n = spec.p, spec.dim
    L = second_fundamental(f, P).L
    R = np.zeros((n,) * 4)
    R[:p, :p, :p, :p] = np.einsum("il,jk->ijkl", L, L) - np.einsum("ik,jl->ijkl", L, L)
    return R


# -- public entry points --------------------------------------------------------

def _ricci(G: np.ndarray, R: np.ndarray) -> np.ndarray:
    return np.einsum("kl,kijl->ij", G, R)


def curvature(spec: MetricSpec, point: Sequence[float], route: str = "general",
              nabla: bool = False) -> CurvatureData:
    """Curvature at ``point`` by the chosen route; ``nabla=True`` also fills ``nablaR``.

    The hypersurface route has no covariant-derivative counterpart, so with
    ``nabla=True`` it borrows the closed-form one.
    """
    P = check_point(spec, point)
    if route == "general":
        G, _, R, nR = _general(spec, P, nabla)
        return CurvatureData(R, _ricci(G, R), P, route, nR)
    G = metric_at(spec, P).g_inv
    if route == "closed_psi":
        _require_psi(spec, route)
        R, nR = _closed_psi_R(spec, P, nabla)
    elif route == "hypersurface":
        R = _hypersurface_R(spec, P)
        nR = _closed_psi_R(spec, P, True)[1] if nabla else None
    else:
        raise RouteError(f"unknown route {route!r}; expected one of {ROUTES}")
    return CurvatureData(R, _ricci(G, R), P, route, nR)


def nabla_curvature(spec: MetricSpec, point: Sequence[float], route: str = "general") -> np.ndarray:
    P = check_point(spec, point)
    if route == "general":
        return _general(spec, P, True)[3]
    if route == "closed_psi":
        _require_psi(spec, route)
        return _closed_psi_R(spec, P, True)[1]
    raise RouteError(f"covariant derivative route must be 'general' or 'closed_psi', got {route!r}")


def ricci(spec: MetricSpec, point: Sequence[float]) -> np.ndarray:
    return curvature(spec, point, "general").ricci


def routes_for(spec: MetricSpec) -> tuple[str, ...]:
    if underlying_f(spec) is not None:
        return ROUTES
    if underlying_psi(spec) is not None:
        return ("general", "closed_psi")
    return ("general",)


def affine_curvature(gamma, x: Sequence[float]) -> np.ndarray:
    """Curvature of a torsion-free connection on R^p: ``out[i, j, k, m]`` = component m of R(d_i, d_j) d_k."""
    p = len(gamma)
    x = np.asarray(x, dtype=float)
    G = np.array([[[gamma[i][j][k](x) for k in range(p)] for j in range(p)] for i in range(p)])
    dG = np.array([[[[gamma[i][j][k].diff(n)(x) for n in range(p)] for k in range(p)]
                    for j in range(p)] for i in range(p)])
    return (np.einsum("jkmi->ijkm", dG) - np.einsum("ikmj->ijkm", dG)
            + np.einsum("iqm,jkq->ijkm", G, G) - np.einsum("jqm,ikq->ijkm", G, G))


# -- hypersurface embedding -------------------------------------------------------

def embed_check(f: PolyMap, point: Sequence[float]) -> dict[str, float]:
    """Residuals of the flat-space embedding of the gradient metric of ``f``.

    Ambient basis order ``alpha_1..alpha_p, beta_1..beta_p, gamma`` with
    ``(alpha_i, beta_j) = delta_ij`` and ``(gamma, gamma) = 1``.
    """
    p = f.nvars
    P = np.asarray(point, dtype=float)
    if P.shape != (2 * p,):
        raise MetricError(f"point must have {2 * p} coordinates")
    grad = np.array([f.diff(i)(P[:p]) for i in range(p)])
    gW = np.zeros((2 * p + 1, 2 * p + 1))
    gW[:p, p:2 * p] = np.eye(p)
    gW[p:2 * p, :p] = np.eye(p)
    gW[2 * p, 2 * p] = 1.0
    dF = np.zeros((2 * p + 1, 2 * p))
    dF[:p, :p] = np.eye(p)
    dF[p:2 * p, p:] = np.eye(p)
    dF[2 * p, :p] = grad
    nu = np.zeros(2 * p + 1)
    nu[p:2 * p] = -grad
    nu[2 * p] = 1.0
    g_f = metric_at(GradientMetric(p, f), P).g
    return {
        "isometry": float(np.abs(dF.T @ gW @ dF - g_f).max()),
        "normality": float(np.abs(nu @ gW @ dF).max()),
        "unit_normal": float(abs(nu @ gW @ nu - 1.0)),
    }
