"""Jacobi, Szabo and skew-symmetric curvature operators as coordinate matrices.

Operators act on column vectors in chart coordinates; one index is raised
with ``g_inv``, so self-adjointness means ``g @ mat`` is symmetric.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import MetricAtPoint, MetricSpec, metric_at
from .tensor_engine import CurvatureData

PLANE_TYPES = ("spacelike", "timelike", "mixed")


class OperatorError(ValueError):
    """Bad operator argument: zero vector, dependent or degenerate plane."""


class SamplingError(RuntimeError):
    """The sampler exhausted its retry budget."""


@dataclass(frozen=True)
class OperatorMatrix:
    mat: np.ndarray
    kind: str  # "jacobi" | "szabo" | "skew"
    point: np.ndarray = field(repr=False)
    argument: tuple = field(repr=False)


@dataclass(frozen=True)
class PlaneSpec:
    u: np.ndarray
    v: np.ndarray
    orientation: int
    type: str
    gram: np.ndarray

    def oriented_pair(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.u, self.v) if self.orientation > 0 else (self.v, self.u)

    def to_dict(self) -> dict:
        return {"u": self.u.tolist(), "v": self.v.tolist(), "orientation": self.orientation,
                "type": self.type, "gram": self.gram.tolist()}


def _vector(gP: MetricAtPoint, X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape != (gP.dim,):
        raise OperatorError(f"{name} must have length {gP.dim}, got shape {X.shape}")
    if not np.any(X):
        raise OperatorError(f"{name} must be nonzero")
    return X


def _middle_pair(T: np.ndarray, X: np.ndarray) -> np.ndarray:
    """M[e, b] = T[b, c, d, e] X^c X^d."""
    return np.tensordot(np.tensordot(T, X, axes=(1, 0)), X, axes=(1, 0)).T


def jacobi_op(curv: CurvatureData, gP: MetricAtPoint, X) -> OperatorMatrix:
    """Y -> R(Y, X)X, normalised so that (J(X)Y, Z) = R(Y, X, X, Z)."""
    X = _vector(gP, X)
    M = _middle_pair(curv.R, X)
    return OperatorMatrix(gP.g_inv @ M, "jacobi", curv.point, (X,))


def szabo_op(nablaR: np.ndarray, gP: MetricAtPoint, X) -> OperatorMatrix:
    """Y -> (nabla_X R)(Y, X)X, with (S(X)Y, Z) = nablaR(Y, X, X, Z; X)."""
    X = _vector(gP, X)
    M = _middle_pair(nablaR @ X, X)
    return OperatorMatrix(gP.g_inv @ M, "szabo", gP.point, (X,))


def skew_op(curv: CurvatureData, gP: MetricAtPoint, plane: PlaneSpec) -> OperatorMatrix:
    """Y -> R(X1, X2)Y for an oriented orthonormal basis {X1, X2} of the plane."""
    if plane.type == "degenerate":
        raise OperatorError("skew-symmetric curvature operator needs a nondegenerate plane")
    X1, X2 = orthonormal_oriented_basis(gP, *plane.oriented_pair())
    M = np.tensordot(X2, np.tensordot(X1, curv.R, axes=(0, 0)), axes=(0, 0)).T
    return OperatorMatrix(gP.g_inv @ M, "skew", curv.point, (X1, X2))


# -- planes ---------------------------------------------------------------------

def gram(gP: MetricAtPoint, u, v) -> np.ndarray:
    B = np.stack([u, v], axis=1)
    return B.T @ gP.g @ B


def _gram_type(G: np.ndarray) -> str:
    scale = max(np.abs(G).max(), np.finfo(float).tiny)
    det = G[0, 0] * G[1, 1] - G[0, 1] ** 2
    if abs(det) <= 1e-10 * scale ** 2:
        return "degenerate"
    if det < 0:
        return "mixed"
    return "spacelike" if G[0, 0] + G[1, 1] > 0 else "timelike"


def classify_plane(gP: MetricAtPoint, u, v) -> str:
    u = _vector(gP, u, "u")
    v = _vector(gP, v, "v")
    s = np.linalg.svd(np.stack([u, v], axis=1), compute_uv=False)
    if s[1] <= 1e-12 * s[0]:
        raise OperatorError("u and v are linearly dependent")
    return _gram_type(gram(gP, u, v))


def make_plane(gP: MetricAtPoint, u, v, orientation: int = 1) -> PlaneSpec:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    kind = classify_plane(gP, u, v)
    return PlaneSpec(u, v, 1 if orientation >= 0 else -1, kind, gram(gP, u, v))


def orthonormal_oriented_basis(gP: MetricAtPoint, u, v) -> tuple[np.ndarray, np.ndarray]:
    """Indefinite Gram-Schmidt preserving the orientation of (u, v).

    A null first vector is replaced by ``u + t v`` (same orientation for
    every ``t``). Mixed planes come back ordered (spacelike, timelike).
    """
    kind = classify_plane(gP, u, v)
    if kind == "degenerate":
        raise OperatorError("plane is degenerate")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    G = gram(gP, u, v)
    floor = 1e-6 * np.abs(G).max()
    for t in (0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5):
        a = u + t * v
        qa = float(a @ gP.g @ a)
        if abs(qa) >= floor:
            break
    else:
        raise OperatorError("no pivot with non-null norm found")
    s1 = 1.0 if qa > 0 else -1.0
    X1 = a / np.sqrt(abs(qa))
    b = v - s1 * float(v @ gP.g @ X1) * X1
    qb = float(b @ gP.g @ b)
    # qb * qa is the Gram determinant; same threshold as _gram_type
    if abs(qb * qa) <= 1e-10 * np.abs(G).max() ** 2:
        raise OperatorError("plane is degenerate after projection")
    X2 = b / np.sqrt(abs(qb))
    if s1 < 0 < qb:
        return X2, -X1
    return X1, X2


# -- sampling --------------------------------------------------------------------

def _blocks(spec: MetricSpec) -> list[range]:
    return [b for b in (spec.x_slots(), spec.y_slots(), spec.w_slots()) if len(b)]


def draw_direction(spec: MetricSpec, rng: np.random.Generator) -> np.ndarray:
    """A raw tangent vector from a mixture of uniform, {-1,0,1}-lattice and block-sparse draws.

    The lattice and block-sparse strata put mass on the measure-zero strata
    (vectors with vanishing x-part, coordinate axes, null directions of
    diagonal forms) where rank laws change.
    """
    n = spec.dim
    mode = rng.random()
    if mode < 0.5:
        return rng.uniform(-1.0, 1.0, n)
    if mode < 0.75:
        return rng.integers(-1, 2, n).astype(float)
    blocks = _blocks(spec)
    while True:
        mask = rng.random(len(blocks)) < 0.5
        if mask.any():
            break
    Z = np.zeros(n)
    for keep, blk in zip(mask, blocks):
        if keep:
            Z[blk.start:blk.stop] = rng.uniform(-1.0, 1.0, len(blk))
    return Z


def normalize_unit(spec: MetricSpec, gP: MetricAtPoint, Z: np.ndarray, sign: int) -> np.ndarray | None:
    """Make (Z, Z) = sign, or return None when the draw cannot be used.

    With a y-block and a non-negligible x-part the y-component paired with
    the largest x-component is solved for (the y-block is null, so this is
    linear). Otherwise Z is rescaled when its norm already has the right sign.
    """
    p = spec.p
    q = float(Z @ gP.g @ Z)
    if p:
        X = Z[:p]
        i = int(np.argmax(np.abs(X)))
        if abs(X[i]) >= 0.05:
            Z = Z.copy()
            Z[p + i] += (sign - q) / (2.0 * X[i])
            q = float(Z @ gP.g @ Z)
            return Z if abs(q - sign) <= 1e-12 else None
    if Z.any() and sign * q >= 1e-2 * float(Z @ Z):
        Z = Z / np.sqrt(abs(q))
        q = float(Z @ gP.g @ Z)
        return Z if abs(q - sign) <= 1e-12 else None
    return None


def sample_unit(spec: MetricSpec, P, sign: int, rng: np.random.Generator,
                gP: MetricAtPoint | None = None, attempts: int = 100) -> np.ndarray:
    """Tangent vector Z at P with (Z, Z) = sign to 1e-12."""
    if sign not in (1, -1):
        raise OperatorError(f"sign must be +1 or -1, got {sign!r}")
    gP = gP if gP is not None else metric_at(spec, P)
    for _ in range(attempts):
        Z = normalize_unit(spec, gP, draw_direction(spec, rng), sign)
        if Z is not None:
            return Z
    raise SamplingError(f"no unit vector of sign {sign:+d} after {attempts} attempts")


def orthonormal_frame(gP: MetricAtPoint) -> tuple[np.ndarray, np.ndarray]:
    """Columns spanning the negative and positive eigenspaces of g, scaled to unit norm."""
    lam, V = np.linalg.eigh(gP.g)
    F = V / np.sqrt(np.abs(lam))
    return F[:, lam < 0], F[:, lam > 0]


def _frame_pair(gP: MetricAtPoint, kind: str, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    neg, pos = orthonormal_frame(gP)
    major = {"spacelike": (pos, pos), "timelike": (neg, neg), "mixed": (pos, neg)}[kind]
    t = rng.uniform(0.0, 0.5)
    out = []
    for block in major:
        both = np.hstack([neg, pos])
        main = block @ rng.standard_normal(block.shape[1])
        noise = both @ rng.standard_normal(both.shape[1])
        out.append(main / np.linalg.norm(main) + t * noise / np.linalg.norm(noise))
    return out[0], out[1]


def sample_plane(spec: MetricSpec, P, kind: str, rng: np.random.Generator,
                 gP: MetricAtPoint | None = None, attempts: int = 1000) -> PlaneSpec:
    """Rejection-sample an oriented plane of the requested type.

    The first draws (at most 20) are raw stratified vectors; the rest
    perturbs pairs taken from a g-orthonormal eigenframe, which still works
    when one causal type occupies a tiny part of the raw distribution.
    """
    if kind not in PLANE_TYPES:
        raise OperatorError(f"plane type must be one of {PLANE_TYPES}, got {kind!r}")
    gP = gP if gP is not None else metric_at(spec, P)
    for n in range(attempts):
        if n < min(20, attempts // 2):
            u = draw_direction(spec, rng)
            v = draw_direction(spec, rng)
        else:
            u, v = _frame_pair(gP, kind, rng)
        if not u.any() or not v.any():
            continue
        G = gram(gP, u, v)
        if _gram_type(G) != kind or abs(np.linalg.det(G)) < 1e-6 * np.abs(G).max() ** 2:
            continue
        s = np.linalg.svd(np.stack([u, v], axis=1), compute_uv=False)
        if s[1] > 1e-12 * s[0]:
            orientation = 1 if rng.random() < 0.5 else -1
            return PlaneSpec(u, v, orientation, kind, G)
    raise SamplingError(f"no {kind} plane after {attempts} attempts")


def x_part(spec: MetricSpec, Z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(Z)
    out[: spec.p] = Z[: spec.p]
    return out
