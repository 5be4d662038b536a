"""Tolerance-aware eigenvalues, ranks, nilpotency and Jordan profiles.

Jordan data for eigenvalue zero come from rank sequences of powers, which is
reliable for the nilpotent operators this package produces. For other
spectra the profile is flagged ``confident=False`` rather than trusted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SpectralError(ArithmeticError):
    """Eigenvalue computation failed to converge."""


def _scale(A: np.ndarray) -> float:
    # Frobenius norm: a cheap upper bound for the spectral norm
    return 1.0 + float(np.sqrt(np.sum(A * A))) if A.size else 1.0


def spectrum(A, tol: float = 1e-8) -> list[complex]:
    """Eigenvalues sorted by (real, imag); those below ``tol * (1 + ||A||_F)`` snapped to 0."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"spectrum needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise SpectralError(f"eigenvalue solver failed on {A.shape} matrix with norm {np.linalg.norm(A):.3g}: {exc}") from exc
    cut = tol * _scale(A)
    out = []
    for lam in ev:
        re = 0.0 if abs(lam.real) < cut else float(lam.real)
        im = 0.0 if abs(lam.imag) < cut else float(lam.imag)
        out.append(complex(re, im))
    return sorted(out, key=lambda z: (z.real, z.imag))


def numerical_rank(A, tol: float = 1e-8, ref: float = 1.0) -> int:
    """Singular values above ``tol * sigma_max``; 0 when ``sigma_max <= tol * ref``."""
    A = np.asarray(A)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] <= tol * ref:
        return 0
    return int(np.sum(s > tol * s[0]))


def nilpotency_index(A, tol: float = 1e-10) -> int | None:
    """Smallest k <= n with ||A^k|| <= tol * (1 + ||A||)^k, else None (not nilpotent)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    norm = float(np.linalg.norm(A, 2)) if n else 0.0
    Ak = np.eye(n)
    for k in range(1, n + 1):
        Ak = Ak @ A
        if np.linalg.norm(Ak, 2) <= tol * (1.0 + norm) ** k:
            return k
    return None


def rank_sequence(A, tol: float = 1e-8, ref: float | None = None, upto: int | None = None) -> tuple[int, ...]:
    """(rank A, rank A^2, ..., rank A^upto); ``ref`` defaults to 1 + ||A||, scaled per power."""
    A = np.asarray(A)
    n = A.shape[0]
    upto = n if upto is None else upto
    base = _scale(A) if ref is None else ref
    seq = []
    Ak = np.eye(n, dtype=A.dtype)
    for k in range(1, upto + 1):
        Ak = Ak @ A
        r = numerical_rank(Ak, tol, base ** k)
        seq.append(r)
        if r == 0:
            seq.extend([0] * (upto - k))
            break
    return tuple(seq)


def partition_from_ranks(n: int, ranks: tuple[int, ...]) -> tuple[int, ...]:
    """Jordan block sizes of eigenvalue 0; #blocks of size >= k is r_{k-1} - r_k (r_0 = n)."""
    r = (n,) + tuple(ranks)
    at_least = [r[k - 1] - r[k] for k in range(1, len(r))]
    at_least.append(0)
    sizes = []
    for k in range(1, len(at_least)):
        exactly = at_least[k - 1] - at_least[k]
        sizes.extend([k] * exactly)
    return tuple(sorted(sizes, reverse=True))


@dataclass(frozen=True)
class JordanProfile:
    eigenvalues: tuple[complex, ...]
    nilpotent_partition: tuple[int, ...]
    rank_sequence: tuple[int, ...]
    confident: bool = True

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "nilpotent_partition": list(self.nilpotent_partition),
            "rank_sequence": list(self.rank_sequence),
            "confident": self.confident,
        }


def jordan_profile(A, tol: float = 1e-8, ref: float | None = None) -> JordanProfile:
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    ev = spectrum(A, tol)
    ranks = rank_sequence(A, tol, ref)
    partition = partition_from_ranks(n, ranks)
    if ranks and ranks[-1] == 0:
        # numerically nilpotent: a defective block of size k smears the zero
        # eigenvalue to radius ~eps^(1/k), so trust the powers instead
        ev = [0j] * n
    zeros = sum(1 for z in ev if z == 0)
    confident = zeros == sum(partition)
    nonzero = [z for z in ev if z != 0]
    if nonzero:
        # only well separated real eigenvalues are inside the certified envelope
        if any(z.imag != 0 for z in nonzero):
            confident = False
        re = sorted(z.real for z in nonzero)
        gap = tol ** 0.5 * _scale(A)
        if any(b - a < gap for a, b in zip(re, re[1:])):
            confident = False
    return JordanProfile(tuple(ev), partition, ranks, confident)


def _distinct(ev: list[complex], cut: float) -> list[complex]:
    reps: list[complex] = []
    for z in ev:
        if not any(abs(z - r) <= cut for r in reps):
            reps.append(z)
    return reps


def jordan_equivalent(A, B, tol: float = 1e-8) -> bool:
    """Same spectrum and same rank sequences of (A - lambda)^k for every eigenvalue."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        return False
    n = A.shape[0]
    scale = max(_scale(A), _scale(B))
    ra, rb = rank_sequence(A, tol, scale), rank_sequence(B, tol, scale)
    if ra[-1:] == (0,) or rb[-1:] == (0,):
        # at least one side is numerically nilpotent; the rank sequences decide
        return ra == rb
    cut = tol ** 0.5 * scale
    ea, eb = spectrum(A, tol), spectrum(B, tol)
    used = [False] * n
    for z in ea:
        for k, w in enumerate(eb):
            if not used[k] and abs(z - w) <= cut:
                used[k] = True
                break
        else:
            return False
    I = np.eye(n)
    for lam in _distinct(ea, cut):
        shift = lam.real if lam.imag == 0 else lam
        ra = rank_sequence(A - shift * I, tol, scale)
        rb = rank_sequence(B - shift * I, tol, scale)
        if ra != rb:
            return False
    return True
