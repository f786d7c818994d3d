"""Base norms, subspace bases, and restricted operator gains.

Every quantified inequality in the condition checks reduces to the supremum
or infimum of ``norm(M x)`` over unit vectors x of a subspace.  The gain
estimator is exact for one-dimensional subspaces, for the euclidean norm
(via singular values), and for full-space suprema under the max and sum
norms (the maximum of a convex function over a polytope ball sits at a
vertex).  Everything else falls back to deterministic sphere sampling with
local refinement and is tagged ``sampled``.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg
from scipy import stats

from .errors import DegenerateSubspaceError

NORM_KINDS = ("max", "sum", "euclid")

_QMC_SEED = 20240811
_VERTEX_DIM_LIMIT = 12
_TINY = 1e-300


def vector_norm(x, kind="max") -> float:
    x = np.asarray(x, dtype=float)
    if kind == "max":
        return float(np.max(np.abs(x)))
    if kind == "sum":
        return float(np.sum(np.abs(x)))
    if kind == "euclid":
        return float(np.linalg.norm(x))
    raise ValueError(f"unknown norm kind {kind!r}")


def vector_norms(X, kind="max") -> np.ndarray:
    """Norms along the last axis of a stack of vectors."""
    X = np.asarray(X, dtype=float)
    if kind == "max":
        return np.max(np.abs(X), axis=-1)
    if kind == "sum":
        return np.sum(np.abs(X), axis=-1)
    if kind == "euclid":
        return np.sqrt(np.sum(X * X, axis=-1))
    raise ValueError(f"unknown norm kind {kind!r}")


def operator_norm(M, kind="max") -> float:
    """Operator norm induced by the base vector norm."""
    M = np.asarray(M, dtype=float)
    if kind == "max":
        return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0
    if kind == "sum":
        return float(np.max(np.sum(np.abs(M), axis=0))) if M.size else 0.0
    if kind == "euclid":
        return float(np.linalg.norm(M, 2)) if M.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}")


def operator_norms(Ms, kind="max") -> np.ndarray:
    """Induced norms for a stack of matrices (..., d, d)."""
    Ms = np.asarray(Ms, dtype=float)
    if kind == "max":
        return np.max(np.sum(np.abs(Ms), axis=-1), axis=-1)
    if kind == "sum":
        return np.max(np.sum(np.abs(Ms), axis=-2), axis=-1)
    if kind == "euclid":
        flat = Ms.reshape(-1, Ms.shape[-2], Ms.shape[-1])
        out = np.array([np.linalg.norm(m, 2) for m in flat])
        return out.reshape(Ms.shape[:-2])
    raise ValueError(f"unknown norm kind {kind!r}")


def subspace_basis(M, rtol=1e-9) -> np.ndarray:
    """Orthonormal basis of the column space of M.

    Rank-revealing QR with column pivoting; deterministic for a fixed input,
    which keeps downstream kernel coordinates reproducible.
    """
    M = np.asarray(M, dtype=float)
    q, r, _ = linalg.qr(M, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return np.zeros((M.shape[0], 0))
    rank = int(np.count_nonzero(diag >= rtol * diag[0]))
    return q[:, :rank]


@lru_cache(maxsize=32)
def _sign_vertices(d: int) -> np.ndarray:
    # Vertices of the max-norm unit ball, one per antipodal pair.
    rows = [v for v in itertools.product((1.0, -1.0), repeat=d) if v[0] > 0]
    return np.array(rows)


@lru_cache(maxsize=64)
def _sobol_sphere(dim: int, count: int) -> np.ndarray:
    """Deterministic low-discrepancy directions on the euclidean sphere."""
    sampler = stats.qmc.Sobol(d=dim, scramble=True, seed=_QMC_SEED)
    u = sampler.random(count)
    z = stats.norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    lens = np.linalg.norm(z, axis=1)
    lens[lens == 0.0] = 1.0
    return z / lens[:, None]


def sample_unit_vectors(d: int, kind: str = "max", extra: int = 64) -> np.ndarray:
    """Deterministic sample set on the base-norm unit sphere.

    Vertices of the unit ball (where the ball is a polytope), the signed
    standard basis, and a fixed batch of low-discrepancy directions.
    """
    parts = []
    if kind == "max" and d <= _VERTEX_DIM_LIMIT:
        verts = _sign_vertices(d)
        parts.append(np.vstack([verts, -verts]))
    eye = np.eye(d)
    parts.append(np.vstack([eye, -eye]))
    if extra > 0:
        parts.append(_sobol_sphere(d, extra))
    X = np.vstack(parts)
    lens = vector_norms(X, kind)
    keep = lens > _TINY
    return X[keep] / lens[keep, None]


@dataclass(frozen=True)
class GainEstimate:
    value: float
    method: str  # "exact" | "sampled"


def _orthonormalize(basis: np.ndarray) -> np.ndarray:
    q, r = linalg.qr(basis, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise DegenerateSubspaceError("basis columns are dependent or zero")
    return q


def _coordinate_directions(r: int, directions: int) -> np.ndarray:
    parts = [np.eye(r)]
    if r <= 8:
        verts = _sign_vertices(r)
        parts.append(verts / np.linalg.norm(verts, axis=1)[:, None])
    parts.append(_sobol_sphere(r, directions))
    return np.vstack(parts)


def _sampled_gain(M, basis, kind, mode, directions) -> GainEstimate:
    C = _coordinate_directions(basis.shape[1], directions)
    X = C @ basis.T
    nx = vector_norms(X, kind)
    keep = nx > _TINY
    C, X, nx = C[keep], X[keep], nx[keep]
    vals = vector_norms(X @ M.T, kind) / nx
    better = np.argmax(vals) if mode == "sup" else np.argmin(vals)
    best_c = C[better] / np.linalg.norm(C[better])
    best = float(vals[better])

    def ratio(c):
        x = basis @ c
        n = vector_norm(x, kind)
        if n <= _TINY:
            return None
        return vector_norm(M @ x, kind) / n

    # Coordinate-wise hill climb with a shrinking step; deterministic.
    step = 0.5
    sign = 1.0 if mode == "sup" else -1.0
    while step >= 1e-4:
        improved = False
        for i in range(len(best_c)):
            for s in (step, -step):
                cand = best_c.copy()
                cand[i] += s
                cand /= np.linalg.norm(cand)
                v = ratio(cand)
                if v is not None and sign * (v - best) > 0.0:
                    best, best_c = v, cand
                    improved = True
        if not improved:
            step *= 0.5
    return GainEstimate(float(best), "sampled")


def matrix_gain(M, kind="max", mode="sup", basis=None, directions=512) -> GainEstimate:
    """sup or inf of norm(M x) over unit vectors x of a subspace.

    ``basis`` columns span the subspace (None means the full space).  The
    result's ``method`` records whether the value is exact or sampled.
    """
    if mode not in ("sup", "inf"):
        raise ValueError(f"mode must be 'sup' or 'inf', got {mode!r}")
    M = np.asarray(M, dtype=float)
    d = M.shape[0]

    if basis is None:
        if kind == "euclid":
            sv = linalg.svdvals(M)
            return GainEstimate(float(sv[0] if mode == "sup" else sv[-1]), "exact")
        if mode == "sup":
            if kind == "max" and d <= _VERTEX_DIM_LIMIT:
                verts = _sign_vertices(d)
                return GainEstimate(float(vector_norms(verts @ M.T, kind).max()), "exact")
            if kind == "sum":
                return GainEstimate(float(np.max(np.sum(np.abs(M), axis=0))), "exact")
        else:
            sv = linalg.svdvals(M)
            if sv[-1] <= 1e-14 * max(sv[0], 1.0):
                # Singular map: the infimum vanishes in every norm.
                return GainEstimate(0.0, "exact")
        return _sampled_gain(M, np.eye(d), kind, mode, directions)

    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2 or basis.shape[1] == 0:
        raise DegenerateSubspaceError("empty subspace basis")
    r = basis.shape[1]
    if r == 1:
        b = basis[:, 0]
        nb = vector_norm(b, kind)
        if nb <= _TINY:
            raise DegenerateSubspaceError("zero basis vector")
        return GainEstimate(vector_norm(M @ b, kind) / nb, "exact")
    ortho = _orthonormalize(basis)
    sv = linalg.svdvals(M @ ortho)
    if kind == "euclid":
        return GainEstimate(float(sv[0] if mode == "sup" else sv[-1]), "exact")
    if mode == "inf" and sv[-1] <= 1e-14 * max(sv[0], 1.0):
        return GainEstimate(0.0, "exact")
    return _sampled_gain(M, ortho, kind, mode, directions)


def restricted_gain(E, basis, m: int, n: int, mode="sup", kind=None,
                    directions=512) -> GainEstimate:
    """Gain of the transition operator from time n to m on a subspace."""
    if kind is None:
        kind = E.norm
    return matrix_gain(E.op(m, n), kind=kind, mode=mode, basis=basis,
                       directions=directions)
