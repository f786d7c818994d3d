"""Projector sequences, invariance checks, and the skew-evolution operator.

A projector sequence P_n splits the space at each time; Q_n = I - P_n is its
complement.  Invariance means the dynamics respects the splitting.  Strong
invariance additionally makes the transition maps isomorphisms between the
kernels of consecutive projectors, which is what allows the backward
(skew-evolution) operator to be built by inverting one-step restrictions.

All residuals are reported relative to the scale of the operators involved:
the shear examples reach operator norms around 1e27 on a window of 32, where
absolute tolerances in the 1e-9 range would be meaningless in doubles.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import RankMismatchError, SingularRestrictionError
from .evolution import EvolutionCache
from .linops import operator_norm, operator_norms, subspace_basis


@dataclass(frozen=True)
class ProjectorSequence:
    """P_n for n in [0, N]; the complement Q_n = I - P_n is derived exactly."""

    matrices: np.ndarray  # (N+1, d, d)
    _range_bases: dict = field(default_factory=dict, repr=False, compare=False)
    _kernel_bases: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        P = np.asarray(self.matrices, dtype=float)
        if P.ndim != 3 or P.shape[1] != P.shape[2]:
            raise ValueError("projectors must have shape (N+1, d, d)")
        if not np.all(np.isfinite(P)):
            raise ValueError("projector entries must be finite")
        object.__setattr__(self, "matrices", P)

    @property
    def window(self) -> int:
        return self.matrices.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def complement(self) -> np.ndarray:
        return np.eye(self.dim) - self.matrices

    def p(self, n: int) -> np.ndarray:
        return self.matrices[n]

    def q(self, n: int) -> np.ndarray:
        return np.eye(self.dim) - self.matrices[n]

    def range_basis(self, n: int) -> np.ndarray:
        if n not in self._range_bases:
            self._range_bases[n] = subspace_basis(self.matrices[n])
        return self._range_bases[n]

    def kernel_basis(self, n: int) -> np.ndarray:
        """Orthonormal basis of Ker P_n, taken as the range of Q_n."""
        if n not in self._kernel_bases:
            self._kernel_bases[n] = subspace_basis(self.q(n))
        return self._kernel_bases[n]

    def range_rank(self, n: int) -> int:
        return self.range_basis(n).shape[1]

    def kernel_rank(self, n: int) -> int:
        return self.kernel_basis(n).shape[1]

    @classmethod
    def constant(cls, P, window: int) -> "ProjectorSequence":
        P = np.asarray(P, dtype=float)
        return cls(np.repeat(P[None, :, :], window + 1, axis=0))


@dataclass(frozen=True)
class ProjectorReport:
    """Per-index idempotency residuals |P_n^2 - P_n| / max(1, |P_n|^2)."""

    residuals: np.ndarray
    tol: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol


def check_projectors(P: ProjectorSequence, tol: float = 1e-9,
                     norm_kind: str = "max") -> ProjectorReport:
    M = P.matrices
    sq = np.matmul(M, M)
    res = operator_norms(sq - M, norm_kind)
    scale = np.maximum(1.0, operator_norms(M, norm_kind) ** 2)
    return ProjectorReport(res / scale, tol)


@dataclass(frozen=True)
class InvarianceReport:
    one_step: np.ndarray        # (N,) residuals of A_n P_n - P_{n+1} A_n
    pairwise: np.ndarray        # (N+1, N+1) residuals over all (m, n), m >= n
    tol: float

    @property
    def max_residual(self) -> float:
        return float(max(np.max(self.one_step), np.max(self.pairwise)))

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol


def check_invariance(P: ProjectorSequence, E: EvolutionCache,
                     tol: float = 1e-10) -> InvarianceReport:
    """Commutation of the splitting with the dynamics, one-step and cocycle level."""
    N, kind = E.window, E.norm
    if P.window != N:
        raise ValueError("projector window does not match the transition table")
    Pm = P.matrices
    p_norms = np.maximum(1.0, operator_norms(Pm, kind))

    A = E.system.matrices
    one = np.matmul(A, Pm[:-1]) - np.matmul(Pm[1:], A)
    one_scale = np.maximum(1.0, operator_norms(A, kind) *
                           np.maximum(p_norms[:-1], p_norms[1:]))
    one_res = operator_norms(one, kind) / one_scale

    pairwise = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        T = E.table[n:, n]
        diff = np.matmul(T, Pm[n]) - np.matmul(Pm[n:], T)
        scale = np.maximum(1.0, E.op_norms[n:, n] *
                           np.maximum(p_norms[n], p_norms[n:]))
        pairwise[n:, n] = operator_norms(diff, kind) / scale
    return InvarianceReport(one_res, pairwise, tol)


@dataclass(frozen=True)
class StrongInvarianceReport:
    kernel_rank: int
    sigma_min: np.ndarray       # (N+1, N+1), smallest singular value at (m, n)
    sigma_ratio: np.ndarray     # sigma_min / sigma_max, 0 where sigma_max = 0
    tol: float

    @property
    def min_ratio(self) -> float:
        N = self.sigma_ratio.shape[0] - 1
        vals = [self.sigma_ratio[m, n] for n in range(N + 1) for m in range(n, N + 1)]
        return float(min(vals)) if vals else 1.0

    @property
    def ok(self) -> bool:
        return self.min_ratio >= self.tol


def check_strong_invariance(P: ProjectorSequence, E: EvolutionCache,
                            sigma_min_tol: float = 1e-10) -> StrongInvarianceReport:
    """Injectivity of the kernel-restricted transition maps.

    The restriction of the transition from n to m to Ker P_n is expressed in
    orthonormal kernel coordinates; its smallest singular value (relative to
    the largest) measures how far it is from losing invertibility.  A kernel
    rank that varies with n is rejected outright.
    """
    N = E.window
    ranks = [P.kernel_rank(n) for n in range(N + 1)]
    if len(set(ranks)) > 1:
        raise RankMismatchError(f"kernel rank varies across the window: {ranks}")
    r = ranks[0]
    smin = np.zeros((N + 1, N + 1))
    sratio = np.zeros((N + 1, N + 1))
    if r == 0:
        return StrongInvarianceReport(0, smin, sratio + 1.0, sigma_min_tol)
    bases = [P.kernel_basis(n) for n in range(N + 1)]
    for n in range(N + 1):
        for m in range(n, N + 1):
            C = bases[m].T @ E.table[m, n] @ bases[n]
            sv = linalg.svdvals(C)
            smin[m, n] = sv[-1]
            sratio[m, n] = sv[-1] / sv[0] if sv[0] > 0.0 else 0.0
    return StrongInvarianceReport(r, smin, sratio, sigma_min_tol)


@dataclass(frozen=True)
class SkewEvolution:
    """Backward operators B[m, n] inverting the kernel-restricted dynamics.

    B[m, n] is stored as a d x d operator that annihilates the range of P_m
    and maps the range of Q_m onto the range of Q_n.  It is assembled from
    inverses of the one-step kernel-coordinate maps, composed along the
    window, so long-range operators never require inverting long products.
    """

    kernel_bases: np.ndarray    # (N+1, d, r)
    one_step_coords: np.ndarray  # (N, r, r)
    table: np.ndarray           # (N+1, N+1, d, d), valid for m >= n
    rank: int

    @property
    def window(self) -> int:
        return self.table.shape[0] - 1

    def op(self, m: int, n: int) -> np.ndarray:
        if not 0 <= n <= m <= self.window:
            raise IndexError(f"need 0 <= n <= m <= {self.window}, got ({m}, {n})")
        return self.table[m, n]


def build_skew_evolution(P: ProjectorSequence, E: EvolutionCache,
                         sigma_min_tol: float = 1e-10) -> SkewEvolution:
    """Invert the one-step kernel restrictions and compose them backwards."""
    N, d = E.window, E.dim
    ranks = [P.kernel_rank(n) for n in range(N + 1)]
    if len(set(ranks)) > 1:
        raise RankMismatchError(f"kernel rank varies across the window: {ranks}")
    r = ranks[0]
    table = np.zeros((N + 1, N + 1, d, d))
    if r == 0:
        return SkewEvolution(np.zeros((N + 1, d, 0)), np.zeros((N, 0, 0)), table, 0)

    bases = np.stack([P.kernel_basis(n) for n in range(N + 1)])
    A = E.system.matrices
    coords = np.zeros((N, r, r))
    inverses = np.zeros((N, r, r))
    for j in range(N):
        C = bases[j + 1].T @ (A[j] @ bases[j])
        sv = linalg.svdvals(C)
        if sv[-1] < sigma_min_tol * max(sv[0], 1e-30):
            raise SingularRestrictionError(
                f"one-step kernel restriction at {j} has condition "
                f"{sv[0] / max(sv[-1], 1e-300):.3e}"
            )
        coords[j] = C
        inverses[j] = np.linalg.inv(C)

    Q = P.complement
    proj = np.matmul(bases.transpose(0, 2, 1), Q)  # K_m^T Q_m
    eye_r = np.eye(r)
    for n in range(N + 1):
        G = eye_r
        table[n, n] = bases[n] @ proj[n]
        for m in range(n + 1, N + 1):
            G = G @ inverses[m - 1]
            table[m, n] = bases[n] @ G @ proj[m]
    return SkewEvolution(bases, coords, table, r)


def projected_transitions(E: EvolutionCache, P: ProjectorSequence,
                          side: str = "range") -> np.ndarray:
    """S[m, n] = A_m^n P_n (side="range") or A_m^n Q_n (side="kernel"),
    computed with reprojection after every one-step product.

    By invariance the reprojection changes nothing in exact arithmetic
    (P_m A_m^n P_n = A_m^n P_n).  Numerically it is essential: rounding
    noise leaking into the complementary direction would otherwise be
    amplified by the complementary growth and swamp a contracting scale
    over long windows whenever the projectors are not exactly
    representable.
    """
    N, d = E.window, E.dim
    A = E.system.matrices
    M = P.matrices if side == "range" else P.complement
    if side not in ("range", "kernel"):
        raise ValueError(f"side must be 'range' or 'kernel', got {side!r}")
    S = np.zeros((N + 1, N + 1, d, d))
    for n in range(N + 1):
        S[n, n] = M[n]
        for m in range(n + 1, N + 1):
            S[m, n] = M[m] @ (A[m - 1] @ S[m - 1, n])
    return S


_IDENTITY_NAMES = (
    "right_inverse",      # A_m^n B_m^n Q_m = Q_m
    "left_inverse",       # B_m^n A_m^n Q_n = Q_n
    "range_containment",  # B_m^n Q_m = Q_n B_m^n Q_m
    "same_time",          # B_m^m Q_m = Q_m = Q_m B_m^m Q_m
    "composition",        # B_m^{m0} Q_m = B_n^{m0} B_m^n Q_m
)


@dataclass(frozen=True)
class SkewIdentityReport:
    residuals: dict
    tol: float

    @property
    def max_residual(self) -> float:
        return float(max(self.residuals.values()))

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol


def check_skew_identities(E: EvolutionCache, P: ProjectorSequence,
                          B: SkewEvolution, tol: float = 1e-9) -> SkewIdentityReport:
    """The five algebraic identities tying B to the forward dynamics.

    Each residual is measured relative to max(1, |rhs|) and the worst value
    over all applicable index pairs/triples is reported per identity.
    """
    N, kind = E.window, E.norm
    Q = P.complement
    q_scale = np.maximum(1.0, operator_norms(Q, kind))
    res = {name: 0.0 for name in _IDENTITY_NAMES}

    for n in range(N + 1):
        T = E.table[n:, n]
        Bs = B.table[n:, n]
        # A_m^n (B_m^n Q_m) = Q_m; the stored B already ends in Q_m.
        lhs = np.matmul(T, np.matmul(Bs, Q[n:]))
        diff = operator_norms(lhs - Q[n:], kind) / q_scale[n:]
        res["right_inverse"] = max(res["right_inverse"], float(np.max(diff)))
        # B_m^n (A_m^n Q_n) = Q_n
        lhs = np.matmul(Bs, np.matmul(T, Q[n]))
        diff = operator_norms(lhs - Q[n], kind) / q_scale[n]
        res["left_inverse"] = max(res["left_inverse"], float(np.max(diff)))
        # B_m^n Q_m = Q_n (B_m^n Q_m)
        BQ = np.matmul(Bs, Q[n:])
        diff = operator_norms(np.matmul(Q[n], BQ) - BQ, kind)
        scale = np.maximum(1.0, operator_norms(BQ, kind))
        res["range_containment"] = max(res["range_containment"],
                                       float(np.max(diff / scale)))

    for m in range(N + 1):
        BQ = B.table[m, m] @ Q[m]
        worst = max(operator_norm(BQ - Q[m], kind),
                    operator_norm(Q[m] @ BQ - Q[m], kind)) / q_scale[m]
        res["same_time"] = max(res["same_time"], float(worst))

    for n in range(N + 1):
        for m in range(n, N + 1):
            # over all m0 <= n at once
            direct = B.table[m, : n + 1]
            composed = np.matmul(B.table[n, : n + 1], B.table[m, n])
            scale = np.maximum(1.0, operator_norms(direct, kind))
            diff = operator_norms(composed - direct, kind) / scale
            res["composition"] = max(res["composition"], float(np.max(diff)))

    return SkewIdentityReport(res, tol)
