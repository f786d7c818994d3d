"""Linear discrete-time systems and their transition (cocycle) tables.

For a system x_{n+1} = A_n x_n on the window [0, N], the transition table
holds T[m, n] = A_{m-1} ... A_n for m > n and T[n, n] = I.  The table is
built once and treated as immutable; all downstream analysis reads it.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EvolutionOverflowError
from .linops import NORM_KINDS, operator_norms


@dataclass(frozen=True)
class LinearSystem:
    """One-step maps A_0 .. A_{N-1} plus the base vector norm choice."""

    matrices: np.ndarray  # (N, d, d)
    norm: str = "max"

    def __post_init__(self):
        A = np.asarray(self.matrices, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError("matrices must have shape (N, d, d)")
        if A.shape[0] < 1:
            raise ValueError("window must be at least 1")
        if not np.all(np.isfinite(A)):
            raise ValueError("system matrices must have finite entries")
        if self.norm not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.norm!r}")
        object.__setattr__(self, "matrices", A)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def window(self) -> int:
        return self.matrices.shape[0]

    @classmethod
    def from_provider(cls, provider, dim: int, window: int, norm: str = "max"):
        A = np.empty((window, dim, dim))
        for n in range(window):
            A[n] = np.asarray(provider(n), dtype=float)
        return cls(A, norm)


@dataclass(frozen=True)
class EvolutionCache:
    """Triangular transition table T[m, n] for 0 <= n <= m <= N."""

    system: LinearSystem
    table: np.ndarray                     # (N+1, N+1, d, d), valid for m >= n
    op_norms: np.ndarray = field(repr=False, default=None)

    @property
    def window(self) -> int:
        return self.table.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.table.shape[2]

    @property
    def norm(self) -> str:
        return self.system.norm

    def op(self, m: int, n: int) -> np.ndarray:
        if not 0 <= n <= m <= self.window:
            raise IndexError(f"need 0 <= n <= m <= {self.window}, got ({m}, {n})")
        return self.table[m, n]

    def op_norm(self, m: int, n: int) -> float:
        return float(self.op_norms[m, n])


def build_evolution(system: LinearSystem) -> EvolutionCache:
    """Accumulate the full triangular transition table.

    Raises EvolutionOverflowError as soon as any entry stops being finite;
    rates like 2^n stay comfortably inside double range on desk windows.
    """
    N, d = system.window, system.dim
    A = system.matrices
    table = np.zeros((N + 1, N + 1, d, d))
    eye = np.eye(d)
    for n in range(N + 1):
        table[n, n] = eye
        for m in range(n + 1, N + 1):
            table[m, n] = A[m - 1] @ table[m - 1, n]
            if not np.all(np.isfinite(table[m, n])):
                raise EvolutionOverflowError(
                    f"non-finite entry in transition from {n} to {m}"
                )
    norms = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        norms[n:, n] = operator_norms(table[n:, n], system.norm)
    return EvolutionCache(system, table, norms)


def cocycle_residual(E: EvolutionCache) -> float:
    """max over n <= k <= m of |T[m,k] T[k,n] - T[m,n]| / max(1, |T[m,n]|).

    The denominator keeps the check meaningful when entries grow large.
    """
    N = E.window
    worst = 0.0
    for k in range(N + 1):
        left = E.table[k:, k]          # (N+1-k, d, d)
        right = E.table[k, : k + 1]    # (k+1, d, d)
        prod = np.einsum("aij,bjk->abik", left, right)
        target = E.table[k:, : k + 1]
        diff = operator_norms(prod - target, E.norm)
        denom = np.maximum(1.0, E.op_norms[k:, : k + 1])
        worst = max(worst, float(np.max(diff / denom)))
    return worst


@dataclass(frozen=True)
class CocycleReport:
    max_residual: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_residual <= self.tol


def verify_cocycle(E: EvolutionCache, tol: float = 1e-12) -> CocycleReport:
    return CocycleReport(cocycle_residual(E), tol)
