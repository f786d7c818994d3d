"""Summation criteria: backward-sum and forward-sum characterizations.

The forward-sum (Datko-type) criterion needs a companion rate: a positive
sequence whose ratios against the base rate have summable partial sums
bounded by a constant H.  The default companion divides the rate by
(n + 1)^2, which works for every growth rate and carries the closed-form
bound pi^2 / 6.

Both criteria are estimated over the window exactly like the pointwise
conditions: per-index minimal raw sequences, envelopes, and witnesses,
with divergence read off nested-window trends by the caller.
"""

from dataclasses import dataclass

import numpy as np

from .conditions import ConditionEstimate
from .errors import BoundViolatedError
from .evolution import EvolutionCache
from .linops import sample_unit_vectors
from .lyapnorms import NormSequence
from .projectors import ProjectorSequence, SkewEvolution
from .rates import GrowthRate

_TINY = 1e-250

DEFAULT_TILDE_BOUND = float(np.pi ** 2 / 6.0)


@dataclass(frozen=True)
class TildeRate:
    """Companion rate with partial sums of values/base bounded by H."""

    base: GrowthRate
    values: np.ndarray
    bound: float

    @property
    def window(self) -> int:
        return len(self.values) - 1

    @property
    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.values / self.base.values)

    def truncate(self, window: int) -> "TildeRate":
        if window >= self.window:
            return self
        return TildeRate(self.base.truncate(window), self.values[: window + 1],
                         self.bound)

    def describe(self) -> dict:
        return {"bound": float(self.bound),
                "partial_sum": float(self.partial_sums[-1])}


def derive_tilde_rate(h: GrowthRate, strategy: str = "default",
                      table=None, bound: float = None) -> TildeRate:
    """Build the companion rate for a validated base rate.

    ``default`` sets value(n) = h(n) / (n + 1)^2 with bound pi^2 / 6, which
    is valid for every base rate.  A user table must come with its own
    bound, and the partial sums are checked against it.
    """
    if strategy == "default":
        n = np.arange(h.window + 1, dtype=float)
        values = h.values / (n + 1.0) ** 2
        rate = TildeRate(h, values, DEFAULT_TILDE_BOUND)
    elif strategy == "table":
        if table is None or bound is None:
            raise ValueError("table strategy needs explicit values and a bound")
        values = np.asarray(table, dtype=float)
        if len(values) < h.window + 1:
            raise ValueError(
                f"companion table has {len(values)} entries, window needs "
                f"{h.window + 1}"
            )
        if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
            raise ValueError("companion values must be positive and finite")
        rate = TildeRate(h, values[: h.window + 1], float(bound))
    else:
        raise ValueError(f"unknown companion strategy {strategy!r}")

    sums = rate.partial_sums
    slack = 1e-12 * max(1.0, rate.bound)
    if sums[-1] > rate.bound + slack:
        n = int(np.argmax(sums > rate.bound + slack))
        raise BoundViolatedError(
            f"partial sum {sums[n]:.6g} exceeds bound {rate.bound:.6g} at "
            f"index {n}"
        )
    return rate


@dataclass(frozen=True)
class BarbashinReport:
    """Backward-sum estimates: h-side indexed by n, k-side indexed by m."""

    h_side: ConditionEstimate   # hd6
    k_side: ConditionEstimate   # kd6


def barbashin_sums(Nseq: NormSequence, E: EvolutionCache, P: ProjectorSequence,
                   B: SkewEvolution, h: GrowthRate, k: GrowthRate,
                   samples=None) -> BarbashinReport:
    """Backward sums over past indices.

    h-side: sum_{j<=n} h_m |T(m,j) P_j x|_m  <= b_n h_n |x|_n,  m >= n
    k-side: sum_{j<=n} |B(m,j) Q_m x|_j / k_j <= b_m |x|_m / k_m,  n <= m
    """
    from .projectors import projected_transitions

    X = samples if samples is not None else sample_unit_vectors(P.dim, E.norm)
    W = Nseq.window
    hv, kv = h.values, k.values
    Q = P.complement
    SP = projected_transitions(E, P, "range")
    NX = np.stack([Nseq.values(n, X) for n in range(W + 1)])

    raw_h = np.zeros(W + 1)
    raw_k = np.zeros(W + 1)
    for m in range(W + 1):
        terms = np.stack([
            hv[m] * Nseq.values(m, X @ SP[m, j].T)
            for j in range(m + 1)
        ])                                   # (m+1, S)
        csum = np.cumsum(terms, axis=0)
        denom = hv[: m + 1, None] * NX[: m + 1]
        ok = denom > _TINY
        if np.any(ok):
            # rows are n = 0..m; fold each row's max into raw_h[n]
            ratio_rows = np.where(ok, csum / np.maximum(denom, _TINY), 0.0)
            raw_h[: m + 1] = np.maximum(raw_h[: m + 1], ratio_rows.max(axis=1))

        XQ = X @ Q[m].T
        terms = np.stack([
            Nseq.values(j, XQ @ B.table[m, j].T) / kv[j]
            for j in range(m + 1)
        ])
        csum = np.cumsum(terms, axis=0)
        denom = NX[m] / kv[m]
        ok = denom > _TINY
        if np.any(ok):
            raw_k[m] = float(np.max(csum[:, ok] / denom[ok]))
    return BarbashinReport(
        ConditionEstimate("hd6", "n", W, raw_h, "sampled"),
        ConditionEstimate("kd6", "m", W, raw_k, "sampled"),
    )


@dataclass(frozen=True)
class DatkoReport:
    """Forward-sum estimates plus their single-term (last-index) variants.

    The single-term variants matter because they alone already suffice for
    the dichotomy, so both are reported; the full sum always dominates its
    last term, which keeps the two verdicts consistent.
    """

    h_side: ConditionEstimate        # hd7 (companion-weighted forward sums)
    k_side: ConditionEstimate        # kd7
    h_single: ConditionEstimate
    k_single: ConditionEstimate


def datko_sums(Nseq: NormSequence, T: TildeRate, E: EvolutionCache,
               P: ProjectorSequence, B: SkewEvolution, h: GrowthRate,
               k: GrowthRate, samples=None) -> DatkoReport:
    """Forward sums over future indices.

    h-side: sum_{j=n}^{m} t_j |T(j,n) P_n x|_j  <= d_n t_n |x|_n
    k-side: sum_{j=n}^{m} k_j |B(j,n) Q_j x|_n  <= d_m k_n |x|_m
    with t the companion rate values.
    """
    from .projectors import projected_transitions

    X = samples if samples is not None else sample_unit_vectors(P.dim, E.norm)
    W = Nseq.window
    tv = T.values
    kv = k.values
    Q = P.complement
    SP = projected_transitions(E, P, "range")
    NX = np.stack([Nseq.values(n, X) for n in range(W + 1)])

    raw_h = np.zeros(W + 1)
    raw_h_single = np.zeros(W + 1)
    raw_k = np.zeros(W + 1)
    raw_k_single = np.zeros(W + 1)
    for n in range(W + 1):
        terms = np.stack([
            tv[j] * Nseq.values(j, X @ SP[j, n].T)
            for j in range(n, W + 1)
        ])                                   # (W+1-n, S)
        denom = tv[n] * NX[n]
        ok = denom > _TINY
        if np.any(ok):
            total = np.cumsum(terms, axis=0)[-1]
            raw_h[n] = float(np.max(total[ok] / denom[ok]))
            raw_h_single[n] = float(np.max(terms[:, ok] / denom[ok]))

        terms = np.stack([
            kv[j] * Nseq.values(n, (X @ Q[j].T) @ B.table[j, n].T)
            for j in range(n, W + 1)
        ])
        csum = np.cumsum(terms, axis=0)
        denom = kv[n] * NX[n:]              # rows m = n..W
        ok = denom > _TINY
        ratio_rows = np.where(ok, csum / np.maximum(denom, _TINY), 0.0)
        raw_k[n:] = np.maximum(raw_k[n:], ratio_rows.max(axis=1))
        single_rows = np.where(ok, terms / np.maximum(denom, _TINY), 0.0)
        raw_k_single[n:] = np.maximum(raw_k_single[n:], single_rows.max(axis=1))
    return DatkoReport(
        ConditionEstimate("hd7", "n", W, raw_h, "sampled"),
        ConditionEstimate("kd7", "m", W, raw_k, "sampled"),
        ConditionEstimate("hd7-single", "n", W, raw_h_single, "sampled"),
        ConditionEstimate("kd7-single", "m", W, raw_k_single, "sampled"),
    )
