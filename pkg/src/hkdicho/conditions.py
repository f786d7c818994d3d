"""Pointwise condition estimates for dichotomy and growth bounds.

Each condition asks for a nondecreasing coefficient sequence in [1, oo)
dominating a family of weighted gain ratios.  The estimator computes the
pointwise minimal raw sequence on the window, its nondecreasing envelope,
and the minimal admissible witness (the envelope clamped below at 1).  A
property then HOLDS-ON-WINDOW with that witness; refutation on finite
evidence comes from the witness growing with the window at a fixed index,
which the nested-window trend diagnostic detects.

Condition ids and their quantifier structure (pairs (m, n) with m >= n,
sup over unit x where applicable):

* hd1:  h_m |T(m,n) P_n x|  <= d_n h_n |P_n x|      (sequence indexed by n)
* kd1:  k_m |Q_n x|         <= d_m k_n |T(m,n) Q_n x|   (indexed by m)
* hg1 / kg1: the same with the weight ratios inverted
* hd2:  h_m |T(m,n) P_n x|  <= s_n h_n |x|          (full-space supremum)
* kd2:  k_m |B(m,n) Q_m x|  <= s_m k_n |x|
* hg2 / kg2: weights inverted
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import MalformedCandidateError, WindowTooSmallError
from .evolution import EvolutionCache
from .linops import matrix_gain, vector_norm, vector_norms
from .projectors import ProjectorSequence, SkewEvolution
from .rates import GrowthRate

CORE_CONDITIONS = ("hd1", "kd1", "hg1", "kg1", "hd2", "kd2", "hg2", "kg2")

VERDICTS = ("HOLDS-ON-WINDOW", "FAILS", "DIVERGING", "VACUOUS")


@dataclass(frozen=True)
class ConditionEstimate:
    """Minimal raw sequence for one condition on one window.

    ``raw[i]`` is the smallest admissible value at index i (n or m according
    to the condition); +inf marks an injectivity failure.  ``bound`` is set
    for factor-type conditions that must stay below a fixed threshold.
    """

    condition: str
    index_name: str             # "n" or "m"
    window: int
    raw: np.ndarray
    method: str                 # "exact" | "sampled"
    vacuous: np.ndarray = None  # bool mask, True where the condition is empty
    failures: tuple = ()        # (m, n) pairs where an infimum gain vanished
    bound: float = None

    def __post_init__(self):
        if self.vacuous is None:
            object.__setattr__(self, "vacuous", np.zeros(len(self.raw), dtype=bool))

    @property
    def envelope(self) -> np.ndarray:
        return np.maximum.accumulate(self.raw)

    @property
    def admissible(self) -> np.ndarray:
        """Minimal nondecreasing witness in [1, oo)."""
        return np.maximum(1.0, self.envelope)

    @property
    def uniform_constant(self) -> float:
        return float(self.envelope[-1])

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.raw)))

    def base_verdict(self) -> str:
        if bool(np.all(self.vacuous)):
            return "VACUOUS"
        if not self.finite:
            return "FAILS"
        if self.bound is not None and self.uniform_constant > self.bound:
            return "FAILS"
        return "HOLDS-ON-WINDOW"


@dataclass(frozen=True)
class GainTables:
    """Window-independent gain tables shared by all condition estimates.

    Entries are indexed [m, n] with m >= n:

    * sup_p[m, n]: sup gain of T(m, n) on the range of P_n
    * inf_q[m, n]: inf gain of T(m, n) on the range of Q_n
    * sup_tp[m, n]: full-space sup of |T(m, n) P_n x| / |x|
    * sup_bq[m, n]: full-space sup of |B(m, n) Q_m x| / |x|
    """

    sup_p: np.ndarray
    inf_q: np.ndarray
    sup_tp: np.ndarray
    sup_bq: np.ndarray
    rank_p: np.ndarray
    rank_q: np.ndarray
    methods: dict = field(default_factory=dict)

    def method_for(self, *tables) -> str:
        return "sampled" if any(self.methods.get(t) == "sampled" for t in tables) \
            else "exact"


def _stack_gains(Ms: np.ndarray, kind: str):
    """Full-space sup gains for a stack of matrices; exact where possible."""
    vals = np.empty(len(Ms))
    sampled = False
    for i, M in enumerate(Ms):
        g = matrix_gain(M, kind=kind, mode="sup")
        vals[i] = g.value
        sampled = sampled or g.method == "sampled"
    return vals, sampled


def compute_gain_tables(E: EvolutionCache, P: ProjectorSequence,
                        B: SkewEvolution = None) -> GainTables:
    from .projectors import projected_transitions

    N, kind = E.window, E.norm
    sup_p = np.zeros((N + 1, N + 1))
    inf_q = np.zeros((N + 1, N + 1))
    sup_tp = np.zeros((N + 1, N + 1))
    sup_bq = np.zeros((N + 1, N + 1))
    rank_p = np.array([P.range_rank(n) for n in range(N + 1)])
    rank_q = np.array([P.kernel_rank(n) for n in range(N + 1)])
    methods = {"sup_p": "exact", "inf_q": "exact", "sup_tp": "exact",
               "sup_bq": "exact"}
    Q = P.complement
    # Reprojected tables keep each direction's own scale clean; applied to
    # vectors of the matching subspace they agree with the raw cocycle.
    SP = projected_transitions(E, P, "range")
    SQ = projected_transitions(E, P, "kernel")

    for n in range(N + 1):
        if rank_p[n] == 1:
            b = P.range_basis(n)[:, 0]
            sup_p[n:, n] = vector_norms(SP[n:, n] @ b, kind) / vector_norm(b, kind)
        elif rank_p[n] > 1:
            for m in range(n, N + 1):
                g = matrix_gain(SP[m, n], kind=kind, mode="sup",
                                basis=P.range_basis(n))
                sup_p[m, n] = g.value
                if g.method == "sampled":
                    methods["sup_p"] = "sampled"
        if rank_q[n] == 1:
            b = P.kernel_basis(n)[:, 0]
            inf_q[n:, n] = vector_norms(SQ[n:, n] @ b, kind) / vector_norm(b, kind)
        elif rank_q[n] > 1:
            for m in range(n, N + 1):
                g = matrix_gain(SQ[m, n], kind=kind, mode="inf",
                                basis=P.kernel_basis(n))
                inf_q[m, n] = g.value
                if g.method == "sampled":
                    methods["inf_q"] = "sampled"
        vals, sampled = _stack_gains(SP[n:, n], kind)
        sup_tp[n:, n] = vals
        if sampled:
            methods["sup_tp"] = "sampled"

    if B is not None:
        for m in range(N + 1):
            vals, sampled = _stack_gains(np.matmul(B.table[m, : m + 1], Q[m]),
                                         kind)
            sup_bq[m, : m + 1] = vals
            if sampled:
                methods["sup_bq"] = "sampled"

    return GainTables(sup_p, inf_q, sup_tp, sup_bq, rank_p, rank_q, methods)


def _window_cap(E, window):
    N = E.window
    if window is None:
        return N
    if not 1 <= window <= N:
        raise ValueError(f"window must be in [1, {N}], got {window}")
    return window


def estimate_hd1(E, P, h: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    """Forward contraction of the P-direction against the rate h."""
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P)
    hv = h.values
    raw = np.zeros(W + 1)
    vac = t.rank_p[: W + 1] == 0
    for n in range(W + 1):
        if vac[n]:
            continue
        raw[n] = float(np.max(hv[n : W + 1] * t.sup_p[n : W + 1, n]) / hv[n])
    return ConditionEstimate("hd1", "n", W, raw, t.method_for("sup_p"), vac)


def estimate_kd1(E, P, k: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    """Backward expansion of the Q-direction; a vanishing infimum gain is a
    failure of injectivity and reported as data, never raised."""
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P)
    kv = k.values
    raw = np.zeros(W + 1)
    vac = t.rank_q[: W + 1] == 0
    failures = []
    for m in range(W + 1):
        if vac[m]:
            continue
        gains = t.inf_q[m, : m + 1]
        dead = np.nonzero(gains <= 0.0)[0]
        if dead.size:
            failures.extend((m, int(n)) for n in dead)
            raw[m] = np.inf
            continue
        raw[m] = float(np.max(kv[m] / (kv[: m + 1] * gains)))
    return ConditionEstimate("kd1", "m", W, raw, t.method_for("inf_q"), vac,
                             tuple(failures))


def estimate_hg1(E, P, h: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P)
    hv = h.values
    raw = np.zeros(W + 1)
    vac = t.rank_p[: W + 1] == 0
    for n in range(W + 1):
        if vac[n]:
            continue
        raw[n] = float(np.max(hv[n] * t.sup_p[n : W + 1, n] / hv[n : W + 1]))
    return ConditionEstimate("hg1", "n", W, raw, t.method_for("sup_p"), vac)


def estimate_kg1(E, P, k: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P)
    kv = k.values
    raw = np.zeros(W + 1)
    vac = t.rank_q[: W + 1] == 0
    failures = []
    for m in range(W + 1):
        if vac[m]:
            continue
        gains = t.inf_q[m, : m + 1]
        dead = np.nonzero(gains <= 0.0)[0]
        if dead.size:
            failures.extend((m, int(n)) for n in dead)
            raw[m] = np.inf
            continue
        raw[m] = float(np.max(kv[: m + 1] / (kv[m] * gains)))
    return ConditionEstimate("kg1", "m", W, raw, t.method_for("inf_q"), vac,
                             tuple(failures))


def estimate_hd2(E, P, B, h: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P, B)
    hv = h.values
    raw = np.zeros(W + 1)
    vac = t.rank_p[: W + 1] == 0
    for n in range(W + 1):
        raw[n] = float(np.max(hv[n : W + 1] * t.sup_tp[n : W + 1, n]) / hv[n])
    return ConditionEstimate("hd2", "n", W, raw, t.method_for("sup_tp"), vac)


def estimate_kd2(E, P, B, k: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P, B)
    kv = k.values
    raw = np.zeros(W + 1)
    vac = t.rank_q[: W + 1] == 0
    for m in range(W + 1):
        raw[m] = float(np.max(kv[m] * t.sup_bq[m, : m + 1] / kv[: m + 1]))
    return ConditionEstimate("kd2", "m", W, raw, t.method_for("sup_bq"), vac)


def estimate_hg2(E, P, B, h: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P, B)
    hv = h.values
    raw = np.zeros(W + 1)
    vac = t.rank_p[: W + 1] == 0
    for n in range(W + 1):
        raw[n] = float(np.max(hv[n] * t.sup_tp[n : W + 1, n] / hv[n : W + 1]))
    return ConditionEstimate("hg2", "n", W, raw, t.method_for("sup_tp"), vac)


def estimate_kg2(E, P, B, k: GrowthRate, window=None, tables=None) -> ConditionEstimate:
    W = _window_cap(E, window)
    t = tables if tables is not None else compute_gain_tables(E, P, B)
    kv = k.values
    raw = np.zeros(W + 1)
    vac = t.rank_q[: W + 1] == 0
    for m in range(W + 1):
        raw[m] = float(np.max(t.sup_bq[m, : m + 1] * kv[: m + 1] / kv[m]))
    return ConditionEstimate("kg2", "m", W, raw, t.method_for("sup_bq"), vac)


def estimate_core_conditions(E, P, B, h, k, window=None, tables=None) -> dict:
    """All eight pointwise condition estimates on one window."""
    if tables is None:
        tables = compute_gain_tables(E, P, B)
    kw = dict(window=window, tables=tables)
    return {
        "hd1": estimate_hd1(E, P, h, **kw),
        "kd1": estimate_kd1(E, P, k, **kw),
        "hg1": estimate_hg1(E, P, h, **kw),
        "kg1": estimate_kg1(E, P, k, **kw),
        "hd2": estimate_hd2(E, P, B, h, **kw),
        "kd2": estimate_kd2(E, P, B, k, **kw),
        "hg2": estimate_hg2(E, P, B, h, **kw),
        "kg2": estimate_kg2(E, P, B, k, **kw),
    }


@dataclass(frozen=True)
class CandidateReport:
    ok: bool
    margin: float
    margins: np.ndarray


def check_candidate(estimate: ConditionEstimate, candidate,
                    rel_tol: float = 1e-9) -> CandidateReport:
    """Does the candidate sequence dominate the measured raw minima?

    The candidate must be nondecreasing and >= 1 on the window.  The margin
    is min(candidate - raw); the pass test allows a relative slack so exact
    closed-form candidates are not rejected over rounding.
    """
    cand = np.asarray(candidate, dtype=float)
    if len(cand) < len(estimate.raw):
        raise MalformedCandidateError(
            f"candidate has {len(cand)} entries, window needs {len(estimate.raw)}"
        )
    cand = cand[: len(estimate.raw)]
    if np.any(cand < 1.0 - 1e-12):
        raise MalformedCandidateError("candidate drops below 1")
    if np.any(cand[1:] < cand[:-1] - 1e-12 * np.maximum(1.0, np.abs(cand[:-1]))):
        raise MalformedCandidateError("candidate is decreasing")
    raw = estimate.raw
    slack = rel_tol * np.maximum(1.0, np.abs(raw, where=np.isfinite(raw),
                                             out=np.ones_like(raw)))
    with np.errstate(invalid="ignore"):
        ok = bool(np.all(cand + slack >= raw))
    margins = cand - raw
    return CandidateReport(ok, float(np.min(margins)), margins)


@dataclass(frozen=True)
class TrendDiagnostic:
    """Growth of a uniform constant across nested windows."""

    windows: tuple
    values: tuple
    ratios: tuple
    verdict: str                # "diverging" | "stable"
    slope: float                # log-log fit against window length in indices

    def describe(self) -> dict:
        return {
            "windows": [int(w) for w in self.windows],
            "values": [float(v) for v in self.values],
            "ratios": [float(r) for r in self.ratios],
            "verdict": self.verdict,
            "slope": None if self.slope is None or not np.isfinite(self.slope)
            else float(self.slope),
        }


def divergence_diagnostic(windows, values, ratio_threshold: float = 1.5
                          ) -> TrendDiagnostic:
    """Diverging iff the constant grows by more than the threshold factor
    between every pair of successive windows.  The slope is a least-squares
    fit of log(value) against log(window + 1), the window length in indices.
    """
    windows = tuple(int(w) for w in windows)
    values = tuple(float(v) for v in values)
    if len(windows) < 2:
        raise WindowTooSmallError("need at least two nested windows")
    if max(windows) < 8:
        raise WindowTooSmallError(f"largest window {max(windows)} < 8")
    ratios = tuple(
        values[i + 1] / values[i] if values[i] > 0.0 else np.inf
        for i in range(len(values) - 1)
    )
    verdict = "diverging" if all(r > ratio_threshold for r in ratios) else "stable"
    slope = None
    if all(v > 0.0 and np.isfinite(v) for v in values):
        x = np.log(np.asarray(windows, dtype=float) + 1.0)
        y = np.log(np.asarray(values))
        dx = x - x.mean()
        denom = float(np.sum(dx * dx))
        slope = float(np.sum(dx * (y - y.mean())) / denom) if denom > 0 else 0.0
    return TrendDiagnostic(windows, values, ratios, verdict, slope)


def prefix_trend(windows, arrays, ratio_threshold: float = 1.5
                 ) -> TrendDiagnostic:
    """Trend of a per-index sequence family across nested windows.

    Genuine divergence means the value at some *fixed* index keeps growing
    as the window is enlarged; growth in the index alone is ordinary
    nonuniform behavior and must not be flagged.  The growth statistic per
    successive window pair is therefore the maximum over the common index
    prefix of the per-index ratios, and the verdict is diverging iff every
    pair exceeds the threshold.  The reported values (and the slope fit)
    are the prefix maxima.
    """
    order = np.argsort(windows)
    windows = tuple(int(windows[i]) for i in order)
    arrays = [np.asarray(arrays[i], dtype=float) for i in order]
    if len(windows) < 2:
        raise WindowTooSmallError("need at least two nested windows")
    if max(windows) < 8:
        raise WindowTooSmallError(f"largest window {max(windows)} < 8")
    prefix = min(windows)
    cuts = [a[: prefix + 1] for a in arrays]
    values = tuple(float(np.max(c)) for c in cuts)
    ratios = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where((hi <= 1e-300) & (lo <= 1e-300), 1.0,
                         hi / np.maximum(lo, 1e-300))
        ratios.append(float(np.max(r)))
    verdict = "diverging" if all(r > ratio_threshold for r in ratios) \
        else "stable"
    slope = None
    if all(v > 0.0 and np.isfinite(v) for v in values):
        x = np.log(np.asarray(windows, dtype=float) + 1.0)
        y = np.log(np.asarray(values))
        dx = x - x.mean()
        denom = float(np.sum(dx * dx))
        slope = float(np.sum(dx * (y - y.mean())) / denom) if denom > 0 else 0.0
    return TrendDiagnostic(windows, values, tuple(ratios), verdict, slope)


def condition_trend(estimates, ratio_threshold: float = 1.5) -> TrendDiagnostic:
    """Trend of one condition's envelope across nested windows."""
    estimates = sorted(estimates, key=lambda e: e.window)
    return prefix_trend([e.window for e in estimates],
                        [e.envelope for e in estimates], ratio_threshold)


def cross_candidate(d_candidate, P: ProjectorSequence, kind: str = "max"
                    ) -> np.ndarray:
    """Transfer a witness for the projected conditions to the full-space ones.

    s_n = max_{j <= n} d_j (|P_j| + |Q_j|), the standard construction for
    moving between the projected-vector and full-vector bounds.
    """
    from .linops import operator_norms

    d = np.asarray(d_candidate, dtype=float)
    W = P.window
    norms = operator_norms(P.matrices, kind) + operator_norms(P.complement, kind)
    return np.maximum.accumulate(d[: W + 1] * norms[: W + 1])
