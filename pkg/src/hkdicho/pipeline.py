"""Analysis orchestration: from a system bundle to a certificate.

The pipeline runs, in order: projector checks, invariance, strong
invariance, backward-operator construction and its identity checks, the
eight pointwise condition estimates, both norm constructions with
compatibility, the norm-sequence bound checks and coefficient estimates,
and the two summation criteria.  Everything that estimates a coefficient
sequence is evaluated on a nested window schedule (N/4, N/2, N) so that
growth of a value at a fixed index across windows can be read as
divergence; growth in the index alone is ordinary nonuniform behavior and
is never flagged.

Certificates never claim more than window-level evidence plus a trend.
"""

import hashlib
import json
import time
from dataclasses import dataclass

import numpy as np

from .catalog import SystemBundle
from .conditions import (ConditionEstimate, TrendDiagnostic, condition_trend,
                         compute_gain_tables, estimate_core_conditions,
                         prefix_trend)
from .errors import WindowTooSmallError
from .evolution import build_evolution, verify_cocycle
from .linops import NORM_KINDS, sample_unit_vectors
from .lyapnorms import (base_norm_sequence, build_dichotomy_norm,
                        build_growth_norm, check_compatibility, check_hd3_kd3,
                        check_hd4_kd4, estimate_hd5_kd5,
                        truncation_tail_nonincreasing)
from .projectors import (build_skew_evolution, check_invariance,
                         check_projectors, check_skew_identities,
                         check_strong_invariance)
from .rates import validate_growth_rate
from .series import barbashin_sums, datko_sums, derive_tilde_rate

CONDITION_IDS = ("hd1", "kd1", "hg1", "kg1", "hd2", "kd2", "hg2", "kg2",
                 "hd3", "kd3", "hd4", "kd4", "hd5", "kd5",
                 "hd6", "kd6", "hd7", "kd7")


@dataclass(frozen=True)
class AnalysisConfig:
    """Tolerances, sampling budgets, and the nested-window schedule."""

    window: int = 32
    base_norm: str = "max"
    tol_projector: float = 1e-9
    tol_invariance: float = 1e-10
    tol_sigma_min: float = 1e-10
    tol_factor: float = 1e-9
    tol_identity: float = 1e-9
    tol_cocycle: float = 1e-12
    sample_directions: int = 64
    gain_directions: int = 512
    divergence_ratio: float = 1.5
    conditions: tuple = CONDITION_IDS
    tilde_strategy: str = "default"
    tilde_table: tuple = None
    tilde_bound: float = None

    def __post_init__(self):
        for name in ("tol_projector", "tol_invariance", "tol_sigma_min",
                     "tol_factor", "tol_identity", "tol_cocycle"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.base_norm not in NORM_KINDS:
            raise ValueError(f"unknown norm kind {self.base_norm!r}")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        unknown = set(self.conditions) - set(CONDITION_IDS)
        if unknown:
            raise ValueError(f"unknown condition ids {sorted(unknown)}")

    def schedule(self, window: int) -> tuple:
        return tuple(sorted({max(2, window // 4), max(2, window // 2), window}))

    def describe(self) -> dict:
        return {
            "window": int(self.window),
            "base_norm": self.base_norm,
            "tolerances": {
                "projector": self.tol_projector,
                "invariance": self.tol_invariance,
                "sigma_min": self.tol_sigma_min,
                "factor": self.tol_factor,
                "identity": self.tol_identity,
                "cocycle": self.tol_cocycle,
            },
            "sample_directions": int(self.sample_directions),
            "gain_directions": int(self.gain_directions),
            "divergence_ratio": self.divergence_ratio,
            "conditions": list(self.conditions),
            "tilde": {"strategy": self.tilde_strategy,
                      "bound": self.tilde_bound},
        }


@dataclass(frozen=True)
class Certificate:
    """Machine-readable analysis result.

    ``timing_seconds`` is kept out of ``data`` on purpose: serialized
    certificates must be byte-identical across reruns of the same input.
    """

    data: dict
    timing_seconds: float = 0.0

    @property
    def exit_status(self) -> int:
        return int(self.data["verdicts"]["exit_status"])

    @property
    def conditions(self) -> dict:
        return self.data["conditions"]

    def condition(self, cid: str) -> dict:
        return self.data["conditions"][cid]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if not np.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _digest(payload: dict) -> str:
    canonical = json.dumps(_jsonable(payload), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _apply_trend(base_verdict: str, trend: TrendDiagnostic | None) -> str:
    if base_verdict == "HOLDS-ON-WINDOW" and trend is not None \
            and trend.verdict == "diverging":
        return "DIVERGING"
    return base_verdict


def _combine(*verdicts: str) -> str:
    if any(v == "FAILS" for v in verdicts):
        return "FAILS"
    if any(v == "DIVERGING" for v in verdicts):
        return "DIVERGING"
    if all(v == "VACUOUS" for v in verdicts):
        return "VACUOUS"
    return "HOLDS-ON-WINDOW"


def _condition_entry(est: ConditionEstimate, trend, verdict: str) -> dict:
    entry = {
        "index": est.index_name,
        "window": int(est.window),
        "method": est.method,
        "raw": est.raw,
        "envelope": est.envelope,
        "admissible": est.admissible,
        "uniform_constant": est.uniform_constant,
        "vacuous_indices": [int(i) for i in np.nonzero(est.vacuous)[0]],
        "failure_pairs": [list(p) for p in est.failures],
        "verdict": verdict,
    }
    if est.bound is not None:
        entry["bound"] = est.bound
    entry["trend"] = trend.describe() if trend is not None \
        else {"status": "window-too-small"}
    return entry


def _trend_or_none(per_window_estimates, ratio):
    try:
        return condition_trend(per_window_estimates, ratio)
    except WindowTooSmallError:
        return None


def _prefix_trend_or_none(windows, arrays, ratio):
    try:
        return prefix_trend(windows, arrays, ratio)
    except WindowTooSmallError:
        return None


def run_analysis(bundle: SystemBundle, config: AnalysisConfig = None) -> Certificate:
    """Run every check and estimate on a bundle; never raises on condition
    failures, only on structural defects (rank mismatch, singular one-step
    restriction, broken norm construction)."""
    t0 = time.perf_counter()
    if config is None:
        config = AnalysisConfig(window=bundle.window,
                                base_norm=bundle.system.norm)
    N = bundle.window
    P = bundle.projectors
    kind = bundle.system.norm
    h = validate_growth_rate(bundle.h, N)
    k = validate_growth_rate(bundle.k, N)

    E = build_evolution(bundle.system)
    cocycle = verify_cocycle(E, config.tol_cocycle)
    proj = check_projectors(P, config.tol_projector, kind)
    inv = check_invariance(P, E, config.tol_invariance)
    strong = check_strong_invariance(P, E, config.tol_sigma_min)
    B = build_skew_evolution(P, E, config.tol_sigma_min)
    skew = check_skew_identities(E, P, B, config.tol_identity)

    tables = compute_gain_tables(E, P, B)
    samples = sample_unit_vectors(bundle.system.dim, kind,
                                  config.sample_directions)
    tilde = derive_tilde_rate(h, config.tilde_strategy, config.tilde_table,
                              config.tilde_bound)

    schedule = config.schedule(N)
    per_window = {cid: [] for cid in CONDITION_IDS}
    series_base = {cid: [] for cid in ("hd6", "kd6", "hd7", "kd7")}
    compat_prefix = []
    full = {}
    for W in schedule:
        core = estimate_core_conditions(E, P, B, h, k, window=W, tables=tables)
        dnorm = build_dichotomy_norm(E, P, B, h, k, W)
        gnorm = build_growth_norm(E, P, B, h, k, W)
        compat_d = check_compatibility(dnorm, P, samples)
        compat_g = check_compatibility(gnorm, P, samples)
        hd3, kd3 = check_hd3_kd3(dnorm, E, P, B, h, k, samples,
                                 config.tol_factor)
        hd4, kd4, mono = check_hd4_kd4(dnorm, E, P, B, h, k, samples,
                                       config.tol_factor)
        hd5, kd5 = estimate_hd5_kd5(dnorm, E, P, B, h, k, samples)
        barb = barbashin_sums(dnorm, E, P, B, h, k, samples)
        datko = datko_sums(dnorm, tilde.truncate(W), E, P, B, h, k, samples)
        bseq = base_norm_sequence(bundle.system.dim, kind, W)
        barb_base = barbashin_sums(bseq, E, P, B, h, k, samples)
        datko_base = datko_sums(bseq, tilde.truncate(W), E, P, B, h, k,
                                samples)

        ests = dict(core)
        ests.update({"hd3": hd3, "kd3": kd3, "hd4": hd4, "kd4": kd4,
                     "hd5": hd5, "kd5": kd5,
                     "hd6": barb.h_side, "kd6": barb.k_side,
                     "hd7": datko.h_side, "kd7": datko.k_side})
        for cid, est in ests.items():
            per_window[cid].append(est)
        for cid, est in (("hd6", barb_base.h_side), ("kd6", barb_base.k_side),
                         ("hd7", datko_base.h_side), ("kd7", datko_base.k_side)):
            series_base[cid].append(est)
        compat_prefix.append(compat_d.c1)
        if W == N:
            full.update(core=core, dnorm=dnorm, gnorm=gnorm,
                        compat_d=compat_d, compat_g=compat_g,
                        hd3=hd3, kd3=kd3, hd4=hd4, kd4=kd4, mono=mono,
                        hd5=hd5, kd5=kd5, barb=barb, datko=datko,
                        barb_base=barb_base, datko_base=datko_base)

    conditions = {}
    verdicts = {}
    for cid in CONDITION_IDS:
        est = per_window[cid][-1]
        trend = _trend_or_none(per_window[cid], config.divergence_ratio)
        verdict = _apply_trend(est.base_verdict(), trend)
        verdicts[cid] = verdict
        conditions[cid] = _condition_entry(est, trend, verdict)

    compat_trend = _prefix_trend_or_none(list(schedule), compat_prefix,
                                         config.divergence_ratio)
    compat_verdict = "HOLDS-ON-WINDOW"
    if compat_trend is not None and compat_trend.verdict == "diverging":
        compat_verdict = "DIVERGING"

    series_entries = {}
    for cid in ("hd6", "kd6", "hd7", "kd7"):
        est = series_base[cid][-1]
        trend = _trend_or_none(series_base[cid], config.divergence_ratio)
        verdict = _apply_trend(est.base_verdict(), trend)
        series_entries[cid] = _condition_entry(est, trend, verdict)

    dichotomy_direct = _combine(verdicts["hd1"], verdicts["kd1"])
    growth_direct = _combine(verdicts["hg1"], verdicts["kg1"])
    via_norms = _combine(verdicts["hd5"], verdicts["kd5"], compat_verdict)
    dichotomy_full = _combine(verdicts["hd2"], verdicts["kd2"])
    growth_full = _combine(verdicts["hg2"], verdicts["kg2"])

    discrepancies = _discrepancies(bundle, per_window, verdicts)

    selected = [cid for cid in config.conditions if cid in verdicts]
    bad = [cid for cid in selected if verdicts[cid] in ("FAILS", "DIVERGING")]
    exit_status = 1 if bad else 0

    input_desc = bundle_description(bundle, config)
    data = {
        "schema": "hkdicho.certificate/1",
        "digest": _digest(input_desc),
        "input": input_desc,
        "window": int(N),
        "base_norm": kind,
        "window_schedule": [int(w) for w in schedule],
        "structure": {
            "cocycle": {"max_residual": cocycle.max_residual,
                        "tol": cocycle.tol, "pass": cocycle.ok},
            "projectors": {"max_residual": proj.max_residual,
                           "tol": proj.tol, "pass": proj.ok},
            "invariance": {"max_residual": inv.max_residual,
                           "tol": inv.tol, "pass": inv.ok},
            "strong_invariance": {"kernel_rank": int(strong.kernel_rank),
                                  "min_sigma_ratio": strong.min_ratio,
                                  "tol": strong.tol, "pass": strong.ok},
            "skew_identities": {"residuals": dict(skew.residuals),
                                "tol": skew.tol, "pass": skew.ok},
        },
        "conditions": conditions,
        "norms": {
            "dichotomy-norm": _norm_entry(full["dnorm"], full["compat_d"],
                                          samples, compat_trend),
            "growth-norm": _norm_entry(full["gnorm"], full["compat_g"],
                                       samples, None),
        },
        "norm_checks": {
            "projected_monotonicity_residual": full["mono"],
        },
        "series": {
            "tilde": dict(tilde.describe(), strategy=config.tilde_strategy),
            "with_base_norm": series_entries,
            "single_term": {
                "hd7-single": _condition_entry(full["datko"].h_single, None,
                                               full["datko"].h_single.base_verdict()),
                "kd7-single": _condition_entry(full["datko"].k_single, None,
                                               full["datko"].k_single.base_verdict()),
            },
        },
        "verdicts": {
            "per_condition": dict(verdicts),
            "compatibility": compat_verdict,
            "dichotomy_direct": dichotomy_direct,
            "dichotomy_via_norms": via_norms,
            "dichotomy_full_bounds": dichotomy_full,
            "growth_direct": growth_direct,
            "growth_full_bounds": growth_full,
            "growth_converse_status": "empirical",
            "agreement_direct_vs_norms": dichotomy_direct == via_norms,
            "exit_status": exit_status,
        },
        "discrepancies": discrepancies,
        "notes": list(bundle.notes),
        "catalog_metadata": bundle.metadata,
    }
    return Certificate(_jsonable(data), time.perf_counter() - t0)


def _norm_entry(Nseq, compat, samples, trend) -> dict:
    entry = Nseq.describe()
    entry["compatibility"] = {
        "c": compat.c,
        "c1": compat.c1,
        "lower_margin": compat.lower_margin,
        "finite": compat.ok,
    }
    entry["forward_tail_nonincreasing"] = truncation_tail_nonincreasing(
        Nseq, samples)
    if trend is not None:
        entry["compatibility"]["c1_trend"] = trend.describe()
    return entry


def _discrepancies(bundle, per_window, verdicts) -> list:
    out = []
    for cid, claim in bundle.expected.items():
        if cid not in per_window or not per_window[cid]:
            continue
        est = per_window[cid][-1]
        if claim == "nonuniform":
            env = est.envelope
            measured_uniform = bool(np.isfinite(env[-1])
                                    and env[-1] <= env[0] * (1.0 + 1e-6) + 1e-9)
            if measured_uniform:
                out.append({
                    "condition": cid,
                    "claimed": "coefficient sequence must grow with the index",
                    "measured": "minimal admissible sequence is constant on "
                                "every tested window",
                    "uniform_constant": float(est.admissible[-1]),
                    "status": "claim recorded as unverified; measured values "
                              "take precedence in this certificate",
                })
        elif claim == "diverging" and verdicts.get(cid) != "DIVERGING":
            out.append({
                "condition": cid,
                "claimed": "estimate diverges with the window",
                "measured": f"verdict {verdicts.get(cid)}",
                "status": "expected divergence not observed",
            })
    return out


def bundle_description(bundle: SystemBundle, config: AnalysisConfig) -> dict:
    """Canonical description of the analysis input, used for the digest."""
    rates = {name: rate.describe() for name, rate in bundle.rates.items()}
    desc = {
        "name": bundle.name,
        "dimension": int(bundle.system.dim),
        "window": int(bundle.window),
        "norm": bundle.system.norm,
        "params": _jsonable(bundle.params),
        "rates": rates,
        "config": config.describe(),
    }
    return _jsonable(desc)


def theorem_route_candidates(bundle, certificate) -> dict:
    """Cross-derived witnesses tying the projected and full-space bounds.

    The projected-condition witness d (pointwise max of the hd1/kd1
    admissible envelopes) is transferred to the full-space conditions via
    s_n = max_{j<=n} d_j (|P_j| + |Q_j|) and checked against the measured
    hd2/kd2 minima.
    """
    from .conditions import cross_candidate

    kind = bundle.system.norm
    cond = certificate.conditions
    d = np.maximum(np.asarray(cond["hd1"]["admissible"], dtype=float),
                   np.asarray(cond["kd1"]["admissible"], dtype=float))
    s = cross_candidate(d, bundle.projectors, kind)
    return {"d": d, "s": s}
