"""Certificate serialization: canonical JSON and per-condition CSV tables.

The JSON form is byte-identical across reruns of the same input: keys are
sorted, floats use shortest round-trip form, and nothing time-dependent is
serialized.  CSV emission writes one file per condition with columns
(n, raw_min, envelope, method), one row per window index.
"""

import csv
import json
import os

from .pipeline import Certificate


def certificate_json(cert: Certificate) -> str:
    return json.dumps(cert.data, sort_keys=True, indent=2) + "\n"


def write_certificate(cert: Certificate, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(certificate_json(cert))


def write_condition_csvs(cert: Certificate, directory) -> list:
    """One CSV per condition id; returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for cid in sorted(cert.conditions):
        entry = cert.conditions[cid]
        path = os.path.join(directory, f"{cid}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "raw_min", "envelope", "method"])
            for i, (raw, env) in enumerate(zip(entry["raw"],
                                               entry["envelope"])):
                writer.writerow([i, _fmt(raw), _fmt(env), entry["method"]])
        paths.append(path)
    return paths


def _fmt(value) -> str:
    if isinstance(value, str):  # "inf" markers survive as-is
        return value
    return repr(float(value))


def summary_lines(cert: Certificate) -> list:
    """Human-readable one-line-per-condition summary for the CLI."""
    data = cert.data
    lines = [
        f"input: {data['input']['name']} "
        f"(window={data['window']}, norm={data['base_norm']})",
        f"digest: {data['digest'][:16]}...",
    ]
    structure = data["structure"]
    flags = ", ".join(
        f"{name}={'ok' if structure[name]['pass'] else 'FAIL'}"
        for name in ("cocycle", "projectors", "invariance",
                     "strong_invariance", "skew_identities")
    )
    lines.append(f"structure: {flags}")
    for cid in sorted(cert.conditions):
        entry = cert.conditions[cid]
        u = entry["uniform_constant"]
        u_str = u if isinstance(u, str) else f"{u:.6g}"
        lines.append(f"{cid}: {entry['verdict']} (U={u_str}, "
                     f"method={entry['method']})")
    v = data["verdicts"]
    lines.append(f"dichotomy: direct={v['dichotomy_direct']}, "
                 f"via-norms={v['dichotomy_via_norms']}, "
                 f"agreement={v['agreement_direct_vs_norms']}")
    lines.append(f"growth: direct={v['growth_direct']}, "
                 f"full-bounds={v['growth_full_bounds']}")
    if data["discrepancies"]:
        lines.append(f"discrepancies: {len(data['discrepancies'])} note(s)")
        for note in data["discrepancies"]:
            lines.append(f"  - {note['condition']}: {note['measured']}")
    lines.append(f"exit status: {v['exit_status']}")
    return lines
