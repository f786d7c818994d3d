"""Reading and writing system description files.

A description file is JSON with the shape::

    {
      "name": "example2",                 # optional label
      "dimension": 2,
      "window": 32,
      "norm": "max",                      # max | sum | euclid
      "system": {"generator": "example2", "params": {...}}
                 or {"matrices": [[[...], [...]], ...]},   # N matrices
      "projectors": {"matrices": [...]},  # N+1 matrices; omitted when the
                                          # generator supplies them
      "rates": {
        "h": {"kind": "exponential", "alpha": 0.693...},
        "k": {"kind": "table", "values": [...]},
        "a": {...},                       # shear generators only
        "tilde": {"strategy": "default"}
                  or {"strategy": "table", "values": [...], "bound": 2.0}
      }
    }

Generator-backed files get their projectors (and any rate defaults) from
the registry; explicit files must carry both matrix blocks and both rates.
"""

import json
from dataclasses import replace

import numpy as np

from .catalog import EXAMPLES, SystemBundle, make_example
from .errors import (BelowOneError, HkdichoError, NonMonotoneError,
                     SpecParseError, SpecValidationError)
from .evolution import LinearSystem
from .linops import NORM_KINDS
from .pipeline import AnalysisConfig
from .projectors import ProjectorSequence
from .rates import validate_growth_rate

_SHEAR_GENERATORS = ("example2", "example6")


def load_spec(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise SpecParseError(f"{path}: top level must be a JSON object")
    return spec


def _require(spec, key, location):
    if key not in spec:
        raise SpecValidationError(f"missing field {key!r}", location)
    return spec[key]


def _rate_from(spec_rates, key, window, required):
    if key not in spec_rates or spec_rates[key] is None:
        if required:
            raise SpecValidationError("rate is required", f"rates.{key}")
        return None
    try:
        return validate_growth_rate(spec_rates[key], window)
    except (NonMonotoneError, BelowOneError, ValueError) as exc:
        raise SpecValidationError(f"{type(exc).__name__}: {exc}",
                                  f"rates.{key}") from exc


def parse_spec(spec_or_path, window: int = None, norm: str = None,
               config_overrides: dict = None):
    """Resolve a description into (bundle, config, resolved_spec_dict).

    ``window`` and ``norm`` override the file; generator-backed systems are
    regenerated at the overridden window.
    """
    spec = load_spec(spec_or_path) if not isinstance(spec_or_path, dict) \
        else spec_or_path

    W = int(window if window is not None else _require(spec, "window", "spec"))
    if W < 1:
        raise SpecValidationError("window must be at least 1", "window")
    kind = norm if norm is not None else spec.get("norm", "max")
    if kind not in NORM_KINDS:
        raise SpecValidationError(f"unknown norm {kind!r}", "norm")
    spec_rates = spec.get("rates", {})

    system_block = _require(spec, "system", "spec")
    if "generator" in system_block:
        name = system_block["generator"]
        if name not in EXAMPLES:
            raise SpecValidationError(
                f"unknown generator {name!r}; known: {sorted(EXAMPLES)}",
                "system.generator")
        params = dict(system_block.get("params", {}))
        params.pop("window", None)
        rate_overrides = None
        if name in _SHEAR_GENERATORS:
            rate_overrides = {key: spec_rates.get(key)
                              for key in ("a", "h", "k")}
        try:
            bundle = make_example(name, window=W, norm=kind,
                                  rates=rate_overrides, **params)
        except (HkdichoError, ValueError, TypeError) as exc:
            raise SpecValidationError(str(exc), "system.generator") from exc
    elif "matrices" in system_block:
        bundle = _explicit_bundle(spec, system_block, W, kind)
    else:
        raise SpecValidationError(
            "system needs either a generator or explicit matrices", "system")

    h = _rate_from(spec_rates, "h", W, required="h" not in bundle.rates)
    k = _rate_from(spec_rates, "k", W, required="k" not in bundle.rates)
    rates = dict(bundle.rates)
    if h is not None:
        rates["h"] = h
    if k is not None:
        rates["k"] = k
    bundle = replace(bundle, rates=rates)

    tilde = spec_rates.get("tilde", {}) or {}
    overrides = dict(config_overrides or {})
    config = AnalysisConfig(
        window=W, base_norm=kind,
        tilde_strategy=tilde.get("strategy", "default"),
        tilde_table=tuple(tilde["values"]) if "values" in tilde else None,
        tilde_bound=tilde.get("bound"),
        **overrides,
    )

    resolved = dict(spec)
    resolved["window"] = W
    resolved["norm"] = kind
    return bundle, config, resolved


def _explicit_bundle(spec, system_block, W, kind) -> SystemBundle:
    d = int(_require(spec, "dimension", "spec"))
    mats = np.asarray(system_block["matrices"], dtype=float)
    if mats.shape != (W, d, d):
        raise SpecValidationError(
            f"expected {W} matrices of shape {d}x{d}, got {mats.shape}",
            "system.matrices")
    proj_block = _require(spec, "projectors", "spec")
    if "matrices" not in proj_block:
        raise SpecValidationError(
            "explicit systems need explicit projector matrices", "projectors")
    pmats = np.asarray(proj_block["matrices"], dtype=float)
    if pmats.shape != (W + 1, d, d):
        raise SpecValidationError(
            f"expected {W + 1} projectors of shape {d}x{d}, got {pmats.shape}",
            "projectors.matrices")
    try:
        system = LinearSystem(mats, kind)
        projectors = ProjectorSequence(pmats)
    except ValueError as exc:
        raise SpecValidationError(str(exc), "system") from exc
    return SystemBundle(spec.get("name", "custom"), system, projectors, {})


def example_spec_dict(name: str, window: int = 32, norm: str = "max",
                      **params) -> dict:
    """A self-contained description file for a registry example."""
    bundle = make_example(name, window=window, norm=norm, **params)
    gen_params = {k: v for k, v in bundle.params.items() if k != "window"}
    rates = {key: rate.describe() for key, rate in bundle.rates.items()}
    rates["tilde"] = {"strategy": "default"}
    return {
        "name": name,
        "dimension": int(bundle.system.dim),
        "window": int(window),
        "norm": norm,
        "system": {"generator": name, "params": gen_params},
        "projectors": {"generator": name},
        "rates": rates,
    }


def write_spec(spec: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec, fh, indent=2, sort_keys=True)
        fh.write("\n")
