"""Growth rates: nondecreasing weight sequences with values in [1, oo).

A rate is realized as an explicit value table on the finite window [0, N].
Built-in families:

* ``exponential``      value(n) = exp(alpha * n)
* ``polynomial``       value(n) = (n + 1) ** alpha
* ``log-exponential``  value(n) = 1 + alpha * n   (the logarithm of an
  exponential rate, shifted so the sequence starts at 1)
* ``table``            explicit values supplied by the caller

The defining limit (values tending to infinity) cannot be observed on a
finite window; validated rates carry ``unbounded == "untested"``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BelowOneError, NonMonotoneError

RATE_KINDS = ("exponential", "polynomial", "log-exponential", "table")

_MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class GrowthRate:
    """A rate evaluated on [0, N]; ``values[n]`` is the weight at index n."""

    kind: str
    values: np.ndarray
    alpha: float | None = None
    unbounded: str = field(default="untested", compare=False)

    @property
    def window(self) -> int:
        return len(self.values) - 1

    def value(self, n: int) -> float:
        return float(self.values[n])

    def ratio(self, m: int, n: int) -> float:
        """values[m] / values[n]."""
        return float(self.values[m] / self.values[n])

    def log_value(self, n: int) -> float:
        return float(np.log(self.values[n]))

    def truncate(self, window: int) -> "GrowthRate":
        if window >= self.window:
            return self
        return GrowthRate(self.kind, self.values[: window + 1], self.alpha)

    @classmethod
    def exponential(cls, alpha: float, window: int) -> "GrowthRate":
        n = np.arange(window + 1, dtype=float)
        return cls("exponential", np.exp(alpha * n), alpha)

    @classmethod
    def polynomial(cls, alpha: float, window: int) -> "GrowthRate":
        n = np.arange(window + 1, dtype=float)
        return cls("polynomial", (n + 1.0) ** alpha, alpha)

    @classmethod
    def log_exponential(cls, alpha: float, window: int) -> "GrowthRate":
        n = np.arange(window + 1, dtype=float)
        return cls("log-exponential", 1.0 + alpha * n, alpha)

    @classmethod
    def from_table(cls, values) -> "GrowthRate":
        return cls("table", np.asarray(values, dtype=float))

    def describe(self) -> dict:
        if self.kind == "table":
            return {"kind": self.kind, "values": [float(v) for v in self.values]}
        return {"kind": self.kind, "alpha": float(self.alpha)}


def make_rate(spec, window: int) -> GrowthRate:
    """Build a rate from a description without validating it.

    ``spec`` may be a GrowthRate (truncated to the window), a dict with a
    ``kind`` field, or a bare sequence of values (treated as a table).
    """
    if isinstance(spec, GrowthRate):
        if spec.window < window:
            raise ValueError(
                f"rate table covers [0, {spec.window}] but window is {window}"
            )
        return spec.truncate(window)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "table":
            return GrowthRate.from_table(spec["values"][: window + 1])
        if kind not in RATE_KINDS:
            raise ValueError(f"unknown rate kind {kind!r}")
        alpha = float(spec["alpha"])
        factory = {
            "exponential": GrowthRate.exponential,
            "polynomial": GrowthRate.polynomial,
            "log-exponential": GrowthRate.log_exponential,
        }[kind]
        return factory(alpha, window)
    return GrowthRate.from_table(np.asarray(spec, dtype=float)[: window + 1])


def validate_growth_rate(spec, window: int) -> GrowthRate:
    """Build and check a rate on [0, window].

    Raises BelowOneError if any value is < 1 and NonMonotoneError if the
    table decreases anywhere.  The divergence of the sequence is not (and
    cannot be) asserted on a finite window.
    """
    if window < 1:
        raise ValueError("window must be at least 1")
    rate = make_rate(spec, window)
    values = rate.values
    if len(values) != window + 1:
        raise ValueError(
            f"rate table has {len(values)} entries, window needs {window + 1}"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("rate values must be finite")
    below = np.nonzero(values < 1.0 - _MONOTONE_SLACK)[0]
    if below.size:
        n = int(below[0])
        raise BelowOneError(f"value {values[n]} < 1 at index {n}")
    slack = _MONOTONE_SLACK * np.maximum(1.0, np.abs(values[1:]))
    drops = np.nonzero(values[1:] < values[:-1] - slack)[0]
    if drops.size:
        n = int(drops[0])
        raise NonMonotoneError(
            f"value decreases from {values[n]} to {values[n + 1]} at index {n + 1}"
        )
    return rate
