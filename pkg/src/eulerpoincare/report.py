"""Invariant drift summaries and pass/fail checks."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

SCHEMA_VERSION = 1
# below this magnitude an initial value is treated as zero and drift stays absolute
RELATIVE_FLOOR = 1e-12


@dataclass
class DriftEntry:
    name: str
    initial: float
    max_abs_drift: float
    max_rel_drift: float


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name}: {self.value:.3e} (tol {self.tolerance:.1e})"
        return f"{text}  {self.detail}" if self.detail else text


@dataclass
class InvariantReport:
    system: str = ""
    invariants: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_check(self, name, value, tolerance, detail="", below=True) -> Check:
        """Record ``value < tolerance`` (or ``>`` with ``below=False``)."""
        value = float(value)
        ok = bool(value < tolerance) if below else bool(value > tolerance)
        check = Check(name, ok, value, float(tolerance), detail)
        self.checks.append(check)
        return check

    def drift(self, name: str) -> DriftEntry:
        for entry in self.invariants:
            if entry.name == name:
                return entry
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "system": self.system,
            "passed": self.passed,
            "invariants": [asdict(e) for e in self.invariants],
            "checks": [asdict(c) for c in self.checks],
        }


def drift_entry(name: str, values) -> DriftEntry:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError(f"no samples for {name!r}")
    initial = float(values[0])
    abs_drift = float(np.abs(values - initial).max())
    rel = abs_drift / abs(initial) if abs(initial) >= RELATIVE_FLOOR else abs_drift
    return DriftEntry(name, initial, abs_drift, rel)
