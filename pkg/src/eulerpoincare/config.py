"""Scenario files: a flat ``key = value`` text format.

Grammar, one entry per line::

    line    := blank | comment | entry
    comment := '#' anything
    entry   := key '=' value [comment]
    key     := [A-Za-z0-9_.-]+
    value   := word | number (whitespace separated numbers form a vector)

Keys may appear only once. ``check.<invariant> = tol`` declares a relative
drift check; without any, the system's first integrals are checked at 1e-7.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import lie
from . import systems as S
from .integrators import StepperConfig

_KEY = re.compile(r"^[A-Za-z0-9_.\-]+$")

SYSTEM_KEYS = {
    "free-rigid-body": {"required": ("inertia",), "optional": ()},
    "heavy-top": {"required": ("inertia", "mass", "gravity", "com"), "optional": ("vertical",)},
    "spherical-pendulum": {"required": ("mass", "radius", "gravity"), "optional": ()},
    "abelian-oscillator": {"required": ("mass", "stiffness"), "optional": ()},
}
COMMON_KEYS = (
    "system", "rotation", "position", "velocity", "momentum",
    "dt", "t_end", "scheme", "reorthonormalize_every", "record_every", "csv", "report",
)
DEFAULT_TOLERANCE = 1e-7


class ConfigError(ValueError):
    """Invalid scenario; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ScenarioConfig:
    system: str
    parameters: dict
    gamma0: np.ndarray
    velocity: np.ndarray | None
    momentum: np.ndarray | None
    stepper: StepperConfig
    checks: dict = field(default_factory=dict)
    csv: str = "trajectory.csv"
    report: str = "report.json"

    def build_system(self) -> S.SystemSpec:
        p = self.parameters
        if self.system == "free-rigid-body":
            return S.make_free_rigid_body(p["inertia"])
        if self.system == "heavy-top":
            kw = {"vertical": p["vertical"]} if "vertical" in p else {}
            return S.make_heavy_top(p["inertia"], p["mass"], p["gravity"], p["com"], **kw)
        if self.system == "spherical-pendulum":
            return S.make_spherical_pendulum(p["mass"], p["radius"], p["gravity"])
        return S.make_harmonic_oscillator(p["mass"], p["stiffness"])

    def initial_state(self, sys: S.SystemSpec):
        if self.velocity is not None:
            return sys.state(0.0, self.gamma0, self.velocity)
        return sys.state_from_momentum(0.0, self.gamma0, self.momentum)


def parse_text(text: str) -> dict:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not _KEY.match(key):
            raise ConfigError(f"line {lineno}", f"bad key {key!r}")
        if key in entries:
            raise ConfigError(key, "duplicate key")
        if not value:
            raise ConfigError(key, "missing value")
        entries[key] = value
    return entries


def _floats(entries, key, size=None):
    try:
        vals = np.array([float(tok) for tok in entries[key].split()])
    except ValueError:
        raise ConfigError(key, f"expected numbers, got {entries[key]!r}") from None
    if not np.all(np.isfinite(vals)):
        raise ConfigError(key, "values must be finite")
    if size is not None and vals.size != size:
        raise ConfigError(key, f"expected {size} numbers, got {vals.size}")
    return vals


def _scalar(entries, key, positive=False):
    v = float(_floats(entries, key, 1)[0])
    if positive and not v > 0:
        raise ConfigError(key, "must be positive")
    return v


def _int(entries, key, default):
    if key not in entries:
        return default
    try:
        return int(entries[key])
    except ValueError:
        raise ConfigError(key, "expected an integer") from None


def load(path) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    return from_entries(parse_text(text))


def from_entries(entries: dict) -> ScenarioConfig:
    system = entries.get("system")
    if system is None:
        raise ConfigError("system", "missing")
    if system not in SYSTEM_KEYS:
        raise ConfigError("system", f"unknown system {system!r}; expected one of {sorted(SYSTEM_KEYS)}")
    spec = SYSTEM_KEYS[system]
    allowed = set(COMMON_KEYS) | set(spec["required"]) | set(spec["optional"])
    for key in entries:
        if key not in allowed and not key.startswith("check."):
            raise ConfigError(key, f"unknown key for {system}")
    for key in spec["required"] + ("dt", "t_end"):
        if key not in entries:
            raise ConfigError(key, "missing")

    params = {}
    if "inertia" in spec["required"]:
        I = _floats(entries, "inertia", 3)
        if np.any(I <= 0):
            raise ConfigError("inertia", "entries must be positive")
        params["inertia"] = I
    if system == "heavy-top":
        params["mass"] = _scalar(entries, "mass", positive=True)
        params["gravity"] = _scalar(entries, "gravity")
        params["com"] = _floats(entries, "com", 3)
        if np.linalg.norm(params["com"]) == 0:
            raise ConfigError("com", "must be nonzero")
        if "vertical" in entries:
            params["vertical"] = _floats(entries, "vertical", 3)
            if np.linalg.norm(params["vertical"]) == 0:
                raise ConfigError("vertical", "must be nonzero")
    elif system == "spherical-pendulum":
        params["mass"] = _scalar(entries, "mass", positive=True)
        params["radius"] = _scalar(entries, "radius", positive=True)
        params["gravity"] = _floats(entries, "gravity", 3)
    elif system == "abelian-oscillator":
        params["mass"] = _scalar(entries, "mass", positive=True)
        params["stiffness"] = _scalar(entries, "stiffness", positive=True)

    if system in ("free-rigid-body", "heavy-top"):
        gamma0 = lie.axis_angle(_floats(entries, "rotation", 3)) if "rotation" in entries else np.eye(3)
        dim = 3
    elif system == "spherical-pendulum":
        if "position" not in entries:
            raise ConfigError("position", "missing")
        gamma0 = _floats(entries, "position", 3)
        if abs(np.linalg.norm(gamma0) - params["radius"]) > 1e-9:
            raise ConfigError("position", "point is not on the sphere of the given radius")
        dim = 3
    else:
        if "position" not in entries:
            raise ConfigError("position", "missing")
        gamma0 = _floats(entries, "position", 1)
        dim = 1
    if ("velocity" in entries) == ("momentum" in entries):
        raise ConfigError("velocity", "give exactly one of velocity or momentum")
    velocity = _floats(entries, "velocity", dim) if "velocity" in entries else None
    momentum = _floats(entries, "momentum", dim) if "momentum" in entries else None

    try:
        stepper = StepperConfig(
            dt=_scalar(entries, "dt", positive=True),
            t_end=_scalar(entries, "t_end", positive=True),
            scheme=entries.get("scheme", "rk4"),
            reorthonormalize_every=_int(entries, "reorthonormalize_every", 0),
            record_every=_int(entries, "record_every", 1),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("stepper", str(exc)) from None

    checks = {}
    for key in entries:
        if key.startswith("check."):
            tol = _scalar(entries, key, positive=True)
            checks[key[len("check."):]] = tol

    return ScenarioConfig(
        system=system,
        parameters=params,
        gamma0=gamma0,
        velocity=velocity,
        momentum=momentum,
        stepper=stepper,
        checks=checks,
        csv=entries.get("csv", "trajectory.csv"),
        report=entries.get("report", "report.json"),
    )
