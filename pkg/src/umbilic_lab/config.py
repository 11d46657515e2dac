"""Run configuration: a flat ``key = value`` text format with typed fields."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Optional

from .constructions import FlatFamilyParams, InvalidParameters, SphereFamilyParams

FAMILIES = ("flat", "sphere")

# text key -> dataclass attribute
_KEYS = {
    "family": "family",
    "n": "n",
    "m": "m",
    "lambda": "lam",
    "r0_inner": "r0",
    "r1": "r1",
    "R0": "R0",
    "epsilon": "epsilon",
    "grid": "grid",
    "samples": "samples",
    "seed": "seed",
    "tolerance": "tolerance",
    "out": "out",
}
_ATTRS = {v: k for k, v in _KEYS.items()}


class ConfigError(ValueError):
    """Bad configuration; the CLI maps it to exit code 2."""


@dataclass
class RunConfig:
    family: str = "flat"
    n: int = 1
    m: int = 1
    lam: Optional[float] = None
    r0: float = 0.5
    r1: float = 0.9
    R0: float = 1.0
    epsilon: float = 0.1
    grid: int = 200
    samples: int = 100
    seed: int = 0
    tolerance: Optional[float] = None
    out: Optional[str] = None

    def default_lambda(self) -> float:
        return 0.3 if self.family == "flat" else 0.5

    def flat_params(self, lam: Optional[float] = None) -> FlatFamilyParams:
        lam = lam if lam is not None else (self.lam if self.lam is not None else self.default_lambda())
        try:
            return FlatFamilyParams(self.n, self.m, lam, self.r0, self.r1, self.epsilon)
        except InvalidParameters as exc:
            raise ConfigError(str(exc)) from exc

    def sphere_params(self, lam: Optional[float] = None) -> SphereFamilyParams:
        lam = lam if lam is not None else (self.lam if self.lam is not None else self.default_lambda())
        try:
            return SphereFamilyParams(lam, self.R0, self.epsilon)
        except InvalidParameters as exc:
            raise ConfigError(str(exc)) from exc

    def params(self, lam: Optional[float] = None):
        return self.flat_params(lam) if self.family == "flat" else self.sphere_params(lam)

    def validate(self, lam: Optional[float] = None) -> "RunConfig":
        """Check every field; ``lam`` substitutes for the configured lambda."""
        if self.family not in FAMILIES:
            raise ConfigError(f"family: expected one of {FAMILIES}, got {self.family!r}")
        for name in ("grid", "samples"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{_ATTRS[name]}: must be >= 2")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ConfigError("tolerance: must be > 0")
        self.params(lam)
        return self

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is not None:
                lines.append(f"{_ATTRS[f.name]} = {value!r}" if isinstance(value, float)
                             else f"{_ATTRS[f.name]} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _KEYS:
                raise ConfigError(f"line {lineno}: unknown field {key!r}")
            attr = _KEYS[key]
            values[attr] = _coerce(attr, value, f"line {lineno}: {key}")
        return cls(**values)

    def merged(self, overrides: dict) -> "RunConfig":
        """Copy with every non-``None`` override applied."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})


_TYPES = {"family": str, "out": str, "n": int, "m": int, "grid": int, "samples": int, "seed": int}


def _coerce(attr, value, where):
    kind = _TYPES.get(attr, float)
    try:
        return kind(value)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {value!r} as {kind.__name__}") from None
