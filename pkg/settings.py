#!/usr/bin/env python3
"""
Lagrange-Ops Settings
Verification defaults, overridable from the environment (.env) and the CLI
"""

import math
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, Optional

from dotenv import load_dotenv

from errors import ConfigurationError

# Load environment variables
load_dotenv()

ENV_PREFIX = "LAGRANGE_OPS_"


@dataclass(frozen=True)
class VerificationSettings:
    """Sampling, tolerance and integration parameters shared by every check."""

    samples: int = 200
    tol: float = 1e-8
    seed: int = 42
    step: float = 1e-3
    t_end: float = 1.0
    flow_seeds: int = 20
    guard_epsilon: float = 1e-6
    fd_step: float = 1e-5
    fd_tol: float = 1e-5
    drift_tol: float = 1e-5
    safety_factor: float = 4.0
    power_tol: float = 1e-6
    max_power: int = 3
    node_budget: int = 20000
    rank_points: int = 9
    workers: int = 1

    def __post_init__(self):
        for name in ("samples", "flow_seeds", "max_power", "node_budget", "workers"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("tol", "step", "guard_epsilon", "fd_step", "fd_tol", "drift_tol", "safety_factor", "power_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigurationError(f"t_end must be finite and non-negative, got {self.t_end}")
        if self.rank_points < 5:
            raise ConfigurationError(f"rank_points must be at least 5, got {self.rank_points}")

    @classmethod
    def from_env(cls, environ: Optional[Dict[str, str]] = None) -> "VerificationSettings":
        """Build settings from LAGRANGE_OPS_* variables, falling back to defaults."""
        environ = os.environ if environ is None else environ
        values: Dict[str, Any] = {}
        for field in fields(cls):
            raw = environ.get(ENV_PREFIX + field.name.upper())
            if raw is None or raw.strip() == "":
                continue
            values[field.name] = _convert(ENV_PREFIX + field.name.upper(), raw, _caster(field.type))
        return cls(**values)

    def merged(self, **overrides: Any) -> "VerificationSettings":
        """Return a copy with every non-None override applied."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        unknown = set(changes) - {field.name for field in fields(self)}
        if unknown:
            raise ConfigurationError(f"unknown setting(s): {', '.join(sorted(unknown))}")
        return replace(self, **changes) if changes else self

    @staticmethod
    def coerce(name: str, raw: str) -> Any:
        """Convert a textual value for the named setting."""
        for field in fields(VerificationSettings):
            if field.name == name:
                return _convert(name, raw, _caster(field.type))
        raise ConfigurationError(f"unknown setting '{name}'")


def _caster(type_hint: Any) -> Callable[[str], Any]:
    return int if type_hint in (int, "int") else float


def _convert(name: str, raw: str, caster: Callable[[str], Any]) -> Any:
    try:
        if caster is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError(raw)
            return int(value)
        return caster(raw)
    except ValueError:
        raise ConfigurationError(f"setting '{name}' has malformed value {raw!r}") from None


def default_settings() -> VerificationSettings:
    """Settings from the environment; a malformed variable raises ConfigurationError."""
    return VerificationSettings.from_env()
