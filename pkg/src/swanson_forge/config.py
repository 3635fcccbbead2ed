"""Run configuration shared by the CLI and :func:`swanson_forge.verify.run_all`."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .catalog import ModelId, model_def
from .errors import SwansonError, UnknownModel

FORMATS = ("json", "csv", "svg")
MIN_GRID = 64


class ConfigError(SwansonError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: dict = field(default_factory=dict)
    alpha: float = 0.0
    beta: float = 0.0
    grid_n: int | None = None
    window: tuple[float, float] | None = None
    checks: tuple[str, ...] | str = "all"
    nmax: int = 3
    out_dir: str = "out"
    formats: tuple[str, ...] = ("json", "csv")

    def __post_init__(self):
        try:
            ModelId(self.model)
        except ValueError:
            raise UnknownModel(f"unknown model {self.model!r}; try the 'list' command") from None
        object.__setattr__(self, "params", {str(k): float(v) for k, v in dict(self.params).items()})
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if self.grid_n is not None:
            if int(self.grid_n) != self.grid_n or self.grid_n < MIN_GRID:
                raise ConfigError(f"grid_n must be an integer >= {MIN_GRID}, got {self.grid_n}")
            object.__setattr__(self, "grid_n", int(self.grid_n))
        if self.window is not None:
            lo, hi = (float(v) for v in self.window)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(f"window must be a finite pair lo < hi, got {self.window}")
            object.__setattr__(self, "window", (lo, hi))
        if int(self.nmax) != self.nmax or self.nmax < 0:
            raise ConfigError(f"nmax must be a nonnegative integer, got {self.nmax}")
        object.__setattr__(self, "nmax", int(self.nmax))
        object.__setattr__(self, "checks", _normalize_checks(self.checks))
        formats = tuple(self.formats)
        unknown = sorted(set(formats) - set(FORMATS))
        if unknown:
            raise ConfigError(f"unknown formats {unknown}; allowed {list(FORMATS)}")
        object.__setattr__(self, "formats", formats)

    @property
    def model_id(self) -> ModelId:
        return ModelId(self.model)

    def selected_checks(self) -> tuple[str, ...]:
        from .verify import CHECK_NAMES

        return CHECK_NAMES if self.checks == "all" else self.checks

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checks"] = self.checks if self.checks == "all" else list(self.checks)
        d["window"] = list(self.window) if self.window is not None else None
        d["formats"] = list(self.formats)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _normalize_checks(checks) -> tuple[str, ...] | str:
    from .verify import CHECK_NAMES

    if checks == "all" or checks == ["all"] or checks == ("all",):
        return "all"
    if isinstance(checks, str):
        checks = [c.strip() for c in checks.split(",") if c.strip()]
    checks = tuple(checks)
    unknown = [c for c in checks if c not in CHECK_NAMES]
    if unknown or not checks:
        raise ConfigError(f"unknown checks {unknown}; registered: {', '.join(CHECK_NAMES)}")
    return checks


def config_from_dict(data: dict) -> RunConfig:
    """Build a config from a flat mapping; unknown keys are errors."""
    allowed = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; allowed {sorted(allowed)}")
    if "model" not in data:
        raise ConfigError("config needs a 'model'")
    data = dict(data)
    if data.get("window") is not None:
        data["window"] = tuple(data["window"])
    if "formats" in data:
        data["formats"] = tuple(data["formats"])
    return RunConfig(**data)


def load_config(path: str | Path) -> dict:
    """Read a flat JSON config file as a plain mapping (validated on build)."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return data


def param_names(model: str) -> tuple[str, str]:
    return model_def(model).param_names
