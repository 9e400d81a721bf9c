"""Configuration detection and loading"""

import os
import tomllib
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from dotenv import load_dotenv

from .errors import ValidationError

FORMATS = ("json", "csv", "pretty")


@dataclass(frozen=True)
class Tolerances:
    """Acceptance tolerances (scaled by RunConfig.tol_scale)"""

    exact_closure: float = 1e-10
    kernel: float = 1e-9
    calibration: float = 1e-8
    calibration_fd: float = 1e-5
    flat_cubic: float = 1e-10
    cubic_symmetry: float = 1e-6
    cubic_trace: float = 1e-5
    tetra_symmetry: float = 1e-4
    so3_symmetry: float = 1e-5
    drift_so3: float = 1e-8
    drift_d3: float = 1e-7
    drift_o2: float = 1e-7
    drift_tetra: float = 1e-8
    gc_flat: float = 1e-12
    gc_so3: float = 1e-4
    gc_negative: float = 1e-1
    hyperkahler: float = 1e-8
    hyperkahler_negative: float = 1e-1
    hl_invariant: float = 1e-3
    drift_octa: float = 1e-10
    phase_negative: float = 1e-1


@dataclass(frozen=True)
class RunConfig:
    """Run configuration shared by every command"""

    seed: int = 0
    tol_scale: float = 1.0
    output: str | None = None
    format: str = "json"
    closure_cap: int = 10000
    max_den: int = 60
    fd_step: float = 1e-4
    kernel_rtol: float = 1e-9
    extract_rtol: float = 1e-6
    samples: int = 20
    trials: int = 32
    theta_margin: float = 1e-2
    gc_grid: int = 3
    tolerances: Tolerances = field(default_factory=Tolerances)

    def tol(self, name: str) -> float:
        """Effective tolerance for a named check."""
        return getattr(self.tolerances, name) * self.tol_scale

    def echo(self) -> dict:
        """Config as plain data, with effective tolerances."""
        data = asdict(self)
        data["effective_tolerances"] = {
            f.name: self.tol(f.name) for f in fields(Tolerances)
        }
        return data


_TOP_KEYS = {f.name for f in fields(RunConfig)}
_TOL_KEYS = {f.name for f in fields(Tolerances)}


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ValidationError(
            f"Unknown key(s) in {where}: {', '.join(unknown)}. "
            f"Accepted: {', '.join(sorted(allowed))}"
        )


def _read_section(path: Path, *keys: str) -> dict:
    with open(path, "rb") as f:
        data = tomllib.load(f)
    for key in keys:
        data = data.get(key, {})
    return data


def _coerce(cfg: dict) -> RunConfig:
    cfg = dict(cfg)
    tol_section = cfg.pop("tolerances", {}) or {}
    if not isinstance(tol_section, dict):
        raise ValidationError("[umbilic4.tolerances] must be a table")
    _check_keys(cfg, _TOP_KEYS - {"tolerances"}, "[umbilic4]")
    _check_keys(tol_section, _TOL_KEYS, "[umbilic4.tolerances]")

    try:
        tolerances = Tolerances(**{k: float(v) for k, v in tol_section.items()})
        defaults = RunConfig()
        values = {}
        for f in fields(RunConfig):
            if f.name == "tolerances" or f.name not in cfg:
                continue
            current = getattr(defaults, f.name)
            raw = cfg[f.name]
            if isinstance(current, bool) or current is None or isinstance(current, str):
                values[f.name] = raw
            else:
                values[f.name] = type(current)(raw)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Invalid configuration value: {e}") from e

    config = replace(RunConfig(), tolerances=tolerances, **values)
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    """Reject values no command can run with.

    Raises:
        ValidationError: On an unknown format or a non-positive size or scale
    """
    if config.format not in FORMATS:
        raise ValidationError(
            f"Unknown format '{config.format}' (expected one of {', '.join(FORMATS)})"
        )
    if config.tol_scale <= 0:
        raise ValidationError("tol_scale must be positive")
    for name in ("closure_cap", "max_den", "samples", "trials", "gc_grid"):
        if getattr(config, name) < 1:
            raise ValidationError(f"{name} must be >= 1")
    if not 0 < config.fd_step < 1:
        raise ValidationError("fd_step must lie in (0, 1)")


def load_config(path: Path | str | None = None) -> RunConfig:
    """Load run configuration

    Configuration precedence (highest to lowest):
    1. Environment variables (UMBILIC4_SEED, UMBILIC4_TOL_SCALE), after .env
    2. The given file, or umbilic4.toml [umbilic4] section
    3. pyproject.toml [tool.umbilic4] section
    4. Built-in defaults

    CLI flags are applied on top by the caller.

    Raises:
        ValidationError: On unknown keys or malformed values
        FileNotFoundError: If an explicit path does not exist
    """
    load_dotenv()
    cwd = Path.cwd()

    section: dict = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        section = _read_section(path, "umbilic4")
    elif (cwd / "umbilic4.toml").exists():
        section = _read_section(cwd / "umbilic4.toml", "umbilic4")
    elif (cwd / "pyproject.toml").exists():
        section = _read_section(cwd / "pyproject.toml", "tool", "umbilic4")

    merged = dict(section)
    if (seed := os.getenv("UMBILIC4_SEED")) is not None:
        merged["seed"] = seed
    if (scale := os.getenv("UMBILIC4_TOL_SCALE")) is not None:
        merged["tol_scale"] = scale

    return _coerce(merged)


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply non-None CLI overrides and re-validate."""
    values = {k: v for k, v in overrides.items() if v is not None}
    _check_keys(values, _TOP_KEYS - {"tolerances"}, "overrides")
    updated = replace(config, **values)
    validate_config(updated)
    return updated
