import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import pytimeparse

from vtkit.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "vtkit.toml"


@dataclass(frozen=True)
class GenConfig:
    size_bound: int = 12
    int_magnitude: int = 30
    rejection_budget: int = 1000
    trials: int = 200
    # share of uniqueness candidates that are mutants of the expected output
    mutant_ratio: float = 0.5
    fuel: int = 10 ** 6

    def __post_init__(self):
        for name in ("size_bound", "int_magnitude", "rejection_budget", "trials", "fuel"):
            _positive(self, name)
        if not 0.0 <= self.mutant_ratio <= 1.0:
            raise ConfigError(f"mutant_ratio must be within [0, 1], got {self.mutant_ratio}")


@dataclass(frozen=True)
class VerifyConfig:
    exhaustive_budget: int = 10 ** 4
    unroll_depth: int = 16
    inline_depth: int = 4
    smt_cmd: Optional[str] = None
    smt_timeout: float = 10.0
    jobs: int = 1
    keep_going: bool = False

    def __post_init__(self):
        for name in ("exhaustive_budget", "unroll_depth", "inline_depth", "jobs"):
            _positive(self, name)
        if self.smt_timeout <= 0:
            raise ConfigError(f"smt_timeout must be positive, got {self.smt_timeout}")


def _positive(cfg, name: str) -> None:
    value = getattr(cfg, name)
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


def parse_duration(value: Union[str, int, float]) -> float:
    """Seconds from a number or a duration such as "10s" or "1m30s"."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    seconds = pytimeparse.parse(str(value))
    if seconds is None:
        raise ConfigError(f"cannot parse duration {value!r}")
    return float(seconds)


def _section(cls, data: Dict[str, Any], section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {', '.join(sorted(unknown))}")
    values = dict(data)
    if "smt_timeout" in values:
        values["smt_timeout"] = parse_duration(values["smt_timeout"])
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigError(f"[{section}]: {e}") from None


def load_config(path: Optional[Union[str, Path]] = None) -> Tuple[GenConfig, VerifyConfig]:
    """Read `[gen]` and `[verify]` from a TOML file.

    With no explicit path, ./vtkit.toml is used when it exists; otherwise the
    defaults are returned.
    """
    if path is None:
        candidate = Path.cwd() / DEFAULT_CONFIG_FILE
        if not candidate.exists():
            return GenConfig(), VerifyConfig()
        path = candidate
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    unknown = set(data) - {"gen", "verify"}
    if unknown:
        raise ConfigError(f"{path}: unknown sections {', '.join(sorted(unknown))}")
    log.info("loaded configuration from %s", path)
    return _section(GenConfig, data.get("gen", {}), "gen"), _section(VerifyConfig, data.get("verify", {}), "verify")


def override(cfg, **flags):
    """Apply command line flags that were actually given (not None)."""
    given = {k: v for k, v in flags.items() if v is not None}
    return replace(cfg, **given) if given else cfg
