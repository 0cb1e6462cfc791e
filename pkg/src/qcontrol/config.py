"""Run configuration: a flat TOML document with strict key checking."""

from __future__ import annotations

import re
import sys
from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SECTIONS = ("grid", "control", "solver", "nonlinear", "data", "run")
U0_KINDS = ("bump", "random", "zero")


@dataclass(frozen=True)
class RunConfig:
    dimension: int = 1
    n: int = 64
    half_side: float = 8.0
    radius: float = 2.0
    horizon: float = 2.0
    nt: int = 256
    cg_tol: float = 1e-8
    cg_max_iter: int = 400
    fixed_point_tol: float = 1e-8
    fixed_point_max_iter: int = 50
    picard_tol: float = 1e-9
    picard_max_iter: int = 50
    smallness_delta: float = 0.05
    ball_radius: float = 0.5
    u0_kind: str = "bump"
    u0_norm: float = 0.01
    samples: int = 16
    seed: int = 0
    output_dir: str = "qcontrol-output"

    def __post_init__(self):
        validate(self)

    def to_dict(self) -> dict:
        return asdict(self)

    def updated(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def validate(cfg: RunConfig) -> None:
    if cfg.dimension not in (1, 2, 3):
        raise ConfigError(f"dimension must be 1, 2 or 3, got {cfg.dimension}")
    if cfg.n < 8 or cfg.n & (cfg.n - 1):
        raise ConfigError(f"n must be a power of two >= 8, got {cfg.n}")
    if not cfg.half_side > 0:
        raise ConfigError(f"half_side must be positive, got {cfg.half_side}")
    if cfg.radius < 1:
        raise ConfigError(f"radius must be at least 1, got {cfg.radius}")
    if cfg.radius + 4 > cfg.half_side:
        raise ConfigError(
            f"geometry: radius + 4 <= half_side violated ({cfg.radius} + 4 > {cfg.half_side})"
        )
    if not cfg.horizon > 0:
        raise ConfigError(f"horizon must be positive, got {cfg.horizon}")
    if cfg.nt < 8:
        raise ConfigError(f"nt must be at least 8, got {cfg.nt}")
    for name in ("cg_tol", "fixed_point_tol", "picard_tol"):
        value = getattr(cfg, name)
        if not 0 < value < 1:
            raise ConfigError(f"{name} must lie in (0, 1), got {value}")
    for name in ("cg_max_iter", "fixed_point_max_iter", "picard_max_iter", "samples"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be positive")
    if not cfg.smallness_delta > 0 or not cfg.ball_radius > 0:
        raise ConfigError("smallness_delta and ball_radius must be positive")
    if cfg.u0_kind not in U0_KINDS:
        raise ConfigError(f"u0_kind must be one of {', '.join(U0_KINDS)}, got {cfg.u0_kind!r}")
    if cfg.u0_norm < 0:
        raise ConfigError(f"u0_norm must be non-negative, got {cfg.u0_norm}")
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError(f"seed must be a 64-bit unsigned value, got {cfg.seed}")


def _key_line(source: str, key: str):
    pattern = re.compile(rf"^[ \t]*{re.escape(key)}[ \t]*=", re.M)
    m = pattern.search(source)
    return source.count("\n", 0, m.start()) + 1 if m else None


def _section_line(source: str, name: str):
    m = re.search(rf"^[ \t]*\[[ \t]*{re.escape(name)}[ \t]*\]", source, re.M)
    return source.count("\n", 0, m.start()) + 1 if m else None


def _coerce(key: str, value, source: str):
    kind = FIELD_TYPES[key]
    line = _key_line(source, key)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}", line)
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}", line)
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string, got {value!r}", line)
    return value


def parse_config(source: str) -> RunConfig:
    """Parse a config document; omitted keys take the desk defaults.

    Keys may sit at top level or inside any of the sections in ``SECTIONS``;
    sections only group keys and do not namespace them.
    """
    try:
        doc = tomllib.loads(source)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"parse error: {exc}", int(m.group(1)) if m else None) from None
    flat = {}
    for key, value in doc.items():
        if isinstance(value, dict):
            if key not in SECTIONS:
                raise ConfigError(f"unknown section [{key}]", _section_line(source, key))
            items = value.items()
        else:
            items = [(key, value)]
        for k, v in items:
            if isinstance(v, dict) or k not in FIELD_TYPES:
                raise ConfigError(f"unknown key {k!r}", _key_line(source, k))
            if k in flat:
                raise ConfigError(f"duplicate key {k!r}", _key_line(source, k))
            flat[k] = _coerce(k, v, source)
    return RunConfig(**flat)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
