"""key=value configuration files and the run configuration used by the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .forms import QuadForm


def read_key_value(path) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blank lines are skipped."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass
class RunConfig:
    form: str = "1,1,2"
    X: float = 1e4
    theta: float = 0.25
    delta: float = 1e-3
    dmax: int | None = None
    kmin: int = 1
    kmax: int | None = None
    D0: float = 7
    rho: float = 1.0
    R: float | None = None
    shifts: str | None = None
    q_max: int = 50
    modulus: int = 5
    grid: int = 64
    exact_q_max: int = 100
    samples: int = 1024
    normalize: bool = False
    threads: int = 1
    budget: int = 6 * 10**7
    seed: int = 0
    outdir: str = "out"

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def build(cls, file_values: dict[str, str] | None = None, overrides: dict | None = None) -> "RunConfig":
        """Merge file values with flag overrides (flags win) and coerce types."""
        merged: dict = {}
        for source in (file_values or {}, overrides or {}):
            unknown = set(source) - set(cls.keys())
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            merged.update({k: v for k, v in source.items() if v is not None})
        cfg = cls()
        for f in fields(cls):
            if f.name in merged:
                setattr(cfg, f.name, _coerce(f.name, merged[f.name], f.type))
        cfg.check()
        return cfg

    def check(self) -> None:
        try:
            QuadForm.parse(self.form)
        except ValueError as exc:
            raise ConfigError(f"form: {exc}") from None
        if self.X <= 0:
            raise ConfigError("X must be positive")
        if not 0 <= self.theta <= 0.5:
            raise ConfigError("theta must lie in [0, 1/2]")
        if self.delta < 0:
            raise ConfigError("delta must be nonnegative")
        if (self.dmax is not None and self.dmax < 0) or self.kmin < 1 or (
            self.kmax is not None and self.kmax < self.kmin
        ):
            raise ConfigError("need dmax >= 0 and 1 <= kmin <= kmax")
        if self.threads < 1 or self.budget < 1 or self.grid < 1 or self.samples < 1:
            raise ConfigError("threads, budget, grid and samples must be positive")

    def with_defaults(self, dmax: int, kmax: int) -> "RunConfig":
        """Fill the per-command defaults of dmax and kmax."""
        if self.dmax is None:
            self.dmax = dmax
        if self.kmax is None:
            self.kmax = max(kmax, self.kmin)
        return self

    def as_dict(self) -> dict:
        return asdict(self)


def _coerce(name, value, annotation):
    annotation = str(annotation)
    if isinstance(value, str):
        value = value.strip()
    try:
        if annotation == "bool":
            if isinstance(value, bool):
                return value
            low = str(value).lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if value == "" and "None" in annotation:
            return None
        if "float" in annotation:
            return float(value)
        if "int" in annotation:
            f = float(value)
            if f != int(f):
                raise ValueError(value)
            return int(f)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {value!r}") from None
