"""Experiment configuration: flat ``key = value`` files plus command-line overrides."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .bounds import TABLE_EPS_COMPLEMENTS


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dim: int = 1
    grid_n: int | None = None
    grid_omega_max: float | None = None
    bank: str = "meyer"
    bank_file: str | None = None
    R: float = 1.0
    j_max: int | None = None
    k_max: int | None = None
    theta0: float = 0.0
    signal: str = "bandlimited"
    signal_file: str | None = None
    L: float | None = None
    s: float = 3.0
    l: float | None = None
    delta: float = 1.0
    eps: float = 0.05
    captures: str = ",".join(str(c) for c in TABLE_EPS_COMPLEMENTS)
    depth: int = 5
    prune_tol: float = 1e-8
    seed: int = 0
    lam: str | None = None
    out_dir: str = "out"
    format: str = "csv"

    # execution-only settings are excluded from echoes so outputs stay comparable
    workers: int = 1

    ECHO_EXCLUDE = ("workers", "out_dir")

    def resolved(self, command: str) -> "ExperimentConfig":
        """Fill dimension- and command-dependent defaults."""
        c = ExperimentConfig(**asdict(self))
        if c.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {c.dim}")
        if c.grid_n is None:
            c.grid_n = 1024 if c.dim == 1 else 64
        if c.grid_omega_max is None:
            c.grid_omega_max = 32.0 if c.dim == 1 else 8.0
        if c.j_max is None:
            c.j_max = max(1, int(math.floor(math.log2(c.grid_omega_max))) - 1)
        if c.k_max is None:
            c.k_max = max(1, int(math.floor(c.grid_omega_max / c.R)) - 2)
        if c.l is None:
            base = math.floor(c.dim / 2)
            # rounding keeps 2.0001 from printing as 2.0000999999999998
            c.l = round(base + 1.0001, 10) if command != "counterexample" else base + 2.0
        if c.L is None:
            # demodulation needs energy in every band; elsewhere the table setting L = 1
            c.L = 0.9 * c.grid_omega_max if command == "demod" else 1.0
        if c.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {c.format!r}")
        if c.depth < 1:
            raise ConfigError("depth must be >= 1")
        if c.prune_tol < 0:
            raise ConfigError("prune_tol must be >= 0")
        return c

    def capture_list(self) -> list[float]:
        try:
            return [float(x) for x in self.captures.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"captures must be comma-separated numbers: {self.captures!r}") from None

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in self.ECHO_EXCLUDE}

    def to_text(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            lines.append(f"{k} = {'none' if v is None else _fmt(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        kwargs = cls.parse_pairs(text)
        return cls(**kwargs)

    @classmethod
    def parse_pairs(cls, text: str) -> dict:
        types = {f.name: f.type for f in fields(cls)}
        out = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            out[key] = _coerce(key, value, types[key])
        return out


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _coerce(key, value: str, typ: str):
    if value.lower() == "none":
        if "None" not in typ:
            raise ConfigError(f"{key} may not be none")
        return None
    base = typ.split("|")[0].strip()
    try:
        if base == "int":
            return int(value)
        if base == "float":
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r} as {base}") from None
    return value
