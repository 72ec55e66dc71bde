"""Sectioned key=value run configuration with strict validation.

Grammar (line oriented): `[section]` headers, `key = value` entries, `#`
starts a comment.  Values are integers, decimals, bare strings, or bracketed
numeric lists like [[1,1,0],[2,0,0.5]].  Sections and keys outside the
schema, duplicate keys, and values violating module preconditions are all
rejected with the offending line or key named.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

from .grid import GridFunction, HarmonicSpec, PeriodicGrid, function_from_csv, make_grid

__all__ = ["ConfigError", "RunConfig", "parse_config", "parse_override"]


class ConfigError(ValueError):
    """Malformed or invalid run configuration."""


_SCHEMA: dict[str, dict[str, type]] = {
    "grid": {"n": int},
    "potential": {"constant": float, "harmonics": list, "csv": str},
    "run": {
        "t": float,
        "dt": float,
        "T": float,
        "paths": int,
        "seed": int,
        "K": int,
        "lr": float,
        "iters": int,
        "bins": int,
        "x": float,
        "method": str,
        "init": str,
        "drift": str,
        "out": str,
        "save_paths": int,
    },
    "g": {"constant": float, "harmonics": list, "csv": str, "use": str},
}

_DEFAULTS: dict[tuple[str, str], object] = {
    ("grid", "n"): 512,
    ("potential", "constant"): 0.0,
    ("run", "t"): 0.5,
    ("run", "dt"): 1e-3,
    ("run", "T"): 1.0,
    ("run", "paths"): 10_000,
    ("run", "seed"): 42,
    ("run", "K"): 8,
    ("run", "lr"): 0.2,
    ("run", "iters"): 500,
    ("run", "bins"): 64,
    ("run", "x"): 0.25,
    ("run", "method"): "pde",
    ("run", "init"): "density:muV",
    ("run", "drift"): "doob",
    ("run", "out"): ".",
    ("run", "save_paths"): 0,
    ("g", "constant"): 0.0,
    ("g", "use"): "spec",
}


@dataclass
class RunConfig:
    """Fully validated run configuration with defaults applied."""

    n: int = 512
    potential_constant: float = 0.0
    potential_harmonics: tuple = ()
    potential_csv: str | None = None
    t: float = 0.5
    dt: float = 1e-3
    T: float = 1.0
    paths: int = 10_000
    seed: int = 42
    K: int = 8
    lr: float = 0.2
    iters: int = 500
    bins: int = 64
    x: float = 0.25
    method: str = "pde"
    init: str = "density:muV"
    drift: str = "doob"
    out: str = "."
    save_paths: bool = False
    g_constant: float = 0.0
    g_harmonics: tuple = ()
    g_csv: str | None = None
    g_use: str = "spec"
    raw: dict = field(default_factory=dict)

    def build_grid(self) -> PeriodicGrid:
        return make_grid(self.n)

    def build_potential(self, grid: PeriodicGrid) -> GridFunction:
        if self.potential_csv is not None:
            return function_from_csv(self.potential_csv, grid)
        spec = HarmonicSpec(constant=self.potential_constant,
                            harmonics=self.potential_harmonics)
        return spec.sample(grid)

    def build_g(self, grid: PeriodicGrid) -> GridFunction:
        if self.g_csv is not None:
            return function_from_csv(self.g_csv, grid)
        spec = HarmonicSpec(constant=self.g_constant, harmonics=self.g_harmonics)
        return spec.sample(grid)

    def resolved(self) -> dict:
        """Plain dict echo of every effective setting, for meta.json."""
        return {
            "grid": {"n": self.n},
            "potential": {
                "constant": self.potential_constant,
                "harmonics": [list(h) for h in self.potential_harmonics],
                "csv": self.potential_csv,
            },
            "run": {
                "t": self.t,
                "dt": self.dt,
                "T": self.T,
                "paths": self.paths,
                "seed": self.seed,
                "K": self.K,
                "lr": self.lr,
                "iters": self.iters,
                "bins": self.bins,
                "x": self.x,
                "method": self.method,
                "init": self.init,
                "drift": self.drift,
                "out": self.out,
                "save_paths": int(self.save_paths),
            },
            "g": {
                "constant": self.g_constant,
                "harmonics": [list(h) for h in self.g_harmonics],
                "csv": self.g_csv,
                "use": self.g_use,
            },
        }


def _parse_value(section: str, key: str, text: str, where: str):
    expected = _SCHEMA[section][key]
    text = text.strip()
    if expected is list:
        try:
            parsed = ast.literal_eval(text)
        except (ValueError, SyntaxError) as exc:
            raise ConfigError(f"{where}: cannot parse list value {text!r}") from exc
        if not isinstance(parsed, (list, tuple)):
            raise ConfigError(f"{where}: {key} must be a bracketed list")
        return tuple(tuple(item) for item in parsed)
    if expected is int:
        try:
            value = int(text)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key} must be an integer, got {text!r}") from exc
        return value
    if expected is float:
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"{where}: {key} must be a number, got {text!r}") from exc
    return text


def _entries_from_text(text: str) -> dict[tuple[str, str], object]:
    entries: dict[tuple[str, str], object] = {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw_line!r}")
        if section is None:
            raise ConfigError(f"{where}: entry before any [section] header")
        key, _, value_text = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key {key!r} in section [{section}]")
        if (section, key) in entries:
            raise ConfigError(
                f"{where}: duplicate key {key!r} in section [{section}]"
            )
        entries[(section, key)] = _parse_value(section, key, value_text, where)
    return entries


def parse_override(token: str) -> tuple[str, str, object]:
    """Parse one --section.key=value command-line override."""
    body = token[2:] if token.startswith("--") else token
    dotted, eq, value_text = body.partition("=")
    section, dot, key = dotted.partition(".")
    if not eq or not dot or section not in _SCHEMA or key not in _SCHEMA.get(section, {}):
        raise ConfigError(f"bad override {token!r}; expected --section.key=value")
    return section, key, _parse_value(section, key, value_text, f"override {token}")


def _validate(entries: dict[tuple[str, str], object]) -> RunConfig:
    merged = dict(_DEFAULTS)
    merged.update(entries)

    def get(section: str, key: str, default=None):
        return merged.get((section, key), default)

    def check(cond: bool, message: str) -> None:
        if not cond:
            raise ConfigError(message)

    n = get("grid", "n")
    check(isinstance(n, int) and n >= 4 and n % 2 == 0,
          f"grid.n must be even and >= 4, got {n}")

    def harmonics_tuple(section: str):
        raw = get(section, "harmonics", ())
        out = []
        for item in raw:
            check(len(item) == 3, f"{section}.harmonics entries must be [k,a,b]")
            k, a, b = item
            check(float(k).is_integer() and k >= 1,
                  f"{section}.harmonics wavenumbers must be positive integers")
            check(int(k) < n // 2,
                  f"{section}.harmonics wavenumber {int(k)} aliases at n={n}")
            out.append((int(k), float(a), float(b)))
        ks = [k for k, _, _ in out]
        check(len(ks) == len(set(ks)), f"{section}.harmonics has duplicate wavenumbers")
        return tuple(out)

    pot_h = harmonics_tuple("potential")
    g_h = harmonics_tuple("g")

    dt = get("run", "dt")
    check(dt > 0, f"run.dt must be positive, got {dt}")
    t = get("run", "t")
    check(t > 0, f"run.t must be positive, got {t}")
    T = get("run", "T")
    check(T > 0, f"run.T must be positive, got {T}")
    paths = get("run", "paths")
    check(isinstance(paths, int) and paths >= 1,
          f"run.paths must be a positive integer, got {paths}")
    seed = get("run", "seed")
    check(isinstance(seed, int) and 0 <= seed < 2**64,
          f"run.seed must fit in uint64, got {seed}")
    K = get("run", "K")
    check(isinstance(K, int) and 1 <= K <= n // 4,
          f"run.K must satisfy 1 <= K <= n/4, got {K}")
    lr = get("run", "lr")
    check(lr > 0, f"run.lr must be positive, got {lr}")
    iters = get("run", "iters")
    check(isinstance(iters, int) and iters >= 1,
          f"run.iters must be a positive integer, got {iters}")
    bins = get("run", "bins")
    check(isinstance(bins, int) and bins >= 2 and n % bins == 0,
          f"run.bins must divide n={n}, got {bins}")
    method = get("run", "method")
    check(method in ("pde", "mc"), f"run.method must be pde or mc, got {method!r}")
    init = get("run", "init")
    check(init.startswith("point:") or init == "density:muV"
          or init.startswith("density:"),
          f"run.init must be point:<x> or density:muV or density:<csv>, got {init!r}")
    if init.startswith("point:"):
        try:
            float(init.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"run.init point value is not a number: {init!r}")
    drift = get("run", "drift")
    check(drift in ("doob", "g-spec"),
          f"run.drift must be doob or g-spec, got {drift!r}")
    use = get("g", "use")
    check(use in ("spec", "doob"), f"g.use must be spec or doob, got {use!r}")
    save_paths = get("run", "save_paths")
    check(save_paths in (0, 1), f"run.save_paths must be 0 or 1, got {save_paths}")

    return RunConfig(
        n=n,
        potential_constant=float(get("potential", "constant")),
        potential_harmonics=pot_h,
        potential_csv=get("potential", "csv"),
        t=float(t),
        dt=float(dt),
        T=float(T),
        paths=paths,
        seed=seed,
        K=K,
        lr=float(lr),
        iters=iters,
        bins=bins,
        x=float(get("run", "x")),
        method=method,
        init=init,
        drift=drift,
        out=get("run", "out"),
        save_paths=bool(save_paths),
        g_constant=float(get("g", "constant")),
        g_harmonics=g_h,
        g_csv=get("g", "csv"),
        g_use=use,
        raw={f"{s}.{k}": v for (s, k), v in entries.items()},
    )


def parse_config(text: str, overrides: list[str] | None = None) -> RunConfig:
    """Parse sectioned key=value text, apply overrides, validate everything."""
    entries = _entries_from_text(text)
    for token in overrides or []:
        section, key, value = parse_override(token)
        entries[(section, key)] = value
    return _validate(entries)
