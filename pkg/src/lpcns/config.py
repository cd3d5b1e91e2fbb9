"""Run configuration: a small TOML document with strict validation.

Every run of the command-line tools is driven by one config document.
Parsing is strict — an unknown key or a violated constraint is reported
with the line it came from — and the accepted text is kept verbatim on
the config object so output writers can echo it into every report.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - environment-dependent
    import tomli as tomllib

from .besov import IndexPair
from .dyadic import DyadicPartition
from .grid import GridSpec
from .semigroup import LameParams
from .solver import PressureLaw

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ProbeConfig",
    "RunConfig",
    "parse_config",
    "load_config",
]


class ConfigError(ValueError):
    """Config document rejected; the message starts with the offending line."""


_EXPERIMENTS = ("suite", "apriori", "momentum", "high_osc", "continuity")
_CONTINUITY_MODES = ("full", "high", "low")

_SCHEMA: dict[str | None, set[str]] = {
    None: {"seed"},
    "grid": {"d", "n", "L"},
    "material": {"mu", "lambda_2", "kappa"},
    "indices": {"q", "p", "k0"},
    "stepper": {"dt", "T", "dealias"},
    "experiment": {
        "name",
        "trials",
        "sweep_trials",
        "sweep_levels",
        "slack",
        "include",
        "deltas",
        "delta",
        "etas",
        "mode",
        "eps_list",
        "p_list",
    },
    "probe": {"d", "p", "k_lo", "k_hi", "taus", "branch", "backend", "t_fit"},
    "output": {"dir"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Which experiment the ``probe`` subcommand dispatches, and its knobs."""

    name: str = "suite"
    trials: int = 20
    sweep_trials: int = 3
    sweep_levels: int = 4
    slack: float = 0.10
    include: tuple[str, ...] | None = None
    deltas: tuple[float, ...] = (1e-3, 2e-3, 4e-3)
    delta: float = 1e-3
    etas: tuple[float, ...] = (1e-4, 1e-5, 1e-6)
    mode: str = "full"
    eps_list: tuple[float, ...] = (1 / 16, 1 / 32, 1 / 64)
    p_list: tuple[float, ...] = (4.0, 5.0)


@dataclass(frozen=True)
class ProbeConfig:
    """Decay/growth probe parameters for ``decay-fit`` and ``wave-fit``."""

    d: int = 3
    p: float = 1.0
    k_lo: int = -5
    k_hi: int = -2
    taus: tuple[float, ...] = (1.0, 2.0, 4.0)
    branch: str = "plus"
    backend: str = "radial"
    t_fit: tuple[float, ...] = (4.0, 5.7, 8.0, 11.3, 16.0)

    @property
    def k_list(self) -> tuple[int, ...]:
        return tuple(range(self.k_lo, self.k_hi + 1))


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run configuration.

    ``text`` is the accepted document byte-for-byte and ``overrides`` the
    ``--set`` pairs applied on top; both travel into every report.
    """

    text: str
    overrides: tuple[str, ...]
    seed: int
    grid: GridSpec
    mu: float
    lambda_2: float
    kappa: float
    pair: IndexPair
    k0: int | None
    dt: float
    T: float
    dealias: bool
    experiment: ExperimentConfig
    probe: ProbeConfig
    out_dir: str

    @property
    def params(self) -> LameParams:
        return LameParams(mu=self.mu, lam=self.lambda_2)

    @property
    def law(self) -> PressureLaw:
        return PressureLaw(kappa=self.kappa)

    def partition(self) -> DyadicPartition:
        return DyadicPartition(self.grid, k0=self.k0)

    def echo_lines(self) -> list[str]:
        """The verbatim document plus applied overrides, one string per line."""
        lines = self.text.splitlines()
        lines += [f"--set {ov}" for ov in self.overrides]
        return lines


def _find_line(text: str, section: str | None, key: str) -> int:
    """Best-effort line number of ``key`` (or of ``section`` itself)."""
    lines = text.splitlines()
    start = 0
    sec_line = 1
    if section is not None:
        header = re.compile(rf"^\s*\[\s*{re.escape(section)}\s*\]")
        for i, ln in enumerate(lines):
            if header.match(ln):
                start, sec_line = i + 1, i + 1
                break
    assign = re.compile(rf"^\s*[\"']?{re.escape(key)}[\"']?\s*=")
    for i in range(start, len(lines)):
        if assign.match(lines[i]):
            return i + 1
    return sec_line


def _err(text: str, section: str | None, key: str, msg: str) -> ConfigError:
    dotted = key if section is None else f"{section}.{key}"
    return ConfigError(f"line {_find_line(text, section, key)}: {dotted}: {msg}")


def _as_int(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected an integer, got {v!r}")
    return v


def _as_float(v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError(f"expected a number, got {v!r}")
    return float(v)


def _as_norm_index(v: Any) -> float:
    if isinstance(v, str):
        if v.lower() in ("inf", "infinity"):
            return float("inf")
        raise TypeError(f'expected a number or "inf", got {v!r}')
    return _as_float(v)


def _as_bool(v: Any) -> bool:
    if not isinstance(v, bool):
        raise TypeError(f"expected true/false, got {v!r}")
    return v


def _as_str(v: Any, choices: Sequence[str] | None = None) -> str:
    if not isinstance(v, str):
        raise TypeError(f"expected a string, got {v!r}")
    if choices is not None and v not in choices:
        raise TypeError(f"must be one of {', '.join(choices)}; got {v!r}")
    return v


def _as_float_list(v: Any) -> tuple[float, ...]:
    if not isinstance(v, (list, tuple)) or not v:
        raise TypeError(f"expected a non-empty list of numbers, got {v!r}")
    return tuple(_as_float(x) for x in v)


def _as_str_list(v: Any) -> tuple[str, ...]:
    if not isinstance(v, (list, tuple)) or not v:
        raise TypeError(f"expected a non-empty list of strings, got {v!r}")
    return tuple(_as_str(x) for x in v)


class _Section:
    """One table of parsed values with typed, line-attributed extraction."""

    def __init__(self, text: str, name: str | None, data: Mapping[str, Any]):
        self.text, self.name, self.data = text, name, data

    def get(self, key: str, conv, default):
        if key not in self.data:
            return default
        try:
            return conv(self.data[key])
        except TypeError as e:
            raise _err(self.text, self.name, key, str(e)) from None

    def require(self, key: str, ok: bool, msg: str) -> None:
        if not ok:
            raise _err(self.text, self.name, key, msg)


def parse_config(text: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Parse and validate a config document, applying ``key.path=value`` overrides.

    The first problem found is raised as :class:`ConfigError` with the line
    it came from; overrides are attributed to themselves.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid config syntax: {e}") from None

    for ov in overrides:
        raw = _apply_override(raw, ov)

    # reject unknown sections and keys before touching any value
    for key, value in raw.items():
        if isinstance(value, dict):
            if key not in _SCHEMA or key is None:
                raise ConfigError(
                    f"line {_find_line(text, key, key)}: unknown section [{key}]"
                )
            for sub in value:
                if sub not in _SCHEMA[key]:
                    raise _err(text, key, sub, "unknown key")
        elif key not in _SCHEMA[None]:
            raise _err(text, None, key, "unknown key")

    top = _Section(text, None, {k: v for k, v in raw.items() if not isinstance(v, dict)})
    sec = {name: _Section(text, name, raw.get(name, {})) for name in _SCHEMA if name}

    seed = top.get("seed", _as_int, 0)
    top.require("seed", seed >= 0, "must be nonnegative")

    g = sec["grid"]
    d = g.get("d", _as_int, 3)
    n = g.get("n", _as_int, 64)
    L = g.get("L", _as_float, 2 * np.pi)
    g.require("d", d in (1, 2, 3), "must be 1, 2 or 3")
    g.require("n", n >= 4 and (n & (n - 1)) == 0, "must be a power of two (at least 4)")
    g.require("L", np.isfinite(L) and L > 0, "must be a positive box length")
    grid = GridSpec(d, n, L)

    m = sec["material"]
    mu = m.get("mu", _as_float, 1.0)
    lambda_2 = m.get("lambda_2", _as_float, -1.0)
    kappa = m.get("kappa", _as_float, 1.4)
    m.require("mu", mu > 0, "must satisfy μ > 0")
    m.require("lambda_2", 2 * mu + lambda_2 > 0, "must satisfy 2μ + λ > 0")
    m.require("kappa", np.isfinite(kappa) and kappa > 0, "pressure exponent must be positive")

    ix = sec["indices"]
    q = ix.get("q", _as_float, 2.0)
    p = ix.get("p", _as_float, 2.0)
    try:
        pair = IndexPair(q, p).validated()
    except ValueError as e:
        raise _err(text, "indices", "p", str(e)) from None
    k0 = ix.get("k0", _as_int, None)
    if k0 is not None:
        try:
            DyadicPartition(grid, k0=k0)
        except ValueError as e:
            raise _err(text, "indices", "k0", str(e)) from None

    st = sec["stepper"]
    dt = st.get("dt", _as_float, 1e-3)
    T = st.get("T", _as_float, 1.0)
    dealias = st.get("dealias", _as_bool, True)
    st.require("dt", np.isfinite(dt) and dt > 0, "must be a positive step")
    st.require("T", np.isfinite(T) and T >= dt, "must be a horizon of at least one step")

    ex = sec["experiment"]
    include = ex.get("include", _as_str_list, None)
    experiment = ExperimentConfig(
        name=ex.get("name", lambda v: _as_str(v, _EXPERIMENTS), "suite"),
        trials=ex.get("trials", _as_int, 20),
        sweep_trials=ex.get("sweep_trials", _as_int, 3),
        sweep_levels=ex.get("sweep_levels", _as_int, 4),
        slack=ex.get("slack", _as_float, 0.10),
        include=include,
        deltas=ex.get("deltas", _as_float_list, (1e-3, 2e-3, 4e-3)),
        delta=ex.get("delta", _as_float, 1e-3),
        etas=ex.get("etas", _as_float_list, (1e-4, 1e-5, 1e-6)),
        mode=ex.get("mode", lambda v: _as_str(v, _CONTINUITY_MODES), "full"),
        eps_list=ex.get("eps_list", _as_float_list, (1 / 16, 1 / 32, 1 / 64)),
        p_list=ex.get("p_list", _as_float_list, (4.0, 5.0)),
    )
    for field_name in ("trials", "sweep_trials", "sweep_levels"):
        ex.require(field_name, getattr(experiment, field_name) >= 1, "must be at least 1")

    pr = sec["probe"]
    probe = ProbeConfig(
        d=pr.get("d", _as_int, 3),
        p=pr.get("p", _as_norm_index, 1.0),
        k_lo=pr.get("k_lo", _as_int, -5),
        k_hi=pr.get("k_hi", _as_int, -2),
        taus=pr.get("taus", _as_float_list, (1.0, 2.0, 4.0)),
        branch=pr.get("branch", lambda v: _as_str(v, ("plus", "minus")), "plus"),
        backend=pr.get("backend", lambda v: _as_str(v, ("radial", "grid")), "radial"),
        t_fit=pr.get("t_fit", _as_float_list, (4.0, 5.7, 8.0, 11.3, 16.0)),
    )
    pr.require("d", probe.d in (1, 2, 3), "must be 1, 2 or 3")
    pr.require("p", probe.p >= 1, "must be a Lebesgue exponent ≥ 1")
    pr.require("k_hi", probe.k_lo <= probe.k_hi, "needs k_lo ≤ k_hi")

    out_dir = sec["output"].get("dir", _as_str, "out")

    return RunConfig(
        text=text,
        overrides=tuple(overrides),
        seed=seed,
        grid=grid,
        mu=mu,
        lambda_2=lambda_2,
        kappa=kappa,
        pair=pair,
        k0=k0,
        dt=dt,
        T=T,
        dealias=dealias,
        experiment=experiment,
        probe=probe,
        out_dir=out_dir,
    )


def _apply_override(raw: dict, pair: str) -> dict:
    """Apply one ``section.key=value`` override onto the parsed tree."""
    if "=" not in pair:
        raise ConfigError(f"override {pair!r}: expected key.path=value")
    path, _, literal = pair.partition("=")
    parts = [p.strip() for p in path.strip().split(".")]
    if not all(parts) or len(parts) > 2:
        raise ConfigError(f"override {pair!r}: expected key.path=value")
    try:
        value = tomllib.loads(f"v = {literal.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = literal.strip()  # bare strings may come unquoted from a shell
    node = dict(raw)
    if len(parts) == 1:
        node[parts[0]] = value
        return node
    section, key = parts
    table = dict(node.get(section, {}))
    if not isinstance(node.get(section, {}), dict):
        raise ConfigError(f"override {pair!r}: {section} is not a section")
    table[key] = value
    node[section] = table
    return node


def load_config(path: str, overrides: Sequence[str] = ()) -> RunConfig:
    """Read and parse a config file (UTF-8)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)
