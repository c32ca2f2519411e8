"""Experiment configuration: flat ``key = value`` files plus ``--key value`` overrides.

Example file::

    # BDF1 temporal study on the stationary Gausson
    grid.dim = 2
    grid.lower = -5
    grid.upper = 5
    grid.h = 1/32
    scheme.name = BDF1
    scheme.lambda = -1
    scheme.t_final = 0.5
    scenario.name = gausson
    scenario.omega = 0
    refinement.base = 0.05
    refinement.levels = 4
    acceptance.l2 = 0.85, 1.15

Blank lines and ``#`` comments are ignored. Numbers may be written as
fractions (``1/32``). Every key has a default; unknown keys are rejected.
Selecting a dynamics scenario (``case-I`` .. ``case-VI``) fills the grid and
scheme keys from that case's preset unless they were given explicitly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional

from .analytic import CASE_PRESETS, normalize_case
from .properties import INJECTIONS
from .stepping import Scheme

COMMANDS = ("converge-time", "converge-space", "simulate", "truncation", "properties")
ERROR_MODES = ("final", "max")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when there is one."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


def _number(text: str) -> float:
    return float(Fraction(text.strip())) if "/" in text else float(text)


def _integer(text: str) -> int:
    value = _number(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


def _boolean(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _window(text: str) -> Optional[tuple[float, float]]:
    t = text.strip().lower()
    if t in ("", "none", "off"):
        return None
    parts = [p for p in t.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError(f"expected 'low, high', got {text!r}")
    lo, hi = (_number(p) for p in parts)
    if not lo <= hi:
        raise ValueError(f"window low {lo} exceeds high {hi}")
    return lo, hi


def _optional_number(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none", "auto") else _number(text)


def _optional_text(text: str) -> Optional[str]:
    t = text.strip()
    return None if t.lower() in ("", "none") else t


# key -> (attribute, parser)
_KEYS: dict[str, tuple[str, Callable[[str], Any]]] = {
    "grid.dim": ("dim", _integer),
    "grid.lower": ("lower", _number),
    "grid.upper": ("upper", _number),
    "grid.h": ("h", _number),
    "scheme.name": ("scheme", lambda s: s.strip().upper()),
    "scheme.lambda": ("lam", _number),
    "scheme.tau": ("tau", _number),
    "scheme.t_final": ("t_final", _number),
    "scenario.name": ("scenario", lambda s: s.strip()),
    "scenario.omega": ("omega", _number),
    "refinement.base": ("base", _optional_number),
    "refinement.levels": ("levels", _integer),
    "refinement.synthetic": ("synthetic", _optional_number),
    "acceptance.l2": ("window_l2", _window),
    "acceptance.h1": ("window_h1", _window),
    "output.dir": ("output_dir", lambda s: s.strip()),
    "output.error_mode": ("error_mode", lambda s: s.strip().lower()),
    "strides.series": ("series_stride", _integer),
    "strides.snapshot": ("snapshot_stride", _integer),
    "residual_check": ("residual_check", _boolean),
    "properties.seed": ("seed", _integer),
    "properties.samples": ("samples", _integer),
    "properties.inject": ("inject", _optional_text),
    "truncation.axis": ("trunc_axis", lambda s: s.strip().lower()),
    "truncation.step": ("trunc_step", _integer),
    "truncation.fixed": ("trunc_fixed", _optional_number),
}
KNOWN_KEYS = tuple(_KEYS)


@dataclass
class ExperimentConfig:
    command: str = "simulate"
    dim: int = 2
    lower: float = -5.0
    upper: float = 5.0
    h: float = 1 / 32
    scheme: str = "BDF2"
    lam: float = -1.0
    tau: float = 0.01
    t_final: float = 0.5
    scenario: str = "gausson"
    omega: float = 0.0
    base: Optional[float] = None
    levels: int = 4
    synthetic: Optional[float] = None
    window_l2: Optional[tuple[float, float]] = None
    window_h1: Optional[tuple[float, float]] = None
    output_dir: str = "out"
    error_mode: str = "final"
    series_stride: int = 10
    snapshot_stride: int = 0
    residual_check: bool = True
    seed: int = 0
    samples: int = 100_000
    inject: Optional[str] = None
    trunc_axis: str = "time"
    trunc_step: int = 1
    trunc_fixed: Optional[float] = None
    explicit: set[str] = field(default_factory=set, repr=False)

    @property
    def case(self) -> Optional[str]:
        """Dynamics case label (``"I"`` .. ``"VI"``) or ``None``."""
        name = self.scenario.lower()
        if name in ("gausson", "zero"):
            return None
        return normalize_case(self.scenario)

    def refinement_values(self) -> list[float]:
        """``base * 2^-j`` for ``j = 0..levels-1``."""
        return [self.base * 2.0**-j for j in range(self.levels)]

    def echo(self) -> str:
        """The resolved configuration in file syntax."""
        lines = [f"# command: {self.command}"]
        for key, (attr, _) in _KEYS.items():
            value = getattr(self, attr)
            if isinstance(value, tuple):
                value = f"{value[0]!r}, {value[1]!r}"
            elif value is None:
                value = "none"
            elif isinstance(value, bool):
                value = str(value).lower()
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def read_config_file(path: str | os.PathLike) -> list[tuple[str, str]]:
    """``(key, value)`` pairs from a flat config file, in file order."""
    pairs = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_flags(argv: Iterable[str]) -> list[tuple[str, str]]:
    """``--key value`` / ``--key=value`` pairs."""
    args = list(argv)
    pairs = []
    i = 0
    while i < len(args):
        arg = args[i]
        if not arg.startswith("--") or len(arg) == 2:
            raise ConfigError(f"unexpected argument {arg!r}")
        key, sep, value = arg[2:].partition("=")
        if not sep:
            if i + 1 >= len(args):
                raise ConfigError("missing value", key)
            value = args[i + 1]
            i += 1
        pairs.append((key, value))
        i += 1
    return pairs


# The spatial and truncation studies default to [-6, 6]^d: on [-5, 5]^d the
# zeroed boundary values of the Gausson (about e^{-12.5}) divided by h^2 put a
# floor under the finest-grid errors.
_COMMAND_DEFAULTS = {
    "converge-time": {"base": 0.05},
    "converge-space": {"base": 0.125, "tau": 1e-3, "t_final": 0.25, "lower": -6.0, "upper": 6.0},
    "truncation": {"base": 0.05, "lower": -6.0, "upper": 6.0},
}


def build_config(
    command: str,
    file_pairs: Iterable[tuple[str, str]] = (),
    flag_pairs: Iterable[tuple[str, str]] = (),
) -> ExperimentConfig:
    """Merge defaults, file values and flag overrides (in that order) and validate."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    cfg = ExperimentConfig(command=command)
    for key, text in list(file_pairs) + list(flag_pairs):
        if key not in _KEYS:
            raise ConfigError("unknown key", key)
        attr, parser = _KEYS[key]
        try:
            value = parser(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"invalid value {text!r} ({exc})", key) from exc
        setattr(cfg, attr, value)
        cfg.explicit.add(attr)

    for attr, value in _COMMAND_DEFAULTS.get(command, {}).items():
        if attr not in cfg.explicit:
            setattr(cfg, attr, value)
    if command == "truncation" and cfg.trunc_axis == "space" and "base" not in cfg.explicit:
        cfg.base = 0.125
    _apply_case_preset(cfg)
    validate(cfg)
    return cfg


def _apply_case_preset(cfg: ExperimentConfig) -> None:
    try:
        case = cfg.case
    except ValueError as exc:
        raise ConfigError(str(exc), "scenario.name") from exc
    if case is None:
        return
    preset = CASE_PRESETS[case]
    fill = {
        "dim": 2,
        "lower": -preset.half_width,
        "upper": preset.half_width,
        "h": preset.h,
        "lam": preset.lam,
        "tau": preset.tau,
        "scheme": preset.scheme,
    }
    for attr, value in fill.items():
        if attr not in cfg.explicit:
            setattr(cfg, attr, value)


def _divides(step: float, length: float) -> bool:
    q = length / step
    return abs(q - round(q)) <= 1e-9 * max(1.0, q)


def validate(cfg: ExperimentConfig) -> None:
    if cfg.dim not in (1, 2, 3):
        raise ConfigError(f"must be 1, 2 or 3, got {cfg.dim}", "grid.dim")
    if not cfg.lower < cfg.upper:
        raise ConfigError(f"must be below grid.upper ({cfg.upper})", "grid.lower")
    if not cfg.h > 0:
        raise ConfigError("must be positive", "grid.h")
    cells = (cfg.upper - cfg.lower) / cfg.h
    if abs(cells - round(cells)) > 1e-9 * max(1.0, cells) or round(cells) < 2:
        raise ConfigError(f"must divide [{cfg.lower}, {cfg.upper}] into at least 2 cells", "grid.h")
    try:
        Scheme(cfg.scheme)
    except ValueError:
        raise ConfigError(f"must be BDF1 or BDF2, got {cfg.scheme!r}", "scheme.name") from None
    if not cfg.tau > 0:
        raise ConfigError("must be positive", "scheme.tau")
    if not cfg.t_final >= 0:
        raise ConfigError("must be non-negative", "scheme.t_final")
    if cfg.command in ("simulate", "converge-space") and not _divides(cfg.tau, cfg.t_final):
        raise ConfigError(f"{cfg.t_final} is not a multiple of scheme.tau = {cfg.tau}", "scheme.t_final")
    name = cfg.scenario.lower()
    if cfg.case is not None and cfg.dim != 2:
        raise ConfigError("dynamics cases need grid.dim = 2", "grid.dim")
    if cfg.command in ("converge-time", "converge-space", "truncation"):
        if cfg.case is not None:
            raise ConfigError("convergence studies need the 'gausson' or 'zero' scenario", "scenario.name")
        if cfg.levels < 3:
            raise ConfigError(f"need at least 3 refinement levels, got {cfg.levels}", "refinement.levels")
        if cfg.base is None or not cfg.base > 0:
            raise ConfigError("must be positive", "refinement.base")
        if cfg.synthetic is not None and not cfg.synthetic > 0:
            raise ConfigError("planted order must be positive", "refinement.synthetic")
        values = cfg.refinement_values()
        if cfg.command == "converge-time" and not all(_divides(t, cfg.t_final) for t in values):
            raise ConfigError(f"every time step must divide scheme.t_final = {cfg.t_final}", "refinement.base")
        space = cfg.command == "converge-space" or (cfg.command == "truncation" and cfg.trunc_axis == "space")
        if space and not all(_divides(h, cfg.upper - cfg.lower) for h in values):
            raise ConfigError(f"every mesh size must divide [{cfg.lower}, {cfg.upper}]", "refinement.base")
    if name == "gausson" and cfg.command != "properties" and not cfg.lam < 0:
        raise ConfigError("the Gausson scenario needs a negative lambda", "scheme.lambda")
    if cfg.error_mode not in ERROR_MODES:
        raise ConfigError(f"must be one of {ERROR_MODES}", "output.error_mode")
    if cfg.series_stride < 0:
        raise ConfigError("must be >= 0 (0 disables the series)", "strides.series")
    if cfg.snapshot_stride < 0:
        raise ConfigError("must be >= 0 (0 disables snapshots)", "strides.snapshot")
    if cfg.samples < 1:
        raise ConfigError("must be >= 1", "properties.samples")
    if cfg.inject is not None and cfg.inject not in INJECTIONS:
        raise ConfigError(f"must be one of {INJECTIONS}", "properties.inject")
    if cfg.trunc_axis not in ("time", "space"):
        raise ConfigError("must be 'time' or 'space'", "truncation.axis")
    if cfg.trunc_step < 0:
        raise ConfigError("must be >= 0", "truncation.step")
    if cfg.trunc_fixed is not None and not cfg.trunc_fixed > 0:
        raise ConfigError("must be positive", "truncation.fixed")
