"""Pipeline configuration and its ``key=value`` text form.

Keys are dotted field paths, e.g.::

    # comment
    seed = 3
    wavelet.levels = 4
    lle.k_neighbors = 12
    boost.weak.epochs = 10
    grid.w_hard = 0.5, 0.7
    wavelet.fixed_lambda = none
"""

from __future__ import annotations

import dataclasses
import enum
import types
import typing
from dataclasses import dataclass

from .boosting import BoostConfig, CategoryWeightMode, MulticlassMode
from .lle import LleConfig
from .neuralkit.gan import SaeGanConfig
from .neuralkit.net import TrainConfig
from .synthgen import SynthConfig
from .wavelet import Filter, ThresholdPlan


@dataclass(frozen=True)
class WaveletConfig:
    filter: Filter = Filter.DB4
    levels: int = 4
    w_hard: float = 0.5
    w_soft: float = 0.5
    fixed_lambda: float | None = None

    @property
    def plan(self) -> ThresholdPlan:
        return ThresholdPlan(self.w_hard, self.w_soft, self.fixed_lambda)


@dataclass(frozen=True)
class GridConfig:
    """Candidate values tried by k-fold model selection (full Cartesian product)."""

    w_hard: tuple = (0.5, 0.8)
    k_neighbors: tuple = (10,)
    fixed_lambda: tuple = (None,)

    def points(self):
        for lam in self.fixed_lambda:
            for wh in self.w_hard:
                for k in self.k_neighbors:
                    yield {"fixed_lambda": lam, "w_hard": float(wh), "k_neighbors": int(k)}


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    stride: int = 16
    synth: SynthConfig = SynthConfig()
    wavelet: WaveletConfig = WaveletConfig()
    lle: LleConfig = LleConfig()
    gan: SaeGanConfig = SaeGanConfig()
    target_per_class: int = 126
    boost: BoostConfig = BoostConfig()
    k_folds: int = 5
    train_fraction: float = 0.2
    repeats: int = 10
    grid: GridConfig = GridConfig()

    def validate(self) -> None:
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.k_folds < 2:
            raise ValueError("k_folds must be >= 2")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        self.wavelet.plan  # raises on invalid weights
        for point in self.grid.points():
            ThresholdPlan(point["w_hard"], 1.0 - point["w_hard"], point["fixed_lambda"])


def _parse_scalar(text: str, tp):
    text = text.strip()
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if text.lower() in ("none", "universal", ""):
            return None
        return _parse_scalar(text, args[0])
    if isinstance(tp, type) and issubclass(tp, enum.Enum):
        return tp(text)
    if tp is bool:
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if tp is int:
        return int(text)
    if tp is float:
        return float(text)
    if tp is str:
        return text
    raise ValueError(f"unsupported field type {tp}")


def _parse_tuple(text: str):
    items = []
    for part in text.split(","):
        part = part.strip()
        if part.lower() in ("none", "universal"):
            items.append(None)
        else:
            number = float(part)
            items.append(int(number) if number.is_integer() and "." not in part else number)
    return tuple(items)


def _set_path(obj, path: list[str], raw: str):
    hints = typing.get_type_hints(type(obj))
    name = path[0]
    if name not in hints:
        raise KeyError(name)
    current = getattr(obj, name)
    if len(path) > 1:
        if not dataclasses.is_dataclass(current):
            raise KeyError(".".join(path))
        value = _set_path(current, path[1:], raw)
    elif hints[name] is tuple:
        value = _parse_tuple(raw)
    elif dataclasses.is_dataclass(current):
        raise KeyError(f"{name} is a section, not a value")
    else:
        value = _parse_scalar(raw, hints[name])
    return dataclasses.replace(obj, **{name: value})


def apply_overrides(cfg: PipelineConfig, pairs) -> PipelineConfig:
    """Apply ``(key, value-text)`` pairs to ``cfg``."""
    for key, raw in pairs:
        key = key.strip()
        try:
            cfg = _set_path(cfg, key.split("."), raw)
        except KeyError:
            raise ValueError(f"unknown config key {key!r}") from None
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad value for {key!r}: {raw!r} ({exc})") from None
    cfg.validate()
    return cfg


def parse_config_text(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        pairs.append((key, value))
    return apply_overrides(base or PipelineConfig(), pairs)


def load_config(path) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _format(value) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def flatten(cfg, prefix: str = "") -> list[tuple[str, str]]:
    out = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        key = prefix + f.name
        if dataclasses.is_dataclass(value):
            out.extend(flatten(value, key + "."))
        else:
            out.append((key, _format(value)))
    return out


def dump_config(cfg: PipelineConfig) -> str:
    """Canonical ``key = value`` text; ``parse_config_text(dump_config(c)) == c``."""
    return "\n".join(f"{k} = {v}" for k, v in flatten(cfg)) + "\n"


__all__ = [
    "BoostConfig", "CategoryWeightMode", "GridConfig", "LleConfig", "MulticlassMode",
    "PipelineConfig", "SaeGanConfig", "SynthConfig", "TrainConfig", "WaveletConfig",
    "apply_overrides", "dump_config", "flatten", "load_config", "parse_config_text",
]
