"""
config.py  —  Run configuration, selection files and logging setup.

A run is described by one JSON document with the sections ``data``, ``completion``,
``da``, ``srl``, ``selection`` and ``output``. Every key is checked: unknown keys at
any level raise ConfigError, which the command line maps to exit code 2.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from completion import CompletionConfig
from corpus import LabelInventory, dialog_acts
from numeric import OptimizerConfig
from selection import DEFAULT_NON_COMPLETABLE, DEFAULT_TAU, METHODS, SelectionConfig, SelectionError
from synthetic import DEFAULT_MIX
from understanding import DEFAULT_THETA, DAConfig, SRLConfig

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATA_DIR_ENV = "ELHYB_DATA_DIR"
DEFAULT_DATA_DIR = "corpus"
PRESET_DIR = Path(__file__).with_name("configs")
SEED_STREAMS = ("data", "init-completion", "init-EL", "init-EL-2", "init-CMP", "init-CMP-2", "init-head",
                "shuffle", "dropout", "fold")


class ConfigError(ValueError):
    pass


def setup_logging(level: int | str = logging.INFO) -> logging.Logger:
    """One stream handler on the root logger; repeated calls only change the level."""
    root = logging.getLogger()
    root.setLevel(level)
    if not any(getattr(h, "_elhyb", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._elhyb = True
        root.addHandler(handler)
    for h in root.handlers:
        h.setLevel(level)
    return root


def _build(cls, obj: Any, where: str):
    """Instantiate a dataclass from a JSON object, rejecting unknown keys."""
    if obj is None:
        return cls()
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(obj) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    try:
        return cls(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class DataConfig:
    dir: str | None = None
    completion: str = "completion.jsonl"
    da: str = "da.jsonl"
    srl: str = "srl.jsonl"
    field_map: str | None = None
    n: int = 2000
    mix: tuple[float, float, float] = DEFAULT_MIX
    hold_noise: float = 0.0
    folds: int = 5
    test_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mix", tuple(self.mix))
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    def root(self) -> Path:
        return Path(self.dir or os.environ.get(DATA_DIR_ENV) or DEFAULT_DATA_DIR)

    def resolve(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.root() / path


@dataclass(frozen=True)
class ModelSection:
    """A model's hyperparameters plus its optimizer."""
    model: Any
    optimizer: OptimizerConfig

    def to_dict(self) -> dict:
        return {**dataclasses.asdict(self.model), "optimizer": dataclasses.asdict(self.optimizer)}


def _model_section(cls, obj: Any, where: str, default_optim: OptimizerConfig) -> ModelSection:
    if obj is not None and not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    obj = dict(obj or {})
    optim = obj.pop("optimizer", None)
    optimizer = default_optim if optim is None else _build(OptimizerConfig, optim, f"{where}.optimizer")
    return ModelSection(_build(cls, obj, where), optimizer)


@dataclass(frozen=True)
class SelectionSection:
    method: str = "logits_sum"
    tau: float = DEFAULT_TAU
    theta: float = DEFAULT_THETA
    non_completable: tuple[str, ...] = DEFAULT_NON_COMPLETABLE
    expert_enabled: bool = True

    def __post_init__(self):
        object.__setattr__(self, "non_completable", tuple(self.non_completable))
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")

    def resolve(self, acts: LabelInventory | None = None, **overrides) -> SelectionConfig:
        fields = {"method": self.method, "tau": self.tau, "theta": self.theta,
                  "expert_enabled": self.expert_enabled, **overrides}
        try:
            return SelectionConfig.from_names(acts or dialog_acts(), self.non_completable, **fields)
        except SelectionError as exc:
            raise ConfigError(f"selection: {exc}") from exc


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "runs"
    plot: bool = False

    def path(self, *parts: str) -> Path:
        return Path(self.dir, *parts)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    experiment: str = "desk"
    data: DataConfig = DataConfig()
    completion: ModelSection = ModelSection(CompletionConfig(), OptimizerConfig())
    da: ModelSection = ModelSection(DAConfig(), OptimizerConfig())
    srl: ModelSection = ModelSection(SRLConfig(), OptimizerConfig())
    selection: SelectionSection = SelectionSection()
    output: OutputConfig = OutputConfig()
    source: str | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {"seed": self.seed, "experiment": self.experiment,
                "data": dataclasses.asdict(self.data), "completion": self.completion.to_dict(),
                "da": self.da.to_dict(), "srl": self.srl.to_dict(),
                "selection": dataclasses.asdict(self.selection), "output": dataclasses.asdict(self.output)}


TOP_LEVEL = ("seed", "experiment", "data", "completion", "da", "srl", "selection", "output")


def parse_run_config(obj: dict, source: str | None = None) -> RunConfig:
    if not isinstance(obj, dict):
        raise ConfigError("run config must be a JSON object")
    unknown = sorted(set(obj) - set(TOP_LEVEL))
    if unknown:
        raise ConfigError(f"unknown top-level keys {unknown}")
    seed = obj.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    selection = obj.get("selection")
    if isinstance(selection, str):
        selection = _read_json(_relative(selection, source))
    return RunConfig(
        seed=seed,
        experiment=str(obj.get("experiment", "desk")),
        data=_build(DataConfig, obj.get("data"), "data"),
        completion=_model_section(CompletionConfig, obj.get("completion"), "completion", OptimizerConfig()),
        da=_model_section(DAConfig, obj.get("da"), "da", OptimizerConfig()),
        srl=_model_section(SRLConfig, obj.get("srl"), "srl", OptimizerConfig()),
        selection=_build(SelectionSection, selection, "selection"),
        output=_build(OutputConfig, obj.get("output"), "output"),
        source=source,
    )


def _relative(name: str, source: str | None) -> Path:
    path = Path(name)
    if path.is_absolute() or source is None:
        return path
    return Path(source).parent / path


def _read_json(path: str | Path) -> Any:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_run_config(path: str | Path | None) -> RunConfig:
    """A run config file, a preset name from ``configs/``, or the built-in defaults."""
    if path is None:
        return RunConfig()
    candidate = Path(path)
    if not candidate.exists() and (PRESET_DIR / f"{path}.json").is_file():
        candidate = PRESET_DIR / f"{path}.json"
    cfg = parse_run_config(_read_json(candidate), str(candidate))
    log.debug("loaded run config %s (experiment %s)", candidate, cfg.experiment)
    return cfg


def load_selection_config(path: str | Path, acts: LabelInventory | None = None) -> SelectionConfig:
    return _build(SelectionSection, _read_json(path), str(path)).resolve(acts)
