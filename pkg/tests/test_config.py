import json
import logging

import pytest

from config import (
    DATA_DIR_ENV,
    LOG_FORMAT,
    ConfigError,
    load_run_config,
    load_selection_config,
    parse_run_config,
    setup_logging,
)
from corpus import dialog_acts


def test_defaults():
    cfg = load_run_config(None)
    assert cfg.seed == 0
    assert cfg.completion.model.mixture == "additive"
    assert cfg.selection.method == "logits_sum"


@pytest.mark.parametrize("preset", ["desk", "full", "overfit"])
def test_presets_parse(preset):
    cfg = load_run_config(preset)
    assert cfg.experiment == preset
    assert cfg.selection.tau == pytest.approx(0.5)


def test_full_preset_uses_sgd_for_completion():
    cfg = load_run_config("full")
    assert cfg.completion.optimizer.kind == "sgd"
    assert cfg.completion.optimizer.lr == 1.0
    assert cfg.da.optimizer.lr == pytest.approx(5e-5)
    assert cfg.completion.model.hidden == 500


@pytest.mark.parametrize("obj", [
    {"sed": 1},
    {"data": {"folds": 5, "fold": 2}},
    {"completion": {"optimizer": {"kind": "adam", "momentum": 0.9}}},
    {"completion": {"mixture": "average"}},
    {"da": {"optimizer": {"kind": "rmsprop"}}},
    {"selection": {"method": "vote"}},
    {"seed": "zero"},
    {"data": {"folds": 1}},
])
def test_bad_configs_raise(obj):
    with pytest.raises(ConfigError):
        parse_run_config(obj)


def test_selection_file_is_relative_to_config(tmp_path):
    (tmp_path / "sel.json").write_text(json.dumps({"method": "logits_max", "tau": 0.7}), encoding="utf-8")
    (tmp_path / "run.json").write_text(json.dumps({"selection": "sel.json"}), encoding="utf-8")
    cfg = load_run_config(tmp_path / "run.json")
    assert cfg.selection.method == "logits_max"
    assert cfg.selection.tau == pytest.approx(0.7)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json")
    (tmp_path / "broken.json").write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "broken.json")


def test_selection_config_resolves_label_names(tmp_path):
    path = tmp_path / "sel.json"
    path.write_text(json.dumps({"non_completable": ["hold"], "theta": 0.4}), encoding="utf-8")
    sel = load_selection_config(path)
    assert sel.non_completable == frozenset({dialog_acts().id("hold")})
    assert sel.decision_theta() == pytest.approx(0.8)
    path.write_text(json.dumps({"non_completable": ["sarcasm"]}), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_selection_config(path)


def test_data_dir_resolution(tmp_path, monkeypatch):
    cfg = parse_run_config({"data": {"completion": "c.jsonl"}})
    monkeypatch.setenv(DATA_DIR_ENV, str(tmp_path))
    assert cfg.data.resolve("c.jsonl") == tmp_path / "c.jsonl"
    explicit = parse_run_config({"data": {"dir": "elsewhere"}})
    assert str(explicit.data.resolve("c.jsonl")).startswith("elsewhere")


def test_to_dict_round_trips():
    cfg = load_run_config("overfit")
    again = parse_run_config(cfg.to_dict())
    assert again == cfg


def test_setup_logging_installs_one_handler():
    root = setup_logging(logging.DEBUG)
    setup_logging(logging.WARNING)
    ours = [h for h in root.handlers if getattr(h, "_elhyb", False)]
    assert len(ours) == 1
    assert ours[0].formatter._fmt == LOG_FORMAT
    assert root.level == logging.WARNING
