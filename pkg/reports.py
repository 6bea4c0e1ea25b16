"""
reports.py  —  Report files written by the command line, as pandas tables.

Used by the dashboard pages; every loader takes a directory or file path and
returns an empty frame (with the expected columns) when there is nothing to show.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path

import pandas as pd

log = logging.getLogger(__name__)

RUNS_DIR_ENV = "ELHYB_RUNS_DIR"
REPORT_COLUMNS = ["file", "task", "variant", "selection", "precision", "recall", "f1", "bleu", "em",
                  "seed", "corpus_hash"]
CURVE_COLUMNS = ["model", "epoch", "loss"]
VARIANT_ORDER = ["EL", "CMP", "Hybrid-EL-EL", "Hybrid-CMP-CMP", "Hybrid-EL-CMP"]


def runs_dir() -> Path:
    return Path(os.environ.get(RUNS_DIR_ENV, "runs"))


def load_report(path: str | Path) -> dict:
    """A single report file, empty when unreadable."""
    return _read(Path(path)) or {}


def _read(path: Path) -> dict | None:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        log.warning("skipping unreadable report %s: %s", path, exc)
        return None
    if not isinstance(obj, dict):
        log.warning("skipping %s: not a JSON object", path)
        return None
    return obj


def _task_of(metric: str) -> str:
    if metric.startswith("dialog_act"):
        return "da"
    if metric.startswith("srl"):
        return "srl"
    return metric


def report_row(path: Path, obj: dict) -> dict | None:
    """One table row for a grid report or a saved ``evaluate`` result; None for anything else."""
    hashes = obj.get("corpora") or {}
    if "metrics" in obj:
        m = obj["metrics"]
        task = obj.get("task")
        return {"file": path.name, "task": task, "variant": obj.get("variant"), "selection": obj.get("selection"),
                "precision": m.get("precision"), "recall": m.get("recall"), "f1": m.get("f1"),
                "bleu": m.get("bleu"), "em": m.get("em"), "seed": obj.get("seed"),
                "corpus_hash": hashes.get(task)}
    if "metric" in obj:
        task = _task_of(obj["metric"])
        return {"file": path.name, "task": task, "variant": path.stem, "selection": None,
                "precision": obj.get("precision"), "recall": obj.get("recall"), "f1": obj.get("f1"),
                "bleu": obj.get("bleu"), "em": obj.get("em"), "seed": obj.get("seed"),
                "corpus_hash": hashes.get(task)}
    return None


def load_reports(directory: str | Path) -> pd.DataFrame:
    rows = []
    for path in sorted(Path(directory).glob("*.json")):
        if path.name.startswith("train_") or path.name == "tune_tau.json":
            continue
        obj = _read(path)
        row = report_row(path, obj) if obj is not None else None
        if row is not None:
            rows.append(row)
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def load_training_curves(directory: str | Path) -> pd.DataFrame:
    """Long form: one row per (model, epoch)."""
    rows = []
    for path in sorted(Path(directory).glob("train_*.json")):
        obj = _read(path)
        if obj is None:
            continue
        name = obj.get("model", path.stem.removeprefix("train_"))
        rows += [{"model": name, "epoch": i, "loss": float(loss)}
                 for i, loss in enumerate(obj.get("epoch_losses", []), 1)]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def load_selection_log(path: str | Path) -> pd.DataFrame:
    path = Path(path)
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            log.warning("%s:%d: skipping malformed line", path, lineno)
    return pd.DataFrame(rows)


def selection_counts(frame: pd.DataFrame) -> pd.DataFrame:
    """Decisions per reason, with their share of the log."""
    if frame.empty or "reason" not in frame:
        return pd.DataFrame(columns=["reason", "count", "share"])
    counts = frame["reason"].value_counts().rename_axis("reason").reset_index(name="count")
    counts["share"] = counts["count"] / counts["count"].sum()
    return counts


def grid_table(frame: pd.DataFrame, task: str) -> pd.DataFrame:
    """Variant x selection rows of one task, best F1 first."""
    sub = frame[frame["task"] == task]
    sub = sub[sub["variant"].isin(VARIANT_ORDER)]
    cols = ["variant", "selection", "precision", "recall", "f1"]
    return sub[cols].sort_values(["f1", "variant"], ascending=[False, True]).reset_index(drop=True)
