"""
grid.py  —  Training orchestration and the experiment grid.

Checkpoints and reports live under ``output.dir``:

    checkpoints/completion.ckpt
    checkpoints/da_{el,cmp}_{1,2}.ckpt      checkpoints/da_joint_<method>.ckpt
    checkpoints/srl_{el,cmp}_{1,2}.ckpt
    train_<model>.json  (+ .png with plotting on)
    <task>_<variant>_<selection>.json  and  .selection.jsonl
    grid_summary.csv    tune_tau.json

The three corpora are index-aligned, so one fold assignment (seed stream ``fold``)
splits all of them.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from completion import CompletionModel, CompletionRecord, build_model, complete_examples
from completion import train as completion_train
from config import ConfigError, RunConfig
from corpus import (
    CompletionExample, DAExample, LabelInventory, SRLExample, content_hash, dialog_acts, kfold_indices,
    load_field_map, load_jsonl, srl_roles,
)
from evaluation import SRL_MODES, da_report, srl_report, srl_span_prf
from plots import plot_loss_curves
from selection import (
    HIDDEN_METHODS, LOGIT_METHODS, Alignment, HybridDAModel, align, build_hybrid, da_decision,
    hybrid_predict, hybrid_train, project_frames, srl_probability_decision, srl_rule_decision,
)
from understanding import (
    DAClassifier, Prediction, SRLModel, build_da, build_srl, da_decide, da_forward, da_train,
    gold_frames, predict_frames, srl_train,
)

log = logging.getLogger(__name__)

TASKS = ("da", "srl")
PATHS = ("el", "cmp")
VARIANTS = ("EL", "CMP", "Hybrid-EL-EL", "Hybrid-CMP-CMP", "Hybrid-EL-CMP")
DA_SELECTIONS = ("logits_sum", "logits_sum+expert", "logits_max", "hidden_sum", "hidden_max", "hidden_cat")
SRL_SELECTIONS = ("rule", "probability")
SINGLE = "none"
TAU_GRID = tuple(round(t, 2) for t in np.arange(0.0, 1.0001, 0.05))


class MissingInput(FileNotFoundError):
    pass


def init_stream(path: str, member: int) -> str:
    base = {"el": "init-EL", "cmp": "init-CMP"}[path]
    return base if member == 1 else f"{base}-{member}"


def parse_selection(name: str) -> tuple[str, bool]:
    """'logits_sum+expert' -> ('logits_sum', True)."""
    method, _, suffix = name.partition("+")
    if suffix not in ("", "expert"):
        raise ConfigError(f"unknown selection modifier {suffix!r} in {name!r}")
    return method, suffix == "expert"


def report_name(task: str, variant: str, selection: str) -> str:
    return f"{task}_{variant}_{selection.replace('+', '-')}"


# ---------- Workspace & corpora ----------
@dataclass
class Workspace:
    config: RunConfig
    plot: bool = False
    progress: bool = False

    @property
    def out(self) -> Path:
        return self.config.output.path()

    def checkpoint(self, name: str) -> Path:
        return self.out / "checkpoints" / f"{name}.ckpt"

    def require(self, name: str) -> Path:
        path = self.checkpoint(name)
        if not path.is_file():
            raise MissingInput(f"missing checkpoint {path}")
        return path

    def write_json(self, name: str, payload: dict) -> Path:
        path = self.out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("wrote %s", path)
        return path


@dataclass
class Corpora:
    completion: list[CompletionExample] = field(default_factory=list)
    da: list[DAExample] = field(default_factory=list)
    srl: list[SRLExample] = field(default_factory=list)
    hashes: dict[str, str] = field(default_factory=dict)
    acts: LabelInventory = field(default_factory=dialog_acts)
    roles: LabelInventory = field(default_factory=srl_roles)

    def aligned(self, *kinds: str) -> int:
        sizes = {k: len(getattr(self, k)) for k in kinds}
        if len(set(sizes.values())) > 1:
            raise ConfigError(f"corpora are not index-aligned: {sizes}")
        return next(iter(sizes.values()))


def load_corpora(config: RunConfig, kinds: Sequence[str] = ("completion", "da", "srl")) -> Corpora:
    data = config.data
    field_map = load_field_map(data.resolve(data.field_map)) if data.field_map else None
    out = Corpora()
    for kind in kinds:
        path = data.resolve(getattr(data, kind))
        if not path.is_file():
            raise MissingInput(f"missing {kind} corpus {path}")
        setattr(out, kind, load_jsonl(path, kind, field_map, out.acts, out.roles))
        out.hashes[kind] = content_hash(path)
        log.info("loaded %d %s examples from %s", len(getattr(out, kind)), kind, path)
    return out


def split_indices(n: int, config: RunConfig) -> tuple[list[int], list[int]]:
    """(train, test) indices; the test share defaults to a fifth of the corpus."""
    test_size = config.data.test_size or n // 5
    test, folds = kfold_indices(n, config.data.folds, config.seed, test_size)
    return sorted(j for f in folds for j in f), sorted(test)


def _subset(items: Sequence, idx: Sequence[int]) -> list:
    return [items[i] for i in idx]


# ---------- Training ----------
def _train_report(ws: Workspace, corpora: Corpora, name: str, history: list[float], report, extra: dict) -> None:
    payload = {"model": name, "epoch_losses": history, "steps": report.steps, "examples": report.examples,
               "seed": ws.config.seed, "config": ws.config.to_dict(), "corpora": corpora.hashes, **extra}
    ws.write_json(f"train_{name}.json", payload)
    if ws.plot or ws.config.output.plot:
        plot_loss_curves({name: history}, ws.out / f"train_{name}.png", title=f"{name} training loss")


def _resume(path: Path, loader, resume: bool):
    if resume and path.is_file():
        model, optim_state, history = loader(path)
        log.info("resuming %s after %d epochs", path, len(history.get("epoch_losses", [])))
        return model, optim_state, list(history.get("epoch_losses", []))
    return None, {}, []


def train_completion(ws: Workspace, corpora: Corpora, resume: bool = False, epochs: int | None = None):
    cfg = ws.config
    train_idx, _ = split_indices(len(corpora.completion), cfg)
    train_set = _subset(corpora.completion, train_idx)
    path = ws.checkpoint("completion")
    model, optim_state, history = _resume(path, CompletionModel.load, resume)
    model = model or build_model(train_set, cfg.completion.model, cfg.seed)
    optimizer = cfg.completion.optimizer.build(model.parameters())
    if optim_state:
        optimizer.load_state_dict(optim_state)
    report = completion_train(model, train_set, cfg.completion.optimizer, epochs, cfg.seed, optimizer,
                              progress=ws.progress, start_epoch=len(history))
    history += report.epoch_losses
    path.parent.mkdir(parents=True, exist_ok=True)
    model.save(path, optimizer, {"epoch_losses": history})
    _train_report(ws, corpora, "completion", history, report, {"unk_targets": report.unk_targets})
    return model, history


def train_da(ws: Workspace, corpora: Corpora, path: str = "el", member: int = 1, joint: str | None = None,
             resume: bool = False, epochs: int | None = None):
    cfg = ws.config
    train_idx, _ = split_indices(len(corpora.da), cfg)
    train_set = _subset(corpora.da, train_idx)
    optim = cfg.da.optimizer
    if joint is not None:
        if joint not in HIDDEN_METHODS:
            raise ConfigError(f"--joint must be one of {HIDDEN_METHODS}")
        name = f"da_joint_{joint}"
        model, optim_state, history = _resume(ws.checkpoint(name), HybridDAModel.load, resume)
        model = model or build_hybrid(train_set, corpora.acts, joint, cfg.da.model, cfg.seed)
        optimizer = optim.build(model.parameters())
        if optim_state:
            optimizer.load_state_dict(optim_state)
        report = hybrid_train(model, train_set, optim, epochs, cfg.seed, optimizer, progress=ws.progress,
                              start_epoch=len(history))
        extra = {"mode": joint}
    else:
        if path not in PATHS:
            raise ConfigError(f"--path must be one of {PATHS}")
        name, stream = f"da_{path}_{member}", init_stream(path, member)
        model, optim_state, history = _resume(ws.checkpoint(name), DAClassifier.load, resume)
        model = model or build_da(train_set, corpora.acts, cfg.da.model, cfg.seed, stream)
        optimizer = optim.build(model.parameters())
        if optim_state:
            optimizer.load_state_dict(optim_state)
        report = da_train(model, train_set, optim, epochs, cfg.seed, path, optimizer, progress=ws.progress,
                          start_epoch=len(history))
        extra = {"path": path, "member": member, "init_stream": stream}
    history += report.epoch_losses
    ws.checkpoint(name).parent.mkdir(parents=True, exist_ok=True)
    model.save(ws.checkpoint(name), optimizer, {"epoch_losses": history}, extra)
    _train_report(ws, corpora, name, history, report, extra)
    return model, history


def train_srl(ws: Workspace, corpora: Corpora, path: str = "el", member: int = 1, resume: bool = False,
              epochs: int | None = None):
    cfg = ws.config
    if path not in PATHS:
        raise ConfigError(f"--path must be one of {PATHS}")
    train_idx, _ = split_indices(len(corpora.srl), cfg)
    train_set = _subset(corpora.srl, train_idx)
    name, stream = f"srl_{path}_{member}", init_stream(path, member)
    model, optim_state, history = _resume(ws.checkpoint(name), SRLModel.load, resume)
    model = model or build_srl(train_set, corpora.roles, cfg.srl.model, cfg.seed, stream)
    optimizer = cfg.srl.optimizer.build(model.parameters())
    if optim_state:
        optimizer.load_state_dict(optim_state)
    report = srl_train(model, train_set, cfg.srl.optimizer, epochs, cfg.seed, path, optimizer, progress=ws.progress,
                       start_epoch=len(history))
    history += report.epoch_losses
    extra = {"path": path, "member": member, "init_stream": stream}
    ws.checkpoint(name).parent.mkdir(parents=True, exist_ok=True)
    model.save(ws.checkpoint(name), optimizer, {"epoch_losses": history}, extra)
    _train_report(ws, corpora, name, history, report, extra)
    return model, history


# ---------- Evaluation runs ----------
class GridRun:
    """Lazily loaded models and cached test-set predictions shared by all variants."""

    def __init__(self, ws: Workspace, corpora: Corpora, task: str):
        if task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}")
        self.ws, self.corpora, self.task = ws, corpora, task
        self.examples = corpora.da if task == "da" else corpora.srl
        n = corpora.aligned("completion", task)
        _, self.test_idx = split_indices(n, ws.config)
        self.test = _subset(self.examples, self.test_idx)
        self._models: dict = {}
        self._preds: dict = {}

    def model(self, name: str, loader):
        if name not in self._models:
            self._models[name] = loader(self.ws.require(name))[0]
        return self._models[name]

    @cached_property
    def completions(self) -> list[CompletionRecord]:
        model = self.model("completion", CompletionModel.load)
        records = complete_examples(model, self.test, progress=self.ws.progress)
        log.info("completed %d test utterances", len(records))
        return records

    def completed(self, i: int) -> tuple[str, ...]:
        return self.completions[i].completion or self.test[i].utterance

    def alignment(self, i: int) -> Alignment:
        return align(self.test[i].utterance, self.completed(i))

    def posteriors(self, i: int) -> tuple[float, ...]:
        rec = self.completions[i]
        return rec.posteriors if rec.completion else (1.0,) * len(self.test[i].utterance)

    # dialog acts
    def da_predictions(self, path: str, member: int) -> list[Prediction]:
        key = ("da", path, member)
        if key not in self._preds:
            clf = self.model(f"da_{path}_{member}", DAClassifier.load)
            self._preds[key] = [
                da_forward(clf, ex.context, ex.utterance if path == "el" else self.completed(i))
                for i, ex in enumerate(self.test)]
        return self._preds[key]

    def run_da(self, variant: str, selection: str) -> tuple[list[frozenset], list[str]]:
        theta = self.ws.config.selection.theta
        if variant in ("EL", "CMP"):
            preds = self.da_predictions(variant.lower(), 1)
            return [da_decide(p.D, theta) for p in preds], [variant.lower()] * len(preds)
        method, expert = parse_selection(selection)
        if variant in ("Hybrid-EL-EL", "Hybrid-CMP-CMP"):
            if method not in LOGIT_METHODS:
                raise ConfigError(f"{variant} ensembles combine scores; use one of {LOGIT_METHODS}")
            path = "el" if variant == "Hybrid-EL-EL" else "cmp"
            sel = self.ws.config.selection.resolve(self.corpora.acts, method=method, expert_enabled=False)
            pairs = zip(self.da_predictions(path, 1), self.da_predictions(path, 2))
            return _unzip(da_decision(a, b, sel) for a, b in pairs)
        sel = self.ws.config.selection.resolve(self.corpora.acts, method=method, expert_enabled=expert)
        pred_E = self.da_predictions("el", 1) if expert or method in LOGIT_METHODS else [None] * len(self.test)
        if method in LOGIT_METHODS:
            return _unzip(da_decision(e, c, sel) for e, c in zip(pred_E, self.da_predictions("cmp", 1)))
        joint = self.model(f"da_joint_{method}", HybridDAModel.load)
        return _unzip(hybrid_predict(joint, dataclasses.replace(ex, completed=self.completed(i)), sel, pred_E[i])
                      for i, ex in enumerate(self.test))

    # semantic roles
    def srl_frames(self, path: str, members: Sequence[int]) -> list:
        key = ("srl", path, tuple(members))
        if key not in self._preds:
            models = [self.model(f"srl_{path}_{m}", SRLModel.load) for m in members]
            self._preds[key] = [
                predict_frames(models, ex.utterance if path == "el" else self.completed(i)).frames
                for i, ex in enumerate(self.test)]
        return self._preds[key]

    def run_srl(self, variant: str, selection: str) -> tuple[list, list[str]]:
        n = len(self.test)
        if variant == "EL":
            return self.srl_frames("el", [1]), ["el"] * n
        if variant == "Hybrid-EL-EL":
            return self.srl_frames("el", [1, 2]), ["ensemble"] * n
        if variant in ("CMP", "Hybrid-CMP-CMP"):
            frames = self.srl_frames("cmp", [1] if variant == "CMP" else [1, 2])
            return [project_frames(f, self.alignment(i)) for i, f in enumerate(frames)], ["cmp"] * n
        if selection not in SRL_SELECTIONS:
            raise ConfigError(f"SRL selection must be one of {SRL_SELECTIONS}, got {selection!r}")
        frames_E, frames_C = self.srl_frames("el", [1]), self.srl_frames("cmp", [1])
        tau = self.ws.config.selection.tau
        if selection == "rule":
            return _unzip(srl_rule_decision(frames_E[i], frames_C[i], self.alignment(i)) for i in range(n))
        return _unzip(srl_probability_decision(frames_E[i], frames_C[i], self.posteriors(i),
                                               self.alignment(i), tau) for i in range(n))


def _unzip(pairs) -> tuple[list, list]:
    firsts, seconds = [], []
    for a, b in pairs:
        firsts.append(a)
        seconds.append(b)
    return firsts, seconds


def evaluate_variant(run: GridRun, variant: str, selection: str, average: str = "micro") -> dict:
    """Run one variant, write its report and selection log, return the summary row."""
    if variant not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS} or 'all', got {variant!r}")
    selection = SINGLE if variant in ("EL", "CMP") else selection
    ws, task = run.ws, run.task
    rows = []
    if task == "da":
        predicted, reasons = run.run_da(variant, selection)
        gold = [ex.labels for ex in run.test]
        report = da_report(predicted, gold, run.corpora.acts, average)
        other = "macro" if average == "micro" else "micro"
        metrics = {**report.to_dict(), other: da_report(predicted, gold, run.corpora.acts, other).to_dict()}
        for k, (i, ex) in enumerate(zip(run.test_idx, run.test)):
            rows.append({"index": i, "utterance": " ".join(ex.utterance), "reason": reasons[k],
                         "completion": " ".join(run.completed(k)) if "CMP" in variant else None,
                         "predicted": sorted(run.corpora.acts.name(j) for j in predicted[k]),
                         "gold": sorted(run.corpora.acts.name(j) for j in gold[k])})
    else:
        predicted, reasons = run.run_srl(variant, selection)
        gold = [gold_frames(ex.frames) for ex in run.test]
        metrics = {mode: srl_report(predicted, gold, mode).to_dict() for mode in SRL_MODES}
        metrics.update({k: metrics["modified"][k] for k in ("precision", "recall", "f1")})
        for k, (i, ex) in enumerate(zip(run.test_idx, run.test)):
            rows.append({"index": i, "utterance": " ".join(ex.utterance), "reason": reasons[k],
                         "completion": " ".join(run.completed(k)) if "CMP" in variant else None,
                         "predicted": [fr.to_dict() for fr in predicted[k]],
                         "gold": [fr.to_dict() for fr in gold[k]]})
    counts = dict(Counter(reasons))
    name = report_name(task, variant, selection)
    ws.write_json(f"{name}.json", {
        "task": task, "variant": variant, "selection": selection, "metrics": metrics,
        "reasons": counts, "sizes": {"test": len(run.test)}, "seed": ws.config.seed,
        "members": {"1": "init-EL / init-CMP", "2": "init-EL-2 / init-CMP-2"},
        "config": ws.config.to_dict(), "corpora": run.corpora.hashes})
    log_path = ws.out / f"{name}.selection.jsonl"
    log_path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows), encoding="utf-8")
    if "expert_short_circuit" in counts:
        log.info("%s: %d expert short-circuits", name, counts["expert_short_circuit"])
    log.info("%s: P %.4f R %.4f F1 %.4f", name, metrics["precision"], metrics["recall"], metrics["f1"])
    return {"task": task, "variant": variant, "selection": selection, "precision": metrics["precision"],
            "recall": metrics["recall"], "f1": metrics["f1"], **{f"n_{k}": v for k, v in counts.items()}}


def grid_cells(task: str, variant: str, selection: str | None) -> list[tuple[str, str]]:
    """The (variant, selection) pairs a run-grid invocation covers."""
    if variant != "all":
        default = "logits_sum" if task == "da" else "rule"
        return [(variant, selection or default)]
    cells = [("EL", SINGLE), ("CMP", SINGLE)]
    ensemble = "logits_sum" if task == "da" else SINGLE
    cells += [("Hybrid-EL-EL", ensemble), ("Hybrid-CMP-CMP", ensemble)]
    choices = DA_SELECTIONS if task == "da" else SRL_SELECTIONS
    cells += [("Hybrid-EL-CMP", s) for s in ([selection] if selection else choices)]
    return cells


def run_grid(ws: Workspace, corpora: Corpora, task: str, variant: str = "all", selection: str | None = None,
             average: str = "micro") -> pd.DataFrame:
    run = GridRun(ws, corpora, task)
    rows = []
    for v, s in grid_cells(task, variant, selection):
        log.info("running %s %s [%s]", task, v, s)
        try:
            rows.append(evaluate_variant(run, v, s, average))
        except MissingInput as exc:
            if variant != "all":
                raise
            log.warning("skipping %s [%s]: %s", v, s, exc)
    frame = pd.DataFrame(rows)
    if variant == "all" and not frame.empty:
        path = ws.out / "grid_summary.csv"
        if path.is_file():
            previous = pd.read_csv(path)
            frame = pd.concat([previous[previous["task"] != task], frame], ignore_index=True)
        frame.to_csv(path, index=False)
        log.info("wrote %s", path)
    return frame


# ---------- Threshold tuning ----------
def tune_tau(ws: Workspace, corpora: Corpora, taus: Sequence[float] = TAU_GRID, epochs: int | None = None,
             folds: int | None = None) -> dict:
    """
    Five-fold sweep of the probability-selector threshold: per fold, the completion model
    and both SRL taggers are trained on the remaining folds and the threshold is scored
    on the held-out fold.
    """
    cfg = ws.config
    n = corpora.aligned("completion", "srl")
    k = folds or cfg.data.folds
    _, fold_idx = kfold_indices(n, k, cfg.seed, cfg.data.test_size or n // 5)
    table = np.zeros((k, len(taus)))
    for f, val_idx in enumerate(fold_idx):
        train_idx = [j for m, other in enumerate(fold_idx) if m != f for j in other]
        comp_train, srl_train_set = _subset(corpora.completion, train_idx), _subset(corpora.srl, train_idx)
        completer = build_model(comp_train, cfg.completion.model, cfg.seed)
        completion_train(completer, comp_train, cfg.completion.optimizer, epochs, cfg.seed, progress=ws.progress)
        taggers = {}
        for path in PATHS:
            taggers[path] = build_srl(srl_train_set, corpora.roles, cfg.srl.model, cfg.seed, init_stream(path, 1))
            srl_train(taggers[path], srl_train_set, cfg.srl.optimizer, epochs, cfg.seed, path, progress=ws.progress)
        val = _subset(corpora.srl, val_idx)
        records = complete_examples(completer, val, progress=ws.progress)
        gold = [gold_frames(ex.frames) for ex in val]
        frames_E = [taggers["el"].predict(ex.utterance).frames for ex in val]
        completed = [r.completion or ex.utterance for r, ex in zip(records, val)]
        frames_C = [taggers["cmp"].predict(c).frames for c in completed]
        aligns = [align(ex.utterance, c) for ex, c in zip(val, completed)]
        posteriors = [r.posteriors if r.completion else (1.0,) * len(ex.utterance) for r, ex in zip(records, val)]
        for t, tau in enumerate(taus):
            preds = [srl_probability_decision(e, c, p, a, tau)[0]
                     for e, c, p, a in zip(frames_E, frames_C, posteriors, aligns)]
            table[f, t] = srl_span_prf(preds, gold, "modified")[2]
        log.info("fold %d/%d: best tau %.2f (F1 %.4f)", f + 1, k, taus[int(np.argmax(table[f]))], table[f].max())
    mean = table.mean(axis=0)
    best = float(taus[int(np.argmax(mean))])
    result = {"taus": list(taus), "f1": table.tolist(), "mean_f1": mean.tolist(),
              "best_per_fold": [float(taus[int(np.argmax(row))]) for row in table], "best_tau": best,
              "seed": cfg.seed, "config": cfg.to_dict(), "corpora": corpora.hashes}
    ws.write_json("tune_tau.json", result)
    return result
