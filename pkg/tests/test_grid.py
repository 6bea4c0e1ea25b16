"""
Directional checks on desk-sized synthetic corpora. They train every model from scratch
for three seeds and take a long time, so they only run on request: ``pytest -m trend``.
"""

import dataclasses

import numpy as np
import pytest

from completion import complete_examples
from config import load_run_config
from evaluation import completion_report
from grid import Corpora, Workspace, run_grid, split_indices, train_completion, train_da, train_srl
from synthetic import generate_synthetic

pytestmark = [pytest.mark.slow, pytest.mark.trend]

SEEDS = (0, 1, 2)
N = 2000
SLACK = 0.005


def desk_workspace(out, seed: int, **completion) -> Workspace:
    cfg = load_run_config("desk")
    section = cfg.completion
    if completion:
        section = dataclasses.replace(section, model=dataclasses.replace(section.model, **completion))
    return Workspace(dataclasses.replace(cfg, seed=seed, completion=section,
                                         output=dataclasses.replace(cfg.output, dir=str(out), plot=False)))


def synthetic(ws: Workspace) -> Corpora:
    data = ws.config.data
    completion, da, srl = generate_synthetic(ws.config.seed, N, data.mix, data.hold_noise)
    return Corpora(list(completion), list(da), list(srl))


def held_out_em(ws: Workspace, corpora: Corpora) -> float:
    model, _ = train_completion(ws, corpora)
    _, test_idx = split_indices(len(corpora.completion), ws.config)
    test = [corpora.completion[i] for i in test_idx]
    records = complete_examples(model, test)
    return completion_report([r.completion for r in records], [ex.reference for ex in test]).em


@pytest.mark.parametrize("seed", SEEDS)
def test_copy_model_beats_no_copy(tmp_path, seed):
    with_copy = desk_workspace(tmp_path / "copy", seed)
    corpora = synthetic(with_copy)
    em_copy = held_out_em(with_copy, corpora)
    em_plain = held_out_em(desk_workspace(tmp_path / "plain", seed, copy=False), corpora)
    assert em_copy >= 0.90
    assert em_copy - em_plain >= 0.20


@pytest.fixture(scope="module")
def grid_f1(tmp_path_factory) -> dict:
    """F1 per (seed, task, variant, selection) from full grids over EL and CMP models."""
    scores = {}
    for seed in SEEDS:
        ws = desk_workspace(tmp_path_factory.mktemp(f"seed{seed}"), seed)
        corpora = synthetic(ws)
        train_completion(ws, corpora)
        for path in ("el", "cmp"):
            train_da(ws, corpora, path)
            train_srl(ws, corpora, path)
        for task in ("da", "srl"):
            for row in run_grid(ws, corpora, task).itertuples():
                scores[seed, task, row.variant, row.selection] = row.f1
    return scores


@pytest.mark.parametrize("task, selection", [
    ("da", "logits_sum+expert"),
    ("srl", "rule"),
    ("srl", "probability"),
])
def test_hybrid_el_cmp_dominates_single_paths(grid_f1, task, selection):
    hybrid = np.array([grid_f1[s, task, "Hybrid-EL-CMP", selection] for s in SEEDS])
    el = np.array([grid_f1[s, task, "EL", "none"] for s in SEEDS])
    cmp_ = np.array([grid_f1[s, task, "CMP", "none"] for s in SEEDS])
    assert (hybrid >= np.maximum(el, cmp_) - SLACK).all(), (hybrid, el, cmp_)
    assert hybrid.mean() > max(el.mean(), cmp_.mean())


def test_expert_never_loses_to_plain_logits_sum(grid_f1):
    for seed in SEEDS:
        assert (grid_f1[seed, "da", "Hybrid-EL-CMP", "logits_sum+expert"]
                >= grid_f1[seed, "da", "Hybrid-EL-CMP", "logits_sum"])
