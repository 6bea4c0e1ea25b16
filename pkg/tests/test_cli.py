import json
import shutil

import pytest

import elhyb
from completion import build_model
from config import load_run_config
from corpus import load_jsonl
from grid import load_corpora, split_indices

TINY_MODEL = {"embedding": 6, "hidden": 8, "layers": 1, "dropout": 0.0, "min_count": 1}
TINY_OPTIM = {"kind": "adam", "lr": 0.01, "batch_size": 4, "epochs": 1}


def write_config(tmp_path, **overrides) -> str:
    cfg = {
        "seed": 0,
        "experiment": "cli",
        "data": {"dir": str(tmp_path / "corpus"), "n": 12, "folds": 2, "test_size": 2},
        "completion": {**TINY_MODEL, "attention": 8, "max_len": 8, "beam": 2, "optimizer": TINY_OPTIM},
        "da": {**TINY_MODEL, "optimizer": TINY_OPTIM},
        "srl": {**TINY_MODEL, "indicator": 2, "optimizer": TINY_OPTIM},
        "output": {"dir": str(tmp_path / "runs")},
        **overrides,
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def test_gen_data_writes_aligned_corpora(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 0
    corpus = tmp_path / "corpus"
    sizes = {kind: len(load_jsonl(corpus / f"{kind}.jsonl", kind)) for kind in ("completion", "da", "srl")}
    assert sizes == {"completion": 12, "da": 12, "srl": 12}


def test_gen_data_refuses_to_overwrite(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 0
    before = (tmp_path / "corpus" / "da.jsonl").read_text(encoding="utf-8")
    assert elhyb.main(["--quiet", "gen-data", "--config", config, "--seed", "9"]) == 2
    assert (tmp_path / "corpus" / "da.jsonl").read_text(encoding="utf-8") == before
    assert elhyb.main(["--quiet", "gen-data", "--config", config, "--seed", "9", "--force"]) == 0


def test_gen_data_bad_mix(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config, "--mix", "0.5", "0.5", "0.5"]) == 2
    assert not (tmp_path / "corpus").exists()


def test_unknown_config_key_is_usage_error(tmp_path):
    config = write_config(tmp_path, colour="blue")
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 2


def test_missing_corpus_is_usage_error(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "train-da", "--config", config]) == 2


def test_no_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        elhyb.main([])
    assert exc.value.code == 2


def test_bad_choice_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        elhyb.main(["run-grid", "--task", "ner"])
    assert exc.value.code == 2


def test_evaluate_completion_predictions(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 0
    gold_path = tmp_path / "corpus" / "completion.jsonl"
    gold = load_jsonl(gold_path, "completion")
    # perfect completions for every line
    preds = tmp_path / "preds.jsonl"
    preds.write_text("".join(json.dumps({"completion": list(ex.reference)}) + "\n" for ex in gold),
                     encoding="utf-8")
    out = tmp_path / "report.json"
    code = elhyb.main(["--quiet", "evaluate", "--task", "completion", "--predictions", str(preds),
                       "--gold", str(gold_path), "--output", str(out)])
    assert code == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["metric"] == "completion"
    assert report["f1"] == pytest.approx(1.0)
    assert set(report["corpora"]) == {"completion"}


def test_evaluate_length_mismatch(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 0
    preds = tmp_path / "preds.jsonl"
    preds.write_text(json.dumps({"labels": ["statement"]}) + "\n", encoding="utf-8")
    code = elhyb.main(["--quiet", "evaluate", "--task", "da", "--predictions", str(preds),
                       "--gold", str(tmp_path / "corpus" / "da.jsonl")])
    assert code == 2


def test_evaluate_missing_predictions(tmp_path):
    gold = tmp_path / "gold.jsonl"
    gold.write_text("", encoding="utf-8")
    code = elhyb.main(["--quiet", "evaluate", "--task", "da", "--predictions", str(tmp_path / "nope.jsonl"),
                       "--gold", str(gold)])
    assert code == 2


@pytest.mark.slow
def test_end_to_end_grid(tmp_path):
    config = write_config(tmp_path)
    runs = tmp_path / "runs"

    def run(*argv):
        assert elhyb.main(["--quiet", *argv, "--config", config]) == 0

    run("gen-data")
    run("train-completion")
    assert (runs / "checkpoints" / "completion.ckpt").is_file()
    assert json.loads((runs / "train_completion.json").read_text(encoding="utf-8"))["model"] == "completion"

    run("train-da", "--path", "el")
    run("train-da", "--path", "cmp")
    run("train-da", "--joint", "hidden_cat")
    run("run-grid", "--task", "da", "--variant", "all")
    assert (runs / "da_EL_none.json").is_file()
    assert (runs / "da_Hybrid-EL-CMP_logits_sum-expert.json").is_file()
    assert (runs / "da_Hybrid-EL-CMP_hidden_cat.json").is_file()
    # member-2 checkpoints were never trained
    assert not (runs / "da_Hybrid-EL-EL_logits_sum.json").exists()

    run("train-srl", "--path", "el")
    run("train-srl", "--path", "cmp")
    run("run-grid", "--task", "srl", "--variant", "all")
    summary = (runs / "grid_summary.csv").read_text(encoding="utf-8")
    assert "da," in summary and "srl," in summary

    log = runs / "srl_CMP_none.selection.jsonl"
    entries = [json.loads(line) for line in log.read_text(encoding="utf-8").splitlines()]
    assert len(entries) == 2
    assert {"index", "utterance", "completion", "reason", "predicted", "gold"} <= set(entries[0])
    assert elhyb.main(["--quiet", "evaluate", "--task", "srl", "--predictions", str(log),
                       "--gold", str(tmp_path / "corpus" / "srl.jsonl")]) == 0


def test_evaluate_selection_log_index_out_of_range(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 0
    log = tmp_path / "da_EL_none.selection.jsonl"
    log.write_text(json.dumps({"index": 99, "predicted": ["statement"]}) + "\n", encoding="utf-8")
    code = elhyb.main(["--quiet", "evaluate", "--task", "da", "--predictions", str(log),
                       "--gold", str(tmp_path / "corpus" / "da.jsonl")])
    assert code == 2


def _snapshot(*roots):
    return {str(p.relative_to(root.parent)): p.read_bytes()
            for root in roots for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.mark.slow
def test_repeated_runs_write_identical_files(tmp_path):
    config = write_config(tmp_path)
    corpus, runs = tmp_path / "corpus", tmp_path / "runs"

    def run(*argv):
        assert elhyb.main(["--quiet", *argv, "--config", config]) == 0

    snapshots = []
    for _ in range(2):
        shutil.rmtree(runs, ignore_errors=True)
        run("gen-data", "--force")
        run("train-completion")
        for path in ("el", "cmp"):
            run("train-da", "--path", path)
            run("train-srl", "--path", path)
        run("run-grid", "--task", "da", "--variant", "all")
        run("run-grid", "--task", "srl", "--variant", "all")
        snapshots.append(_snapshot(corpus, runs))

    assert "runs/checkpoints/completion.ckpt" in snapshots[0]
    assert "runs/da_Hybrid-EL-CMP_logits_sum-expert.json" in snapshots[0]
    assert "runs/grid_summary.csv" in snapshots[0]
    assert snapshots[0].keys() == snapshots[1].keys()
    for name, data in snapshots[0].items():
        assert snapshots[1][name] == data, name


@pytest.mark.slow
def test_zero_epochs_saves_the_initial_model(tmp_path):
    config = write_config(tmp_path)
    assert elhyb.main(["--quiet", "gen-data", "--config", config]) == 0
    assert elhyb.main(["--quiet", "train-completion", "--epochs", "0", "--config", config]) == 0

    cfg = load_run_config(config)
    corpora = load_corpora(cfg, ("completion",))
    train_idx, _ = split_indices(len(corpora.completion), cfg)
    model = build_model([corpora.completion[i] for i in train_idx], cfg.completion.model, cfg.seed)
    model.save(tmp_path / "init.ckpt", cfg.completion.optimizer.build(model.parameters()), {"epoch_losses": []})

    runs = tmp_path / "runs"
    assert (runs / "checkpoints" / "completion.ckpt").read_bytes() == (tmp_path / "init.ckpt").read_bytes()
    assert json.loads((runs / "train_completion.json").read_text(encoding="utf-8"))["epoch_losses"] == []


@pytest.mark.slow
@pytest.mark.parametrize("command, checkpoint", [
    (("train-completion",), "completion.ckpt"),
    (("train-da", "--path", "el"), "da_el_1.ckpt"),
])
def test_resume_continues_an_interrupted_run(tmp_path, command, checkpoint):
    whole, split = tmp_path / "whole", tmp_path / "split"
    for d in (whole, split):
        d.mkdir()
        assert elhyb.main(["--quiet", "gen-data", "--config", write_config(d)]) == 0

    def run(d, *argv):
        assert elhyb.main(["--quiet", *command, *argv, "--config", str(d / "run.json")]) == 0

    run(whole, "--epochs", "2")
    run(split, "--epochs", "1")
    run(split, "--resume", "--epochs", "1")

    name = checkpoint.removesuffix(".ckpt")
    losses = [json.loads((d / "runs" / f"train_{name}.json").read_text(encoding="utf-8"))["epoch_losses"]
              for d in (whole, split)]
    assert len(losses[0]) == 2
    assert losses[0] == losses[1]
    assert ((whole / "runs" / "checkpoints" / checkpoint).read_bytes()
            == (split / "runs" / "checkpoints" / checkpoint).read_bytes())
