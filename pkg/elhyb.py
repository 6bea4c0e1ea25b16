"""
elhyb.py  —  Command-line entry point.

    python elhyb.py gen-data --seed 0 --n 2000
    python elhyb.py train-completion --config desk
    python elhyb.py train-da --path el --member 1
    python elhyb.py run-grid --task da --variant all
    python elhyb.py evaluate --task srl --predictions runs/srl_CMP_none.selection.jsonl --gold corpus/srl.jsonl

Exit codes: 0 success, 2 usage or configuration error (bad flags, bad config,
malformed corpus, missing input file), 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from completion import CompletionModel, complete_examples
from config import ConfigError, load_run_config, setup_logging
from corpus import (
    CorpusError, DAExample, KINDS, SRLExample, content_hash, dialog_acts, load_jsonl, save_jsonl, tokenize,
)
from evaluation import AVERAGES, SRL_MODES, completion_report, da_report, srl_report
from grid import (
    DA_SELECTIONS, HIDDEN_METHODS, SRL_SELECTIONS, TASKS, VARIANTS, MissingInput, Workspace, load_corpora,
    run_grid, train_completion, train_da, train_srl, tune_tau,
)
from selection import align
from synthetic import SyntheticError, generate_synthetic
from understanding import SRLFrame, canonical, gold_frames

log = logging.getLogger("elhyb")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


# ---------- Commands ----------
def _workspace(args) -> Workspace:
    return Workspace(load_run_config(args.config), plot=getattr(args, "plot", False),
                     progress=not args.quiet)


def cmd_gen_data(args) -> int:
    cfg = load_run_config(args.config)
    data = cfg.data
    seed = cfg.seed if args.seed is None else args.seed
    n = data.n if args.n is None else args.n
    mix = data.mix if args.mix is None else tuple(args.mix)
    hold_noise = data.hold_noise if args.hold_noise is None else args.hold_noise
    targets = {kind: data.resolve(getattr(data, kind)) for kind in ("completion", "da", "srl")}
    existing = [str(p) for p in targets.values() if p.exists()]
    if existing and not args.force:
        log.warning("refusing to overwrite %s (use --force)", ", ".join(existing))
        raise ConfigError(f"output exists: {existing[0]}")
    try:
        corpora = generate_synthetic(seed, n, mix, hold_noise)
    except SyntheticError as exc:
        flag = "--hold-noise" if "hold_noise" in str(exc) else "--mix"
        raise ConfigError(f"{flag}: {exc}") from exc
    acts = dialog_acts()
    for (kind, path), examples in zip(targets.items(), corpora):
        save_jsonl(path, examples, acts)
        log.info("wrote %d %s examples to %s", len(examples), kind, path)
    return EXIT_OK


def cmd_train_completion(args) -> int:
    ws = _workspace(args)
    train_completion(ws, load_corpora(ws.config, ("completion",)), args.resume, args.epochs)
    return EXIT_OK


def cmd_train_da(args) -> int:
    ws = _workspace(args)
    train_da(ws, load_corpora(ws.config, ("da",)), args.path, args.member, args.joint, args.resume, args.epochs)
    return EXIT_OK


def cmd_train_srl(args) -> int:
    ws = _workspace(args)
    train_srl(ws, load_corpora(ws.config, ("srl",)), args.path, args.member, args.resume, args.epochs)
    return EXIT_OK


def cmd_complete(args) -> int:
    ws = _workspace(args)
    checkpoint = Path(args.checkpoint) if args.checkpoint else ws.checkpoint("completion")
    if not checkpoint.is_file():
        raise MissingInput(f"missing checkpoint {checkpoint}")
    if not Path(args.input).is_file():
        raise MissingInput(f"missing input {args.input}")
    model = CompletionModel.load(checkpoint)[0]
    examples = load_jsonl(args.input, args.kind)
    records = complete_examples(model, examples, args.beam, args.max_len, progress=not args.quiet)
    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    if args.write_completed:
        if args.kind == "completion":
            raise ConfigError("--write-completed needs a da or srl corpus")
        updated = []
        for ex, rec in zip(examples, records):
            completed = rec.completion or ex.utterance
            if isinstance(ex, DAExample):
                updated.append(DAExample(ex.context, ex.utterance, ex.labels, completed))
            else:
                updated.append(SRLExample(ex.context, ex.utterance, ex.frames, completed, ()))
        save_jsonl(output, updated)
    else:
        output.write_text("".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records), encoding="utf-8")
    log.info("wrote %d completions to %s", len(records), output)
    return EXIT_OK


def cmd_run_grid(args) -> int:
    ws = _workspace(args)
    corpora = load_corpora(ws.config, ("completion", args.task))
    frame = run_grid(ws, corpora, args.task, args.variant, args.selection, args.average)
    if not frame.empty:
        print(frame[["variant", "selection", "precision", "recall", "f1"]].to_string(index=False))
    return EXIT_OK


def cmd_tune_tau(args) -> int:
    ws = _workspace(args)
    result = tune_tau(ws, load_corpora(ws.config, ("completion", "srl")), epochs=args.epochs, folds=args.folds)
    print(f"best tau: {result['best_tau']:.2f}")
    return EXIT_OK


def _read_predictions(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.is_file():
        raise MissingInput(f"missing predictions {path}")
    rows = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"malformed JSON ({exc.msg})", line=lineno, path=path) from exc
    return rows


def _tokens(value) -> tuple[str, ...]:
    return tuple(tokenize(value)) if isinstance(value, str) else tuple(value)


def cmd_evaluate(args) -> int:
    if not Path(args.gold).is_file():
        raise MissingInput(f"missing gold corpus {args.gold}")
    gold = load_jsonl(args.gold, args.task)
    rows = _read_predictions(args.predictions)
    if rows and all("index" in r for r in rows):
        # selection logs cover the test split only
        bad = [r["index"] for r in rows if not isinstance(r["index"], int) or not 0 <= r["index"] < len(gold)]
        if bad:
            raise ConfigError(f"selection log index {bad[0]!r} outside the {len(gold)}-line gold corpus")
        gold = [gold[r["index"]] for r in rows]
    if len(rows) != len(gold):
        raise ConfigError(f"{len(rows)} predictions for {len(gold)} gold examples")
    if args.task == "completion":
        hyps = [_tokens(r.get("completion", r.get("prediction", ()))) for r in rows]
        report = completion_report(hyps, [g.reference for g in gold], [g.source for g in gold])
    elif args.task == "da":
        acts = dialog_acts()
        predicted = [acts.ids(r.get("labels", r.get("predicted", ()))) for r in rows]
        report = da_report(predicted, [g.labels for g in gold], acts, args.average)
    else:
        predicted = [canonical([SRLFrame.from_dict(f) for f in r.get("frames", r.get("predicted", ()))])
                     for r in rows]
        # frames over a completed utterance are projected back onto the original tokens
        completed = [r.get("completed_tokens") for r in rows]
        alignments = None
        if any(c is not None for c in completed):
            if args.mode != "modified":
                raise ConfigError("completed-path predictions are scored in --mode modified")
            alignments = [align(g.utterance, _tokens(c) if c is not None else g.utterance)
                          for g, c in zip(gold, completed)]
        report = srl_report(predicted, [gold_frames(g.frames) for g in gold], args.mode, alignments)
    payload = report.to_dict(per_example=args.per_example)
    payload["corpora"] = {args.task: content_hash(args.gold)}
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        log.info("wrote %s", args.output)
    print(text)
    return EXIT_OK


# ---------- Parser ----------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elhyb", description="Hybrid ellipsis/completion dialog understanding")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="warnings only, no progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="run config file or preset name (desk, full, overfit)")
        p.set_defaults(func=func)
        return p

    gen = command("gen-data", cmd_gen_data, "write the three synthetic corpora")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--mix", type=float, nargs=3, default=None, metavar=("ELLIPSIS", "MODIFIED", "COMPLETE"))
    gen.add_argument("--hold-noise", type=float, default=None)
    gen.add_argument("--force", action="store_true", help="overwrite existing corpora")

    for name, func, help_text in (("train-completion", cmd_train_completion, "train the completion model"),
                                  ("train-da", cmd_train_da, "train a dialog-act classifier"),
                                  ("train-srl", cmd_train_srl, "train an SRL model")):
        p = command(name, func, help_text)
        p.add_argument("--epochs", type=int, default=None, help="override the configured epoch count")
        p.add_argument("--resume", action="store_true", help="continue from the saved checkpoint")
        p.add_argument("--plot", action="store_true", help="write a loss-curve PNG")
        if name != "train-completion":
            p.add_argument("--path", choices=("el", "cmp"), default="el")
            p.add_argument("--member", type=int, choices=(1, 2), default=1)
        if name == "train-da":
            p.add_argument("--joint", choices=HIDDEN_METHODS, default=None,
                           help="train both encoders with a combined head")

    comp = command("complete", cmd_complete, "complete the utterances of a corpus")
    comp.add_argument("--checkpoint", default=None)
    comp.add_argument("--input", required=True)
    comp.add_argument("--kind", choices=KINDS, default="completion")
    comp.add_argument("--output", required=True)
    comp.add_argument("--beam", type=int, default=None)
    comp.add_argument("--max-len", type=int, default=None)
    comp.add_argument("--write-completed", action="store_true",
                      help="write the corpus back with predicted completions instead of records")

    grid = command("run-grid", cmd_run_grid, "evaluate baselines and hybrid variants")
    grid.add_argument("--task", choices=TASKS, required=True)
    grid.add_argument("--variant", choices=VARIANTS + ("all",), default="all")
    grid.add_argument("--selection", choices=DA_SELECTIONS + SRL_SELECTIONS, default=None)
    grid.add_argument("--average", choices=AVERAGES, default="micro")

    tune = command("tune-tau", cmd_tune_tau, "cross-validate the probability-selector threshold")
    tune.add_argument("--epochs", type=int, default=None)
    tune.add_argument("--folds", type=int, default=None)

    ev = command("evaluate", cmd_evaluate, "score a predictions file against a gold corpus")
    ev.add_argument("--task", choices=KINDS, required=True)
    ev.add_argument("--predictions", required=True)
    ev.add_argument("--gold", required=True)
    ev.add_argument("--per-example", action="store_true")
    ev.add_argument("--average", choices=AVERAGES, default="micro")
    ev.add_argument("--mode", choices=SRL_MODES, default="modified")
    ev.add_argument("--output", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO)
    try:
        return args.func(args)
    except (ConfigError, CorpusError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except Exception:
        log.exception("%s failed", args.command)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
