"""
selection.py  —  Combining the original-utterance (EL) and completed-utterance (CMP) paths.

Dialog acts: logits methods combine the two score vectors (sum or max); hidden-state
methods combine the pooled representations and score them with a jointly trained
CombinedHead. Labels in the non-completable set short-circuit to the EL prediction.

SRL: the rule-based selector keeps the original frames whenever the original utterance
has a predicate; the probability-based selector additionally trusts completed-path
arguments whose beam posteriors clear a threshold.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from corpus import DAExample, LabelInventory, Vocabulary, build_vocab, example_sentences
from numeric import (
    OptimizerConfig, Parameter, ParameterStore, Tensor, add, affine, bce_with_logits, concat,
    load_checkpoint, maximum, rng_stream, save_checkpoint, sigmoid,
)
from understanding import (
    DEFAULT_THETA, Argument, DAClassifier, DAConfig, FitReport, Prediction, SRLFrame, canonical,
    da_decide, da_utterance, fit, has_predicate,
)

log = logging.getLogger(__name__)

LOGIT_METHODS = ("logits_sum", "logits_max")
HIDDEN_METHODS = ("hidden_sum", "hidden_max", "hidden_cat")
METHODS = LOGIT_METHODS + HIDDEN_METHODS
DEFAULT_TAU = 0.5
DEFAULT_NON_COMPLETABLE = ("hold", "complaint", "nonsense", "apology", "incomplete")

REASONS = ("expert_short_circuit", "combined", "rule_original", "rule_completed", "probability_mixed")


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    method: str = "logits_sum"
    tau: float = DEFAULT_TAU
    theta: float = DEFAULT_THETA
    non_completable: frozenset[int] = frozenset()
    expert_enabled: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise SelectionError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise SelectionError(f"theta must be in [0, 1], got {self.theta}")
        if self.tau < 0.0:
            raise SelectionError(f"tau must be >= 0, got {self.tau}")

    @classmethod
    def from_names(cls, acts: LabelInventory, non_completable: Sequence[str] = DEFAULT_NON_COMPLETABLE,
                   **kwargs) -> "SelectionConfig":
        unknown = [n for n in non_completable if n not in acts]
        if unknown:
            raise SelectionError(f"non-completable labels not in the act inventory: {unknown}")
        return cls(non_completable=acts.ids(non_completable), **kwargs)

    def decision_theta(self) -> float:
        """Sum mode adds two sigmoid scores, so its threshold is doubled."""
        return 2.0 * self.theta if self.method == "logits_sum" else self.theta


# ---------- Dialog-act combinators ----------
def combine_logits(D_E, D_C, mode: str) -> np.ndarray:
    D_E, D_C = np.asarray(D_E, dtype=float), np.asarray(D_C, dtype=float)
    if D_E.shape != D_C.shape:
        raise SelectionError(f"score vectors differ in length: {D_E.shape} vs {D_C.shape}")
    mode = mode.removeprefix("logits_")
    if mode == "sum":
        return D_E + D_C
    if mode == "max":
        return np.maximum(D_E, D_C)
    raise SelectionError(f"unknown logits mode {mode!r}")


@dataclass
class CombinedHead:
    """D = sigmoid(W H + b) over the combined representation."""
    W: Parameter
    b: Parameter

    @classmethod
    def create(cls, store: ParameterStore, hidden: int, n_labels: int, mode: str) -> "CombinedHead":
        width = 2 * hidden if mode.removeprefix("hidden_") == "cat" else hidden
        return cls(store.add("head.W", (width, n_labels)), store.add("head.b", (n_labels,), init="zeros"))

    @property
    def in_width(self) -> int:
        return self.W.data.shape[0]

    def parameters(self) -> list[Parameter]:
        return [self.W, self.b]


def combined_representation(H_E, H_C, mode: str) -> Tensor:
    """H_sum = H_E + H_C, H_max = max(H_E, H_C), H_cat = [H_E | H_C]."""
    H_E, H_C = (h if isinstance(h, Tensor) else Tensor(h) for h in (H_E, H_C))
    if H_E.dims != H_C.dims:
        raise SelectionError(f"hidden states differ in size: {H_E.dims} vs {H_C.dims}")
    mode = mode.removeprefix("hidden_")
    if mode == "sum":
        return add(H_E, H_C)
    if mode == "max":
        return maximum(H_E, H_C)
    if mode == "cat":
        return concat([H_E, H_C])
    raise SelectionError(f"unknown hidden mode {mode!r}")


def head_logits(H: Tensor, head: CombinedHead) -> Tensor:
    if H.dims != (head.in_width,):
        raise SelectionError(f"combined head expects width {head.in_width}, got {H.dims}")
    return affine(H, head.W, head.b)


def combine_hidden(H_E, H_C, mode: str, head: CombinedHead) -> np.ndarray:
    return sigmoid(head_logits(combined_representation(H_E, H_C, mode), head)).data.copy()


def da_decision(pred_E: Prediction, pred_C: Prediction, config: SelectionConfig,
                head: CombinedHead | None = None) -> tuple[frozenset[int], str]:
    """Selected labels and the reason (``expert_short_circuit`` or ``combined``)."""
    if pred_E.D is None or pred_C.D is None or len(pred_E.D) != len(pred_C.D):
        raise SelectionError("both predictions must score the same act inventory")
    if config.expert_enabled and config.non_completable:
        original = da_decide(pred_E.D, config.theta)
        if original & config.non_completable:
            return original, "expert_short_circuit"
    if config.method in LOGIT_METHODS:
        D = combine_logits(pred_E.D, pred_C.D, config.method)
    else:
        if head is None:
            raise SelectionError(f"{config.method} needs a trained combined head")
        D = combine_hidden(pred_E.H, pred_C.H, config.method, head)
    return da_decide(D, config.decision_theta()), "combined"


def da_select(pred_E: Prediction, pred_C: Prediction, config: SelectionConfig,
              head: CombinedHead | None = None) -> frozenset[int]:
    return da_decision(pred_E, pred_C, config, head)[0]


class HybridDAModel:
    """Both encoders and a CombinedHead, trained as one network under a single BCE loss."""

    def __init__(self, vocab: Vocabulary, acts: LabelInventory, mode: str, config: DAConfig = DAConfig(),
                 seed: int | None = None):
        if mode not in HIDDEN_METHODS:
            raise SelectionError(f"joint training needs one of {HIDDEN_METHODS}, got {mode!r}")
        self.vocab, self.acts, self.mode, self.config = vocab, acts, mode, config
        rng = (lambda name: rng_stream(seed, name)) if seed is not None else (lambda name: None)
        self.el = DAClassifier(vocab, acts, config, rng("init-EL"), prefix="hybrid.el.")
        self.cmp = DAClassifier(vocab, acts, config, rng("init-CMP"), prefix="hybrid.cmp.")
        self.store = ParameterStore(rng("init-head"), prefix="hybrid.")
        self.head = CombinedHead.create(self.store, self.el.hidden_size, len(acts), mode)

    def parameters(self) -> list[Parameter]:
        unused = {id(m.head_W) for m in (self.el, self.cmp)} | {id(m.head_b) for m in (self.el, self.cmp)}
        encoders = [p for p in self.el.parameters() + self.cmp.parameters() if id(p) not in unused]
        return encoders + self.head.parameters()

    def logits(self, example: DAExample) -> Tensor:
        H_E = self.el.encode(example.context, da_utterance(example, "el"))
        H_C = self.cmp.encode(example.context, da_utterance(example, "cmp"))
        return head_logits(combined_representation(H_E, H_C, self.mode), self.head)

    def loss(self, example: DAExample) -> tuple[Tensor, int]:
        target = np.zeros(len(self.acts))
        target[sorted(example.labels)] = 1.0
        return bce_with_logits(self.logits(example), target), len(self.acts)

    def save(self, path: str | Path, optimizer=None, history: dict | None = None, extra: dict | None = None) -> None:
        tensors = {**self.el.store.state_dict(), **self.cmp.store.state_dict(), **self.store.state_dict()}
        if optimizer is not None:
            tensors.update(optimizer.state_dict())
        save_checkpoint(path, tensors, {"kind": "hybrid_da", "mode": self.mode, "config": asdict(self.config),
                                        "vocab": self.vocab.to_list(), "acts": list(self.acts.names),
                                        "history": history or {}, **(extra or {})})

    @classmethod
    def load(cls, path: str | Path) -> tuple["HybridDAModel", dict, dict]:
        tensors, meta = load_checkpoint(path)
        if meta.get("kind") != "hybrid_da":
            raise ValueError(f"{path}: not a joint dialog-act checkpoint")
        model = cls(Vocabulary(meta["vocab"]), LabelInventory(meta["acts"]), meta["mode"], DAConfig(**meta["config"]))
        for store in (model.el.store, model.cmp.store, model.store):
            store.load_state_dict(tensors)
        return model, {k: v for k, v in tensors.items() if k.startswith("optim")}, meta.get("history", {})


def build_hybrid(train_set: Sequence[DAExample], acts: LabelInventory, mode: str, config: DAConfig,
                 seed: int) -> HybridDAModel:
    vocab = build_vocab(example_sentences(train_set), config.min_count, config.max_vocab)
    return HybridDAModel(vocab, acts, mode, config, seed)


def hybrid_train(model: HybridDAModel, corpus: Sequence[DAExample], optim: OptimizerConfig,
                 epochs: int | None = None, seed: int = 0, optimizer=None, progress: bool = False,
                 start_epoch: int = 0) -> FitReport:
    return fit([model.el, model.cmp], model.parameters(), corpus, model.loss, optim, epochs, seed,
               desc=f"da[{model.mode}]", optimizer=optimizer, progress=progress, start_epoch=start_epoch)


def hybrid_predict(model: HybridDAModel, example: DAExample, config: SelectionConfig,
                   pred_E: Prediction | None = None) -> tuple[frozenset[int], str]:
    """
    Joint-model labels. The short-circuit needs a standalone EL prediction, since the
    joint model only learns the combined head.
    """
    if config.expert_enabled and config.non_completable and pred_E is not None:
        original = da_decide(pred_E.D, config.theta)
        if original & config.non_completable:
            return original, "expert_short_circuit"
    return da_decide(sigmoid(model.logits(example)).data, config.theta), "combined"


# ---------- Alignment ----------
@dataclass(frozen=True)
class Alignment:
    """mapping[i] is the completed index of original token i, or None."""
    mapping: tuple[int | None, ...]
    target_length: int

    def inverse(self) -> dict[int, int]:
        return {j: i for i, j in enumerate(self.mapping) if j is not None}

    @classmethod
    def identity(cls, n: int) -> "Alignment":
        return cls(tuple(range(n)), n)


def align(original: Sequence[str], completed: Sequence[str]) -> Alignment:
    """
    Longest common subsequence over exact token matches. Among maximal alignments the
    backtrace keeps each match as late in the completed sequence as possible, since an
    elliptical utterance usually survives as the tail of its completion.
    """
    n, m = len(original), len(completed)
    dp = np.zeros((n + 1, m + 1), dtype=np.int64)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if original[i - 1] == completed[j - 1]:
                dp[i, j] = dp[i - 1, j - 1] + 1
            else:
                dp[i, j] = max(dp[i - 1, j], dp[i, j - 1])
    mapping: list[int | None] = [None] * n
    i, j = n, m
    while i > 0 and j > 0:
        if original[i - 1] == completed[j - 1]:
            mapping[i - 1] = j - 1
            i, j = i - 1, j - 1
        elif dp[i, j - 1] >= dp[i - 1, j]:
            j -= 1
        else:
            i -= 1
    return Alignment(tuple(mapping), m)


# ---------- SRL selectors ----------
def _project_span(start: int, end: int, inverse: dict[int, int]) -> tuple[int, int] | None:
    hits = [inverse[j] for j in range(start, end + 1) if j in inverse]
    return (min(hits), max(hits)) if hits else None


def _project_frame(frame: SRLFrame, alignment: Alignment) -> tuple[SRLFrame, list[tuple[Argument, tuple[int, int]]]]:
    """Projected frame plus (projected argument, completed span) pairs."""
    inverse = alignment.inverse()
    pred = _project_span(*frame.predicate, inverse) if frame.predicate is not None else None
    pairs = []
    for arg in frame.arguments:
        span = _project_span(arg.start, arg.end, inverse)
        projected = Argument(arg.role, *span) if span else Argument(arg.role, arg.start, arg.end, context_side=True)
        pairs.append((projected, (arg.start, arg.end)))
    return SRLFrame(pred, tuple(a for a, _ in pairs)), pairs


def _merge(frames: Sequence[SRLFrame]) -> dict:
    merged: dict = {}
    for fr in frames:
        key = fr.key
        prev = merged.get(key)
        merged[key] = fr if prev is None else SRLFrame(fr.predicate, prev.arguments + tuple(
            a for a in fr.arguments if a not in prev.arguments))
    return merged


def project_frames(frames_C: Sequence[SRLFrame], alignment: Alignment) -> tuple[SRLFrame, ...]:
    """
    Completed-path frames in original-token indices. Predicates with no aligned token key
    the context frame; arguments with no aligned token keep their completed span and are
    marked context-side.
    """
    return canonical(list(_merge([_project_frame(fr, alignment)[0] for fr in frames_C]).values()))


def srl_rule_decision(frames_E: Sequence[SRLFrame], frames_C: Sequence[SRLFrame],
                      alignment: Alignment) -> tuple[tuple[SRLFrame, ...], str]:
    if has_predicate(frames_E):
        return canonical(list(_merge(frames_E).values())), "rule_original"
    return project_frames(frames_C, alignment), "rule_completed"


def srl_select_rule(frames_E: Sequence[SRLFrame], frames_C: Sequence[SRLFrame],
                    alignment: Alignment) -> tuple[SRLFrame, ...]:
    return srl_rule_decision(frames_E, frames_C, alignment)[0]


def _confidence(spans: Sequence[tuple[int, int]], posteriors: Sequence[float]) -> float:
    values = [posteriors[j] for s, e in spans for j in range(s, e + 1)]
    return min(values) if values else 0.0


def _overlaps(a: Argument, b: Argument) -> bool:
    return not (a.context_side or b.context_side) and a.start <= b.end and b.start <= a.end


def _clusters(original: Sequence[Argument], completed: Sequence[Argument]) -> list[tuple[list[int], list[int]]]:
    """Connected components of the overlap graph between the two argument lists."""
    nodes = [("E", i) for i in range(len(original))] + [("C", i) for i in range(len(completed))]
    arg = {("E", i): a for i, a in enumerate(original)} | {("C", i): a for i, a in enumerate(completed)}
    seen, out = set(), []
    for node in nodes:
        if node in seen:
            continue
        stack, comp = [node], []
        seen.add(node)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for other in nodes:
                if other not in seen and other[0] != cur[0] and _overlaps(arg[cur], arg[other]):
                    seen.add(other)
                    stack.append(other)
        out.append((sorted(i for side, i in comp if side == "E"), sorted(i for side, i in comp if side == "C")))
    return out


@dataclass
class _CompletedFrame:
    frame: SRLFrame
    pairs: list = field(default_factory=list)
    predicate_span: tuple[int, int] | None = None


def srl_probability_decision(frames_E: Sequence[SRLFrame], frames_C: Sequence[SRLFrame], posteriors,
                             alignment: Alignment, tau: float = DEFAULT_TAU) -> tuple[tuple[SRLFrame, ...], str]:
    """
    Without an original predicate this is the rule-based choice. Otherwise each frame key
    and each cluster of overlapping arguments is decided separately: the completed-path
    version is kept when the minimum beam posterior over its completed tokens is at least
    tau, and the original-path version is used otherwise.
    """
    posteriors = list(getattr(posteriors, "content_posteriors", posteriors))
    if len(posteriors) != alignment.target_length:
        raise SelectionError(f"{len(posteriors)} posteriors for {alignment.target_length} completed tokens")
    if not has_predicate(frames_E):
        return srl_rule_decision(frames_E, frames_C, alignment)

    completed: dict = {}
    for fr in frames_C:
        projected, pairs = _project_frame(fr, alignment)
        entry = completed.setdefault(projected.key, _CompletedFrame(projected))
        entry.pairs += [p for p in pairs if p[0] not in [q[0] for q in entry.pairs]]
        if fr.predicate is not None and entry.predicate_span is None:
            entry.predicate_span = fr.predicate
    original = _merge(frames_E)

    out = []
    for key in list(original) + [k for k in completed if k not in original]:
        e_frame, c_entry = original.get(key), completed.get(key)
        if c_entry is None:
            frame_conf = 0.0
        else:
            spans = [s for _, s in c_entry.pairs] + ([c_entry.predicate_span] if c_entry.predicate_span else [])
            frame_conf = _confidence(spans, posteriors)
        if e_frame is None:
            if frame_conf >= tau:
                out.append(SRLFrame(c_entry.frame.predicate, tuple(a for a, _ in c_entry.pairs)))
            continue
        if c_entry is None:
            if frame_conf < tau:
                out.append(e_frame)
            continue
        e_args = list(e_frame.arguments)
        c_args = [a for a, _ in c_entry.pairs]
        chosen: list[Argument] = []
        for e_idx, c_idx in _clusters(e_args, c_args):
            conf = _confidence([c_entry.pairs[i][1] for i in c_idx], posteriors)
            chosen += [c_args[i] for i in c_idx] if conf >= tau else [e_args[i] for i in e_idx]
        out.append(SRLFrame(e_frame.predicate, tuple(chosen)))
    return canonical(out), "probability_mixed"


def srl_select_probability(frames_E: Sequence[SRLFrame], frames_C: Sequence[SRLFrame], posteriors,
                           alignment: Alignment, tau: float = DEFAULT_TAU) -> tuple[SRLFrame, ...]:
    return srl_probability_decision(frames_E, frames_C, posteriors, alignment, tau)[0]
