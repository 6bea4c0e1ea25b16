"""
understanding.py  —  The two language-understanding encoders.

DAClassifier is a multi-label dialog-act classifier: a bidirectional LSTM over the
dialog history and utterance, pooled to the final forward/backward states (H), and
one sigmoid score per act (D).

SRLTagger is a BIO tagger over the utterance with a predicate-indicator feature,
stacked alternating-direction LSTM layers joined by highway gates, and a per-token
softmax. Decoding is constrained so that I-X only follows B-X or I-X.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from corpus import (
    DEFAULT_HISTORY_DEPTH, DAExample, DialogTurn, FrameAnnotation, LabelInventory, SRLExample,
    Vocabulary, bio_spans, bio_tag_set, build_vocab, example_sentences, source_tokens,
)
from numeric import (
    LSTMParams, OptimizerConfig, Parameter, ParameterStore, Tape, Tensor, add, affine, bce_with_logits,
    concat, dropout, embed, index, load_checkpoint, lstm_cell, matmul, mul, nll, rng_stream,
    save_checkpoint, sigmoid, softmax, stack, sub, total,
)

log = logging.getLogger(__name__)

DEFAULT_THETA = 0.5
PREDICATE_TAGS = ("O", "B-V", "I-V")
CONTEXT_KEY = "context"


@dataclass(frozen=True)
class DAConfig:
    embedding: int = 32
    hidden: int = 64
    layers: int = 2
    dropout: float = 0.1
    theta: float = DEFAULT_THETA
    history_depth: int = DEFAULT_HISTORY_DEPTH
    min_count: int = 1
    max_vocab: int = 5000

    def __post_init__(self):
        if self.layers < 1 or self.hidden < 1 or self.embedding < 1:
            raise ValueError("layers, hidden and embedding must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


@dataclass(frozen=True)
class SRLConfig:
    embedding: int = 32
    indicator: int = 8
    hidden: int = 64
    layers: int = 4
    dropout: float = 0.1
    min_count: int = 1
    max_vocab: int = 5000

    def __post_init__(self):
        if self.layers < 1 or self.hidden < 1 or self.embedding < 1 or self.indicator < 1:
            raise ValueError("layers, hidden, embedding and indicator must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


# ---------- Frames ----------
@dataclass(frozen=True)
class Argument:
    role: str
    start: int
    end: int
    context_side: bool = False

    @property
    def span(self) -> tuple[int, int]:
        return self.start, self.end


@dataclass(frozen=True)
class SRLFrame:
    """A predicate (token span, or None when it lives in the context) and its arguments."""
    predicate: tuple[int, int] | None
    arguments: tuple[Argument, ...] = ()

    @property
    def key(self) -> tuple[int, int] | str:
        return self.predicate if self.predicate is not None else CONTEXT_KEY

    def to_dict(self) -> dict:
        return {"predicate": list(self.predicate) if self.predicate is not None else None,
                "arguments": [{"role": a.role, "span": [a.start, a.end], "context_side": a.context_side}
                              for a in self.arguments]}

    @classmethod
    def from_dict(cls, obj: dict) -> "SRLFrame":
        pred = obj.get("predicate")
        args = tuple(Argument(a["role"], int(a["span"][0]), int(a["span"][1]), bool(a.get("context_side", False)))
                     for a in obj.get("arguments", ()))
        return cls(tuple(pred) if pred is not None else None, args)


def extract_frames(tags: Sequence[str], predicate: tuple[int, int] | None) -> SRLFrame:
    """Argument spans of one decoded tag sequence; predicate (V) runs are skipped."""
    args = tuple(Argument(label, s, e) for label, s, e in bio_spans(tags) if label != "V")
    return SRLFrame(tuple(predicate) if predicate is not None else None, args)


def has_predicate(frames: Sequence[SRLFrame]) -> bool:
    return any(fr.predicate is not None for fr in frames)


def gold_frames(annotations: Sequence[FrameAnnotation]) -> tuple[SRLFrame, ...]:
    """Annotated frames in the same shape as predicted ones."""
    out = []
    for fr in annotations:
        pred = fr.predicate_span if fr.predicate_source == "in_utterance" else None
        out.append(extract_frames(fr.tags, pred))
    return tuple(out)


def canonical(frames: Sequence[SRLFrame]) -> tuple[SRLFrame, ...]:
    """Frames and arguments in a stable order (context frame last)."""
    def fkey(fr):
        return (1, 0, 0) if fr.predicate is None else (0, *fr.predicate)

    def akey(a):
        return (a.start, a.end, a.role, a.context_side)
    return tuple(SRLFrame(fr.predicate, tuple(sorted(fr.arguments, key=akey))) for fr in sorted(frames, key=fkey))


# ---------- Predictions ----------
@dataclass
class Prediction:
    """D/H for the dialog-act path; emissions/tags/frames for the SRL path."""
    D: np.ndarray | None = None
    H: np.ndarray | None = None
    logits: np.ndarray | None = None
    emissions: np.ndarray | None = None
    tags: tuple[str, ...] = ()
    frames: tuple[SRLFrame, ...] = ()


@dataclass
class FitReport:
    epoch_losses: list[float] = field(default_factory=list)
    steps: int = 0
    examples: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


class _Trainable:
    """Dropout switch shared by the encoders."""
    dropout_rate = 0.0

    def __init__(self):
        self.training = False
        self.dropout_rng: np.random.Generator | None = None

    def train_mode(self, on: bool, rng: np.random.Generator | None = None) -> None:
        self.training = on
        self.dropout_rng = rng if on else None

    def _drop(self, x: Tensor) -> Tensor:
        return dropout(x, self.dropout_rate, self.dropout_rng) if self.training else x


def _run(cell: LSTMParams, inputs: Sequence[Tensor], reverse: bool = False) -> tuple[list[Tensor], Tensor]:
    """One directional LSTM pass; outputs in input order plus the final state."""
    zeros = Tensor(np.zeros(cell.hidden))
    h, c = zeros, zeros
    outs: list[Tensor | None] = [None] * len(inputs)
    order = reversed(range(len(inputs))) if reverse else range(len(inputs))
    for i in order:
        h, c = lstm_cell(inputs[i], h, c, cell)
        outs[i] = h
    return outs, h


def fit(modules: Sequence[_Trainable], params: Sequence[Parameter], items: Sequence,
        loss_fn: Callable[[object], tuple[Tensor, int]], optim: OptimizerConfig, epochs: int | None,
        seed: int, desc: str, optimizer=None, progress: bool = False, start_epoch: int = 0) -> FitReport:
    """
    Mini-batch training loop shared by the understanding models. ``loss_fn`` returns a
    summed loss and the count it is normalized by. Epoch e shuffles and drops out with
    its own streams, so resuming at ``start_epoch`` matches an uninterrupted run.
    """
    if not items:
        raise ValueError("cannot train on an empty corpus")
    epochs = optim.epochs if epochs is None else epochs
    optimizer = optimizer or optim.build(params)
    report = FitReport(examples=len(items))
    last = start_epoch + epochs
    try:
        for epoch in range(start_epoch, last):
            order = rng_stream(seed, "shuffle", epoch).permutation(len(items))
            drops = rng_stream(seed, "dropout", epoch)
            for m in modules:
                m.train_mode(True, drops)
            loss_sum, count_sum = 0.0, 0
            for start in tqdm(range(0, len(order), optim.batch_size), desc=f"{desc} epoch {epoch + 1}",
                              disable=not progress, leave=False):
                optimizer.zero_grad()
                batch_count = 0
                for j in order[start:start + optim.batch_size]:
                    with Tape() as tape:
                        loss, count = loss_fn(items[int(j)])
                    tape.backward(loss)
                    loss_sum += loss.item()
                    batch_count += count
                optimizer.step(loss_scale=1.0 / max(batch_count, 1))
                count_sum += batch_count
                report.steps += 1
                log.debug("%s step %d: loss %.5f", desc, report.steps, loss_sum / max(count_sum, 1))
            report.epoch_losses.append(loss_sum / max(count_sum, 1))
            log.info("%s epoch %d/%d: mean loss %.4f", desc, epoch + 1, last, report.epoch_losses[-1])
    finally:
        for m in modules:
            m.train_mode(False)
    return report


# ---------- Dialog acts ----------
class DAClassifier(_Trainable):
    def __init__(self, vocab: Vocabulary, acts: LabelInventory, config: DAConfig = DAConfig(),
                 rng: np.random.Generator | None = None, prefix: str = "da."):
        super().__init__()
        self.vocab, self.acts, self.config = vocab, acts, config
        self.dropout_rate = config.dropout
        c = config
        self.store = store = ParameterStore(rng, prefix=prefix)
        self.embedding = store.add("embedding", (len(vocab), c.embedding))
        self.layers = []
        for layer in range(c.layers):
            in_dim = c.embedding if layer == 0 else 2 * c.hidden
            self.layers.append((store.lstm(f"enc{layer}.fwd", in_dim, c.hidden),
                                store.lstm(f"enc{layer}.bwd", in_dim, c.hidden)))
        self.head_W = store.add("head.W", (2 * c.hidden, len(acts)))
        self.head_b = store.add("head.b", (len(acts),), init="zeros")

    @property
    def hidden_size(self) -> int:
        return 2 * self.config.hidden

    def parameters(self) -> list[Parameter]:
        return self.store.parameters()

    def encode(self, context: Sequence[DialogTurn], utterance: Sequence[str]) -> Tensor:
        """Pooled representation H: final forward and backward states of the top layer."""
        if not utterance:
            raise ValueError("cannot classify an empty utterance")
        ids = self.vocab.ids(source_tokens(context, utterance, self.config.history_depth))
        x = self._drop(embed(self.embedding, ids))
        inputs = [index(x, i) for i in range(len(ids))]
        for layer, (fwd, bwd) in enumerate(self.layers):
            outs_f, hf = _run(fwd, inputs)
            outs_b, hb = _run(bwd, inputs, reverse=True)
            if layer + 1 == len(self.layers):
                return concat([hf, hb])
            inputs = [self._drop(concat([f, b])) for f, b in zip(outs_f, outs_b)]
        raise AssertionError("unreachable")

    def logits(self, H: Tensor) -> Tensor:
        return affine(H, self.head_W, self.head_b)

    def save(self, path: str | Path, optimizer=None, history: dict | None = None, extra: dict | None = None) -> None:
        tensors = self.store.state_dict()
        if optimizer is not None:
            tensors.update(optimizer.state_dict())
        save_checkpoint(path, tensors, {"kind": "da", "config": asdict(self.config), "prefix": self.store.prefix,
                                        "vocab": self.vocab.to_list(), "acts": list(self.acts.names),
                                        "history": history or {}, **(extra or {})})

    @classmethod
    def load(cls, path: str | Path) -> tuple["DAClassifier", dict, dict]:
        tensors, meta = load_checkpoint(path)
        if meta.get("kind") != "da":
            raise ValueError(f"{path}: not a dialog-act checkpoint")
        model = cls(Vocabulary(meta["vocab"]), LabelInventory(meta["acts"]), DAConfig(**meta["config"]),
                    prefix=meta.get("prefix", "da."))
        model.store.load_state_dict(tensors)
        return model, {k: v for k, v in tensors.items() if k.startswith("optim")}, meta.get("history", {})


def da_forward(classifier: DAClassifier, context: Sequence[DialogTurn], utterance: Sequence[str]) -> Prediction:
    H = classifier.encode(context, utterance)
    z = classifier.logits(H)
    return Prediction(D=sigmoid(z).data.copy(), H=H.data.copy(), logits=z.data.copy())


def da_decide(D: Sequence[float], theta: float = DEFAULT_THETA) -> frozenset[int]:
    """Labels scoring at least theta; the argmax (lowest id on ties) when none does."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 1 or D.size == 0:
        raise ValueError(f"expected a nonempty score vector, got shape {D.shape}")
    chosen = frozenset(int(i) for i in np.flatnonzero(D >= theta))
    return chosen or frozenset({int(np.argmax(D))})


def da_utterance(example: DAExample, path: str) -> tuple[str, ...]:
    """The utterance a path reads: the original (el) or the completed one (cmp)."""
    if path == "el":
        return example.utterance
    if path == "cmp":
        return example.completed if example.completed else example.utterance
    raise ValueError(f"unknown path {path!r}")


def da_example_loss(classifier: DAClassifier, example: DAExample, path: str = "el") -> tuple[Tensor, int]:
    target = np.zeros(len(classifier.acts))
    target[sorted(example.labels)] = 1.0
    z = classifier.logits(classifier.encode(example.context, da_utterance(example, path)))
    return bce_with_logits(z, target), len(classifier.acts)


def da_train(classifier: DAClassifier, corpus: Sequence[DAExample], optim: OptimizerConfig,
             epochs: int | None = None, seed: int = 0, path: str = "el", optimizer=None,
             progress: bool = False, start_epoch: int = 0) -> FitReport:
    """Per-label binary cross-entropy; reported losses are per label and example."""
    n_labels = len(classifier.acts)
    for ex in corpus:
        if max(ex.labels) >= n_labels:
            raise ValueError(f"label id {max(ex.labels)} outside the {n_labels}-act inventory")
    return fit([classifier], classifier.parameters(), corpus,
               lambda ex: da_example_loss(classifier, ex, path), optim, epochs, seed,
               desc=f"da[{path}]", optimizer=optimizer, progress=progress, start_epoch=start_epoch)


def build_da(train_set: Sequence[DAExample], acts: LabelInventory, config: DAConfig, seed: int,
             stream: str, prefix: str = "da.") -> DAClassifier:
    vocab = build_vocab(example_sentences(train_set), config.min_count, config.max_vocab)
    return DAClassifier(vocab, acts, config, rng_stream(seed, stream), prefix=prefix)


# ---------- Semantic roles ----------
@dataclass
class _HighwayLayer:
    cell: LSTMParams
    gate_W: Parameter
    gate_b: Parameter
    skip_W: Parameter
    reverse: bool


class SRLTagger(_Trainable):
    """
    Per-token BIO tagger. Layer l runs left-to-right for even l and right-to-left for
    odd l; its output is r * h + (1 - r) * x W_skip with the gate r = sigmoid([h, x] W_r + b_r).
    """

    def __init__(self, vocab: Vocabulary, tags: Sequence[str], config: SRLConfig = SRLConfig(),
                 rng: np.random.Generator | None = None, prefix: str = "srl."):
        super().__init__()
        self.vocab, self.tags, self.config = vocab, tuple(tags), config
        self.tag_ids = {t: i for i, t in enumerate(self.tags)}
        self.dropout_rate = config.dropout
        c = config
        self.store = store = ParameterStore(rng, prefix=prefix)
        self.embedding = store.add("embedding", (len(vocab), c.embedding))
        self.indicator = store.add("indicator", (2, c.indicator))
        self.layers = []
        for layer in range(c.layers):
            in_dim = c.embedding + c.indicator if layer == 0 else c.hidden
            self.layers.append(_HighwayLayer(
                store.lstm(f"layer{layer}", in_dim, c.hidden),
                store.add(f"layer{layer}.gate.W", (c.hidden + in_dim, c.hidden)),
                store.add(f"layer{layer}.gate.b", (c.hidden,), init="zeros"),
                store.add(f"layer{layer}.skip.W", (in_dim, c.hidden)),
                reverse=layer % 2 == 1))
        self.out_W = store.add("out.W", (c.hidden, len(self.tags)))
        self.out_b = store.add("out.b", (len(self.tags),), init="zeros")

    def parameters(self) -> list[Parameter]:
        return self.store.parameters()

    def emissions(self, utterance: Sequence[str], predicate: tuple[int, int] | None) -> Tensor:
        """T x |tags| matrix of per-token tag distributions."""
        T = len(utterance)
        if T == 0:
            raise ValueError("cannot tag an empty utterance")
        flags = np.zeros(T, dtype=np.int64)
        if predicate is not None:
            s, e = predicate
            if not 0 <= s <= e < T:
                raise ValueError(f"predicate span {predicate} out of bounds for {T} tokens")
            flags[s:e + 1] = 1
        x = concat([embed(self.embedding, self.vocab.ids(utterance)), embed(self.indicator, flags)])
        x = self._drop(x)
        inputs = [index(x, i) for i in range(T)]
        for layer in self.layers:
            outs, _ = _run(layer.cell, inputs, reverse=layer.reverse)
            mixed = []
            for h, x_t in zip(outs, inputs):
                r = sigmoid(affine(concat([h, x_t]), layer.gate_W, layer.gate_b))
                mixed.append(self._drop(highway(r, h, matmul(x_t, layer.skip_W))))
            inputs = mixed
        return softmax(affine(stack(inputs), self.out_W, self.out_b), axis=-1)

    def transition_mask(self) -> tuple[np.ndarray, np.ndarray]:
        return bio_transitions(self.tags)


def highway(r: Tensor, h: Tensor, skip: Tensor) -> Tensor:
    return add(mul(r, h), mul(sub(1.0, r), skip))


def bio_transitions(tags: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """
    (allowed[i, j], start[j]): tag j may follow tag i, and tag j may open a sequence.
    I-X is only reachable from B-X or I-X.
    """
    K = len(tags)
    allowed = np.ones((K, K), dtype=bool)
    start = np.ones(K, dtype=bool)
    for j, t in enumerate(tags):
        if t.startswith("I-"):
            start[j] = False
            for i, prev in enumerate(tags):
                allowed[i, j] = prev[2:] == t[2:] and prev != "O"
    return allowed, start


def viterbi_bio(emissions, tags: Sequence[str] | None = None,
                mask: tuple[np.ndarray, np.ndarray] | None = None) -> list[int]:
    """
    Highest-probability tag path under the BIO transition constraints. ``emissions``
    holds per-token distributions; returns tag indices.
    """
    P = np.asarray(emissions.data if isinstance(emissions, Tensor) else emissions, dtype=float)
    if P.ndim != 2:
        raise ValueError(f"expected a T x K emission matrix, got shape {P.shape}")
    if mask is None:
        if tags is None:
            raise ValueError("viterbi_bio needs the tag names or a transition mask")
        mask = bio_transitions(tags)
    allowed, start = mask
    T, K = P.shape
    if T == 0:
        return []
    with np.errstate(divide="ignore"):
        logp = np.log(P)
        trans = np.where(allowed, 0.0, -np.inf)
    score = np.where(start, logp[0], -np.inf)
    back = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        cand = score[:, None] + trans
        back[t] = np.argmax(cand, axis=0)
        score = cand[back[t], np.arange(K)] + logp[t]
    path = [int(np.argmax(score))]
    for t in range(T - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    return path[::-1]


def srl_forward(tagger: SRLTagger, utterance: Sequence[str], predicate: tuple[int, int] | None) -> np.ndarray:
    return tagger.emissions(utterance, predicate).data.copy()


def decode_tags(taggers: SRLTagger | Sequence[SRLTagger], utterance: Sequence[str],
                predicate: tuple[int, int] | None) -> list[str]:
    """Constrained decode of one tagger, or of the averaged emissions of an ensemble."""
    taggers = [taggers] if isinstance(taggers, SRLTagger) else list(taggers)
    emissions = np.mean([srl_forward(t, utterance, predicate) for t in taggers], axis=0)
    path = viterbi_bio(emissions, mask=taggers[0].transition_mask())
    return [taggers[0].tags[i] for i in path]


def predict_frames(models: Sequence["SRLModel"], utterance: Sequence[str]) -> Prediction:
    """
    One frame per identified predicate, plus a context-predicate frame when the
    predicate-free pass finds any argument.
    """
    args = [m.arguments for m in models]
    pred_tags = decode_tags([m.predicates for m in models], utterance, None)
    frames = [extract_frames(decode_tags(args, utterance, (s, e)), (s, e)) for _, s, e in bio_spans(pred_tags)]
    ctx = extract_frames(decode_tags(args, utterance, None), None)
    if ctx.arguments:
        frames.append(ctx)
    return Prediction(tags=tuple(pred_tags), frames=canonical(frames))


class SRLModel:
    """Predicate identification plus the argument tagger, stored in one checkpoint."""

    def __init__(self, vocab: Vocabulary, roles: Sequence[str], config: SRLConfig = SRLConfig(),
                 rng: np.random.Generator | None = None):
        self.vocab, self.roles, self.config = vocab, tuple(roles), config
        self.arguments = SRLTagger(vocab, bio_tag_set(list(self.roles) + ["V"]), config, rng, prefix="srl.args.")
        self.predicates = SRLTagger(vocab, PREDICATE_TAGS, config, rng, prefix="srl.pred.")

    def parameters(self) -> list[Parameter]:
        return self.arguments.parameters() + self.predicates.parameters()

    def predict(self, utterance: Sequence[str]) -> Prediction:
        return predict_frames([self], utterance)

    def save(self, path: str | Path, optimizer=None, history: dict | None = None, extra: dict | None = None) -> None:
        tensors = {**self.arguments.store.state_dict(), **self.predicates.store.state_dict()}
        if optimizer is not None:
            tensors.update(optimizer.state_dict())
        save_checkpoint(path, tensors, {"kind": "srl", "config": asdict(self.config), "vocab": self.vocab.to_list(),
                                        "roles": list(self.roles), "history": history or {}, **(extra or {})})

    @classmethod
    def load(cls, path: str | Path) -> tuple["SRLModel", dict, dict]:
        tensors, meta = load_checkpoint(path)
        if meta.get("kind") != "srl":
            raise ValueError(f"{path}: not an SRL checkpoint")
        model = cls(Vocabulary(meta["vocab"]), meta["roles"], SRLConfig(**meta["config"]))
        model.arguments.store.load_state_dict(tensors)
        model.predicates.store.load_state_dict(tensors)
        return model, {k: v for k, v in tensors.items() if k.startswith("optim")}, meta.get("history", {})


def srl_view(example: SRLExample, path: str) -> tuple[tuple[str, ...], tuple[FrameAnnotation, ...]]:
    """Utterance and frames a path trains on: original (el) or gold completion (cmp)."""
    if path == "el":
        return example.utterance, example.frames
    if path == "cmp":
        if example.completed is None:
            return example.utterance, example.frames
        return example.completed, example.completed_frames
    raise ValueError(f"unknown path {path!r}")


def srl_example_loss(model: SRLModel, tokens: Sequence[str],
                     frames: Sequence[FrameAnnotation]) -> tuple[Tensor, int]:
    """
    Summed token NLL of every tagger pass an utterance needs: predicate identification,
    one argument pass per in-utterance predicate, and the predicate-free pass (all O when
    no frame has its predicate outside the utterance).
    """
    T = len(tokens)
    pred_tags = ["O"] * T
    passes: list[tuple[tuple[int, int] | None, Sequence[str]]] = []
    context_tags = None
    for fr in frames:
        if fr.predicate_source == "in_utterance" and fr.predicate_span is not None:
            s, e = fr.predicate_span
            pred_tags[s] = "B-V"
            for i in range(s + 1, e + 1):
                pred_tags[i] = "I-V"
            passes.append(((s, e), fr.tags))
        elif context_tags is None:
            context_tags = fr.tags
    passes.append((None, context_tags or ("O",) * T))
    terms = []
    P = model.predicates.emissions(tokens, None)
    terms += [nll(index(P, t), model.predicates.tag_ids[tag]) for t, tag in enumerate(pred_tags)]
    for span, tags in passes:
        P = model.arguments.emissions(tokens, span)
        for t, tag in enumerate(tags):
            if tag not in model.arguments.tag_ids:
                raise ValueError(f"tag {tag!r} not in the role inventory")
            terms.append(nll(index(P, t), model.arguments.tag_ids[tag]))
    return total(stack(terms)), len(terms)


def srl_train(model: SRLModel, corpus: Sequence[SRLExample], optim: OptimizerConfig,
              epochs: int | None = None, seed: int = 0, path: str = "el", optimizer=None,
              progress: bool = False, start_epoch: int = 0) -> FitReport:
    views = [srl_view(ex, path) for ex in corpus]
    return fit([model.arguments, model.predicates], model.parameters(), views,
               lambda v: srl_example_loss(model, *v), optim, epochs, seed,
               desc=f"srl[{path}]", optimizer=optimizer, progress=progress, start_epoch=start_epoch)


def build_srl(train_set: Sequence[SRLExample], roles: LabelInventory, config: SRLConfig, seed: int,
              stream: str) -> SRLModel:
    vocab = build_vocab(example_sentences(train_set), config.min_count, config.max_vocab)
    return SRLModel(vocab, roles.names, config, rng_stream(seed, stream))
