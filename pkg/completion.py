"""
completion.py  —  Seq2seq utterance completion with attention and a copy switch.

The decoder mixes generation from the base vocabulary with copying source
tokens (dialog history and the current utterance) through the attention
weights, gated by the switch probability lambda. Out-of-vocabulary source
tokens get per-example temporary ids, so they can still be produced.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from tqdm import tqdm

from corpus import (
    EOS_ID, PAD_ID, SOS_ID, UNK, UNK_ID, CompletionExample, DialogTurn,
    EncodedSource, Vocabulary, build_vocab, encode_source, example_sentences,
)
from numeric import (
    AttentionParams, OptimizerConfig, ParameterStore, Tape, Tensor, add, affine, as_tensor,
    attend, attention_scores, concat, dropout, embed, index, load_checkpoint, lstm_cell, matmul,
    mul, nll, rng_stream, save_checkpoint, sigmoid, softmax, stack, sub, tanh, total,
)

log = logging.getLogger(__name__)

MIXTURE_MODES = ("additive", "softmax_concat")
NORMALIZATION_TOLERANCE = 1e-6
NEVER_EMIT = (PAD_ID, SOS_ID)


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class CompletionConfig:
    embedding: int = 32
    hidden: int = 64
    layers: int = 2
    attention: int = 64
    dropout: float = 0.3
    mixture: str = "additive"
    copy: bool = True
    history_depth: int = 1
    max_len: int = 30
    beam: int = 5
    min_count: int = 2
    max_vocab: int = 2000

    def __post_init__(self):
        if self.mixture not in MIXTURE_MODES:
            raise ValueError(f"mixture must be one of {MIXTURE_MODES}, got {self.mixture!r}")
        if self.layers < 1 or self.hidden < 1 or self.embedding < 1:
            raise ValueError("layers, hidden and embedding must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")


# ---------- Mixture ----------
def mixture(lam, gen, attn, copy_matrix, mode: str = "additive") -> Tensor:
    """
    Final distribution over the extended vocabulary.

    additive:        P = lam * P_gen + (1 - lam) * sum_{i: src_i = w} a_i
    softmax_concat:  P = softmax([lam * gen_scores, (1 - lam) * attn_scores]) with the
                     source-position half folded onto word ids; ``gen``/``attn`` are the
                     pre-normalization scores in this mode.
    """
    lam, gen, attn, M = as_tensor(lam), as_tensor(gen), as_tensor(attn), as_tensor(copy_matrix)
    V = gen.dims[0]
    extra = M.dims[1] - V
    if M.dims[0] != attn.dims[0] or extra < 0:
        raise ValueError(f"copy matrix dims {M.dims} do not fit {V} base ids and {attn.dims[0]} positions")
    pad = Tensor(np.zeros(extra))
    if mode == "additive":
        for name, dist in (("P_gen", gen), ("attention", attn)):
            if abs(float(dist.data.sum()) - 1.0) > NORMALIZATION_TOLERANCE or (dist.data < 0).any():
                raise ValueError(f"mixture: {name} is not a distribution (sum {dist.data.sum():.9f})")
        gen_ext = concat([gen, pad]) if extra else gen
        return add(mul(lam, gen_ext), mul(sub(1.0, lam), matmul(attn, M)))
    if mode == "softmax_concat":
        joint = softmax(concat([mul(lam, gen), mul(sub(1.0, lam), attn)]))
        gen_part = index(joint, slice(0, V))
        copy_part = index(joint, slice(V, None))
        return add(concat([gen_part, pad]) if extra else gen_part, matmul(copy_part, M))
    raise ValueError(f"unknown mixture mode {mode!r}")


# ---------- Model ----------
@dataclass
class EncoderState:
    source: EncodedSource
    keys: Tensor
    key_proj: Tensor
    copy_matrix: np.ndarray
    init: tuple[tuple[Tensor, Tensor], ...]


@dataclass
class DecoderStepOutput:
    lam: Tensor
    p_gen: Tensor
    attention: Tensor
    P: Tensor
    state: tuple[tuple[Tensor, Tensor], ...]


class CompletionModel:
    def __init__(self, vocab: Vocabulary, config: CompletionConfig = CompletionConfig(),
                 rng: np.random.Generator | None = None):
        self.vocab, self.config = vocab, config
        self.training = False
        self.dropout_rng: np.random.Generator | None = None
        c, V = config, len(vocab)
        self.store = store = ParameterStore(rng, prefix="completion.")
        self.embedding = store.add("embedding", (V, c.embedding))
        self.encoder = []
        for layer in range(c.layers):
            in_dim = c.embedding if layer == 0 else 2 * c.hidden
            self.encoder.append((store.lstm(f"enc{layer}.fwd", in_dim, c.hidden),
                                 store.lstm(f"enc{layer}.bwd", in_dim, c.hidden)))
        self.bridge = [(store.add(f"bridge{layer}.W_h", (2 * c.hidden, c.hidden)),
                        store.add(f"bridge{layer}.b_h", (c.hidden,), init="zeros"),
                        store.add(f"bridge{layer}.W_c", (2 * c.hidden, c.hidden)),
                        store.add(f"bridge{layer}.b_c", (c.hidden,), init="zeros"))
                       for layer in range(c.layers)]
        self.decoder = [store.lstm(f"dec{layer}", c.embedding if layer == 0 else c.hidden, c.hidden)
                        for layer in range(c.layers)]
        self.attn: AttentionParams = store.attention("attn", c.hidden, 2 * c.hidden, c.attention)
        self.gen_W = store.add("gen.W", (3 * c.hidden, V))
        self.gen_b = store.add("gen.b", (V,), init="zeros")
        self.switch_W = store.add("switch.W", (2 * c.hidden + c.embedding + c.hidden, 1))
        self.switch_b = store.add("switch.b", (1,), init="zeros")

    def parameters(self):
        return self.store.parameters()

    def train_mode(self, on: bool, rng: np.random.Generator | None = None) -> None:
        self.training = on
        self.dropout_rng = rng if on else None

    def _drop(self, x: Tensor) -> Tensor:
        return dropout(x, self.config.dropout, self.dropout_rng) if self.training else x

    # ---------- encoder ----------
    def encode(self, source: EncodedSource) -> EncoderState:
        H = self.config.hidden
        zeros = Tensor(np.zeros(H))
        x = self._drop(embed(self.embedding, source.ids))
        inputs = [index(x, i) for i in range(len(source.ids))]
        init = []
        for layer, (fwd, bwd) in enumerate(self.encoder):
            h, c = zeros, zeros
            outs_f = []
            for x_t in inputs:
                h, c = lstm_cell(x_t, h, c, fwd)
                outs_f.append(h)
            hf, cf = h, c
            h, c = zeros, zeros
            outs_b = [None] * len(inputs)
            for i in reversed(range(len(inputs))):
                h, c = lstm_cell(inputs[i], h, c, bwd)
                outs_b[i] = h
            hb, cb = h, c
            W_h, b_h, W_c, b_c = self.bridge[layer]
            init.append((tanh(affine(concat([hf, hb]), W_h, b_h)), affine(concat([cf, cb]), W_c, b_c)))
            inputs = [concat([f, b]) for f, b in zip(outs_f, outs_b)]
            if layer + 1 < len(self.encoder):
                inputs = [self._drop(t) for t in inputs]
        keys = stack(inputs)
        return EncoderState(source, keys, matmul(keys, self.attn.W_h), source.copy_matrix(), tuple(init))

    def encode_example(self, context: Sequence[DialogTurn], source: Sequence[str]) -> EncoderState:
        if not source:
            raise DecodeError("cannot complete an empty utterance")
        query = CompletionExample(tuple(context), tuple(source), tuple(source), "already_complete")
        return self.encode(encode_source(query, self.vocab, self.config.history_depth))

    # ---------- persistence ----------
    def save(self, path: str | Path, optimizer=None, history: dict | None = None) -> None:
        tensors = self.store.state_dict()
        if optimizer is not None:
            tensors.update(optimizer.state_dict())
        save_checkpoint(path, tensors, {"kind": "completion", "config": asdict(self.config),
                                        "vocab": self.vocab.to_list(), "history": history or {}})

    @classmethod
    def load(cls, path: str | Path) -> tuple["CompletionModel", dict, dict]:
        tensors, meta = load_checkpoint(path)
        if meta.get("kind") != "completion":
            raise ValueError(f"{path}: not a completion checkpoint")
        model = cls(Vocabulary(meta["vocab"]), CompletionConfig(**meta["config"]))
        model.store.load_state_dict(tensors)
        return model, {k: v for k, v in tensors.items() if k.startswith("optim")}, meta.get("history", {})


def decode_step(model: CompletionModel, prev_id: int, state, enc: EncoderState) -> DecoderStepOutput:
    V = len(model.vocab)
    if not 0 <= prev_id < len(enc.source.extended):
        raise DecodeError(f"token id {prev_id} outside extended vocabulary of {len(enc.source.extended)}")
    x_t = index(embed(model.embedding, [prev_id if prev_id < V else UNK_ID]), 0)
    x_t = model._drop(x_t)
    inp, new_state = x_t, []
    for layer, params in enumerate(model.decoder):
        h, c = lstm_cell(inp, state[layer][0], state[layer][1], params)
        new_state.append((h, c))
        inp = model._drop(h) if layer + 1 < len(model.decoder) else h
    s_t = new_state[-1][0]
    scores = attention_scores(s_t, enc.keys, model.attn, enc.key_proj)
    h_star, a_t = attend(scores, enc.keys)
    gen_logits = affine(concat([h_star, s_t]), model.gen_W, model.gen_b)
    p_gen = softmax(gen_logits)
    M = enc.copy_matrix
    if not model.config.copy:
        lam = Tensor(1.0)
        P = mixture(lam, p_gen, a_t, M, "additive")
    else:
        lam = index(sigmoid(affine(concat([h_star, x_t, s_t]), model.switch_W, model.switch_b)), 0)
        if model.config.mixture == "additive":
            P = mixture(lam, p_gen, a_t, M, "additive")
        else:
            P = mixture(lam, gen_logits, scores, M, "softmax_concat")
    return DecoderStepOutput(lam, p_gen, a_t, P, tuple(new_state))


# ---------- Training ----------
@dataclass
class TrainingReport:
    epoch_losses: list[float] = field(default_factory=list)
    steps: int = 0
    examples: int = 0
    unk_targets: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def target_ids(model: CompletionModel, enc: EncoderState, reference: Sequence[str]) -> tuple[list[int], int]:
    """Reference ids over the extended vocabulary plus EOS, and how many fell back to UNK."""
    ids, unk = [], 0
    for tok in reference:
        i = enc.source.extended.id(tok) if model.config.copy else model.vocab.id(tok)
        if i == UNK_ID and tok != UNK:
            unk += 1
        ids.append(i)
    return ids + [EOS_ID], unk


def example_loss(model: CompletionModel, example: CompletionExample) -> tuple[Tensor, int, int]:
    """Teacher-forced summed NLL of the reference, token count and UNK fallbacks."""
    enc = model.encode(encode_source(example, model.vocab, model.config.history_depth))
    targets, unk = target_ids(model, enc, example.reference)
    prev, state, losses = SOS_ID, enc.init, []
    for tgt in targets:
        out = decode_step(model, prev, state, enc)
        losses.append(nll(out.P, tgt))
        prev, state = tgt, out.state
    return total(stack(losses)), len(targets), unk


def train(model: CompletionModel, corpus: Sequence[CompletionExample], optim: OptimizerConfig,
          epochs: int | None = None, seed: int = 0, optimizer=None, progress: bool = False,
          start_epoch: int = 0) -> TrainingReport:
    """
    Mini-batch teacher forcing. Shuffling and dropout draw from per-epoch streams, so a
    run resumed at ``start_epoch`` with the saved optimizer state repeats an uninterrupted one.
    """
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    epochs = optim.epochs if epochs is None else epochs
    optimizer = optimizer or optim.build(model.parameters())
    report = TrainingReport(examples=len(corpus))
    last = start_epoch + epochs
    try:
        for epoch in range(start_epoch, last):
            order = rng_stream(seed, "shuffle", epoch).permutation(len(corpus))
            model.train_mode(True, rng_stream(seed, "dropout", epoch))
            epoch_nll, epoch_tokens = 0.0, 0
            batches = range(0, len(order), optim.batch_size)
            for start in tqdm(batches, desc=f"completion epoch {epoch + 1}", disable=not progress, leave=False):
                optimizer.zero_grad()
                batch_tokens = 0
                for j in order[start:start + optim.batch_size]:
                    with Tape() as tape:
                        loss, n_tok, unk = example_loss(model, corpus[int(j)])
                    tape.backward(loss)
                    epoch_nll += loss.item()
                    batch_tokens += n_tok
                    report.unk_targets += unk if epoch == start_epoch else 0
                optimizer.step(loss_scale=1.0 / batch_tokens)
                epoch_tokens += batch_tokens
                report.steps += 1
            report.epoch_losses.append(epoch_nll / epoch_tokens)
            log.info("completion epoch %d/%d: mean NLL %.4f", epoch + 1, last, report.epoch_losses[-1])
    finally:
        model.train_mode(False)
    if report.unk_targets:
        log.warning("%d reference tokens were neither in the vocabulary nor in the source; trained as %s",
                    report.unk_targets, UNK)
    return report


def corpus_nll(model: CompletionModel, corpus: Sequence[CompletionExample]) -> float:
    """Mean per-token NLL in eval mode."""
    nll_sum, tokens = 0.0, 0
    for ex in corpus:
        loss, n_tok, _ = example_loss(model, ex)
        nll_sum += loss.item()
        tokens += n_tok
    return nll_sum / max(tokens, 1)


# ---------- Decoding ----------
@dataclass(frozen=True)
class BeamHypothesis:
    tokens: tuple[int, ...]
    posteriors: tuple[float, ...]
    score: float
    finished: bool
    words: tuple[str, ...] = ()
    lambdas: tuple[float, ...] = ()

    @property
    def normalized_score(self) -> float:
        return self.score / len(self.tokens) if self.tokens else 0.0

    @property
    def content_posteriors(self) -> tuple[float, ...]:
        """Posteriors of the emitted words (the closing EOS dropped)."""
        return self.posteriors[:-1] if self.finished else self.posteriors


def _surface(enc: EncoderState, ids: Sequence[int]) -> tuple[str, ...]:
    return tuple(enc.source.extended.token(i) for i in ids if i != EOS_ID)


def _masked(P: np.ndarray) -> np.ndarray:
    p = P.copy()
    p[list(NEVER_EMIT)] = 0.0
    return p


def greedy_decode(model: CompletionModel, context: Sequence[DialogTurn], source: Sequence[str],
                  max_len: int | None = None) -> list[str]:
    max_len = model.config.max_len if max_len is None else max_len
    enc = model.encode_example(context, source)
    prev, state, out = SOS_ID, enc.init, []
    for _ in range(max_len):
        step = decode_step(model, prev, state, enc)
        prev = int(np.argmax(_masked(step.P.data)))
        if prev == EOS_ID:
            break
        out.append(prev)
        state = step.state
    return list(_surface(enc, out))


def beam_decode(model: CompletionModel, context: Sequence[DialogTurn], source: Sequence[str],
                beam: int | None = None, max_len: int | None = None) -> list[BeamHypothesis]:
    """
    Beam search over log P. Finished hypotheses leave the beam; the survivors and
    finished ones are ranked together by length-normalized score.
    """
    beam = model.config.beam if beam is None else beam
    max_len = model.config.max_len if max_len is None else max_len
    if beam < 1:
        raise ValueError("beam width must be >= 1")
    enc = model.encode_example(context, source)
    # (tokens, posteriors, log score, lambdas, decoder state)
    live = [((), (), 0.0, (), enc.init)]
    finished = []
    for _ in range(max_len):
        if not live:
            break
        candidates = []
        for h_idx, (toks, _posts, score, _lams, state) in enumerate(live):
            step = decode_step(model, toks[-1] if toks else SOS_ID, state, enc)
            P = _masked(step.P.data)
            lam = step.lam.item()
            for w in np.flatnonzero(P > 0.0):
                p = float(P[w])
                candidates.append((-(score + float(np.log(p))), h_idx, int(w), p, lam, step.state))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        previous, live = live, []
        for neg, h_idx, w, p, lam, state in candidates[:beam]:
            toks, posts, _, lams, _ = previous[h_idx]
            entry = (toks + (w,), posts + (p,), -neg, lams + (lam,), state)
            (finished if w == EOS_ID else live).append(entry)

    hyps = [BeamHypothesis(toks, posts, score, done, _surface(enc, toks), lams)
            for done, group in ((True, finished), (False, live))
            for toks, posts, score, lams, _ in group]
    if not hyps:
        raise DecodeError("beam search produced no hypothesis")
    hyps.sort(key=lambda h: (-h.normalized_score, h.tokens))
    return hyps[:beam]


@dataclass(frozen=True)
class CompletionRecord:
    """One decoded utterance, as written by the ``complete`` command."""
    source: tuple[str, ...]
    completion: tuple[str, ...]
    posteriors: tuple[float, ...]
    lambdas: tuple[float, ...]
    score: float
    reference: tuple[str, ...] | None = None

    def to_dict(self) -> dict:
        out = {"source": list(self.source), "completion": list(self.completion),
               "posteriors": [round(p, 6) for p in self.posteriors],
               "lambdas": [round(x, 6) for x in self.lambdas], "score": round(self.score, 6)}
        if self.reference is not None:
            out["reference"] = list(self.reference)
        return out


def complete(model: CompletionModel, context: Sequence[DialogTurn], source: Sequence[str],
             beam: int | None = None, max_len: int | None = None) -> CompletionRecord:
    best = beam_decode(model, context, source, beam, max_len)[0]
    n = len(best.words)
    return CompletionRecord(tuple(source), best.words, best.content_posteriors[:n],
                            best.lambdas[:n], best.score)


def complete_examples(model: CompletionModel, examples: Sequence, beam: int | None = None,
                      max_len: int | None = None, progress: bool = False) -> list[CompletionRecord]:
    """
    Complete every example. Accepts anything with ``context`` and an utterance in
    ``source`` (completion examples) or ``utterance`` (DA and SRL examples).
    """
    records = []
    for ex in tqdm(examples, desc="completing", disable=not progress, leave=False):
        utterance = ex.source if isinstance(ex, CompletionExample) else ex.utterance
        rec = complete(model, ex.context, utterance, beam, max_len)
        if isinstance(ex, CompletionExample):
            rec = CompletionRecord(rec.source, rec.completion, rec.posteriors, rec.lambdas,
                                   rec.score, ex.reference)
        records.append(rec)
    return records


def build_model(train_set: Sequence[CompletionExample], config: CompletionConfig,
                seed: int) -> CompletionModel:
    """Vocabulary from the training split and a freshly initialized model."""
    vocab = build_vocab(example_sentences(train_set), config.min_count, config.max_vocab)
    log.info("completion vocabulary: %d types (min_count=%d)", len(vocab), config.min_count)
    return CompletionModel(vocab, config, rng_stream(seed, "init-completion"))
