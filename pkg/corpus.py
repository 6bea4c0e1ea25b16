"""
corpus.py  —  Dialog data model, vocabularies, JSONL ingestion and fold splitting.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from numeric import rng_stream

log = logging.getLogger(__name__)

# ---------- Settings ----------
PAD, UNK, SOS, EOS, SEP = "<pad>", "<unk>", "<s>", "</s>", "<sep>"
RESERVED_TOKENS = (PAD, UNK, SOS, EOS, SEP)
PAD_ID, UNK_ID, SOS_ID, EOS_ID, SEP_ID = range(len(RESERVED_TOKENS))

SPEAKERS = ("system", "user")
COMPLETION_CASES = ("had_ellipsis", "modified_to_ellipsis", "already_complete")
PREDICATE_SOURCES = ("in_utterance", "in_context")
KINDS = ("completion", "da", "srl")

DEFAULT_HISTORY_DEPTH = 1

INVENTORY_DIR = Path(__file__).with_name("data")
DIALOG_ACTS_FILE = INVENTORY_DIR / "dialog_acts.txt"
SRL_ROLES_FILE = INVENTORY_DIR / "srl_roles.txt"

_PUNCT = re.compile(r"[^\w\s']|(?<!\w)'|'(?!\w)")


class CorpusError(ValueError):
    def __init__(self, reason: str, line: int | None = None, field: str | None = None,
                 path: str | Path | None = None):
        self.reason, self.line, self.field, self.path = reason, line, field, path
        where = f"{path}:{line}: " if line is not None else ""
        what = f"{field}: " if field else ""
        super().__init__(f"{where}{what}{reason}")


def tokenize(text: str) -> list[str]:
    """Lowercase, strip punctuation (intra-word apostrophes survive), split on whitespace."""
    return _PUNCT.sub(" ", text.lower()).split()


# ---------- Label inventories ----------
class LabelInventory:
    """Label names with id = zero-based line number of the inventory file."""

    def __init__(self, names: Sequence[str]):
        if len(set(names)) != len(names):
            raise ValueError("inventory labels must be unique")
        self.names = tuple(names)
        self._ids = {n: i for i, n in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def id(self, name: str) -> int:
        return self._ids[name]

    def name(self, idx: int) -> str:
        return self.names[idx]

    def ids(self, names: Iterable[str]) -> frozenset[int]:
        return frozenset(self._ids[n] for n in names)


def load_inventory(path: str | Path) -> LabelInventory:
    names = Path(path).read_text(encoding="utf-8").splitlines()
    for i, n in enumerate(names, 1):
        if not n.strip() or n != n.strip():
            raise CorpusError("blank or padded label", line=i, field="label", path=path)
    return LabelInventory(names)


def dialog_acts() -> LabelInventory:
    return load_inventory(DIALOG_ACTS_FILE)


def srl_roles() -> LabelInventory:
    return load_inventory(SRL_ROLES_FILE)


# ---------- BIO helpers ----------
def bio_tag_set(roles: Iterable[str]) -> list[str]:
    tags = ["O"]
    for r in roles:
        tags += [f"B-{r}", f"I-{r}"]
    return tags


def is_valid_bio(tags: Sequence[str]) -> bool:
    prev = "O"
    for t in tags:
        if t.startswith("I-") and prev[2:] != t[2:]:
            return False
        if t != "O" and not t.startswith(("B-", "I-")):
            return False
        prev = t
    return True


def bio_spans(tags: Sequence[str]) -> list[tuple[str, int, int]]:
    """Maximal B-X (I-X)* runs as (label, start, end) with inclusive end."""
    spans, start, label = [], None, None
    for i, t in enumerate(list(tags) + ["O"]):
        if start is not None and not (t.startswith("I-") and t[2:] == label):
            spans.append((label, start, i - 1))
            start = label = None
        if t.startswith("B-"):
            start, label = i, t[2:]
    return spans


# ---------- Domain types ----------
@dataclass(frozen=True)
class DialogTurn:
    speaker: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.speaker not in SPEAKERS:
            raise CorpusError(f"unknown speaker {self.speaker!r}", field="speaker")
        if not self.tokens:
            raise CorpusError("turn has no tokens", field="tokens")
        if any(not t or any(c.isspace() for c in t) for t in self.tokens):
            raise CorpusError("token with embedded whitespace", field="tokens")
        if any(t != t.lower() for t in self.tokens):
            raise CorpusError("tokens must be lowercase", field="tokens")


@dataclass(frozen=True)
class CompletionExample:
    context: tuple[DialogTurn, ...]
    source: tuple[str, ...]
    reference: tuple[str, ...]
    completion_case: str = "had_ellipsis"

    def __post_init__(self):
        if not self.reference:
            raise CorpusError("reference is empty", field="reference")
        if self.completion_case not in COMPLETION_CASES:
            raise CorpusError(f"unknown case {self.completion_case!r}", field="completion_case")
        if self.completion_case == "already_complete" and self.reference != self.source:
            raise CorpusError("already_complete example must have reference == source", field="reference")


@dataclass(frozen=True)
class DAExample:
    context: tuple[DialogTurn, ...]
    utterance: tuple[str, ...]
    labels: frozenset[int]
    completed: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.labels:
            raise CorpusError("no labels", field="labels")
        if not self.utterance:
            raise CorpusError("utterance is empty", field="utterance")


@dataclass(frozen=True)
class FrameAnnotation:
    predicate_source: str
    predicate_span: tuple[int, int] | None
    tags: tuple[str, ...]


@dataclass(frozen=True)
class SRLExample:
    context: tuple[DialogTurn, ...]
    utterance: tuple[str, ...]
    frames: tuple[FrameAnnotation, ...]
    completed: tuple[str, ...] | None = None
    completed_frames: tuple[FrameAnnotation, ...] = ()

    def __post_init__(self):
        _check_frames(self.frames, self.utterance, self.context, "frames")
        if self.completed is not None:
            _check_frames(self.completed_frames, self.completed, self.context, "completed_frames")


def _check_frames(frames, tokens, context, name):
    for fr in frames:
        if fr.predicate_source not in PREDICATE_SOURCES:
            raise CorpusError(f"unknown predicate_source {fr.predicate_source!r}", field=name)
        if len(fr.tags) != len(tokens):
            raise CorpusError(f"{len(fr.tags)} tags for {len(tokens)} tokens", field=name)
        if not is_valid_bio(fr.tags):
            raise CorpusError(f"invalid BIO sequence {list(fr.tags)}", field=name)
        if fr.predicate_span is not None:
            s, e = fr.predicate_span
            bound = len(tokens) if fr.predicate_source == "in_utterance" else (
                len(context[-1].tokens) if context else 0)
            if not 0 <= s <= e < bound:
                raise CorpusError(f"predicate_span {fr.predicate_span} out of bounds", field=name)


Example = CompletionExample | DAExample | SRLExample


# ---------- Vocabularies ----------
class Vocabulary:
    """Token <-> id bijection; reserved tokens hold ids 0..4."""

    def __init__(self, tokens: Sequence[str]):
        self.itos = list(RESERVED_TOKENS) + [t for t in tokens if t not in RESERVED_TOKENS]
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("vocabulary tokens must be unique")

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def id(self, token: str) -> int:
        return self.stoi.get(token, UNK_ID)

    def ids(self, tokens: Iterable[str]) -> list[int]:
        return [self.id(t) for t in tokens]

    def token(self, idx: int) -> str:
        return self.itos[idx]

    def to_list(self) -> list[str]:
        return list(self.itos[len(RESERVED_TOKENS):])


def build_vocab(sentences: Iterable[Sequence[str]], min_count: int = 1,
                max_size: int | None = None) -> Vocabulary:
    counts = Counter()
    seen = False
    for sent in sentences:
        seen = True
        counts.update(sent)
    if not seen:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = sorted((t for t, c in counts.items() if c >= min_count and t not in RESERVED_TOKENS),
                  key=lambda t: (-counts[t], t))
    if max_size is not None:
        kept = kept[:max(0, max_size - len(RESERVED_TOKENS))]
    return Vocabulary(kept)


def example_sentences(examples: Iterable[Example]) -> Iterator[tuple[str, ...]]:
    for ex in examples:
        for turn in ex.context:
            yield turn.tokens
        if isinstance(ex, CompletionExample):
            yield ex.source
            yield ex.reference
        else:
            yield ex.utterance
            if ex.completed:
                yield ex.completed


class ExtendedVocab:
    """Base vocabulary plus per-example temporary ids for OOV source tokens."""

    def __init__(self, base: Vocabulary, source_tokens: Iterable[str] = ()):
        self.base = base
        self.oov: list[str] = []
        self._oov_ids: dict[str, int] = {}
        for t in source_tokens:
            if t not in base and t not in self._oov_ids:
                self._oov_ids[t] = len(base) + len(self.oov)
                self.oov.append(t)

    def __len__(self) -> int:
        return len(self.base) + len(self.oov)

    def id(self, token: str) -> int:
        if token in self.base:
            return self.base.id(token)
        return self._oov_ids.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        if idx < len(self.base):
            return self.base.token(idx)
        return self.oov[idx - len(self.base)]

    def is_temporary(self, idx: int) -> bool:
        return idx >= len(self.base)


@dataclass(frozen=True)
class EncodedSource:
    tokens: tuple[str, ...]
    ids: tuple[int, ...]            # base ids (OOV -> UNK), embedding input
    copy_ids: tuple[int, ...]       # per position, extended id
    extended: ExtendedVocab = field(compare=False)

    def copy_matrix(self) -> np.ndarray:
        """One-hot (source positions x extended vocab) projection used by P_copy."""
        m = np.zeros((len(self.copy_ids), len(self.extended)))
        m[np.arange(len(self.copy_ids)), self.copy_ids] = 1.0
        return m


def source_tokens(context: Sequence[DialogTurn], utterance: Sequence[str],
                  history_depth: int = DEFAULT_HISTORY_DEPTH, eos: bool = True) -> list[str]:
    """Last ``history_depth`` context turns, SEP, the utterance, EOS."""
    if history_depth < 0:
        raise ValueError("history_depth must be >= 0")
    out: list[str] = []
    turns = list(context)[-history_depth:] if history_depth else []
    for turn in turns:
        out += list(turn.tokens) + [SEP]
    out += list(utterance)
    if eos:
        out.append(EOS)
    return out


def encode_source(example, vocab: Vocabulary,
                  history_depth: int = DEFAULT_HISTORY_DEPTH) -> EncodedSource:
    toks = source_tokens(example.context, example.source, history_depth)
    extended = ExtendedVocab(vocab, (t for t in toks if t not in RESERVED_TOKENS))
    return EncodedSource(tuple(toks), tuple(vocab.ids(toks)),
                         tuple(extended.id(t) for t in toks), extended)


# ---------- JSONL ----------
def _turns(raw, field_name="context") -> tuple[DialogTurn, ...]:
    if not isinstance(raw, list):
        raise CorpusError("expected a list of turns", field=field_name)
    return tuple(DialogTurn(t["speaker"], _tokens(t["tokens"], "tokens")) for t in raw)


def _tokens(raw, field_name) -> tuple[str, ...]:
    if isinstance(raw, str):
        return tuple(tokenize(raw))
    if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
        raise CorpusError("expected a token list or a string", field=field_name)
    return tuple(t.lower() for t in raw)


def _frames(raw, field_name) -> tuple[FrameAnnotation, ...]:
    out = []
    for fr in raw or []:
        span = fr.get("predicate_span")
        out.append(FrameAnnotation(fr.get("predicate_source", "in_utterance"),
                                   tuple(span) if span is not None else None,
                                   tuple(fr["tags"])))
    return tuple(out)


def example_from_dict(obj: dict, kind: str, acts: LabelInventory | None = None,
                      roles: LabelInventory | None = None) -> Example:
    context = _turns(obj.get("context", []))
    if kind == "completion":
        return CompletionExample(context, _tokens(obj["source"], "source"),
                                 _tokens(obj["reference"], "reference"),
                                 obj.get("completion_case", "had_ellipsis"))
    if kind == "da":
        acts = acts or dialog_acts()
        raw = obj["labels"]
        if not isinstance(raw, list):
            raise CorpusError("expected a list", field="labels")
        if len(set(raw)) != len(raw):
            raise CorpusError(f"duplicate label in {raw}", field="labels")
        ids = set()
        for label in raw:
            if isinstance(label, int) and 0 <= label < len(acts):
                ids.add(label)
            elif isinstance(label, str) and label in acts:
                ids.add(acts.id(label))
            else:
                raise CorpusError(f"label {label!r} not in the act inventory", field="labels")
        completed = obj.get("completed")
        return DAExample(context, _tokens(obj["utterance"], "utterance"), frozenset(ids),
                         _tokens(completed, "completed") if completed is not None else None)
    if kind == "srl":
        roles = roles or srl_roles()
        completed = obj.get("completed")
        ex = SRLExample(context, _tokens(obj["utterance"], "utterance"), _frames(obj.get("frames"), "frames"),
                        _tokens(completed, "completed") if completed is not None else None,
                        _frames(obj.get("completed_frames"), "completed_frames"))
        allowed = set(roles.names) | {"V"}
        for name, frames in (("frames", ex.frames), ("completed_frames", ex.completed_frames)):
            for fr in frames:
                bad = {t[2:] for t in fr.tags if t != "O"} - allowed
                if bad:
                    raise CorpusError(f"roles {sorted(bad)} not in the role inventory", field=name)
        return ex
    raise ValueError(f"unknown corpus kind {kind!r}")


def example_to_dict(ex: Example, acts: LabelInventory | None = None) -> dict:
    obj: dict = {"context": [{"speaker": t.speaker, "tokens": list(t.tokens)} for t in ex.context]}
    if isinstance(ex, CompletionExample):
        obj.update(source=list(ex.source), reference=list(ex.reference),
                   completion_case=ex.completion_case)
    elif isinstance(ex, DAExample):
        acts = acts or dialog_acts()
        obj.update(utterance=list(ex.utterance), labels=[acts.name(i) for i in sorted(ex.labels)])
        if ex.completed is not None:
            obj["completed"] = list(ex.completed)
    else:
        obj.update(utterance=list(ex.utterance), frames=[_frame_dict(f) for f in ex.frames])
        if ex.completed is not None:
            obj["completed"] = list(ex.completed)
            obj["completed_frames"] = [_frame_dict(f) for f in ex.completed_frames]
    return obj


def _frame_dict(fr: FrameAnnotation) -> dict:
    return {"predicate_source": fr.predicate_source,
            "predicate_span": list(fr.predicate_span) if fr.predicate_span is not None else None,
            "tags": list(fr.tags)}


def load_field_map(path: str | Path | None) -> dict[str, str]:
    if path is None:
        return {}
    mapping = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(mapping, dict) or not all(isinstance(v, str) for v in mapping.values()):
        raise CorpusError("field map must be a JSON object of strings", path=path)
    return mapping


def load_jsonl(path: str | Path, kind: str, field_map: dict[str, str] | None = None,
               acts: LabelInventory | None = None, roles: LabelInventory | None = None) -> list[Example]:
    """Parse one example per line; every failure carries path, line and field."""
    if kind not in KINDS:
        raise ValueError(f"unknown corpus kind {kind!r}")
    if kind == "da":
        acts = acts or dialog_acts()
    if kind == "srl":
        roles = roles or srl_roles()
    field_map = field_map or {}
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"malformed JSON ({e.msg})", line=lineno, path=path) from e
            if not isinstance(obj, dict):
                raise CorpusError("expected a JSON object", line=lineno, path=path)
            obj = {field_map.get(k, k): v for k, v in obj.items()}
            try:
                out.append(example_from_dict(obj, kind, acts, roles))
            except CorpusError as e:
                raise CorpusError(e.reason, line=lineno, field=e.field, path=path) from e
            except KeyError as e:
                raise CorpusError("missing field", line=lineno, field=e.args[0], path=path) from e
            except (TypeError, ValueError) as e:
                raise CorpusError(str(e), line=lineno, path=path) from e
    log.debug("loaded %d %s examples from %s", len(out), kind, path)
    return out


def dumps_jsonl(examples: Iterable[Example], acts: LabelInventory | None = None) -> str:
    return "".join(json.dumps(example_to_dict(ex, acts), sort_keys=True) + "\n" for ex in examples)


def save_jsonl(path: str | Path, examples: Iterable[Example], acts: LabelInventory | None = None) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps_jsonl(examples, acts), encoding="utf-8")


def content_hash(path: str | Path) -> str:
    """git-style blob hash of a file's bytes."""
    data = Path(path).read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


# ---------- Folds ----------
@dataclass(frozen=True)
class Split:
    test: tuple
    folds: tuple[tuple[tuple, tuple], ...]   # (train, validation) pairs

    def final_train(self) -> tuple:
        """Train and validation recombined for the final model."""
        if not self.folds:
            return ()
        train, val = self.folds[0]
        return train + val


def kfold_indices(n: int, k: int, seed: int, test_size: int = 0) -> tuple[list[int], list[list[int]]]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k + test_size:
        raise ValueError(f"corpus of {n} examples too small for {k} folds plus {test_size} test examples")
    order = rng_stream(seed, "fold").permutation(n).tolist()
    test, rest = order[:test_size], order[test_size:]
    return test, [list(map(int, f)) for f in np.array_split(np.asarray(rest, dtype=np.int64), k)]


def kfold_split(corpus: Sequence[Example], k: int = 5, seed: int = 0, test_size: int = 0) -> Split:
    test, folds = kfold_indices(len(corpus), k, seed, test_size)
    pairs = []
    for i, fold in enumerate(folds):
        train = [j for m, f in enumerate(folds) if m != i for j in f]
        pairs.append((tuple(corpus[j] for j in train), tuple(corpus[j] for j in fold)))
    return Split(tuple(corpus[j] for j in test), tuple(pairs))
