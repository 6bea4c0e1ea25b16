"""
synthetic.py  —  Deterministic template-grammar corpus of elliptical answers.

Every dialog is one system turn plus one user answer. Each scenario yields the
gold completion, the gold dialog-act set and gold SRL frames over both the
original answer and its completion, so the three corpora stay index-aligned.

Frames are written as role-annotated segments, e.g.

    [("i", "ARG0"), ("want to", None), ("talk about", "V"), ("guitars", "ARG1")]

and the BIO tags and predicate span are derived from them. A frame whose
predicate lives in the system turn names it with ``context_predicate``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from corpus import (
    COMPLETION_CASES, CompletionExample, DAExample, DialogTurn, FrameAnnotation,
    LabelInventory, SRLExample, dialog_acts,
)
from numeric import rng_stream

log = logging.getLogger(__name__)

# Case shares of the annotated corpus: 1,124 elliptical, 204 modified, the rest complete (2,258 total).
DEFAULT_MIX = (0.50, 0.09, 0.41)
MIX_TOLERANCE = 1e-6

ACTIVE_ACTS = (
    "statement", "opinion", "comment", "open_question", "yes_no_question",
    "command", "positive_answer", "negative_answer", "complaint", "hold",
)

CATEGORIES = {
    "movie": ["titanic", "inception", "frozen", "avatar", "the lion king", "star wars"],
    "book": ["dune", "hamlet", "the hobbit", "matilda"],
    "food": ["pizza", "sushi", "tacos", "pasta", "ice cream"],
    "sport": ["soccer", "tennis", "basketball", "golf"],
    "band": ["coldplay", "queen", "the beatles", "abba"],
    "game": ["minecraft", "tetris", "detroit become human", "chess"],
}
ACTIVITIES = [
    ("like", "dogs"), ("like", "cats"), ("watch", "sports"), ("play", "guitar"),
    ("read", "books"), ("watch", "anime"), ("play", "chess"), ("eat", "sushi"),
    ("watch", "movies"), ("play", "games"),
]
FREQUENCIES = ["every single day", "once a week", "twice a month", "every weekend", "almost never"]
LOCATIONS = ["at home", "in the theater", "outside", "at the park", "at a friend's house"]
TOPICS = ["guitars", "football", "music", "movies", "travel", "cooking", "space", "politics"]
PEOPLE = ["singer", "actor", "athlete", "author"]
FEELINGS = ["sad", "happy", "great", "terrible", "excited", "bored"]
EVENTS = ["your team lost", "you won the lottery", "it rained all day", "your friend moved away"]
CLIP_EVENTS = [("robots", "fight"), ("hero", "win"), ("aliens", "escape"), ("ship", "sink"), ("band", "play")]
GERUNDS = ["traveling", "swimming", "drawing", "skiing", "cooking"]
YOUTH = ["younger", "a kid", "in college"]
HOLD_WORDS = ["okay", "hmm", "um", "well okay", "hold on"]
HOLD_TOPICS = [("read", "books", "author"), ("seen", "movies", "director"), ("heard", "songs", "singer")]
COMMENTS = ["cool", "nice", "wow", "awesome"]
SYLLABLES = ["ka", "vo", "ru", "zel", "mi", "ra", "tor", "blat", "qui", "sen", "dak", "lo"]


class SyntheticError(ValueError):
    pass


Segments = Sequence[tuple[str, str | None]]


@dataclass(frozen=True)
class Scenario:
    system: tuple[str, ...]
    user: tuple[str, ...]
    reference: tuple[str, ...]
    case: str
    acts: tuple[str, ...]
    frames: tuple[FrameAnnotation, ...]
    completed_frames: tuple[FrameAnnotation, ...]


# ---------- Frame builder ----------
def _words(segments: Segments) -> tuple[str, ...]:
    return tuple(w for text, _ in segments for w in text.split())


def _find(haystack: Sequence[str], needle: Sequence[str]) -> tuple[int, int]:
    n = len(needle)
    for i in range(len(haystack) - n + 1):
        if tuple(haystack[i:i + n]) == tuple(needle):
            return i, i + n - 1
    raise SyntheticError(f"predicate {' '.join(needle)!r} not in {' '.join(haystack)!r}")


def frame(segments: Segments, system: Sequence[str] = (), context_predicate: str | None = None) -> FrameAnnotation:
    tags, pred, pos = [], None, 0
    for text, role in segments:
        words = text.split()
        if role is None:
            tags += ["O"] * len(words)
        else:
            tags += [f"B-{role}"] + [f"I-{role}"] * (len(words) - 1)
            if role == "V":
                pred = (pos, pos + len(words) - 1)
        pos += len(words)
    if context_predicate is not None:
        return FrameAnnotation("in_context", _find(system, context_predicate.split()), tuple(tags))
    return FrameAnnotation("in_utterance", pred, tuple(tags))


def _scenario(system: str, user: Segments | str, reference: Segments | str, case: str, acts,
              frames=(), completed=()) -> Scenario:
    sys_toks = tuple(system.split())
    user_toks = tuple(user.split()) if isinstance(user, str) else _words(user)
    ref_toks = tuple(reference.split()) if isinstance(reference, str) else _words(reference)
    built = tuple(frame(seg, sys_toks, pred) for seg, pred in frames)
    built_c = tuple(frame(seg) for seg in completed)
    for fr in built:
        if len(fr.tags) != len(user_toks):
            raise SyntheticError(f"frame/utterance length mismatch in {user_toks}")
    for fr in built_c:
        if len(fr.tags) != len(ref_toks):
            raise SyntheticError(f"frame/completion length mismatch in {ref_toks}")
    return Scenario(sys_toks, user_toks, ref_toks, case, tuple(acts), built, built_c)


# ---------- Families ----------
def _pseudo_word(rng) -> str:
    n = int(rng.integers(2, 4))
    return "".join(SYLLABLES[int(rng.integers(len(SYLLABLES)))] for _ in range(n))


def _pick(rng, items):
    return items[int(rng.integers(len(items)))]


def what_favorite(rng, case):
    cat = _pick(rng, sorted(CATEGORIES))
    item = _pseudo_word(rng) if rng.random() < 0.3 else _pick(rng, CATEGORIES[cat])
    system = f"what is your favorite {cat}"
    full = [(f"my favorite {cat}", "ARG1"), ("is", "V"), (item, "ARG2")]
    if case == "had_ellipsis":
        return _scenario(system, item, full, case, ["statement"],
                         frames=[([(item, "ARG2")], "is")], completed=[full])
    if case == "modified_to_ellipsis":
        ref = [("probably", "ARGM-ADV")] + full
        return _scenario(system, f"probably {item}", ref, case, ["statement"],
                         frames=[([("probably", "ARGM-ADV"), (item, "ARG2")], "is")], completed=[ref])
    return _scenario(system, full, full, case, ["statement"], frames=[(full, None)], completed=[full])


def do_you(rng, case):
    verb, obj = _pick(rng, ACTIVITIES)
    system = f"do you {verb} {obj}"
    if case == "had_ellipsis":
        kind = int(rng.integers(4))
        if kind == 0:
            ref = [("yes", "ARGM-DIS"), ("i", "ARG0"), (verb, "V"), (obj, "ARG1")]
            return _scenario(system, "yes", ref, case, ["positive_answer"],
                             frames=[([("yes", "ARGM-DIS")], verb)], completed=[ref])
        if kind == 1:
            ref = [("no", "ARGM-DIS"), ("i", "ARG0"), ("do", None), ("not", "ARGM-NEG"), (verb, "V"), (obj, "ARG1")]
            return _scenario(system, "no", ref, case, ["negative_answer"],
                             frames=[([("no", "ARGM-DIS")], verb)], completed=[ref])
        if kind == 2:
            ref = [("i", "ARG0"), ("do", None), ("not", "ARGM-NEG"), ("really", "ARGM-ADV"), (verb, "V"), (obj, "ARG1")]
            return _scenario(system, "not really", ref, case, ["negative_answer"],
                             frames=[([("not", "ARGM-NEG"), ("really", "ARGM-ADV")], verb)], completed=[ref])
        ref = [("yes", "ARGM-DIS"), ("i", "ARG0"), (verb, "V"), (obj, "ARG1"),
               ("do you", None), (verb, None), (obj, None)]
        ref2 = [("yes i", None), (verb, None), (obj, None), ("do", None), ("you", "ARG0"), (verb, "V"), (obj, "ARG1")]
        return _scenario(system, "yes do you", ref, case, ["positive_answer", "yes_no_question"],
                         frames=[([("yes", "ARGM-DIS"), ("do you", None)], verb)], completed=[ref, ref2])
    if case == "modified_to_ellipsis":
        ref = [("yes", "ARGM-DIS"), ("i", "ARG0"), (verb, "V"), (obj, "ARG1")]
        return _scenario(system, f"yes {obj}", ref, case, ["positive_answer"],
                         frames=[([("yes", "ARGM-DIS"), (obj, "ARG1")], verb)], completed=[ref])
    full = [("yes", "ARGM-DIS"), ("i", "ARG0"), (verb, "V"), (obj, "ARG1")]
    return _scenario(system, full, full, case, ["positive_answer", "statement"],
                     frames=[(full, None)], completed=[full])


def how_often(rng, case):
    verb, obj = _pick(rng, ACTIVITIES)
    freq = _pick(rng, FREQUENCIES)
    system = f"how often do you {verb} {obj}"
    full = [("i", "ARG0"), (verb, "V"), (obj, "ARG1"), (freq, "ARGM-TMP")]
    if case == "had_ellipsis":
        return _scenario(system, freq, full, case, ["statement"],
                         frames=[([(freq, "ARGM-TMP")], verb)], completed=[full])
    if case == "modified_to_ellipsis":
        ref = [("probably", "ARGM-ADV")] + full
        return _scenario(system, f"probably {freq}", ref, case, ["statement"],
                         frames=[([("probably", "ARGM-ADV"), (freq, "ARGM-TMP")], verb)], completed=[ref])
    return _scenario(system, full, full, case, ["statement"], frames=[(full, None)], completed=[full])


def or_choice(rng, case):
    verb, obj = _pick(rng, ACTIVITIES)
    a, b = rng.choice(len(LOCATIONS), size=2, replace=False)
    loc_a, loc_b = LOCATIONS[int(a)], LOCATIONS[int(b)]
    system = f"do you prefer to {verb} {obj} {loc_a} or {loc_b}"
    full = [("i", "ARG0"), ("prefer to", None), (verb, "V"), (obj, "ARG1"), (loc_b, "ARGM-LOC")]
    if case == "already_complete":
        return _scenario(system, full, full, case, ["statement"], frames=[(full, None)], completed=[full])
    return _scenario(system, loc_b, full, "had_ellipsis", ["statement"],
                     frames=[([(loc_b, "ARGM-LOC")], verb)], completed=[full])


def what_talk(rng, case):
    topic = _pseudo_word(rng) if rng.random() < 0.25 else _pick(rng, TOPICS)
    system = "what do you want to talk about"
    if case == "already_complete":
        if rng.random() < 0.5:
            full = [("let's", None), ("talk about", "V"), (topic, "ARG1")]
            return _scenario(system, full, full, case, ["command"], frames=[(full, None)], completed=[full])
        person = _pick(rng, PEOPLE)
        full = [("who", "ARG2"), ("is", "V"), (f"your favorite {person}", "ARG1")]
        return _scenario(system, full, full, case, ["open_question"], frames=[(full, None)], completed=[full])
    ref = [("i", "ARG0"), ("want to", None), ("talk about", "V"), (topic, "ARG1")]
    return _scenario(system, topic, ref, "had_ellipsis", ["statement"],
                     frames=[([(topic, "ARG1")], "talk about")], completed=[ref])


def feel(rng, case):
    event = _pick(rng, EVENTS)
    feeling = _pick(rng, FEELINGS)
    system = f"how would you feel if {event}"
    full = [("i", "ARG0"), ("would", None), ("feel", "V"), (feeling, "ARG1")]
    if case == "already_complete":
        return _scenario(system, full, full, case, ["opinion"], frames=[(full, None)], completed=[full])
    return _scenario(system, feeling, full, "had_ellipsis", ["opinion"],
                     frames=[([(feeling, "ARG1")], "feel")], completed=[full])


def subordinate(rng, case):
    if rng.random() < 0.5:
        cat = _pick(rng, ["movie", "book", "show"])
        who, act = _pick(rng, CLIP_EVENTS)
        clause = f"when the {who} did {act}"
        system = f"what part did you like best about that {cat}"
        own = [("when", None), (f"the {who}", "ARG0"), ("did", None), (act, "V")]
        ref = [("i", "ARG0"), ("liked", "V"), (f"the part {clause}", "ARG1")]
        ref_own = [("i liked the part when", None), (f"the {who}", "ARG0"), ("did", None), (act, "V")]
        return _scenario(system, clause, ref, "had_ellipsis", ["opinion"],
                         frames=[([(clause, "ARG1")], "like"), (own, None)], completed=[ref, ref_own])
    gerund = _pick(rng, GERUNDS)
    youth = _pick(rng, YOUTH)
    clause = f"when i was {youth}"
    system = f"do you enjoy {gerund}"
    own = [("when", None), ("i", "ARG1"), ("was", "V"), (youth, "ARG2")]
    ref = [("i", "ARG0"), ("enjoyed", "V"), (gerund, "ARG1"), (clause, "ARGM-TMP")]
    ref_own = [(f"i enjoyed {gerund} when", None), ("i", "ARG1"), ("was", "V"), (youth, "ARG2")]
    return _scenario(system, clause, ref, "had_ellipsis", ["statement"],
                     frames=[([(clause, "ARGM-TMP")], "enjoy"), (own, None)], completed=[ref, ref_own])


def hold(rng, case, noisy=False):
    word = _pick(rng, HOLD_WORDS)
    pp, obj, agent = _pick(rng, HOLD_TOPICS)
    system = f"have you {pp} any other {obj} by that {agent}"
    if noisy:
        ref = [(word, None), ("i", "ARG0"), ("have", None), (pp, "V"), (f"any other {obj} by that {agent}", "ARG1")]
        return _scenario(system, word, ref, "had_ellipsis", ["hold"], completed=[ref])
    return _scenario(system, word, word, "already_complete", ["hold"])


def comment(rng, case):
    title = _pick(rng, CATEGORIES["movie"])
    word = _pick(rng, COMMENTS)
    return _scenario(f"i just watched {title} yesterday", word, word, "already_complete", ["comment"])


def complaint(rng, case):
    cat = _pick(rng, sorted(CATEGORIES))
    system = f"what is your favorite {cat}"
    options = [
        [("you", "ARG0"), ("are", None), ("not", "ARGM-NEG"), ("listening", "V")],
        [("that", "ARG1"), ("is", "V"), ("not", "ARGM-NEG"), ("what i said", "ARG2")],
        [("you", "ARG0"), ("already", "ARGM-TMP"), ("asked", "V"), ("me", "ARG2"), ("that", "ARG1")],
    ]
    full = options[int(rng.integers(len(options)))]
    return _scenario(system, full, full, "already_complete", ["complaint"], frames=[(full, None)], completed=[full])


# family -> completion cases it can realise
FAMILIES: dict[str, tuple[Callable, tuple[str, ...]]] = {
    "what_favorite": (what_favorite, COMPLETION_CASES),
    "do_you": (do_you, COMPLETION_CASES),
    "how_often": (how_often, COMPLETION_CASES),
    "or_choice": (or_choice, ("had_ellipsis", "already_complete")),
    "what_talk": (what_talk, ("had_ellipsis", "already_complete")),
    "feel": (feel, ("had_ellipsis", "already_complete")),
    "subordinate": (subordinate, ("had_ellipsis",)),
    "hold": (hold, ("already_complete",)),
    "comment": (comment, ("already_complete",)),
    "complaint": (complaint, ("already_complete",)),
}


def validate_mix(mix: Sequence[float]) -> tuple[float, float, float]:
    mix = tuple(float(m) for m in mix)
    if len(mix) != 3 or any(m < 0 for m in mix) or abs(sum(mix) - 1.0) > MIX_TOLERANCE:
        raise SyntheticError(f"mix must be three nonnegative proportions summing to 1, got {mix}")
    return mix


def scenarios(seed: int, n: int, mix: Sequence[float] = DEFAULT_MIX, hold_noise: float = 0.0) -> list[Scenario]:
    mix = validate_mix(mix)
    if not 0.0 <= hold_noise <= 1.0:
        raise SyntheticError(f"hold_noise must be in [0, 1], got {hold_noise}")
    rng = rng_stream(seed, "data")
    by_case = {c: [name for name, (_, cases) in FAMILIES.items() if c in cases] for c in COMPLETION_CASES}
    out = []
    for _ in range(n):
        case = COMPLETION_CASES[int(rng.choice(3, p=np.asarray(mix)))]
        name = _pick(rng, by_case[case])
        make = FAMILIES[name][0]
        if name == "hold":
            out.append(hold(rng, case, noisy=bool(rng.random() < hold_noise)))
        else:
            out.append(make(rng, case))
    return out


def generate_synthetic(seed: int, n: int, mix: Sequence[float] = DEFAULT_MIX, hold_noise: float = 0.0,
                       acts: LabelInventory | None = None) -> tuple[list, list, list]:
    """Index-aligned (completion, dialog-act, SRL) corpora."""
    acts = acts or dialog_acts()
    completion, da, srl = [], [], []
    for sc in scenarios(seed, n, mix, hold_noise):
        context = (DialogTurn("system", sc.system),)
        completion.append(CompletionExample(context, sc.user, sc.reference, sc.case))
        da.append(DAExample(context, sc.user, acts.ids(sc.acts), sc.reference))
        srl.append(SRLExample(context, sc.user, sc.frames, sc.reference, sc.completed_frames))
    log.info("generated %d synthetic dialogs (seed=%d, mix=%s, hold_noise=%.2f)", n, seed, mix, hold_noise)
    return completion, da, srl
