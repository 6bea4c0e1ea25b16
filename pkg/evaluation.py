"""
evaluation.py  —  Completion, dialog-act and SRL metrics.

BLEU is corpus-level with add-one smoothing on the 2..4-gram counts. Word precision,
recall and F1 are micro-averaged over clipped token multisets. Dialog acts are scored
micro (default) or macro over label instances. SRL spans are scored as
(frame key, role, start, end) tuples; predicate spans are not counted.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd

from selection import Alignment, project_frames
from understanding import SRLFrame

log = logging.getLogger(__name__)

SRL_MODES = ("standard", "modified")
AVERAGES = ("micro", "macro")
ERROR_CATEGORIES = ("exact", "copied_source", "repetition", "missing_words", "other")


class MetricError(ValueError):
    pass


@dataclass
class MetricReport:
    metric: str
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    bleu: float | None = None
    em: float | None = None
    sizes: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    per_example: list[dict] = field(default_factory=list)

    def to_dict(self, per_example: bool = False) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None and k != "per_example"}
        if per_example:
            out["per_example"] = self.per_example
        return out

    def frame(self) -> pd.DataFrame:
        """Per-example breakdown as a table."""
        return pd.DataFrame(self.per_example)


def prf(tp: float, n_pred: float, n_gold: float) -> tuple[float, float, float]:
    p = tp / n_pred if n_pred else 0.0
    r = tp / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def _check_counts(a: Sequence, b: Sequence, what: str) -> None:
    if len(a) != len(b):
        raise MetricError(f"{what}: {len(a)} predictions for {len(b)} references")


# ---------- Completion ----------
def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]], max_n: int = 4) -> float:
    _check_counts(hypotheses, references, "bleu")
    if not hypotheses:
        raise MetricError("bleu: empty hypothesis set")
    matched, totals = np.zeros(max_n), np.zeros(max_n)
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            h, r = _ngrams(hyp, n), _ngrams(ref, n)
            matched[n - 1] += sum(min(c, r[g]) for g, c in h.items())
            totals[n - 1] += sum(h.values())
    if hyp_len == 0 or matched[0] == 0:
        return 0.0
    precisions = [matched[0] / totals[0]] + [(matched[n] + 1) / (totals[n] + 1) for n in range(1, max_n)]
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return float(bp * math.exp(sum(math.log(p) for p in precisions) / max_n))


def exact_match(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]) -> float:
    _check_counts(hypotheses, references, "exact_match")
    if not hypotheses:
        return 0.0
    return sum(tuple(h) == tuple(r) for h, r in zip(hypotheses, references)) / len(hypotheses)


def word_prf(hypotheses: Sequence[Sequence[str]], references: Sequence[Sequence[str]]) -> tuple[float, float, float]:
    _check_counts(hypotheses, references, "word_prf")
    tp = n_pred = n_gold = 0
    for hyp, ref in zip(hypotheses, references):
        tp += sum((Counter(hyp) & Counter(ref)).values())
        n_pred += len(hyp)
        n_gold += len(ref)
    return prf(tp, n_pred, n_gold)


def error_category(hypothesis: Sequence[str], reference: Sequence[str], source: Sequence[str]) -> str:
    hyp, ref, src = tuple(hypothesis), tuple(reference), tuple(source)
    if hyp == ref:
        return "exact"
    if hyp == src:
        return "copied_source"
    if any(a == b for a, b in zip(hyp, hyp[1:])):
        return "repetition"
    if len(hyp) < len(ref) and not Counter(hyp) - Counter(ref):
        return "missing_words"
    return "other"


def completion_report(hypotheses, references, sources=None) -> MetricReport:
    _check_counts(hypotheses, references, "completion")
    p, r, f = word_prf(hypotheses, references)
    report = MetricReport("completion", p, r, f, bleu(hypotheses, references), exact_match(hypotheses, references),
                          sizes={"examples": len(hypotheses)})
    if sources is not None:
        _check_counts(sources, references, "completion sources")
        cats = Counter()
        for hyp, ref, src in zip(hypotheses, references, sources):
            cat = error_category(hyp, ref, src)
            cats[cat] += 1
            report.per_example.append({"source": " ".join(src), "completion": " ".join(hyp),
                                       "reference": " ".join(ref), "category": cat})
        report.extra["categories"] = {c: cats[c] for c in ERROR_CATEGORIES}
    return report


# ---------- Dialog acts ----------
def multilabel_prf(predicted: Sequence[frozenset], gold: Sequence[frozenset],
                   average: str = "micro") -> tuple[float, float, float]:
    """
    Multi-label P/R/F1 over label instances.

    micro pools true positives over all labels. macro takes the unweighted mean of the
    per-label precision and recall over the labels seen in either side, and F1 is the
    harmonic mean of those two means, so every report keeps F1 = 2PR / (P + R). This is
    not the mean of per-label F1 scores, which can be lower.
    """
    _check_counts(predicted, gold, "multilabel_prf")
    if average == "micro":
        tp = sum(len(set(p) & set(g)) for p, g in zip(predicted, gold))
        return prf(tp, sum(len(p) for p in predicted), sum(len(g) for g in gold))
    if average == "macro":
        labels = sorted(set().union(*predicted, *gold)) if predicted else []
        if not labels:
            return 0.0, 0.0, 0.0
        per_label = []
        for lab in labels:
            tp = sum(lab in p and lab in g for p, g in zip(predicted, gold))
            per_label.append(prf(tp, sum(lab in p for p in predicted), sum(lab in g for g in gold))[:2])
        p, r = np.mean(per_label, axis=0)
        return prf_from(float(p), float(r))
    raise MetricError(f"average must be one of {AVERAGES}, got {average!r}")


def prf_from(p: float, r: float) -> tuple[float, float, float]:
    return p, r, 2 * p * r / (p + r) if p + r else 0.0


def da_report(predicted, gold, acts=None, average: str = "micro") -> MetricReport:
    p, r, f = multilabel_prf(predicted, gold, average)
    report = MetricReport(f"dialog_act_{average}", p, r, f, sizes={"examples": len(gold)})
    name = (lambda i: acts.name(i)) if acts is not None else str
    for pred, g in zip(predicted, gold):
        report.per_example.append({"predicted": ";".join(sorted(name(i) for i in pred)),
                                   "gold": ";".join(sorted(name(i) for i in g)), "correct": set(pred) == set(g)})
    return report


# ---------- SRL ----------
def frame_spans(frames: Sequence[SRLFrame]) -> set[tuple]:
    """Scored (key, role, start, end) tuples; context-side arguments are left out."""
    return {(fr.key, a.role, a.start, a.end) for fr in frames for a in fr.arguments if not a.context_side}


def srl_span_prf(predicted: Sequence[Sequence[SRLFrame]], gold: Sequence[Sequence[SRLFrame]],
                 mode: str = "standard", alignments: Sequence[Alignment | None] | None = None,
                 details: list | None = None) -> tuple[float, float, float]:
    """
    Span PRF. ``standard`` skips examples with an empty prediction. ``modified`` counts
    their gold spans as false negatives, and when ``alignments`` is given the predictions
    are completed-path frames: they are projected onto the original tokens first and
    spans over completed-only material are excluded.
    """
    _check_counts(predicted, gold, "srl_span_prf")
    if mode not in SRL_MODES:
        raise MetricError(f"mode must be one of {SRL_MODES}, got {mode!r}")
    if alignments is not None:
        _check_counts(alignments, gold, "srl alignments")
        if mode == "standard":
            raise MetricError("alignments are only used in modified mode")
    tp = n_pred = n_gold = 0
    for i, (pred, g) in enumerate(zip(predicted, gold)):
        if alignments is not None:
            if alignments[i] is None:
                raise MetricError(f"example {i}: completed-path prediction without an alignment")
            pred = project_frames(pred, alignments[i])
        p_spans, g_spans = frame_spans(pred), frame_spans(g)
        skipped = mode == "standard" and not p_spans and bool(g_spans)
        if not skipped:
            tp += len(p_spans & g_spans)
            n_pred += len(p_spans)
            n_gold += len(g_spans)
        if details is not None:
            details.append({"correct": len(p_spans & g_spans), "predicted": len(p_spans),
                            "gold": len(g_spans), "skipped": skipped})
    return prf(tp, n_pred, n_gold)


def srl_report(predicted, gold, mode: str = "modified", alignments=None) -> MetricReport:
    rows: list[dict] = []
    p, r, f = srl_span_prf(predicted, gold, mode, alignments, details=rows)
    report = MetricReport(f"srl_{mode}", p, r, f, sizes={"examples": len(gold)}, per_example=rows)
    report.extra["skipped"] = sum(row["skipped"] for row in rows)
    return report
