"""Text-generation metrics: BLEU-1..4, ROUGE-L and a lite METEOR variant.

All scores live in [0, 1]. The METEOR variant performs exact plus
suffix-stem unigram alignment only (no synonym dictionaries) and is named
``meteor_lite`` in every output to avoid claiming comparability with full
METEOR tooling.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import DimensionError, DomainError

ROUGE_BETA = 1.2

# Ordered as reported; all bounded in [0, 1].
METRIC_NAMES = ("bleu_1", "bleu_2", "bleu_3", "bleu_4", "rouge_l", "meteor_lite")


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _clipped_counts(candidate, reference, n):
    """Modified n-gram precision counts: (clipped matches, candidate total)."""
    cand = _ngrams(candidate, n)
    if not cand:
        return 0, 0
    ref = _ngrams(reference, n)
    matched = sum(min(count, ref[gram]) for gram, count in cand.items())
    return matched, sum(cand.values())


def bleu(candidates, references, max_n=4, level="corpus"):
    """BLEU with clipping, geometric mean over n=1..max_n and brevity penalty.

    ``level="corpus"`` pools n-gram counts over all pairs;
    ``level="sentence"`` scores pairs independently with add-1 smoothing on
    the n>=2 precisions and returns the mean. Single reference per
    candidate. Empty candidates score 0.
    """
    if len(candidates) != len(references):
        raise DimensionError(
            f"bleu: {len(candidates)} candidates vs {len(references)} references")
    if level == "sentence":
        scores = [_sentence_bleu(c, r, max_n) for c, r in zip(candidates, references)]
        return sum(scores) / len(scores) if scores else 0.0
    if level != "corpus":
        raise DomainError(f"unknown BLEU level: {level!r}")

    matched = [0] * max_n
    total = [0] * max_n
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            m, t = _clipped_counts(cand, ref, n)
            matched[n - 1] += m
            total[n - 1] += t
    if cand_len == 0:
        return 0.0
    if any(m == 0 or t == 0 for m, t in zip(matched, total)):
        return 0.0
    log_precision = sum(math.log(m / t) for m, t in zip(matched, total)) / max_n
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_precision)


def _sentence_bleu(candidate, reference, max_n):
    if len(candidate) == 0:
        return 0.0
    logs = []
    for n in range(1, max_n + 1):
        m, t = _clipped_counts(candidate, reference, n)
        if n >= 2:  # short questions rarely share high-order n-grams
            m, t = m + 1, t + 1
        if m == 0 or t == 0:
            return 0.0
        logs.append(math.log(m / t))
    bp = 1.0 if len(candidate) >= len(reference) else math.exp(1.0 - len(reference) / len(candidate))
    return bp * math.exp(sum(logs) / max_n)


def lcs_length(a, b):
    """Longest common subsequence length (standard dynamic program)."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, reference, beta=ROUGE_BETA):
    """LCS-based F-score: (1+b^2)PR / (R + b^2 P); 0 when LCS or either side is empty."""
    if not candidate or not reference:
        return 0.0
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return (1 + beta ** 2) * precision * recall / (recall + beta ** 2 * precision)


# Common English suffixes, longest first; used by the stem stage of the
# METEOR-lite aligner.
_STEM_SUFFIXES = ("ations", "ation", "ness", "ingly", "ing", "edly", "ed",
                  "ies", "es", "s", "ly", "er", "est", "ion")


def stem(word):
    for suffix in _STEM_SUFFIXES:
        if word.endswith(suffix) and len(word) - len(suffix) >= 3:
            return word[: -len(suffix)]
    return word


def _align_stage(cand, ref, cand_free, ref_free, key):
    """Greedy in-order alignment on key(word); prefers the reference
    position that extends a contiguous run, else the leftmost unused."""
    pairs = {}
    last_ref = -2
    for i in range(len(cand)):
        if not cand_free[i]:
            continue
        want = key(cand[i])
        candidates = [j for j in range(len(ref)) if ref_free[j] and key(ref[j]) == want]
        if not candidates:
            continue
        j = last_ref + 1 if (last_ref + 1) in candidates else candidates[0]
        pairs[i] = j
        cand_free[i] = False
        ref_free[j] = False
        last_ref = j
    return pairs


def meteor_lite(candidate, reference):
    """Unigram alignment score with a fragmentation penalty.

    Alignment runs in two stages (exact surface, then stemmed); each word
    participates at most once. F_mean = 10PR/(R+9P); penalty =
    0.5*(chunks/matches)^3 where chunks are maximal contiguous aligned runs.
    """
    if not candidate or not reference:
        return 0.0
    cand_free = [True] * len(candidate)
    ref_free = [True] * len(reference)
    alignment = _align_stage(candidate, reference, cand_free, ref_free, lambda w: w)
    alignment.update(_align_stage(candidate, reference, cand_free, ref_free, stem))
    matches = len(alignment)
    if matches == 0:
        return 0.0
    precision = matches / len(candidate)
    recall = matches / len(reference)
    f_mean = 10 * precision * recall / (recall + 9 * precision)
    ordered = sorted(alignment.items())
    chunks = 1
    for (i0, j0), (i1, j1) in zip(ordered, ordered[1:]):
        if i1 != i0 + 1 or j1 != j0 + 1:
            chunks += 1
    penalty = 0.5 * (chunks / matches) ** 3
    return f_mean * (1.0 - penalty)


def score_fold(candidates, references):
    """All metrics for one fold: corpus BLEU-1..4, mean ROUGE-L/METEOR-lite."""
    if len(candidates) != len(references):
        raise DimensionError(
            f"score_fold: {len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise DomainError("score_fold: empty fold")
    pairs = list(zip(candidates, references))
    scores = {f"bleu_{n}": bleu(candidates, references, max_n=n) for n in range(1, 5)}
    scores["rouge_l"] = sum(rouge_l(c, r) for c, r in pairs) / len(pairs)
    scores["meteor_lite"] = sum(meteor_lite(c, r) for c, r in pairs) / len(pairs)
    return scores


@dataclass
class ScoreReport:
    """Per-system scores: one dict of metric values per fold, plus
    mean/population-std aggregates."""

    system: str
    fold_scores: list = field(default_factory=list)

    def add_fold(self, scores):
        missing = [m for m in METRIC_NAMES if m not in scores]
        if missing:
            raise DomainError(f"fold scores missing metrics: {missing}")
        self.fold_scores.append(dict(scores))

    def aggregate(self):
        """Arithmetic mean and population standard deviation per metric."""
        if not self.fold_scores:
            raise DomainError("aggregate over zero folds")
        out = {}
        n = len(self.fold_scores)
        for metric in METRIC_NAMES:
            values = [fs[metric] for fs in self.fold_scores]
            mean = sum(values) / n
            var = sum((v - mean) ** 2 for v in values) / n
            out[metric] = (mean, math.sqrt(var))
        return out


def aggregate(per_fold_reports):
    """Aggregate a list of per-fold metric dicts (mean, population std)."""
    report = ScoreReport(system="")
    for fold in per_fold_reports:
        report.add_fold(fold)
    return report.aggregate()
