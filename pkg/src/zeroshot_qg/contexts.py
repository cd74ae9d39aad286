"""Textual context construction for facts.

Three contexts per fact: a distant-supervision predicate pattern mined
from sentences where both entities co-occur, and the subject/object type
labels. Sentence reduction uses the token span between the two entity
markers unless precomputed dependency paths are supplied.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass

from .errors import DomainError, ParseError, VocabularyError
from .textproc import OBJ_MARKER, SUBJ_MARKER, pos_tag, tokenize

log = logging.getLogger(__name__)

FALLBACK_PATTERN = (SUBJ_MARKER, OBJ_MARKER)


@dataclass
class AlignedSentence:
    """Sentence tokens with the subject/object mentions replaced by
    [S]/[O]; optionally a supplied dependency-path reduction."""

    tokens: list
    predicate: str
    path_tokens: list = None

    def __post_init__(self):
        if self.tokens.count(SUBJ_MARKER) != 1 or self.tokens.count(OBJ_MARKER) != 1:
            raise DomainError("aligned sentence must contain exactly one [S] and one [O]")


@dataclass
class PredicatePattern:
    predicate: str
    tokens: tuple
    support: int

    def __post_init__(self):
        if self.support < 1:
            raise DomainError("pattern support must be >= 1")
        if SUBJ_MARKER not in self.tokens or OBJ_MARKER not in self.tokens:
            raise DomainError("pattern must contain both [S] and [O]")


def _prepare_labels(labels):
    """entity -> labels, each tokenized, longest first (tokens, then text)."""
    prepared = {}
    for entity, names in labels.items():
        toks = [tuple(tokenize(name)) for name in names]
        toks = [t for t in toks if t]
        prepared[entity] = sorted(set(toks), key=lambda t: (-len(t), -len(" ".join(t)), t))
    return prepared


def _find_span(tokens, label_seqs, exclude=None):
    """Leftmost occurrence of the highest-priority label; spans may not
    overlap ``exclude``."""
    for label in label_seqs:
        n = len(label)
        for start in range(len(tokens) - n + 1):
            if tuple(tokens[start:start + n]) != label:
                continue
            if exclude and not (start + n <= exclude[0] or start >= exclude[1]):
                continue
            return (start, start + n)
    return None


def align(triples, sentences, labels, dep_paths=None):
    """Pair triples with sentences where both entity labels occur.

    Matching is case-insensitive on tokens, longest-label-first and
    non-overlapping; the subject mention becomes [S] and the object
    mention [O], preserving relation direction. Sentences without both
    mentions produce no output.
    """
    prepared = _prepare_labels(labels)
    sentence_tokens = [tokenize(s) for s in sentences]
    token_index = {}
    for i, toks in enumerate(sentence_tokens):
        for tok in set(toks):
            token_index.setdefault(tok, set()).add(i)

    aligned = []
    for s, p, o in triples:
        s_labels = prepared.get(s)
        o_labels = prepared.get(o)
        if not s_labels:
            raise VocabularyError(f"entity {s!r} has no surface label")
        if not o_labels:
            raise VocabularyError(f"entity {o!r} has no surface label")
        candidates = set()
        for label in s_labels:
            candidates |= token_index.get(label[0], set())
        narrowed = set()
        for label in o_labels:
            narrowed |= candidates & token_index.get(label[0], set())
        path = (dep_paths or {}).get((s, p, o))
        for i in sorted(narrowed):
            toks = sentence_tokens[i]
            s_span = _find_span(toks, s_labels)
            if s_span is None:
                continue
            o_span = _find_span(toks, o_labels, exclude=s_span)
            if o_span is None:
                continue
            first, second = sorted([(s_span, SUBJ_MARKER), (o_span, OBJ_MARKER)])
            out = (toks[: first[0][0]] + [first[1]]
                   + toks[first[0][1]: second[0][0]] + [second[1]]
                   + toks[second[0][1]:])
            aligned.append(AlignedSentence(out, p, path_tokens=list(path) if path else None))
    return aligned


def reduce_sentence(aligned):
    """Span between (and including) the two markers, or the supplied
    dependency-path tokens verbatim."""
    if aligned.path_tokens:
        return tuple(aligned.path_tokens)
    i = aligned.tokens.index(SUBJ_MARKER)
    j = aligned.tokens.index(OBJ_MARKER)
    lo, hi = min(i, j), max(i, j)
    return tuple(aligned.tokens[lo:hi + 1])


def extract_pattern(aligned_sentences):
    """Most frequent reduction over one predicate's aligned sentences;
    ties break by shortest token count, then lexicographically."""
    if not aligned_sentences:
        raise DomainError("extract_pattern: no aligned sentences")
    predicates = {a.predicate for a in aligned_sentences}
    if len(predicates) != 1:
        raise DomainError(f"extract_pattern: mixed predicates {sorted(predicates)}")
    counts = Counter(reduce_sentence(a) for a in aligned_sentences)
    best = min(counts.items(), key=lambda kv: (-kv[1], len(kv[0]), " ".join(kv[0])))
    return PredicatePattern(predicates.pop(), best[0], best[1])


def mine_patterns(aligned_sentences):
    """Group aligned sentences by predicate and extract one pattern each."""
    grouped = {}
    for a in aligned_sentences:
        grouped.setdefault(a.predicate, []).append(a)
    return {pred: extract_pattern(group) for pred, group in sorted(grouped.items())}


class TypeSelector:
    """Counts word-boundary mentions of type labels over a first-sentence
    corpus; label counts are cached across entities."""

    def __init__(self, corpus_sentences):
        self._corpus = [s.lower() for s in corpus_sentences]
        self._cache = {}

    def count(self, label):
        label = label.lower()
        if label not in self._cache:
            pattern = re.compile(rf"\b{re.escape(label)}\b")
            self._cache[label] = sum(len(pattern.findall(s)) for s in self._corpus)
        return self._cache[label]

    def select(self, candidates):
        """Most-mentioned label among (symbol, label) candidates; ties and
        all-zero counts fall back to the lexicographically smallest label."""
        if not candidates:
            raise DomainError("no candidate types to select from")
        ranked = sorted(candidates, key=lambda c: (-self.count(c[1]), c[1].lower()))
        return ranked[0]


def select_type_context(entity, candidate_types, first_sentence_corpus):
    """Label of the candidate type mentioned most across the corpus."""
    del entity  # selection depends only on the candidates and the corpus
    symbol, label = TypeSelector(first_sentence_corpus).select(candidate_types)
    return label


@dataclass
class TextualContextSet:
    """The three tagged contexts: predicate pattern, sub-type label,
    obj-type label."""

    predicate: list
    sub_type: list
    obj_type: list

    def as_list(self):
        return [self.predicate, self.sub_type, self.obj_type]

    def raw_strings(self):
        return [" ".join(t.surface for t in ctx) for ctx in self.as_list()]


class ContextBuilder:
    """Assembles the three textual contexts for a fact."""

    def __init__(self, patterns, entity_types, type_selector, tagger=pos_tag):
        self.patterns = patterns
        self.entity_types = entity_types
        self.type_selector = type_selector
        self.tagger = tagger
        self._warned = set()

    def _type_for(self, entity):
        candidates = self.entity_types.get(entity)
        if not candidates:
            raise VocabularyError(f"entity {entity!r} has no type candidates")
        return self.type_selector.select(candidates)

    def pattern_tokens(self, predicate):
        pattern = self.patterns.get(predicate)
        if pattern is None:
            if predicate not in self._warned:
                log.warning("no mined pattern for predicate %s; using '[S] [O]'", predicate)
                self._warned.add(predicate)
            return list(FALLBACK_PATTERN)
        return list(pattern.tokens)

    def build(self, subject, predicate, obj):
        """Returns (TextualContextSet, sub_type_symbol, obj_type_symbol)."""
        sub_sym, sub_label = self._type_for(subject)
        obj_sym, obj_label = self._type_for(obj)
        contexts = TextualContextSet(
            predicate=self.tagger(self.pattern_tokens(predicate)),
            sub_type=self.tagger(tokenize(sub_label)),
            obj_type=self.tagger(tokenize(obj_label)),
        )
        for ctx in contexts.as_list():
            if not ctx:
                raise DomainError("empty textual context")
        return contexts, sub_sym, obj_sym


# ------------------------------------------------------------- file I/O

def read_labels(path):
    """``entity_id<TAB>label`` per line; repeated ids accumulate aliases."""
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not all(parts):
                raise ParseError(f"{path}:{lineno}: expected 'entity<TAB>label'")
            labels.setdefault(parts[0], []).append(parts[1])
    return labels


def read_sentences(path):
    """``doc_id<TAB>sentence`` per line; returns the sentence strings."""
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 'doc_id<TAB>sentence'")
            sentences.append(parts[1])
    return sentences


def read_types(path):
    """``entity_id<TAB>type_symbol`` per line; repeatable."""
    types = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not all(parts):
                raise ParseError(f"{path}:{lineno}: expected 'entity<TAB>type'")
            types.setdefault(parts[0], []).append(parts[1])
    return types


def read_first_sentences(path):
    """``entity_id<TAB>first sentence`` per line; returns sentences."""
    return read_sentences(path)


def read_dep_paths(path):
    """``subject<TAB>predicate<TAB>object<TAB>path tokens`` per line."""
    paths = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError(f"{path}:{lineno}: expected triple + path tokens")
            tokens = tokenize(parts[3])
            if SUBJ_MARKER not in tokens or OBJ_MARKER not in tokens:
                raise ParseError(f"{path}:{lineno}: path must contain [S] and [O]")
            paths[(parts[0], parts[1], parts[2])] = tokens
    return paths
