"""Tokenization, POS tagging and vocabulary construction.

Tagging is pluggable: the primary path reads tags from a pre-tagged file
(one ``surface<TAB>UPOS`` line per token, blank line between sentences);
the built-in lexicon+suffix tagger covers tests and the bundled corpora.
"""

import re
from collections import Counter
from dataclasses import dataclass

from .errors import DomainError, ParseError

# The 17 Universal POS tags, plus MARKER for [S]/[O]-style placeholders.
UPOS_TAGS = ("ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN",
             "NUM", "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X")
MARKER = "MARKER"
ALL_TAGS = UPOS_TAGS + (MARKER,)

SUBJ_MARKER = "[S]"
OBJ_MARKER = "[O]"

PAD, SOS, EOS, UNK = "<pad>", "<sos>", "<eos>", "<unk>"

# Bracketed placeholders survive tokenization as single (uppercased) tokens.
_PLACEHOLDER_RE = re.compile(r"\[[A-Za-z][A-Za-z0-9_]*\]")
_TOKEN_RE = re.compile(r"\[[A-Za-z][A-Za-z0-9_]*\]|\w+|[^\w\s]")


def is_placeholder(token):
    return bool(_PLACEHOLDER_RE.fullmatch(token))


def tokenize(text):
    """Lowercased word/punctuation tokens; placeholders kept whole."""
    out = []
    for tok in _TOKEN_RE.findall(text):
        out.append(tok.upper() if is_placeholder(tok) else tok.lower())
    return out


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    upos: str

    def __post_init__(self):
        if not self.surface:
            raise DomainError("empty token surface")
        if self.upos not in ALL_TAGS:
            raise DomainError(f"unknown POS tag {self.upos!r}")


_LEXICON = {
    "DET": ["the", "a", "an", "this", "that", "these", "those", "every",
            "each", "some", "any", "no", "another", "all", "both"],
    "ADP": ["of", "in", "on", "by", "at", "from", "with", "for", "to",
            "into", "over", "under", "about", "after", "before", "between",
            "during", "near", "through", "across", "against", "among",
            "around", "behind", "beside", "within", "without", "upon"],
    "PRON": ["he", "she", "it", "they", "we", "you", "i", "who", "whom",
             "what", "which", "me", "him", "her", "them", "us", "its",
             "his", "their", "my", "your", "our", "something", "someone"],
    "AUX": ["is", "are", "was", "were", "be", "been", "being", "am",
            "do", "does", "did", "has", "have", "had", "can", "could",
            "will", "would", "shall", "should", "may", "might", "must"],
    "CCONJ": ["and", "or", "but", "nor", "yet"],
    "SCONJ": ["if", "because", "while", "although", "since", "whether",
              "unless", "when", "where"],
    "PART": ["not", "nt"],
    "ADV": ["very", "also", "only", "never", "always", "often", "there",
            "here", "how", "why", "then", "now", "most", "more", "too"],
    "NUM": ["one", "two", "three", "four", "five", "six", "seven",
            "eight", "nine", "ten", "zero", "hundred", "thousand", "million"],
    "VERB": ["name", "found", "founded", "made", "make", "makes", "born",
             "died", "wrote", "written", "created", "directed", "become",
             "became", "contains", "increases", "caused", "get", "say",
             "played", "plays", "know", "known", "go", "went", "developed",
             "illustrated", "spoken", "called", "used", "located", "won"],
    "INTJ": ["yes", "oh", "hey", "please", "hello"],
}
_WORD_TAGS = {word: tag for tag, words in _LEXICON.items() for word in words}

# Suffix rules, tried longest-first after the lexicon. Terse but adequate
# for short context phrases; everything else defaults to NOUN.
_SUFFIX_RULES = (
    ("ingly", "ADV"), ("edly", "ADV"), ("ly", "ADV"),
    ("ing", "VERB"), ("ized", "VERB"), ("ised", "VERB"),
    ("ize", "VERB"), ("ise", "VERB"), ("ed", "VERB"),
    ("ous", "ADJ"), ("ful", "ADJ"), ("ive", "ADJ"), ("ical", "ADJ"),
    ("ic", "ADJ"), ("ish", "ADJ"), ("less", "ADJ"), ("able", "ADJ"),
    ("ible", "ADJ"), ("al", "ADJ"), ("ary", "ADJ"), ("est", "ADJ"),
    ("ist", "NOUN"), ("ism", "NOUN"), ("tion", "NOUN"), ("sion", "NOUN"),
    ("ment", "NOUN"), ("ness", "NOUN"), ("ity", "NOUN"), ("ship", "NOUN"),
    ("hood", "NOUN"), ("ology", "NOUN"),
)

_NUMERIC_RE = re.compile(r"\d+")
_WORDLESS_RE = re.compile(r"[^\w\s]+")


def tag_word(token):
    """Rule tag for one token: markers, punctuation, numbers, closed-class
    lexicon, suffix rules, then NOUN."""
    if is_placeholder(token):
        return MARKER
    if _WORDLESS_RE.fullmatch(token):
        return "PUNCT"
    if _NUMERIC_RE.fullmatch(token):
        return "NUM"
    if token in _WORD_TAGS:
        return _WORD_TAGS[token]
    for suffix, tag in _SUFFIX_RULES:
        if token.endswith(suffix) and len(token) - len(suffix) >= 2:
            return tag
    return "NOUN"


def pos_tag(tokens):
    """Tag a token list with the built-in rule tagger."""
    return [TaggedToken(tok, tag_word(tok)) for tok in tokens]


class PretaggedTagger:
    """Tagger backed by a pre-tagged file, with the rule tagger as fallback
    for sentences the file does not cover."""

    def __init__(self, sentences):
        self._by_tokens = {tuple(t.surface for t in sent): sent for sent in sentences}

    @classmethod
    def from_file(cls, path):
        return cls(parse_tagged_file(path))

    def __call__(self, tokens):
        hit = self._by_tokens.get(tuple(tokens))
        if hit is not None:
            return list(hit)
        return pos_tag(tokens)


def parse_tagged_file(path):
    """Parse CoNLL-like pre-tagged input into sentences of TaggedToken."""
    sentences = []
    current = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                if current:
                    sentences.append(current)
                    current = []
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise ParseError(f"{path}:{lineno}: expected 'surface<TAB>UPOS', got {line!r}")
            surface, upos = parts
            if upos not in ALL_TAGS:
                raise ParseError(f"{path}:{lineno}: unknown POS tag {upos!r}")
            current.append(TaggedToken(surface, upos))
    if current:
        sentences.append(current)
    return sentences


def write_tagged_file(path, sentences):
    with open(path, "w", encoding="utf-8") as fh:
        for i, sent in enumerate(sentences):
            if i:
                fh.write("\n")
            for tok in sent:
                fh.write(f"{tok.surface}\t{tok.upos}\n")


class Vocabulary:
    """Word <-> id map with stable reserved ids.

    id 0 is PAD; SOS/EOS/UNK, the [S]/[O] markers and (by default) the full
    copy-token inventory follow, all independent of corpus frequency.
    """

    def __init__(self, words):
        self._words = list(words)
        self._ids = {}
        for i, w in enumerate(self._words):
            if w in self._ids:
                raise DomainError(f"duplicate vocabulary entry {w!r}")
            self._ids[w] = i
        for i, expected in enumerate((PAD, SOS, EOS, UNK, SUBJ_MARKER, OBJ_MARKER)):
            if self._words[i] != expected:
                raise DomainError(f"reserved id {i} must be {expected!r}")

    def __len__(self):
        return len(self._words)

    def __contains__(self, word):
        return word in self._ids

    @property
    def pad_id(self):
        return 0

    @property
    def sos_id(self):
        return 1

    @property
    def eos_id(self):
        return 2

    @property
    def unk_id(self):
        return 3

    def encode(self, word):
        return self._ids.get(word, self.unk_id)

    def encode_all(self, tokens):
        return [self.encode(t) for t in tokens]

    def decode(self, token_id):
        return self._words[token_id]

    def decode_all(self, ids):
        return [self._words[i] for i in ids]

    def to_list(self):
        return list(self._words)

    @classmethod
    def from_list(cls, words):
        return cls(words)


def reserved_tokens(include_copy_tokens=True):
    specials = [PAD, SOS, EOS, UNK, SUBJ_MARKER, OBJ_MARKER]
    if include_copy_tokens:
        from .copyactions import copy_token_inventory
        specials.extend(t.render() for t in copy_token_inventory())
    return specials


def build_vocabulary(corpus, max_size=30000, include_copy_tokens=True):
    """Keep the most frequent corpus words (ties lexicographic) after the
    reserved specials; everything else encodes to UNK."""
    specials = reserved_tokens(include_copy_tokens)
    reserved = set(specials)
    if max_size <= len(specials):
        raise DomainError(
            f"max_size {max_size} does not fit the {len(specials)} reserved tokens")
    counts = Counter()
    for tokens in corpus:
        counts.update(tok for tok in tokens if tok not in reserved)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    room = max_size - len(specials)
    return Vocabulary(specials + [w for w, _ in ranked[:room]])
