"""Part-of-speech copy actions.

Context words are replaced by placeholders built from the context id and
the word's POS tag (repeats get an index, e.g. ``[C1_NOUN_2]``); question
words that match a context word are replaced by the same placeholder, and
generated placeholders are mapped back to surface words afterwards.
"""

import re
from dataclasses import dataclass

from .errors import AnnotationError
from .textproc import MARKER, UPOS_TAGS, is_placeholder

CONTEXT_IDS = ("C1", "C2", "C3")

# Placeholders per (context, POS); contexts are short phrases, so four
# repeats of one tag is the reserved ceiling.
MAX_REPEAT = 4

_COPY_RE = re.compile(r"\[?(C[123])_([A-Z]+)(?:_([2-9]))?\]?")


@dataclass(frozen=True, order=True)
class CopyToken:
    context_id: str
    upos: str
    occurrence: int = 1

    def __post_init__(self):
        if self.context_id not in CONTEXT_IDS:
            raise AnnotationError(f"bad context id {self.context_id!r}")
        if self.upos not in UPOS_TAGS:
            raise AnnotationError(f"bad copy-token POS {self.upos!r}")
        if self.occurrence < 1:
            raise AnnotationError(f"occurrence index must be >= 1, got {self.occurrence}")

    def render(self):
        """Token surface; the first occurrence carries no index suffix."""
        if self.occurrence == 1:
            return f"[{self.context_id}_{self.upos}]"
        return f"[{self.context_id}_{self.upos}_{self.occurrence}]"

    @classmethod
    def parse(cls, text):
        """Parse a rendered copy token (brackets optional); None if ``text``
        is not one."""
        match = _COPY_RE.fullmatch(text)
        if not match:
            return None
        context_id, upos, idx = match.groups()
        if upos not in UPOS_TAGS:
            return None
        return cls(context_id, upos, int(idx) if idx else 1)


def copy_token_inventory(max_repeat=MAX_REPEAT):
    """The full reserved inventory, in stable id order."""
    return [CopyToken(cid, tag, k)
            for cid in CONTEXT_IDS
            for tag in UPOS_TAGS
            for k in range(1, max_repeat + 1)]


class AnnotationMap:
    """Ordered (copy token, original surface word) pairs for one context."""

    def __init__(self, context_id, entries=()):
        self.context_id = context_id
        self.entries = list(entries)

    def append(self, token, surface):
        self.entries.append((token, surface))

    def surface_for(self, token):
        for tok, surface in self.entries:
            if tok == token:
                return surface
        return None

    def token_for_surface(self, word):
        word = word.lower()
        for tok, surface in self.entries:
            if surface.lower() == word:
                return tok
        return None

    def to_jsonable(self):
        return [[tok.render(), surface] for tok, surface in self.entries]

    @classmethod
    def from_jsonable(cls, context_id, data):
        out = cls(context_id)
        for rendered, surface in data:
            out.append(CopyToken.parse(rendered), surface)
        return out


def annotate_context(tagged_tokens, context_id):
    """Replace every non-marker word with its copy token.

    The k-th repeat of a POS tag within the context gets occurrence index
    k; markers pass through unchanged. Returns (annotated token list,
    AnnotationMap).
    """
    annotated = []
    mapping = AnnotationMap(context_id)
    seen = {}
    for tok in tagged_tokens:
        if tok.upos == MARKER:
            annotated.append(tok.surface)
            continue
        k = seen.get(tok.upos, 0) + 1
        if k > MAX_REPEAT:
            raise AnnotationError(
                f"context {context_id}: more than {MAX_REPEAT} {tok.upos} tokens")
        seen[tok.upos] = k
        copy_tok = CopyToken(context_id, tok.upos, k)
        annotated.append(copy_tok.render())
        mapping.append(copy_tok, tok.surface)
    return annotated, mapping


def annotate_question(question_tokens, maps):
    """Replace question words that match a context word (case-insensitive)
    by that word's copy token; maps are searched c1, c2, c3 and in context
    order within each. Placeholders and unmatched words pass through."""
    out = []
    for word in question_tokens:
        if is_placeholder(word):
            out.append(word)
            continue
        for mapping in maps:
            token = mapping.token_for_surface(word)
            if token is not None:
                out.append(token.render())
                break
        else:
            out.append(word)
    return out


def deannotate(tokens, maps):
    """Replace copy tokens by their mapped surface words.

    Copy tokens with no map entry (the model pointed at a slot the input
    fact does not offer) are dropped. Returns (tokens, dropped_count).
    """
    out = []
    dropped = 0
    for token in tokens:
        copy_tok = CopyToken.parse(token)
        if copy_tok is None:
            out.append(token)
            continue
        for mapping in maps:
            surface = mapping.surface_for(copy_tok)
            if surface is not None:
                out.append(surface)
                break
        else:
            dropped += 1
    return out, dropped
