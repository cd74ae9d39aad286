"""Dataset records and the preparation pipeline.

A Sample carries the fact, the selected type symbols, the raw question
and everything derived from it: tokenized/masked/copy-annotated question,
raw and annotated contexts, and the per-context annotation maps. Records
serialize one JSON object per line.
"""

import json
from dataclasses import dataclass, field

from .contexts import ContextBuilder, TypeSelector, align, mine_patterns
from .copyactions import AnnotationMap, annotate_context, annotate_question, deannotate
from .errors import DomainError, ParseError, VocabularyError
from .model import EncodedSample
from .textproc import OBJ_MARKER, SUBJ_MARKER, build_vocabulary, pos_tag, tokenize

CONTEXT_ROLES = ("predicate", "sub_type", "obj_type")
_CONTEXT_IDS = ("C1", "C2", "C3")


@dataclass
class Sample:
    subject: str
    predicate: str
    obj: str
    sub_type: str
    obj_type: str
    question: str
    contexts: dict                      # role -> raw context string
    tagged_contexts: dict               # role -> [(surface, upos), ...]
    annotated_contexts: dict            # role -> annotated token list
    annotation_maps: list = field(default_factory=list)  # three AnnotationMap
    question_tokens: list = field(default_factory=list)
    masked_question: list = field(default_factory=list)
    annotated_question: list = field(default_factory=list)

    def __post_init__(self):
        if not self.question:
            raise DomainError("sample with empty question")

    def raw_context_tokens(self):
        """Unannotated context token lists (surface forms), in role order."""
        return [[s for s, _ in self.tagged_contexts[role]] for role in CONTEXT_ROLES]

    def to_jsonable(self):
        return {
            "subject": self.subject,
            "predicate": self.predicate,
            "object": self.obj,
            "sub_type": self.sub_type,
            "obj_type": self.obj_type,
            "question": self.question,
            "contexts": self.contexts,
            "tagged_contexts": self.tagged_contexts,
            "annotated_contexts": self.annotated_contexts,
            "annotation_maps": [m.to_jsonable() for m in self.annotation_maps],
            "question_tokens": self.question_tokens,
            "masked_question": self.masked_question,
            "annotated_question": self.annotated_question,
        }

    @classmethod
    def from_jsonable(cls, data):
        return cls(
            subject=data["subject"],
            predicate=data["predicate"],
            obj=data["object"],
            sub_type=data["sub_type"],
            obj_type=data["obj_type"],
            question=data["question"],
            contexts=data["contexts"],
            tagged_contexts={role: [tuple(t) for t in toks]
                             for role, toks in data["tagged_contexts"].items()},
            annotated_contexts=data["annotated_contexts"],
            annotation_maps=[AnnotationMap.from_jsonable(cid, m)
                             for cid, m in zip(_CONTEXT_IDS, data["annotation_maps"])],
            question_tokens=data["question_tokens"],
            masked_question=data["masked_question"],
            annotated_question=data["annotated_question"],
        )


def write_dataset(path, samples):
    with open(path, "w", encoding="utf-8") as fh:
        for sample in samples:
            fh.write(json.dumps(sample.to_jsonable(), sort_keys=True,
                                separators=(",", ":")) + "\n")


def read_dataset(path):
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                samples.append(Sample.from_jsonable(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ParseError(f"{path}:{lineno}: bad dataset record ({exc})") from exc
    return samples


def read_question_records(path):
    """SimpleQuestions-style TSV: subject, predicate, object, question."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4 or not all(parts):
                raise ParseError(f"{path}:{lineno}: expected 4 tab-separated fields")
            records.append(tuple(parts))
    return records


def mask_subject(tokens, subject_labels):
    """Replace the subject mention (longest label first, leftmost) by [S]."""
    label_seqs = sorted({tuple(tokenize(lbl)) for lbl in subject_labels},
                        key=lambda t: (-len(t), t))
    for label in label_seqs:
        n = len(label)
        if n == 0:
            continue
        for start in range(len(tokens) - n + 1):
            if tuple(tokens[start:start + n]) == label:
                return tokens[:start] + [SUBJ_MARKER] + tokens[start + n:]
    return list(tokens)


def prepare_samples(question_records, labels, entity_types, sentences,
                    first_sentences, dep_paths=None, tagger=pos_tag):
    """Turn raw question records into fully annotated Samples.

    Mines one predicate pattern per predicate by distant supervision over
    the sentences, picks each entity's most-mentioned type, builds and
    annotates the three contexts, then masks and copy-annotates each
    question.
    """
    triples = sorted({(s, p, o) for s, p, o, _ in question_records})
    aligned = align(triples, sentences, labels, dep_paths)
    patterns = mine_patterns(aligned)
    selector = TypeSelector(first_sentences)

    candidates = {}
    for entity, type_syms in entity_types.items():
        typed = []
        for sym in type_syms:
            if sym not in labels or not labels[sym]:
                raise VocabularyError(f"type {sym!r} has no label")
            typed.append((sym, labels[sym][0]))
        candidates[entity] = typed
    builder = ContextBuilder(patterns, candidates, selector, tagger)

    samples = []
    for subject, predicate, obj, question in question_records:
        contexts, sub_sym, obj_sym = builder.build(subject, predicate, obj)
        tagged = dict(zip(CONTEXT_ROLES,
                          [[(t.surface, t.upos) for t in ctx] for ctx in contexts.as_list()]))
        annotated_contexts = {}
        maps = []
        for role, cid, ctx in zip(CONTEXT_ROLES, _CONTEXT_IDS, contexts.as_list()):
            annotated, mapping = annotate_context(ctx, cid)
            annotated_contexts[role] = annotated
            maps.append(mapping)
        question_tokens = tokenize(question)
        masked = mask_subject(question_tokens, labels.get(subject, []))
        samples.append(Sample(
            subject=subject, predicate=predicate, obj=obj,
            sub_type=sub_sym, obj_type=obj_sym, question=question,
            contexts=dict(zip(CONTEXT_ROLES, contexts.raw_strings())),
            tagged_contexts=tagged,
            annotated_contexts=annotated_contexts,
            annotation_maps=maps,
            question_tokens=question_tokens,
            masked_question=masked,
            annotated_question=annotate_question(masked, maps),
        ))
    return samples


# --------------------------------------------------- model-facing encoding

def question_tokens_for(sample, use_copy):
    return sample.annotated_question if use_copy else sample.masked_question


def context_tokens_for(sample, use_copy):
    if use_copy:
        return [sample.annotated_contexts[role] for role in CONTEXT_ROLES]
    return sample.raw_context_tokens()


def build_fold_vocabulary(samples, max_size, use_copy, include_contexts=True):
    """Vocabulary over a fold's train split only; copy tokens are reserved
    slots only for the copy variant."""
    corpus = [question_tokens_for(s, use_copy) for s in samples]
    if include_contexts:
        for sample in samples:
            corpus.extend(context_tokens_for(sample, use_copy))
    return build_vocabulary(corpus, max_size=max_size, include_copy_tokens=use_copy)


def encode_sample(sample, vocab, kb_model, use_copy):
    kb_ids = (kb_model.vocab.entity_id(sample.subject),
              kb_model.vocab.predicate_id(sample.predicate),
              kb_model.vocab.entity_id(sample.obj))
    context_ids = tuple(vocab.encode_all(toks)
                        for toks in context_tokens_for(sample, use_copy))
    target_ids = vocab.encode_all(question_tokens_for(sample, use_copy)) + [vocab.eos_id]
    return EncodedSample(kb_ids=kb_ids, context_ids=context_ids, target_ids=target_ids)


def encode_samples(samples, vocab, kb_model, use_copy):
    return [encode_sample(s, vocab, kb_model, use_copy) for s in samples]


def _label_tokens(labels, entity):
    names = labels.get(entity)
    return tokenize(names[0]) if names else tokenize(entity)


def realize_tokens(tokens, sample, labels):
    """Turn generated tokens into a final question for scoring.

    Copy tokens are deannotated with the *input* fact's maps (dropping
    unmapped ones), then [S]/[O] are refilled with the input fact's entity
    labels. Returns (tokens, dropped_copy_token_count).
    """
    deannotated, dropped = deannotate(tokens, sample.annotation_maps)
    out = []
    for tok in deannotated:
        if tok == SUBJ_MARKER:
            out.extend(_label_tokens(labels, sample.subject))
        elif tok == OBJ_MARKER:
            out.extend(_label_tokens(labels, sample.obj))
        else:
            out.append(tok)
    return out, dropped
