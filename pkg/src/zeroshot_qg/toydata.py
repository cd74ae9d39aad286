"""Bundled deterministic toy corpora.

Everything here is generated in-process from fixed word pools and a seed,
so tests and the example configs can materialize small but complete input
files anywhere. Nothing in this module is used by the pipeline itself.
"""

from pathlib import Path

import numpy as np

from . import kb

# Six entities on a 2x3 grid with two translation-consistent predicates;
# small enough for brute-force rank checks.
TOY_KB_TRIPLES = [
    ("oak", "east_of", "elm"),
    ("elm", "east_of", "ash"),
    ("fir", "east_of", "ivy"),
    ("ivy", "east_of", "yew"),
    ("oak", "north_of", "fir"),
    ("elm", "north_of", "ivy"),
    ("ash", "north_of", "yew"),
    ("yew", "east_of", "oak"),
]

_PRED_NOUNS = [
    "anthem", "beacon", "cipher", "dynamo", "emblem", "fresco", "glacier",
    "harbor", "isotope", "jubilee", "keel", "lagoon", "marrow", "nectar",
    "obelisk", "parable", "quarry", "relic", "sonnet", "tapestry", "umber",
    "vessel", "willow", "saffron", "zephyr", "amulet", "bastion", "crater",
    "lantern", "mosaic",
]
_PRED_VERBS = [
    "guards", "carries", "shelters", "brews", "carves", "mints", "weaves",
    "charts", "tends", "forges", "paints", "stores", "trades", "shapes",
    "holds", "keeps", "marks", "grows", "sells", "hides", "builds", "bears",
    "hosts", "crafts", "binds", "tunes", "stacks", "spins", "molds", "sorts",
]
_SUB_TYPE_LABELS = [
    "village elder", "river pilot", "stone mason", "glass smith",
    "field scout", "tide warden", "lamp keeper", "map scribe",
]
_OBJ_TYPE_LABELS = [
    "harbor town", "mountain fort", "cedar grove", "salt marsh",
    "amber mine", "winter camp", "coastal city", "ancient temple",
]

_NAME_STARTS = ["mar", "quin", "bel", "dor", "fen", "gal", "hol", "jor",
                "kel", "lor", "nim", "pol", "ras", "sel", "tor", "ver"]
_NAME_ENDS = ["low", "by", "dale", "wick", "ton", "mere", "ford", "stead",
              "holm", "gate", "fell", "combe"]


def _entity_names(prefix, count, offset=0):
    # offset keeps the subject and object label pools disjoint
    names = []
    for i in range(count):
        j = i + offset
        start = _NAME_STARTS[j % len(_NAME_STARTS)]
        end = _NAME_ENDS[(j // len(_NAME_STARTS)) % len(_NAME_ENDS)]
        tag = j // (len(_NAME_STARTS) * len(_NAME_ENDS))
        label = start + end + (str(tag) if tag else "")
        names.append((f"{prefix}_{i:03d}", label))
    return names

# Question templates; {noun} comes from the predicate pattern, {otype}
# from the object-type label, {subj} is the subject label.
_TEMPLATES = [
    "what is the {noun} of {subj} ?",
    "which {otype} holds the {noun} of {subj} ?",
    "name the {otype} with the {noun} of {subj} .",
]


def build_corpus(n_predicates=10, samples_per_predicate=50, n_subjects=60,
                 n_objects=24, seed=7):
    """Synthesize a SimpleQuestions-style corpus with aligned sentences.

    Returns a dict of file-content strings keyed by the input-file role;
    use ``write_corpus`` to put them on disk.
    """
    if n_predicates > len(_PRED_NOUNS):
        raise ValueError(f"at most {len(_PRED_NOUNS)} predicates available")
    rng = np.random.default_rng(seed)

    subjects = _entity_names("subj", n_subjects)
    objects = _entity_names("obj", n_objects, offset=500)
    sub_types = [(f"type_sub_{i}", label) for i, label in enumerate(_SUB_TYPE_LABELS)]
    obj_types = [(f"type_obj_{i}", label) for i, label in enumerate(_OBJ_TYPE_LABELS)]

    labels = []
    types = []
    first_sentences = []
    for i, (sym, label) in enumerate(subjects):
        type_sym, type_label = sub_types[i % len(sub_types)]
        labels.append((sym, label))
        types.append((sym, type_sym))
        first_sentences.append((sym, f"{label} is a {type_label} of some renown ."))
    for i, (sym, label) in enumerate(objects):
        type_sym, type_label = obj_types[i % len(obj_types)]
        labels.append((sym, label))
        types.append((sym, type_sym))
        first_sentences.append((sym, f"{label} is a {type_label} near the old road ."))
    for sym, label in sub_types + obj_types:
        labels.append((sym, label))

    questions = []
    sentences = []
    triples = set()
    for p_idx in range(n_predicates):
        noun = _PRED_NOUNS[p_idx]
        verb = _PRED_VERBS[p_idx]
        pred = f"rel_{noun}"
        pairs = set()
        for _ in range(samples_per_predicate):
            while True:
                subj = subjects[int(rng.integers(n_subjects))]
                obj = objects[int(rng.integers(n_objects))]
                if (subj[0], obj[0]) not in pairs:
                    pairs.add((subj[0], obj[0]))
                    break
            triples.add((subj[0], pred, obj[0]))
            obj_type_label = _OBJ_TYPE_LABELS[objects.index(obj) % len(obj_types)]
            template = _TEMPLATES[int(rng.integers(len(_TEMPLATES)))]
            question = template.format(noun=noun, otype=obj_type_label, subj=subj[1])
            questions.append((subj[0], pred, obj[0], question))
        # Distant-supervision sentences for a handful of the pairs.
        for subj_sym, obj_sym in sorted(pairs)[:6]:
            subj_label = dict(subjects)[subj_sym]
            obj_label = dict(objects)[obj_sym]
            sentences.append(
                (f"doc_{pred}", f"{subj_label} {verb} the {noun} of {obj_label} ."))
    # Distractor sentences that align with no triple.
    for i in range(10):
        sentences.append((f"doc_noise_{i}", "the weather stayed calm for days ."))

    return {
        "triples": "".join(f"{s}\t{p}\t{o}\n" for s, p, o in sorted(triples)),
        "labels": "".join(f"{sym}\t{label}\n" for sym, label in labels),
        "types": "".join(f"{sym}\t{tsym}\n" for sym, tsym in types),
        "sentences": "".join(f"{doc}\t{text}\n" for doc, text in sentences),
        "first_sentences": "".join(f"{sym}\t{text}\n" for sym, text in first_sentences),
        "questions": "".join(f"{s}\t{p}\t{o}\t{q}\n" for s, p, o, q in questions),
    }


FILE_NAMES = {
    "triples": "triples.tsv",
    "labels": "labels.tsv",
    "types": "types.tsv",
    "sentences": "sentences.tsv",
    "first_sentences": "first_sentences.tsv",
    "questions": "questions.tsv",
}


def write_corpus(out_dir, corpus=None, **kwargs):
    """Write a generated corpus into ``out_dir``; returns the path map."""
    if corpus is None:
        corpus = build_corpus(**kwargs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for role, content in corpus.items():
        path = out / FILE_NAMES[role]
        path.write_text(content, encoding="utf-8")
        paths[role] = path
    return paths


def write_toy_kb(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "toy_kb.tsv"
    kb.write_triples(path, TOY_KB_TRIPLES)
    return path


def zero_shot_corpus(seed=7):
    """The larger bundled corpus for the directional zero-shot check:
    30 predicates, 50 samples each."""
    return build_corpus(n_predicates=30, samples_per_predicate=50,
                        n_subjects=150, n_objects=60, seed=seed)


def smoke_corpus(seed=7):
    """The small end-to-end corpus: 10 predicates, 50 samples each."""
    return build_corpus(n_predicates=10, samples_per_predicate=50,
                        n_subjects=60, n_objects=24, seed=seed)
