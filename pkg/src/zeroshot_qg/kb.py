"""TransE embeddings for entities and predicates.

Trained once on the full triple set with a margin ranking loss, then
frozen: the question-generation model only ever reads rows out of the
table. One dense id space covers entities and predicates.
"""

from dataclasses import dataclass

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import DomainError, ParseError, VocabularyError


class KbVocabulary:
    """Entity and predicate symbol <-> id maps over one dense id range."""

    def __init__(self, entities, predicates):
        self._entity_ids = {}
        self._predicate_ids = {}
        for sym in entities:
            if sym in self._entity_ids:
                raise DomainError(f"duplicate entity symbol {sym!r}")
            self._entity_ids[sym] = len(self._entity_ids)
        offset = len(self._entity_ids)
        for sym in predicates:
            if sym in self._predicate_ids or sym in self._entity_ids:
                raise DomainError(f"duplicate KB symbol {sym!r}")
            self._predicate_ids[sym] = offset + len(self._predicate_ids)

    @classmethod
    def from_triples(cls, triples):
        entities = sorted({t[0] for t in triples} | {t[2] for t in triples})
        predicates = sorted({t[1] for t in triples})
        return cls(entities, predicates)

    def __len__(self):
        return len(self._entity_ids) + len(self._predicate_ids)

    @property
    def n_entities(self):
        return len(self._entity_ids)

    def entity_id(self, symbol):
        try:
            return self._entity_ids[symbol]
        except KeyError:
            raise VocabularyError(f"unknown entity {symbol!r}") from None

    def predicate_id(self, symbol):
        try:
            return self._predicate_ids[symbol]
        except KeyError:
            raise VocabularyError(f"unknown predicate {symbol!r}") from None

    def has_entity(self, symbol):
        return symbol in self._entity_ids

    def to_jsonable(self):
        ents = sorted(self._entity_ids, key=self._entity_ids.get)
        preds = sorted(self._predicate_ids, key=self._predicate_ids.get)
        return {"entities": ents, "predicates": preds}

    @classmethod
    def from_jsonable(cls, data):
        return cls(data["entities"], data["predicates"])


@dataclass
class TranseConfig:
    dim: int = 200
    margin: float = 1.0
    epochs: int = 100
    learning_rate: float = 0.01
    seed: int = 0


class TransEModel:
    """Embedding table plus the L2 translation score."""

    def __init__(self, vocab, table):
        self.vocab = vocab
        self.table = np.ascontiguousarray(table, dtype=np.float64)
        if self.table.shape[0] != len(vocab):
            raise DomainError(
                f"table rows {self.table.shape[0]} != KB vocabulary size {len(vocab)}")

    @property
    def dim(self):
        return self.table.shape[1]

    def score_ids(self, s_id, p_id, o_id):
        if max(s_id, p_id, o_id) >= self.table.shape[0] or min(s_id, p_id, o_id) < 0:
            raise VocabularyError(f"id out of range: ({s_id}, {p_id}, {o_id})")
        return float(np.linalg.norm(self.table[s_id] + self.table[p_id] - self.table[o_id]))

    def score(self, subject, predicate, obj):
        """d(s,p,o) = ||e_s + e_p - e_o||_2; lower is more plausible."""
        return self.score_ids(self.vocab.entity_id(subject),
                              self.vocab.predicate_id(predicate),
                              self.vocab.entity_id(obj))

    def lookup_fact(self, subject, predicate, obj):
        """The three embedding rows (read-only views; the table is frozen
        during question-generation training)."""
        h_s = self.table[self.vocab.entity_id(subject)]
        h_p = self.table[self.vocab.predicate_id(predicate)]
        h_o = self.table[self.vocab.entity_id(obj)]
        for row in (h_s, h_p, h_o):
            row.flags.writeable = False
        return h_s, h_p, h_o

    def save(self, path, extra_meta=None):
        meta = {"vocab": self.vocab.to_jsonable()}
        if extra_meta:
            meta.update(extra_meta)
        return save_checkpoint(path, "transe", {"table": self.table}, meta)

    @classmethod
    def load(cls, path):
        kind, arrays, meta = load_checkpoint(path)
        if kind != "transe":
            raise DomainError(f"{path}: expected a transe checkpoint, got {kind!r}")
        return cls(KbVocabulary.from_jsonable(meta["vocab"]), arrays["table"])


def _normalize_rows(block):
    norms = np.linalg.norm(block, axis=1, keepdims=True)
    np.maximum(norms, 1e-12, out=norms)
    block /= norms


def transe_train(triples, config, vocab=None):
    """Train TransE with per-triple SGD on the margin ranking loss.

    One corrupted sample per triple per epoch (head or tail by a uniform
    coin, resampled while the corruption is itself a true triple); entity
    rows are renormalized to unit norm at the end of every epoch.
    Deterministic given the seed. Returns (model, per-epoch loss list).
    """
    if not triples:
        raise DomainError("transe_train: empty triple set")
    if config.margin <= 0:
        raise DomainError(f"margin must be positive, got {config.margin}")
    if vocab is None:
        vocab = KbVocabulary.from_triples(triples)

    rng = np.random.default_rng(config.seed)
    n_ent = vocab.n_entities
    bound = 6.0 / np.sqrt(config.dim)
    table = rng.uniform(-bound, bound, size=(len(vocab), config.dim))
    _normalize_rows(table)

    ids = np.array(
        [(vocab.entity_id(s), vocab.predicate_id(p), vocab.entity_id(o))
         for s, p, o in triples], dtype=np.int64)
    true_set = {tuple(row) for row in ids}

    # Fixed negatives for the reported loss curve, so the curve is not
    # dominated by sampling noise.
    eval_neg = np.array([_corrupt(row, n_ent, true_set, rng) for row in ids])

    losses = []
    for _ in range(config.epochs):
        for idx in rng.permutation(len(ids)):
            negative = _corrupt(ids[idx], n_ent, true_set, rng)
            hinge_sgd_step(table, tuple(ids[idx]), negative,
                           config.margin, config.learning_rate)
        _normalize_rows(table[:n_ent])
        losses.append(_hinge_loss(table, ids, eval_neg, config.margin))
    return TransEModel(vocab, table), losses


def hinge_sgd_step(table, positive, negative, margin, lr):
    """One SGD step on max(0, margin + d(pos) - d(neg)).

    Returns True when the hinge was active (an update happened)."""
    s, p, o = positive
    s2, p2, o2 = negative
    diff_pos = table[s] + table[p] - table[o]
    diff_neg = table[s2] + table[p2] - table[o2]
    d_pos = np.linalg.norm(diff_pos)
    d_neg = np.linalg.norm(diff_neg)
    if margin + d_pos - d_neg <= 0.0:
        return False  # already separated: no gradient
    g_pos = diff_pos / max(d_pos, 1e-12)
    g_neg = diff_neg / max(d_neg, 1e-12)
    table[s] -= lr * g_pos
    table[p] -= lr * (g_pos - g_neg)
    table[o] += lr * g_pos
    table[s2] += lr * g_neg
    table[o2] -= lr * g_neg
    return True


def _corrupt(triple, n_entities, true_set, rng, max_tries=100):
    s, p, o = (int(x) for x in triple)
    for _ in range(max_tries):
        replacement = int(rng.integers(n_entities))
        cand = (replacement, p, o) if rng.random() < 0.5 else (s, p, replacement)
        if cand not in true_set:
            return cand
    return cand


def _hinge_loss(table, pos_ids, neg_ids, margin):
    total = 0.0
    for (s, p, o), (s2, p2, o2) in zip(pos_ids, neg_ids):
        d_pos = np.linalg.norm(table[s] + table[p] - table[o])
        d_neg = np.linalg.norm(table[s2] + table[p2] - table[o2])
        total += max(0.0, margin + d_pos - d_neg)
    return total / len(pos_ids)


def filtered_object_ranks(model, triples):
    """Brute-force rank of each true object among all entities, filtering
    out the other true objects of the same (subject, predicate)."""
    vocab = model.vocab
    ids = [(vocab.entity_id(s), vocab.predicate_id(p), vocab.entity_id(o))
           for s, p, o in triples]
    true_objects = {}
    for s, p, o in ids:
        true_objects.setdefault((s, p), set()).add(o)
    ranks = []
    for s, p, o in ids:
        d_true = model.score_ids(s, p, o)
        exclude = true_objects[(s, p)] - {o}
        better = sum(
            1 for cand in range(vocab.n_entities)
            if cand not in exclude and cand != o and model.score_ids(s, p, cand) < d_true)
        ranks.append(better + 1)
    return ranks


def read_triples(path):
    """One ``subject<TAB>predicate<TAB>object`` triple per line."""
    triples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not all(parts):
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields")
            triples.append(tuple(parts))
    return triples


def write_triples(path, triples):
    with open(path, "w", encoding="utf-8") as fh:
        for s, p, o in triples:
            fh.write(f"{s}\t{p}\t{o}\n")
