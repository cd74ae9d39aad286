"""The retrieval baselines: SELECT, R-TransE and TF-IDF/LSA retrieval.

Each baseline returns an index into its training fold; surface
realization (placeholder refill / deannotation with the input fact's
contexts) happens in the harness so that all systems share one path. The
neural encoder-decoder baseline is ``QGModel(use_contexts=False)``.
"""

from collections import Counter

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import DomainError, RetrievalError

LSA_MAX_RANK = 300


def select_baseline(sample, train_samples, setup, seed):
    """Pick a training fact sharing the input's obj-type (predicate setup)
    or predicate (type setups); empty pools fall back to the whole fold."""
    if not train_samples:
        raise DomainError("select_baseline: empty training fold")
    if setup == "predicate":
        pool = [i for i, t in enumerate(train_samples) if t.obj_type == sample.obj_type]
    elif setup in ("sub_type", "obj_type"):
        pool = [i for i, t in enumerate(train_samples) if t.predicate == sample.predicate]
    else:
        raise DomainError(f"unknown setup {setup!r}")
    if not pool:
        pool = list(range(len(train_samples)))
    rng = np.random.default_rng(seed)
    return pool[int(rng.integers(len(pool)))]


def _cosine_argmax(matrix, query):
    qnorm = float(np.linalg.norm(query))
    if qnorm == 0.0:
        raise RetrievalError("zero-norm query vector")
    norms = np.linalg.norm(matrix, axis=1)
    sims = (matrix @ query) / (np.maximum(norms, 1e-12) * qnorm)
    return int(np.argmax(sims))


class TransEIndex:
    """Nearest training fact by cosine over [e_s; e_p; e_o]."""

    def __init__(self, vectors, sample_ids):
        self.vectors = np.asarray(vectors, dtype=np.float64)
        self.sample_ids = list(sample_ids)
        if self.vectors.shape[0] != len(self.sample_ids):
            raise DomainError("index rows do not match sample ids")

    @classmethod
    def build(cls, train_samples, kb_model, sample_ids=None):
        if not train_samples:
            raise DomainError("TransEIndex over an empty training fold")
        vectors = np.stack([cls.fact_vector(s, kb_model) for s in train_samples])
        return cls(vectors, sample_ids if sample_ids is not None
                   else list(range(len(train_samples))))

    @staticmethod
    def fact_vector(sample, kb_model):
        h_s, h_p, h_o = kb_model.lookup_fact(sample.subject, sample.predicate, sample.obj)
        return np.concatenate([h_s, h_p, h_o])

    def retrieve(self, sample, kb_model):
        """Position of the nearest neighbour within the index."""
        return _cosine_argmax(self.vectors, self.fact_vector(sample, kb_model))

    def save(self, path):
        return save_checkpoint(path, "r-transe-index", {"vectors": self.vectors},
                               {"sample_ids": self.sample_ids})

    @classmethod
    def load(cls, path):
        kind, arrays, meta = load_checkpoint(path)
        if kind != "r-transe-index":
            raise DomainError(f"{path}: expected r-transe-index, got {kind!r}")
        return cls(arrays["vectors"], meta["sample_ids"])


class TfidfLsaIndex:
    """TF-IDF document vectors reduced by truncated SVD, cosine retrieval.

    idf uses the smooth form ln((1+N)/(1+df)) + 1. The LSA rank is
    min(300, #features-1, #documents-1). Queries that project to zero fall
    back to the most frequent training document, flagged.
    """

    def __init__(self, terms, idf, components, doc_vecs, sample_ids, fallback_doc):
        self.terms = list(terms)
        self.term_ids = {t: i for i, t in enumerate(self.terms)}
        self.idf = np.asarray(idf, dtype=np.float64)
        self.components = np.asarray(components, dtype=np.float64)
        self.doc_vecs = np.asarray(doc_vecs, dtype=np.float64)
        self.sample_ids = list(sample_ids)
        self.fallback_doc = int(fallback_doc)

    @classmethod
    def build(cls, documents, sample_ids=None, max_rank=LSA_MAX_RANK):
        """``documents``: token lists (one per training sample)."""
        if not documents:
            raise DomainError("TfidfLsaIndex over an empty document set")
        terms = sorted({tok for doc in documents for tok in doc})
        if not terms:
            raise DomainError("TfidfLsaIndex: no terms in any document")
        term_ids = {t: i for i, t in enumerate(terms)}
        n_docs = len(documents)
        df = np.zeros(len(terms))
        for doc in documents:
            for term in set(doc):
                df[term_ids[term]] += 1
        idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0

        matrix = np.zeros((n_docs, len(terms)))
        for i, doc in enumerate(documents):
            for term, count in Counter(doc).items():
                matrix[i, term_ids[term]] = count * idf[term_ids[term]]

        rank = max(1, min(max_rank, len(terms) - 1, n_docs - 1))
        _, _, vt = np.linalg.svd(matrix, full_matrices=False)
        components = vt[:rank]
        doc_vecs = matrix @ components.T

        # fallback: most frequent exact document, ties lexicographic
        counts = Counter(tuple(doc) for doc in documents)
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        fallback = next(i for i, doc in enumerate(documents) if tuple(doc) == best)
        return cls(terms, idf, components, doc_vecs,
                   sample_ids if sample_ids is not None else list(range(n_docs)),
                   fallback)

    def term_vector(self, tokens):
        vec = np.zeros(len(self.terms))
        for term, count in Counter(tokens).items():
            i = self.term_ids.get(term)
            if i is not None:
                vec[i] = count * self.idf[i]
        return vec

    def transform(self, tokens):
        return self.term_vector(tokens) @ self.components.T

    def retrieve(self, tokens):
        """Returns (position, flagged): flagged marks the all-zero-query
        fallback."""
        if not np.any(self.term_vector(tokens)):
            return self.fallback_doc, True
        return _cosine_argmax(self.doc_vecs, self.transform(tokens)), False

    def save(self, path):
        arrays = {"idf": self.idf, "components": self.components,
                  "doc_vecs": self.doc_vecs}
        meta = {"terms": self.terms, "sample_ids": self.sample_ids,
                "fallback_doc": self.fallback_doc}
        return save_checkpoint(path, "tfidf-lsa-index", arrays, meta)

    @classmethod
    def load(cls, path):
        kind, arrays, meta = load_checkpoint(path)
        if kind != "tfidf-lsa-index":
            raise DomainError(f"{path}: expected tfidf-lsa-index, got {kind!r}")
        return cls(meta["terms"], arrays["idf"], arrays["components"],
                   arrays["doc_vecs"], meta["sample_ids"], meta["fallback_doc"])


def ir_query_tokens(sample, use_copy):
    """The concatenated textual contexts of the input fact, in the same
    (raw or copy-annotated) space as the indexed questions."""
    from .dataset import context_tokens_for
    tokens = []
    for ctx in context_tokens_for(sample, use_copy):
        tokens.extend(ctx)
    return tokens
