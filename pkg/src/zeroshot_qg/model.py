"""The question-generation encoder-decoder.

A frozen KB-embedding lookup encodes the fact; three per-context GRUs
encode the textual contexts with a word table shared with the decoder;
two attention modules (one over the three fact vectors, one softmax over
all tokens of all contexts) feed every decoder GRU step; the decoder
emits vocabulary words, markers and copy tokens. With
``use_contexts=False`` the context path disappears entirely, which is the
single-placeholder encoder-decoder baseline.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import DimensionError, DomainError, ParseError
from .neural import (
    AttentionWeights,
    GruWeights,
    ParameterSet,
    RmsProp,
    anneal,
    attend,
    attend_backward,
    clip_gradients,
    gru_cell,
    gru_cell_backward,
    softmax,
)
from .textproc import Vocabulary

log = logging.getLogger(__name__)


@dataclass
class ModelConfig:
    kb_dim: int = 200
    ctx_dim: int = 200
    dec_dim: int = 500
    word_dim: int = 100
    vocab_size: int = 30000
    max_decode_len: int = 30
    beam_width: int = 1
    seed: int = 0
    use_contexts: bool = True
    init_scale: float = 0.1

    def __post_init__(self):
        for name in ("kb_dim", "ctx_dim", "dec_dim", "word_dim", "vocab_size",
                     "max_decode_len", "beam_width"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")

    def to_jsonable(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_jsonable(cls, data):
        return cls(**data)


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 200
    learning_rate: float = 0.001
    lr_decay: float = 0.99
    min_learning_rate: float = 1e-5
    grad_clip: float = 0.1
    seed: int = 0
    select_by_valid_bleu: bool = True


@dataclass
class EncodedSample:
    """One vocabulary/KB-encoded training sample."""

    kb_ids: tuple                 # (subject, predicate, object) rows in the KB table
    context_ids: tuple            # three lists of word ids (annotated contexts)
    target_ids: list              # decoder targets, ending with EOS


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    valid_loss: float = None
    valid_bleu4: float = None
    learning_rate: float = None


def load_pretrained_words(path, dim):
    """GloVe-style text vectors: ``word v1 .. v_dim`` per line."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ParseError(
                    f"{path}:{lineno}: expected a word + {dim} values, got {len(parts)} fields")
            table[parts[0]] = np.array([float(v) for v in parts[1:]])
    return table


class QGModel:
    def __init__(self, config, vocab, kb_model, pretrained_words=None):
        if config.kb_dim != kb_model.dim:
            raise DimensionError(
                f"config kb_dim {config.kb_dim} != KB embedding size {kb_model.dim}")
        self.config = config
        self.vocab = vocab
        self.kb = kb_model

        rng = np.random.default_rng(config.seed)
        params = ParameterSet()
        scale = config.init_scale
        n_vocab = len(vocab)

        # One storage for the decoder and context-encoder word embeddings.
        self.word_emb = params.uniform("word_emb", (n_vocab, config.word_dim), rng, scale)
        if pretrained_words:
            hits = 0
            for word, vec in pretrained_words.items():
                if word in vocab:
                    self.word_emb.value[vocab.encode(word)] = vec
                    hits += 1
            log.info("initialized %d/%d word vectors from pretrained file", hits, n_vocab)

        if config.use_contexts:
            self.encoders = [
                GruWeights(params, f"enc{j}", config.word_dim, config.ctx_dim, None, rng, scale)
                for j in range(3)]
            self.ctx_att = AttentionWeights(
                params, "ctx_att", config.dec_dim, config.ctx_dim, config.ctx_dim, rng, scale)
        else:
            self.encoders = []
            self.ctx_att = None
        self.fact_att = AttentionWeights(
            params, "fact_att", config.dec_dim, config.kb_dim, config.kb_dim, rng, scale)

        att_dim = config.kb_dim + (config.ctx_dim if config.use_contexts else 0)
        self.decoder = GruWeights(
            params, "dec", config.word_dim, config.dec_dim, att_dim, rng, scale)

        init_in = 3 * config.kb_dim + (3 * config.ctx_dim if config.use_contexts else 0)
        self.init_proj = params.uniform("init_proj", (config.dec_dim, init_in), rng, scale)
        self.init_b = params.zeros("init_b", (config.dec_dim,))
        self.out_proj = params.uniform("out_proj", (n_vocab, config.dec_dim), rng, scale)
        self.params = params

    # ------------------------------------------------------------ encoding

    def encode_fact(self, kb_ids):
        """The three frozen embedding rows and their concatenation."""
        rows = np.stack([self.kb.table[i] for i in kb_ids])
        return rows, rows.reshape(-1)

    def encode_contexts(self, context_ids):
        """Run each context GRU left-to-right from a zero state.

        Returns (per-context state lists, concatenated final states,
        caches). Empty contexts are encoded as a single PAD token."""
        all_states = []
        caches = []
        for j, ids in enumerate(context_ids):
            ids = list(ids) if ids else [self.vocab.pad_id]
            h = np.zeros(self.config.ctx_dim)
            states = []
            step_caches = []
            for token_id in ids:
                h, cache = gru_cell(self.word_emb.value[token_id], h, None, self.encoders[j])
                states.append(h)
                step_caches.append((token_id, cache))
            all_states.append(states)
            caches.append(step_caches)
        h_c = np.concatenate([states[-1] for states in all_states])
        return all_states, h_c, caches

    def _initial_state(self, h_f, h_c):
        init_in = np.concatenate([h_f, h_c]) if h_c is not None else h_f
        s0 = np.tanh(self.init_proj.value @ init_in + self.init_b.value)
        return s0, init_in

    def init_state(self, kb_ids, context_ids):
        """First decoder state: tanh affine of [encoded fact; encoded
        contexts], projecting 3*kb_dim + 3*ctx_dim down to the decoder
        size."""
        _, h_f = self.encode_fact(kb_ids)
        h_c = None
        if self.config.use_contexts:
            _, h_c, _ = self.encode_contexts(context_ids)
        return self._initial_state(h_f, h_c)[0]

    # ------------------------------------------------------------- forward

    def decoder_step(self, y_prev, s_prev, fact_keys, ctx_keys):
        """Attention (computed from s_prev), one decoder GRU step, and the
        output distribution. Returns (s_new, probs, cache)."""
        alpha_f, a_f, f_cache = attend(fact_keys, s_prev, self.fact_att)
        if self.config.use_contexts:
            alpha_c, a_c, c_cache = attend(ctx_keys, s_prev, self.ctx_att)
            att = np.concatenate([a_f, a_c])
        else:
            alpha_c, c_cache = None, None
            att = a_f
        x = self.word_emb.value[y_prev]
        s_new, g_cache = gru_cell(x, s_prev, att, self.decoder)
        probs = softmax(self.out_proj.value @ s_new)
        cache = (y_prev, f_cache, c_cache, g_cache, s_new, probs)
        return s_new, probs, (alpha_f, alpha_c), cache

    def forward_sample(self, sample):
        """Teacher-forced forward pass; returns (loss, cache) where loss is
        the summed per-step NLL."""
        if not sample.target_ids:
            raise DomainError("sample with empty target sequence")
        fact_keys, h_f = self.encode_fact(sample.kb_ids)
        ctx_states = h_c = enc_caches = ctx_keys = None
        if self.config.use_contexts:
            ctx_states, h_c, enc_caches = self.encode_contexts(sample.context_ids)
            ctx_keys = np.vstack([h for states in ctx_states for h in states])
        s, init_in = self._initial_state(h_f, h_c)
        s0 = s

        loss = 0.0
        y_prev = self.vocab.sos_id
        steps = []
        for target in sample.target_ids:
            s, probs, _, cache = self.decoder_step(y_prev, s, fact_keys, ctx_keys)
            loss -= np.log(max(probs[target], 1e-300))
            steps.append((cache, target))
            y_prev = target  # teacher forcing
        forward_cache = (fact_keys, ctx_states, enc_caches, ctx_keys, s0, init_in, steps)
        return loss, forward_cache

    # ------------------------------------------------------------ backward

    def backward_sample(self, forward_cache, scale=1.0):
        """Accumulate gradients of ``scale * loss`` into the parameters."""
        fact_keys, ctx_states, enc_caches, ctx_keys, s0, init_in, steps = forward_cache
        cfg = self.config
        kb_dim = cfg.kb_dim

        d_ctx_keys = np.zeros_like(ctx_keys) if ctx_keys is not None else None
        d_s = np.zeros(cfg.dec_dim)
        for (y_prev, f_cache, c_cache, g_cache, s_new, probs), target in reversed(steps):
            d_logits = probs * scale
            d_logits[target] -= scale
            self.out_proj.grad += np.outer(d_logits, s_new)
            d_s += self.out_proj.value.T @ d_logits
            d_x, d_s_prev, d_att = gru_cell_backward(d_s, g_cache, self.decoder)
            self.word_emb.grad[y_prev] += d_x
            d_keys, d_q = attend_backward(d_att[:kb_dim], f_cache, self.fact_att)
            d_s_prev += d_q  # fact rows are frozen: d_keys is dropped
            if cfg.use_contexts:
                d_keys, d_q = attend_backward(d_att[kb_dim:], c_cache, self.ctx_att)
                d_ctx_keys += d_keys
                d_s_prev += d_q
            d_s = d_s_prev

        # s0 = tanh(init_proj @ init_in + init_b)
        d_pre = d_s * (1.0 - s0 * s0)
        self.init_proj.grad += np.outer(d_pre, init_in)
        self.init_b.grad += d_pre
        d_init_in = self.init_proj.value.T @ d_pre

        if cfg.use_contexts:
            # gradient into the concatenated final states, then BPTT per context
            d_h_c = d_init_in[3 * kb_dim:]
            offset = 0
            for j, states in enumerate(ctx_states):
                n = len(states)
                d_states = d_ctx_keys[offset:offset + n].copy()
                offset += n
                d_states[-1] += d_h_c[j * cfg.ctx_dim:(j + 1) * cfg.ctx_dim]
                d_h = np.zeros(cfg.ctx_dim)
                for i in range(n - 1, -1, -1):
                    token_id, cache = enc_caches[j][i]
                    d_x, d_h, _ = gru_cell_backward(d_states[i] + d_h, cache, self.encoders[j])
                    self.word_emb.grad[token_id] += d_x

    # ------------------------------------------------------------ training

    def loss_on(self, samples):
        """Mean over samples of the summed per-step NLL (no gradients)."""
        if not samples:
            raise DomainError("loss over an empty sample list")
        return sum(self.forward_sample(s)[0] for s in samples) / len(samples)

    def token_accuracy(self, samples):
        """Teacher-forced next-token accuracy."""
        hits = total = 0
        for sample in samples:
            _, cache = self.forward_sample(sample)
            for (_, _, _, _, _, probs), target in cache[-1]:
                hits += int(np.argmax(probs) == target)
                total += 1
        return hits / total if total else 0.0

    def train(self, train_samples, valid_samples=None, train_config=None):
        """Mini-batch RMSProp training with gradient clipping.

        Loss is summed over time steps and averaged over the samples of a
        batch. The learning rate decays per epoch. When a validation set
        is given, the parameters with the best validation BLEU-4 (greedy
        decode) are restored at the end. Returns a list of EpochStats.
        """
        from .metrics import bleu  # local import: metrics is a leaf module

        tcfg = train_config or TrainConfig()
        if not train_samples:
            raise DomainError("train called with an empty dataset")
        rng = np.random.default_rng(tcfg.seed)
        opt = RmsProp(self.params)
        lr = tcfg.learning_rate
        history = []
        best_bleu = -1.0
        best_values = None

        for epoch in range(tcfg.epochs):
            order = rng.permutation(len(train_samples))
            epoch_loss = 0.0
            for start in range(0, len(order), tcfg.batch_size):
                batch = order[start:start + tcfg.batch_size]
                self.params.zero_grads()
                for idx in batch:
                    loss, cache = self.forward_sample(train_samples[idx])
                    epoch_loss += loss
                    self.backward_sample(cache, scale=1.0 / len(batch))
                clip_gradients(self.params, tcfg.grad_clip)
                opt.step(self.params, lr)
            stats = EpochStats(epoch=epoch,
                               train_loss=epoch_loss / len(train_samples),
                               learning_rate=lr)
            if valid_samples:
                stats.valid_loss = self.loss_on(valid_samples)
                if tcfg.select_by_valid_bleu:
                    candidates = [self.generate(s).tokens for s in valid_samples]
                    references = [self.vocab.decode_all(s.target_ids[:-1])
                                  for s in valid_samples]
                    stats.valid_bleu4 = bleu(candidates, references, max_n=4)
                    if stats.valid_bleu4 > best_bleu:
                        best_bleu = stats.valid_bleu4
                        best_values = self.params.copy_values()
            history.append(stats)
            lr = anneal(lr, tcfg.lr_decay, tcfg.min_learning_rate)

        if best_values is not None:
            self.params.load_arrays(best_values)
        return history

    # ---------------------------------------------------------- generation

    def generate(self, sample, beam_width=None, max_len=None):
        """Decode a question for one sample (greedy when beam_width is 1).

        Beam scores are length-normalized by token count. PAD and SOS are
        never emitted; EOS terminates a hypothesis and is not returned.
        """
        cfg = self.config
        beam_width = beam_width or cfg.beam_width
        max_len = max_len or cfg.max_decode_len
        fact_keys, h_f = self.encode_fact(sample.kb_ids)
        ctx_keys = h_c = None
        if cfg.use_contexts:
            ctx_states, h_c, _ = self.encode_contexts(sample.context_ids)
            ctx_keys = np.vstack([h for states in ctx_states for h in states])
        s0, _ = self._initial_state(h_f, h_c)

        banned = (self.vocab.pad_id, self.vocab.sos_id)
        eos = self.vocab.eos_id
        beams = [(0.0, [], self.vocab.sos_id, s0)]  # (logp, ids, y_prev, state)
        finished = []
        for _ in range(max_len):
            candidates = []
            for logp, ids, y_prev, s in beams:
                s_new, probs, _, _ = self.decoder_step(y_prev, s, fact_keys, ctx_keys)
                logs = np.log(np.maximum(probs, 1e-300))
                order = np.argsort(-logs, kind="stable")[: beam_width + len(banned)]
                for token_id in order:
                    token_id = int(token_id)
                    if token_id in banned:
                        continue
                    candidates.append((logp + logs[token_id], ids + [token_id],
                                       token_id, s_new))
            candidates.sort(key=lambda c: (-c[0], c[1]))
            beams = []
            for cand in candidates:
                if cand[2] == eos:
                    finished.append((cand[0] / len(cand[1]), cand[1][:-1]))
                else:
                    beams.append(cand)
                if len(beams) >= beam_width:
                    break
            if not beams or len(finished) >= beam_width:
                break
        finished.extend((logp / max(len(ids), 1), ids) for logp, ids, _, _ in beams)
        finished.sort(key=lambda c: (-c[0], c[1]))
        best_ids = finished[0][1]
        return GenerationResult(ids=best_ids, tokens=self.vocab.decode_all(best_ids),
                                score=finished[0][0])

    # --------------------------------------------------------- persistence

    def save(self, path):
        meta = {
            "config": self.config.to_jsonable(),
            "vocab": self.vocab.to_list(),
            "kb_rows": int(self.kb.table.shape[0]),
        }
        return save_checkpoint(path, "qg-model", self.params.as_arrays(), meta)

    @classmethod
    def load(cls, path, kb_model):
        kind, arrays, meta = load_checkpoint(path)
        if kind != "qg-model":
            raise DomainError(f"{path}: expected a qg-model checkpoint, got {kind!r}")
        if meta["kb_rows"] != kb_model.table.shape[0]:
            raise DimensionError(
                f"{path}: checkpoint expects a KB table with {meta['kb_rows']} rows, "
                f"got {kb_model.table.shape[0]}")
        config = ModelConfig.from_jsonable(meta["config"])
        model = cls(config, Vocabulary.from_list(meta["vocab"]), kb_model)
        model.params.load_arrays(arrays)
        return model


@dataclass
class GenerationResult:
    ids: list
    tokens: list
    score: float
