"""Dense forward/backward building blocks for the encoder-decoder.

Every operation is a plain function over float64 numpy arrays. Backward
passes are hand-derived; the test suite checks each one against central
finite differences (relative error < 1e-4, eps=1e-5).
"""

import numpy as np

from ..errors import DimensionError, DomainError


def require_finite(arr, what="array"):
    """Raise if an array picked up NaN/Inf (all ops must keep values finite)."""
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} contains non-finite values")
    return arr


def sigmoid(x):
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def affine(x, w, b):
    """w @ x + b for a 1-d input vector."""
    if w.ndim != 2 or x.ndim != 1 or w.shape[1] != x.shape[0]:
        raise DimensionError(f"affine: weight {w.shape} does not accept input {x.shape}")
    if b.shape != (w.shape[0],):
        raise DimensionError(f"affine: bias {b.shape} does not match output ({w.shape[0]},)")
    return w @ x + b


def affine_backward(d_out, x, w):
    """Gradients of ``affine``; returns (d_x, d_w, d_b)."""
    return w.T @ d_out, np.outer(d_out, x), d_out.copy()


def softmax(v):
    """Numerically stable softmax of a 1-d vector (max is subtracted first)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise DomainError("softmax of an empty vector")
    e = np.exp(v - np.max(v))
    return e / e.sum()


class GruWeights:
    """Weight set for one GRU cell.

    Three gates (candidate, update, reset), each with an input matrix, a
    recurrent matrix, a bias, and -- for cells fed an attention vector at
    every step, i.e. the decoder -- an attention matrix.
    """

    def __init__(self, params, prefix, in_dim, hidden_dim, att_dim=None, rng=None, scale=0.1):
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        self.att_dim = att_dim
        for gate in ("cand", "update", "reset"):
            setattr(self, f"{gate}_in",
                    params.uniform(f"{prefix}.{gate}_in", (hidden_dim, in_dim), rng, scale))
            setattr(self, f"{gate}_rec",
                    params.uniform(f"{prefix}.{gate}_rec", (hidden_dim, hidden_dim), rng, scale))
            setattr(self, f"{gate}_b", params.zeros(f"{prefix}.{gate}_b", (hidden_dim,)))
            if att_dim is not None:
                setattr(self, f"{gate}_att",
                        params.uniform(f"{prefix}.{gate}_att", (hidden_dim, att_dim), rng, scale))


def gru_cell(x, h_prev, att, weights):
    """One GRU step; returns (h_new, cache).

    With ``att`` present each gate pre-activation receives an extra
    attention term (decoder form); with ``att=None`` the cell is the plain
    encoder form. h_new = z * h_prev + (1 - z) * cand.
    """
    if x.shape != (weights.in_dim,):
        raise DimensionError(f"gru_cell: input {x.shape} != ({weights.in_dim},)")
    if h_prev.shape != (weights.hidden_dim,):
        raise DimensionError(f"gru_cell: state {h_prev.shape} != ({weights.hidden_dim},)")
    if (att is None) != (weights.att_dim is None):
        raise DimensionError("gru_cell: attention input does not match the weight set")

    pre_r = weights.reset_in.value @ x + weights.reset_rec.value @ h_prev + weights.reset_b.value
    pre_z = weights.update_in.value @ x + weights.update_rec.value @ h_prev + weights.update_b.value
    if att is not None:
        if att.shape != (weights.att_dim,):
            raise DimensionError(f"gru_cell: attention {att.shape} != ({weights.att_dim},)")
        pre_r += weights.reset_att.value @ att
        pre_z += weights.update_att.value @ att
    r = sigmoid(pre_r)
    z = sigmoid(pre_z)
    pre_c = weights.cand_in.value @ x + weights.cand_rec.value @ (r * h_prev) + weights.cand_b.value
    if att is not None:
        pre_c += weights.cand_att.value @ att
    c = np.tanh(pre_c)
    h_new = z * h_prev + (1.0 - z) * c
    return h_new, (x, h_prev, att, r, z, c)


def gru_cell_backward(d_h, cache, weights):
    """Backward of ``gru_cell``.

    Accumulates into the weight gradients and returns
    (d_x, d_h_prev, d_att); d_att is None for the encoder form.
    """
    x, h_prev, att, r, z, c = cache

    d_z = d_h * (h_prev - c)
    d_c = d_h * (1.0 - z)
    d_h_prev = d_h * z

    d_pre_c = d_c * (1.0 - c * c)
    weights.cand_in.grad += np.outer(d_pre_c, x)
    weights.cand_rec.grad += np.outer(d_pre_c, r * h_prev)
    weights.cand_b.grad += d_pre_c
    d_rh = weights.cand_rec.value.T @ d_pre_c
    d_r = d_rh * h_prev
    d_h_prev += d_rh * r
    d_x = weights.cand_in.value.T @ d_pre_c

    d_pre_z = d_z * z * (1.0 - z)
    weights.update_in.grad += np.outer(d_pre_z, x)
    weights.update_rec.grad += np.outer(d_pre_z, h_prev)
    weights.update_b.grad += d_pre_z
    d_x += weights.update_in.value.T @ d_pre_z
    d_h_prev += weights.update_rec.value.T @ d_pre_z

    d_pre_r = d_r * r * (1.0 - r)
    weights.reset_in.grad += np.outer(d_pre_r, x)
    weights.reset_rec.grad += np.outer(d_pre_r, h_prev)
    weights.reset_b.grad += d_pre_r
    d_x += weights.reset_in.value.T @ d_pre_r
    d_h_prev += weights.reset_rec.value.T @ d_pre_r

    d_att = None
    if att is not None:
        weights.cand_att.grad += np.outer(d_pre_c, att)
        weights.update_att.grad += np.outer(d_pre_z, att)
        weights.reset_att.grad += np.outer(d_pre_r, att)
        d_att = (weights.cand_att.value.T @ d_pre_c
                 + weights.update_att.value.T @ d_pre_z
                 + weights.reset_att.value.T @ d_pre_r)
    return d_x, d_h_prev, d_att


class AttentionWeights:
    """score_vec' tanh(query_proj @ s + key_proj @ h_i) scoring parameters."""

    def __init__(self, params, prefix, query_dim, key_dim, att_dim, rng, scale=0.1):
        self.query_dim = query_dim
        self.key_dim = key_dim
        self.att_dim = att_dim
        self.query_proj = params.uniform(f"{prefix}.query_proj", (att_dim, query_dim), rng, scale)
        self.key_proj = params.uniform(f"{prefix}.key_proj", (att_dim, key_dim), rng, scale)
        self.score_vec = params.uniform(f"{prefix}.score_vec", (att_dim,), rng, scale)


def attend(keys, s_prev, weights):
    """Soft attention over ``keys`` (one row per input vector).

    Returns (alpha, summary, cache): alpha is the softmax weight vector,
    summary the alpha-weighted sum of the rows.
    """
    keys = np.atleast_2d(keys)
    if keys.shape[0] < 1:
        raise DomainError("attend: no input vectors")
    if keys.shape[1] != weights.key_dim:
        raise DimensionError(f"attend: keys {keys.shape} != key dim {weights.key_dim}")
    if s_prev.shape != (weights.query_dim,):
        raise DimensionError(f"attend: query {s_prev.shape} != ({weights.query_dim},)")
    q = weights.query_proj.value @ s_prev
    m = np.tanh(q[None, :] + keys @ weights.key_proj.value.T)
    scores = m @ weights.score_vec.value
    alpha = softmax(scores)
    summary = alpha @ keys
    return alpha, summary, (keys, s_prev, m, alpha)


def attend_backward(d_summary, cache, weights):
    """Backward of ``attend``; returns (d_keys, d_s_prev)."""
    keys, s_prev, m, alpha = cache
    d_alpha = keys @ d_summary
    d_keys = np.outer(alpha, d_summary)
    d_scores = alpha * (d_alpha - alpha @ d_alpha)
    weights.score_vec.grad += m.T @ d_scores
    d_pre = np.outer(d_scores, weights.score_vec.value) * (1.0 - m * m)
    col = d_pre.sum(axis=0)
    weights.query_proj.grad += np.outer(col, s_prev)
    weights.key_proj.grad += d_pre.T @ keys
    d_keys += d_pre @ weights.key_proj.value
    return d_keys, weights.query_proj.value.T @ col


def nll_loss(prob_sequences, target_token_ids):
    """Negative log-likelihood: sum over time steps, mean over batch samples.

    ``prob_sequences``: per sample, a list of probability vectors (one per
    step). ``target_token_ids``: matching lists of vocabulary indices.
    """
    if len(prob_sequences) == 0:
        raise DomainError("nll_loss over an empty batch")
    if len(prob_sequences) != len(target_token_ids):
        raise DimensionError(
            f"nll_loss: {len(prob_sequences)} sequences vs {len(target_token_ids)} target lists")
    total = 0.0
    for probs, targets in zip(prob_sequences, target_token_ids):
        if len(probs) != len(targets):
            raise DimensionError(
                f"nll_loss: {len(probs)} steps vs {len(targets)} targets in one sample")
        for p, t in zip(probs, targets):
            t = int(t)
            if t < 0 or t >= p.shape[0]:
                raise IndexError(f"target id {t} outside vocabulary of size {p.shape[0]}")
            total -= np.log(p[t])
    return total / len(prob_sequences)
