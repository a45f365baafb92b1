"""Skip-gram with negative sampling, trained by plain SGD.

Word vectors live in `w_in`, context vectors in `w_out`; the positive
context plus k negatives drawn from the unigram^(3/4) table are updated per
(center, context) pair.  Training is single-threaded and fully determined by
the seed; the dot products `w_in . w_out` approximate PMI - log k over
frequent pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.stats import spearmanr

from .corpus import TRAIN

_LCG_MULT = np.uint64(25214903917)
_LCG_ADD = np.uint64(11)
_SHIFT16 = np.uint64(16)
_MASK32 = np.uint64(0xFFFFFFFF)


@dataclass(frozen=True)
class SgnsConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    subsample: float = 1e-4
    seed: int = 0
    table_size: int = 1_000_000


@dataclass
class SgnsModel:
    w_in: np.ndarray
    w_out: np.ndarray
    config: SgnsConfig
    vocab_ref: str


@dataclass
class FactorizationCheck:
    spearman: float
    median_abs_error: float
    n_pairs: int


def build_unigram_table(counts, power=0.75, table_size=1_000_000):
    """Sampling table where word i owns a share proportional to counts[i]^power."""
    counts = np.asarray(counts, dtype=np.float64)
    weights = np.where(counts > 0, counts**power, 0.0)
    total = weights.sum()
    if total <= 0:
        raise ValueError("all counts are zero")
    cum = np.cumsum(weights / total)
    mids = (np.arange(table_size) + 0.5) / table_size
    table = np.searchsorted(cum, mids, side="left")
    return np.minimum(table, counts.size - 1).astype(np.int32)


def _keep_probabilities(stream_counts, total_tokens, threshold):
    keep = np.ones(stream_counts.size, dtype=np.float64)
    if threshold <= 0 or total_tokens == 0:
        return keep
    freq = stream_counts / float(total_tokens)
    seen = freq > 0
    ratio = threshold / freq[seen]
    keep[seen] = np.minimum((np.sqrt(1.0 / ratio) + 1.0) * ratio, 1.0)
    return keep


@njit(cache=True)
def _draw_negatives(table, n, seed):
    out = np.empty(n, dtype=np.int32)
    state = np.uint64(seed) * _LCG_MULT + _LCG_ADD
    tsize = np.uint64(table.size)
    for i in range(n):
        state = state * _LCG_MULT + _LCG_ADD
        out[i] = table[int((state >> _SHIFT16) % tsize)]
    return out


@njit(cache=True)
def _train_kernel(
    tokens,
    offsets,
    keep_prob,
    table,
    w_in,
    w_out,
    window,
    negatives,
    epochs,
    lr0,
    seed,
    max_doc_len,
):
    dim = w_in.shape[1]
    neu = np.zeros(dim, dtype=np.float64)
    sen = np.empty(max_doc_len, dtype=np.int32)
    state = np.uint64(seed) * _LCG_MULT + np.uint64(2531011)
    tsize = np.uint64(table.size)
    n_docs = offsets.size - 1
    total = float(tokens.size) * epochs
    processed = 0
    lr = lr0
    min_lr = lr0 * 1e-4

    for _ep in range(epochs):
        for di in range(n_docs):
            start = offsets[di]
            end = offsets[di + 1]
            sen_len = 0
            for pos in range(start, end):
                wid = tokens[pos]
                processed += 1
                kp = keep_prob[wid]
                if kp < 1.0:
                    state = state * _LCG_MULT + _LCG_ADD
                    u = float((state >> _SHIFT16) & _MASK32) / 4294967296.0
                    if u > kp:
                        continue
                sen[sen_len] = wid
                sen_len += 1
            if sen_len == 0:
                continue
            lr = lr0 * (1.0 - processed / (total + 1.0))
            if lr < min_lr:
                lr = min_lr
            for i in range(sen_len):
                center = sen[i]
                lo = i - window
                if lo < 0:
                    lo = 0
                hi = i + window
                if hi > sen_len - 1:
                    hi = sen_len - 1
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    ctx = sen[j]
                    for dd in range(dim):
                        neu[dd] = 0.0
                    for nidx in range(negatives + 1):
                        if nidx == 0:
                            target = ctx
                            label = 1.0
                        else:
                            state = state * _LCG_MULT + _LCG_ADD
                            target = table[int((state >> _SHIFT16) % tsize)]
                            if target == ctx:
                                continue
                            label = 0.0
                        f = 0.0
                        for dd in range(dim):
                            f += float(w_in[center, dd]) * float(w_out[target, dd])
                        if f > 30.0:
                            sig = 1.0
                        elif f < -30.0:
                            sig = 0.0
                        else:
                            sig = 1.0 / (1.0 + math.exp(-f))
                        g = (label - sig) * lr
                        for dd in range(dim):
                            neu[dd] += g * w_out[target, dd]
                            w_out[target, dd] += g * w_in[center, dd]
                    for dd in range(dim):
                        w_in[center, dd] += neu[dd]


def _token_stream(corpus, vocab):
    word_ids = vocab.word_ids
    chunks = []
    offsets = [0]
    n = 0
    for doc in corpus.documents:
        ids = [word_ids[t] for t in doc.tokens if t in word_ids]
        chunks.extend(ids)
        n += len(ids)
        offsets.append(n)
    tokens = np.asarray(chunks, dtype=np.int32)
    return tokens, np.asarray(offsets, dtype=np.int64)


def train_sgns(corpus, vocab, config=SgnsConfig()):
    """Train word and context vectors; deterministic for a fixed seed."""
    if corpus.split != TRAIN:
        raise ValueError("SGNS is trained on the training split")
    if not corpus.documents:
        raise ValueError("empty corpus")
    if config.dim < 1:
        raise ValueError("dim must be >= 1")
    if config.negatives < 1:
        raise ValueError("negatives must be >= 1")

    n_words = len(vocab)
    rng = np.random.default_rng(config.seed)
    w_in = ((rng.random((n_words, config.dim)) - 0.5) / config.dim).astype(np.float32)
    w_out = np.zeros((n_words, config.dim), dtype=np.float32)

    tokens, offsets = _token_stream(corpus, vocab)
    if config.epochs > 0 and tokens.size > 0:
        stream_counts = np.bincount(tokens, minlength=n_words).astype(np.float64)
        keep_prob = _keep_probabilities(stream_counts, tokens.size, config.subsample)
        table = build_unigram_table(stream_counts, table_size=config.table_size)
        max_doc_len = int(np.diff(offsets).max())
        _train_kernel(
            tokens,
            offsets,
            keep_prob,
            table,
            w_in,
            w_out,
            config.window,
            config.negatives,
            config.epochs,
            config.learning_rate,
            config.seed,
            max_doc_len,
        )
    if not (np.isfinite(w_in).all() and np.isfinite(w_out).all()):
        raise FloatingPointError("SGNS training diverged (NaN/Inf in vectors)")
    return SgnsModel(w_in, w_out, config, vocab.fingerprint())


def pair_objective(w, c_pos, c_negs):
    """Negative-sampling log-likelihood of one (word, context, negatives) tuple."""
    def log_sigmoid(x):
        return -math.log1p(math.exp(-x)) if x >= 0 else x - math.log1p(math.exp(x))

    value = log_sigmoid(float(np.dot(w, c_pos)))
    for c in c_negs:
        value += log_sigmoid(-float(np.dot(w, c)))
    return value


def pair_gradients(w, c_pos, c_negs):
    """Analytic gradients of pair_objective w.r.t. (w, c_pos, each c_neg)."""
    def sigmoid(x):
        return 1.0 / (1.0 + math.exp(-x))

    w = np.asarray(w, dtype=np.float64)
    c_pos = np.asarray(c_pos, dtype=np.float64)
    g_pos_coef = 1.0 - sigmoid(float(np.dot(w, c_pos)))
    grad_w = g_pos_coef * c_pos
    grad_pos = g_pos_coef * w
    grad_negs = []
    for c in c_negs:
        c = np.asarray(c, dtype=np.float64)
        coef = -sigmoid(float(np.dot(w, c)))
        grad_w = grad_w + coef * c
        grad_negs.append(coef * w)
    return grad_w, grad_pos, grad_negs


def check_implicit_factorization(model, counts, k=5.0, min_pair_count=1):
    """Compare w_in . w_out against PMI - ln k over sufficiently frequent pairs.

    Returns the Spearman correlation and the median absolute error; raises
    when fewer than 10 pairs meet the count threshold.
    """
    if model.vocab_ref != counts.vocab_ref:
        raise ValueError("model and counts were built from different vocabularies")
    coo = counts.matrix.tocoo()
    mask = coo.data >= min_pair_count
    rows = coo.row[mask]
    cols = coo.col[mask]
    data = coo.data[mask].astype(np.float64)
    if rows.size < 10:
        raise ValueError(f"only {rows.size} pairs with count >= {min_pair_count}")
    wm = counts.word_marginal.astype(np.float64)
    cm = counts.ctx_marginal.astype(np.float64)
    target = np.log(data * counts.total_pairs / (wm[rows] * cm[cols])) - math.log(k)
    dots = np.einsum(
        "ij,ij->i",
        model.w_in[rows].astype(np.float64),
        model.w_out[cols].astype(np.float64),
    )
    rho = spearmanr(dots, target).statistic
    return FactorizationCheck(
        spearman=float(rho),
        median_abs_error=float(np.median(np.abs(dots - target))),
        n_pairs=int(rows.size),
    )
