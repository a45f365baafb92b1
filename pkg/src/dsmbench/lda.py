"""Latent Dirichlet allocation via collapsed Gibbs sampling.

The sampler integrates out the topic mixtures and topic-word distributions
and resamples one token's topic assignment at a time.  Document features are
the per-document topic mixture: the posterior mode when alpha > 1, otherwise
the smoothed posterior mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .corpus import TRAIN

_LCG_MULT = np.uint64(25214903917)
_LCG_ADD = np.uint64(11)
_SHIFT16 = np.uint64(16)
_MASK32 = np.uint64(0xFFFFFFFF)


@dataclass(frozen=True)
class LdaConfig:
    topics: int = 50
    alpha: float | None = None  # None -> 50 / topics
    beta: float = 0.01
    iterations: int = 200
    seed: int = 0


@dataclass
class LdaModel:
    phi: np.ndarray
    topics: int
    alpha: float
    beta: float
    doc_topic_counts: np.ndarray
    doc_lengths: np.ndarray
    assignments: np.ndarray
    seed: int
    vocab_ref: str


@dataclass
class ThetaFeatures:
    matrix: np.ndarray
    labels: list
    skipped: int = 0


@njit(cache=True)
def _gibbs_train(tokens, doc_ids, n_topics, n_words, alpha, beta, iterations, seed,
                 n_dk, n_kw, n_k, z):
    state = np.uint64(seed) * _LCG_MULT + np.uint64(1442695040888963407)
    n_tokens = tokens.size
    for i in range(n_tokens):
        state = state * _LCG_MULT + _LCG_ADD
        k = int((state >> _SHIFT16) % np.uint64(n_topics))
        z[i] = k
        n_dk[doc_ids[i], k] += 1
        n_kw[k, tokens[i]] += 1
        n_k[k] += 1
    cum = np.empty(n_topics, dtype=np.float64)
    vbeta = n_words * beta
    for _it in range(iterations):
        for i in range(n_tokens):
            w = tokens[i]
            d = doc_ids[i]
            k = z[i]
            n_dk[d, k] -= 1
            n_kw[k, w] -= 1
            n_k[k] -= 1
            total = 0.0
            for kk in range(n_topics):
                total += (n_dk[d, kk] + alpha) * (n_kw[kk, w] + beta) / (n_k[kk] + vbeta)
                cum[kk] = total
            state = state * _LCG_MULT + _LCG_ADD
            u = float((state >> _SHIFT16) & _MASK32) / 4294967296.0 * total
            k = 0
            while k < n_topics - 1 and cum[k] < u:
                k += 1
            z[i] = k
            n_dk[d, k] += 1
            n_kw[k, w] += 1
            n_k[k] += 1


@njit(cache=True)
def _gibbs_infer(tokens, phi, alpha, iterations, seed, n_k_doc):
    n_topics = phi.shape[0]
    state = np.uint64(seed) * _LCG_MULT + np.uint64(6364136223846793005)
    n_tokens = tokens.size
    z = np.empty(n_tokens, dtype=np.int32)
    for i in range(n_tokens):
        state = state * _LCG_MULT + _LCG_ADD
        k = int((state >> _SHIFT16) % np.uint64(n_topics))
        z[i] = k
        n_k_doc[k] += 1
    cum = np.empty(n_topics, dtype=np.float64)
    for _it in range(iterations):
        for i in range(n_tokens):
            w = tokens[i]
            k = z[i]
            n_k_doc[k] -= 1
            total = 0.0
            for kk in range(n_topics):
                total += (n_k_doc[kk] + alpha) * phi[kk, w]
                cum[kk] = total
            state = state * _LCG_MULT + _LCG_ADD
            u = float((state >> _SHIFT16) & _MASK32) / 4294967296.0 * total
            k = 0
            while k < n_topics - 1 and cum[k] < u:
                k += 1
            z[i] = k
            n_k_doc[k] += 1


def _resolve_alpha(config):
    return 50.0 / config.topics if config.alpha is None else float(config.alpha)


def train_lda(corpus, vocab, config=LdaConfig()):
    """Run the collapsed Gibbs chain over the training corpus."""
    if corpus.split != TRAIN:
        raise ValueError("LDA is trained on the training split")
    if not corpus.documents:
        raise ValueError("empty corpus")
    if config.topics < 1:
        raise ValueError("topics must be >= 1")
    if config.iterations < 1:
        raise ValueError("iterations must be >= 1")
    alpha = _resolve_alpha(config)
    if alpha <= 0 or config.beta <= 0:
        raise ValueError("alpha and beta must be positive")

    word_ids = vocab.word_ids
    tok_chunks, doc_chunks = [], []
    for di, doc in enumerate(corpus.documents):
        ids = [word_ids[t] for t in doc.tokens if t in word_ids]
        tok_chunks.extend(ids)
        doc_chunks.extend([di] * len(ids))
    tokens = np.asarray(tok_chunks, dtype=np.int32)
    doc_ids = np.asarray(doc_chunks, dtype=np.int32)

    n_docs = len(corpus.documents)
    n_topics = config.topics
    n_words = len(vocab)
    n_dk = np.zeros((n_docs, n_topics), dtype=np.int64)
    n_kw = np.zeros((n_topics, n_words), dtype=np.int64)
    n_k = np.zeros(n_topics, dtype=np.int64)
    z = np.empty(tokens.size, dtype=np.int32)
    if tokens.size:
        _gibbs_train(
            tokens, doc_ids, n_topics, n_words, alpha, config.beta,
            config.iterations, config.seed, n_dk, n_kw, n_k, z,
        )
    phi = (n_kw + config.beta) / (n_k + n_words * config.beta)[:, np.newaxis]
    doc_lengths = n_dk.sum(axis=1)
    return LdaModel(
        phi=phi,
        topics=n_topics,
        alpha=alpha,
        beta=config.beta,
        doc_topic_counts=n_dk,
        doc_lengths=doc_lengths,
        assignments=z,
        seed=config.seed,
        vocab_ref=vocab.fingerprint(),
    )


def _theta_rows(n_dk, alpha, n_topics):
    n_d = n_dk.sum(axis=-1, keepdims=True)
    if alpha > 1.0:
        return (n_dk + (alpha - 1.0)) / (n_d + n_topics * (alpha - 1.0))
    return (n_dk + alpha) / (n_d + n_topics * alpha)


def theta_features(model, corpus):
    """Topic-mixture features for the training corpus, row-aligned."""
    if len(corpus.documents) != model.doc_topic_counts.shape[0]:
        raise ValueError("corpus does not match the trained document count")
    matrix = _theta_rows(
        model.doc_topic_counts.astype(np.float64), model.alpha, model.topics
    )
    skipped = int((model.doc_lengths == 0).sum())
    return ThetaFeatures(matrix, [d.label for d in corpus.documents], skipped)


def infer_theta(model, doc, vocab, iterations=20, seed=None):
    """Topic mixture of a held-out document with phi held fixed.

    A document with no in-vocabulary tokens gets the uniform mixture.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if vocab.fingerprint() != model.vocab_ref:
        raise ValueError("document vocabulary does not match the model")
    ids = [vocab.word_ids[t] for t in doc.tokens if t in vocab.word_ids]
    if not ids:
        return np.full(model.topics, 1.0 / model.topics)
    if seed is None:
        seed = model.seed + 9973
    n_k_doc = np.zeros(model.topics, dtype=np.int64)
    _gibbs_infer(
        np.asarray(ids, dtype=np.int32), model.phi, model.alpha,
        iterations, seed, n_k_doc,
    )
    return _theta_rows(n_k_doc.astype(np.float64), model.alpha, model.topics)


def infer_corpus_theta(model, corpus, vocab, iterations=20, seed=None):
    """Held-out topic mixtures for a whole corpus, one seeded chain per doc."""
    if seed is None:
        seed = model.seed + 9973
    n = len(corpus.documents)
    matrix = np.zeros((n, model.topics), dtype=np.float64)
    skipped = 0
    for i, doc in enumerate(corpus.documents):
        ids = [vocab.word_ids[t] for t in doc.tokens if t in vocab.word_ids]
        if not ids:
            matrix[i] = 1.0 / model.topics
            skipped += 1
            continue
        n_k_doc = np.zeros(model.topics, dtype=np.int64)
        _gibbs_infer(
            np.asarray(ids, dtype=np.int32), model.phi, model.alpha,
            iterations, seed + i, n_k_doc,
        )
        matrix[i] = _theta_rows(n_k_doc.astype(np.float64), model.alpha, model.topics)
    return ThetaFeatures(matrix, [d.label for d in corpus.documents], skipped)


def save_phi(model, vocab, path):
    """CSV: header names the words, one row per topic."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("topic," + ",".join(vocab.words) + "\n")
        for k in range(model.topics):
            f.write(f"t{k}," + ",".join(repr(float(v)) for v in model.phi[k]) + "\n")


def save_theta(features, path):
    """CSV: label column then one probability column per topic."""
    n_topics = features.matrix.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("label," + ",".join(f"t{k}" for k in range(n_topics)) + "\n")
        for label, row in zip(features.labels, features.matrix):
            f.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")
