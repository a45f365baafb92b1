"""Low-frequency row reweighting for shifted-PPMI matrices.

Low-frequency words get association mass transferred from high-frequency
words with similar embeddings.  The transfer is attenuated by a per-word
category-discriminability ratio in [tau, 1], added in log space, and merged
into the existing row cell-by-cell with max, so the output dominates the
input everywhere and stays a valid nonnegative association matrix.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .association import AssociationMatrix
from .corpus import TRAIN

log = logging.getLogger(__name__)


@dataclass
class CategoryStats:
    """Per (category, word) discriminability statistics.

    `weights[c, t]` is TF(t|c) * log2(N_c / max(DF_out, 1)) where TF is the
    token frequency of t inside category c, N_c the number of documents in
    the category, and DF_out the number of documents outside c containing t.
    Cells with TF = 0 are implicit zeros.
    """

    categories: list
    n_docs: np.ndarray
    tf: sp.csr_matrix
    df_out: sp.csr_matrix
    weights: sp.csr_matrix
    vocab_ref: str
    # per-word reductions over categories (implicit zero cells included)
    w_max: np.ndarray
    w_norm: np.ndarray


@dataclass
class SimilarPairs:
    """Map from a low-frequency word id to its high-frequency neighbours."""

    pairs: dict
    n_max: int
    min_count: int
    vocab_ref: str


def discriminability(corpus, vocab):
    """Category-discriminability W(t|c) for every vocabulary word.

    Requires the training split and at least two categories; DF outside the
    category is floored to 1 inside the log.
    """
    if corpus.split != TRAIN:
        raise ValueError("category statistics are computed on the training split")
    if len(corpus.categories) < 2:
        raise ValueError("need at least 2 categories to compare against the rest")

    cat_index = {c: i for i, c in enumerate(corpus.categories)}
    n_cats = len(corpus.categories)
    n_words = len(vocab)
    word_ids = vocab.word_ids

    tf_rows, tf_cols, tf_vals = [], [], []
    df_rows, df_cols = [], []
    n_docs = np.zeros(n_cats, dtype=np.int64)
    for doc in corpus.documents:
        c = cat_index[doc.label]
        n_docs[c] += 1
        ids = [word_ids[t] for t in doc.tokens if t in word_ids]
        if not ids:
            continue
        uniq, counts = np.unique(np.asarray(ids, dtype=np.int64), return_counts=True)
        tf_rows.append(np.full(uniq.size, c, dtype=np.int64))
        tf_cols.append(uniq)
        tf_vals.append(counts)
        df_rows.append(np.full(uniq.size, c, dtype=np.int64))
        df_cols.append(uniq)

    shape = (n_cats, n_words)
    if tf_rows:
        tf = sp.coo_matrix(
            (np.concatenate(tf_vals), (np.concatenate(tf_rows), np.concatenate(tf_cols))),
            shape=shape,
            dtype=np.int64,
        ).tocsr()
        df_in = sp.coo_matrix(
            (
                np.ones(sum(r.size for r in df_rows), dtype=np.int64),
                (np.concatenate(df_rows), np.concatenate(df_cols)),
            ),
            shape=shape,
            dtype=np.int64,
        ).tocsr()
    else:
        tf = sp.csr_matrix(shape, dtype=np.int64)
        df_in = sp.csr_matrix(shape, dtype=np.int64)

    tf.sort_indices()
    df_in.sort_indices()
    # TF(t|c) > 0 iff some document of c contains t, so both matrices share
    # one sparsity pattern and their data arrays align.
    if not np.array_equal(tf.indices, df_in.indices):
        raise AssertionError("TF and DF supports diverged")

    df_total = np.asarray(df_in.sum(axis=0)).ravel()
    tf_coo = tf.tocoo()
    df_out_vals = df_total[tf_coo.col] - df_in.data
    w_vals = tf_coo.data * np.log2(
        n_docs[tf_coo.row] / np.maximum(df_out_vals, 1).astype(np.float64)
    )
    df_out = sp.csr_matrix(
        (df_out_vals, (tf_coo.row, tf_coo.col)), shape=shape, dtype=np.int64
    )
    weights = sp.csr_matrix(
        (w_vals, (tf_coo.row, tf_coo.col)), shape=shape, dtype=np.float64
    )

    w_csc = weights.tocsc()
    w_max = np.zeros(n_words, dtype=np.float64)
    w_norm = np.zeros(n_words, dtype=np.float64)
    nnz_per_word = np.diff(w_csc.indptr)
    for t in range(n_words):
        vals = w_csc.data[w_csc.indptr[t] : w_csc.indptr[t + 1]]
        if vals.size:
            top = vals.max()
            # categories where the word never occurs contribute W = 0
            w_max[t] = top if nnz_per_word[t] == n_cats else max(top, 0.0)
            w_norm[t] = math.sqrt(float((vals * vals).sum()))

    return CategoryStats(
        categories=list(corpus.categories),
        n_docs=n_docs,
        tf=tf,
        df_out=df_out,
        weights=weights,
        vocab_ref=vocab.fingerprint(),
        w_max=w_max,
        w_norm=w_norm,
    )


def select_low_frequency(vocab, max_count=10):
    """Ids of words whose training count is <= max_count, ascending."""
    if max_count < 1:
        raise ValueError("max_count must be >= 1")
    return np.flatnonzero(vocab.counts <= max_count)


def select_similar(x, base, n, min_count, vocab):
    """The n nearest (cosine) words to x with count >= min_count.

    Returns [(word_id, similarity), ...] in descending similarity, ties
    broken by ascending word id; an all-zero embedding for x gives [].
    """
    if isinstance(x, str):
        if x not in vocab.word_ids:
            raise KeyError(f"word not in vocabulary: {x!r}")
        x = vocab.word_ids[x]
    x = int(x)
    if not (0 <= x < len(vocab)):
        raise IndexError(f"word id out of range: {x}")
    v = base.matrix[x]
    v_norm = np.linalg.norm(v)
    if v_norm == 0.0:
        log.info("zero embedding for word id %d; no similar words", x)
        return []

    candidates = np.flatnonzero(vocab.counts >= min_count)
    candidates = candidates[candidates != x]
    if candidates.size == 0:
        return []
    rows = base.matrix[candidates]
    norms = np.linalg.norm(rows, axis=1)
    sims = np.zeros(candidates.size, dtype=np.float64)
    nonzero = norms > 0.0
    sims[nonzero] = (rows[nonzero] @ v) / (norms[nonzero] * v_norm)
    order = np.lexsort((candidates, -sims))
    top = order[: max(0, int(n))]
    return [(int(candidates[i]), float(sims[i])) for i in top]


def build_similar_pairs(low_ids, base, n, min_count, vocab):
    pairs = {}
    for x in np.asarray(low_ids, dtype=np.int64):
        pairs[int(x)] = select_similar(int(x), base, n, min_count, vocab)
    return SimilarPairs(
        pairs=pairs, n_max=int(n), min_count=int(min_count),
        vocab_ref=vocab.fingerprint(),
    )


def save_similar_pairs(pairs, vocab, path):
    """Audit dump: `x<TAB>y1:sim1,y2:sim2,...` per low-frequency word."""
    with open(path, "w", encoding="utf-8") as f:
        for x in sorted(pairs.pairs):
            entries = ",".join(
                f"{vocab.words[y]}:{sim:.6f}" for y, sim in pairs.pairs[x]
            )
            f.write(f"{vocab.words[x]}\t{entries}\n")


def transfer_ratio(stats, word_id, tau):
    """Attenuation ratio in [tau, 1], or None when the W row is all zero."""
    if not (0.0 < tau < 1.0):
        raise ValueError("tau must be in (0, 1)")
    denom = stats.w_norm[word_id]
    if denom == 0.0:
        return None
    ratio = stats.w_max[word_id] / denom
    return min(1.0, max(tau, float(ratio)))


def _row_dict(matrix, i):
    lo, hi = matrix.indptr[i], matrix.indptr[i + 1]
    return matrix.indices[lo:hi], matrix.data[lo:hi]


def reweight(sppmi_matrix, stats, pairs, tau=0.05):
    """Merge attenuated neighbour rows into each low-frequency word's row.

    For a low-frequency word x with ratio r, every cell (y, c) of a
    neighbour y proposes value(y, c) + ln r for cell (x, c); the output cell
    is the max of the existing value, all proposals, and 0.  Rows of words
    outside `pairs` are returned bit-identical.
    """
    if not (0.0 < tau < 1.0):
        raise ValueError("tau must be in (0, 1)")
    refs = {sppmi_matrix.vocab_ref, stats.vocab_ref, pairs.vocab_ref}
    if len(refs) != 1:
        raise ValueError("matrix, stats, and pairs were built from different vocabularies")

    m = sppmi_matrix.matrix.tocsr()
    m.sort_indices()
    new_rows = {}
    for x in sorted(pairs.pairs):
        neighbours = pairs.pairs[x]
        if not neighbours:
            continue
        r = transfer_ratio(stats, x, tau)
        if r is None:
            log.info("word id %d has an all-zero W row; row left unchanged", x)
            continue
        ln_r = math.log(r)
        best = {}
        for y, _sim in neighbours:
            idx, dat = _row_dict(m, y)
            for c, v in zip(idx, dat):
                cand = v + ln_r
                if cand > best.get(c, 0.0):
                    best[c] = cand
        idx, dat = _row_dict(m, x)
        for c, v in zip(idx, dat):
            if v > best.get(c, 0.0):
                best[int(c)] = v
        kept = sorted((c, v) for c, v in best.items() if v > 0.0)
        new_rows[int(x)] = (
            np.asarray([c for c, _ in kept], dtype=m.indices.dtype),
            np.asarray([v for _, v in kept], dtype=np.float64),
        )

    n_rows = m.shape[0]
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    chunks_idx, chunks_dat = [], []
    for i in range(n_rows):
        if i in new_rows:
            idx, dat = new_rows[i]
        else:
            idx, dat = _row_dict(m, i)
        indptr[i + 1] = indptr[i] + idx.size
        chunks_idx.append(idx)
        chunks_dat.append(dat)
    indices = np.concatenate(chunks_idx) if chunks_idx else np.zeros(0, dtype=np.int32)
    data = np.concatenate(chunks_dat) if chunks_dat else np.zeros(0, dtype=np.float64)
    out = sp.csr_matrix((data, indices, indptr), shape=m.shape)
    params = replace(sppmi_matrix.params, reweighted=True)
    return AssociationMatrix(out, params, sppmi_matrix.vocab_ref)
