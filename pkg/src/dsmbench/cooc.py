"""Sliding-window word-context co-occurrence counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import matio
from .corpus import TRAIN


@dataclass
class CoocCounts:
    """Sparse pair counts with marginals.

    `matrix[w, c]` is the number of times context c appeared within the
    window of word w.  The window is symmetric, so the matrix is too, and
    `total_pairs` counts every ordered pair.
    """

    matrix: sp.csr_matrix
    word_marginal: np.ndarray
    ctx_marginal: np.ndarray
    total_pairs: int
    window: int
    vocab_ref: str


def _from_matrix(matrix, window, vocab_ref):
    word_marginal = np.asarray(matrix.sum(axis=1)).ravel().astype(np.int64)
    ctx_marginal = np.asarray(matrix.sum(axis=0)).ravel().astype(np.int64)
    return CoocCounts(
        matrix=matrix,
        word_marginal=word_marginal,
        ctx_marginal=ctx_marginal,
        total_pairs=int(matrix.sum()),
        window=window,
        vocab_ref=vocab_ref,
    )


def count_cooccurrences(corpus, vocab, window=5):
    """Count word-context pairs within `window` positions on each side.

    Positions are measured over the original token sequence, so an
    out-of-vocabulary token still separates its neighbours; pairs are only
    counted when both endpoints are in the vocabulary.  Windows never cross
    document boundaries.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if corpus.split != TRAIN:
        raise ValueError("co-occurrence counts are built from the training split")
    if not corpus.documents:
        raise ValueError("empty corpus")

    n_words = len(vocab)
    rows, cols = [], []
    word_ids = vocab.word_ids
    for doc in corpus.documents:
        ids = np.fromiter(
            (word_ids.get(t, -1) for t in doc.tokens), dtype=np.int64,
            count=len(doc.tokens),
        )
        n = ids.size
        for delta in range(1, window + 1):
            if n <= delta:
                break
            a = ids[:-delta]
            b = ids[delta:]
            mask = (a >= 0) & (b >= 0)
            if mask.any():
                a = a[mask]
                b = b[mask]
                rows.append(a)
                cols.append(b)
                rows.append(b)
                cols.append(a)

    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
        data = np.ones(r.size, dtype=np.int64)
        matrix = sp.coo_matrix((data, (r, c)), shape=(n_words, n_words)).tocsr()
    else:
        matrix = sp.csr_matrix((n_words, n_words), dtype=np.int64)
    return _from_matrix(matrix, window, vocab.fingerprint())


def save_cooc(counts, path, vocab_path=""):
    """MatrixMarket coordinate file plus the window / |D| / vocabulary header."""
    meta = {
        "window": counts.window,
        "total_pairs": counts.total_pairs,
        "vocab_path": str(vocab_path),
        "vocab_ref": counts.vocab_ref,
    }
    matio.write_matrix(path, counts.matrix, meta)


def load_cooc(path):
    matrix, meta = matio.read_matrix(path)
    matrix = matrix.astype(np.int64)
    counts = _from_matrix(matrix, int(meta["window"]), meta.get("vocab_ref", ""))
    if counts.total_pairs != int(meta["total_pairs"]):
        raise ValueError(
            f"{path}: header total_pairs {meta['total_pairs']} does not match "
            f"matrix sum {counts.total_pairs}"
        )
    return counts
