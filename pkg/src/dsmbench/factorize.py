"""Truncated SVD embeddings and average-pooled document vectors."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

SOURCE_SVD = "svd"
SOURCE_SGNS = "sgns"
SOURCE_LDA_PHI = "lda_phi"

# Relative cutoff below which a singular value is treated as numerically zero
# when the requested rank exceeds the matrix rank.
_RANK_TOL = 1e-10


@dataclass
class EmbeddingMatrix:
    matrix: np.ndarray
    source: str
    sigma_power: float | None
    vocab_ref: str

    @property
    def d(self):
        return self.matrix.shape[1]


@dataclass
class DocVectors:
    matrix: np.ndarray
    labels: list
    skipped: int = 0

    @property
    def d(self):
        return self.matrix.shape[1]


def _as_array_or_sparse(m):
    if hasattr(m, "matrix"):
        m = m.matrix
    if sp.issparse(m):
        return m.tocsr()
    return np.asarray(m, dtype=np.float64)


def _fix_signs(u, s, vt):
    # Pin each component's sign so the largest-magnitude entry of the left
    # singular vector is positive; makes seeded runs comparable.
    for i in range(s.size):
        if s[i] <= 0.0:
            continue
        j = int(np.argmax(np.abs(u[:, i])))
        if u[j, i] < 0.0:
            u[:, i] = -u[:, i]
            vt[i, :] = -vt[i, :]
    return u, vt


def truncated_svd(m, d, seed=0, oversample=10, power_iters=2):
    """Rank-d SVD of a (sparse) matrix via a seeded randomized range finder.

    Returns (U, S, Vt) with S nonincreasing.  Small problems fall back to an
    exact dense decomposition.  When d exceeds the numerical rank, the extra
    components are zero-padded and a warning is emitted.

    Args:
        m: AssociationMatrix, scipy sparse matrix, or dense array.
        d: number of components, 1 <= d <= min(shape).
        seed: RNG seed for the Gaussian test matrix.
        oversample: extra range-finder columns beyond d.
        power_iters: subspace (power) iterations for spectral sharpening.
    """
    a = _as_array_or_sparse(m)
    n_rows, n_cols = a.shape
    small = min(n_rows, n_cols)
    if not (1 <= d <= small):
        raise ValueError(f"d must be in [1, {small}], got {d}")
    nnz = a.nnz if sp.issparse(a) else np.count_nonzero(a)
    if nnz == 0:
        raise ValueError("matrix is empty")

    r = min(d + max(0, int(oversample)), small)
    if small <= max(2 * r, 100):
        dense = a.toarray() if sp.issparse(a) else a
        u, s, vt = np.linalg.svd(dense, full_matrices=False)
    else:
        rng = np.random.default_rng(seed)
        omega = rng.standard_normal((n_cols, r))
        q, _ = np.linalg.qr(a @ omega)
        for _ in range(max(0, int(power_iters))):
            z, _ = np.linalg.qr(a.T @ q)
            q, _ = np.linalg.qr(a @ z)
        b = q.T @ a
        ub, s, vt = np.linalg.svd(b, full_matrices=False)
        u = q @ ub

    u = np.ascontiguousarray(u[:, :d])
    s = s[:d].copy()
    vt = np.ascontiguousarray(vt[:d, :])

    cutoff = s[0] * _RANK_TOL if s.size and s[0] > 0 else 0.0
    dead = s <= cutoff
    if dead.any():
        rank = int((~dead).sum())
        warnings.warn(
            f"requested d={d} exceeds numerical rank {rank}; padding with zeros",
            RuntimeWarning,
            stacklevel=2,
        )
        u[:, dead] = 0.0
        s[dead] = 0.0
        vt[dead, :] = 0.0

    u, vt = _fix_signs(u, s, vt)
    return u, s, vt


def word_embeddings(u, s, p=0.5, vocab_ref="", source=SOURCE_SVD):
    """Rows U_w * S^p; p=0 keeps the raw left singular vectors."""
    if not (0.0 <= p <= 1.0):
        raise ValueError("p must be in [0, 1]")
    weights = np.power(s, p)
    matrix = u * weights[np.newaxis, :]
    if not np.isfinite(matrix).all():
        raise ValueError("embedding matrix contains NaN/Inf")
    return EmbeddingMatrix(matrix, source, float(p), vocab_ref)


def average_pool(doc, emb, vocab):
    """Mean of the embedding rows of in-vocabulary tokens (with multiplicity).

    A document with no in-vocabulary tokens yields the zero vector.
    """
    ids = [vocab.word_ids[t] for t in doc.tokens if t in vocab.word_ids]
    if not ids:
        return np.zeros(emb.matrix.shape[1], dtype=emb.matrix.dtype)
    return emb.matrix[ids].mean(axis=0)


def corpus_vectors(corpus, emb, vocab):
    """Row-aligned document vectors over the corpus, in corpus order."""
    n = len(corpus.documents)
    out = np.zeros((n, emb.matrix.shape[1]), dtype=np.float64)
    skipped = 0
    labels = []
    for i, doc in enumerate(corpus.documents):
        ids = [vocab.word_ids[t] for t in doc.tokens if t in vocab.word_ids]
        if ids:
            out[i] = emb.matrix[ids].mean(axis=0)
        else:
            skipped += 1
        labels.append(doc.label)
    if not np.isfinite(out).all():
        raise ValueError("document vectors contain NaN/Inf")
    return DocVectors(out, labels, skipped)


def save_embeddings(emb, vocab, path):
    """word2vec text format: `V d` header, then `word v1 ... vd` per line."""
    matrix = emb.matrix
    if matrix.shape[0] != len(vocab):
        raise ValueError("embedding rows do not match vocabulary size")
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for w, row in zip(vocab.words, matrix):
            f.write(w + " " + " ".join(repr(float(v)) for v in row) + "\n")


def load_embeddings(path):
    """Return (words, matrix) from word2vec text format."""
    with open(path, encoding="utf-8") as f:
        n, d = map(int, f.readline().split())
        words = []
        matrix = np.zeros((n, d), dtype=np.float64)
        for i in range(n):
            parts = f.readline().rstrip("\n").split(" ")
            words.append(parts[0])
            matrix[i] = [float(x) for x in parts[1 : d + 1]]
    return words, matrix


def save_doc_vectors(vecs, path):
    """CSV with a label column followed by the vector components."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        cols = ",".join(f"x{i}" for i in range(vecs.matrix.shape[1]))
        f.write(f"label,{cols}\n")
        for label, row in zip(vecs.labels, vecs.matrix):
            f.write(label + "," + ",".join(repr(float(v)) for v in row) + "\n")


def load_doc_vectors(path):
    labels = []
    rows = []
    with open(path, encoding="utf-8") as f:
        f.readline()
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            labels.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    return DocVectors(np.asarray(rows, dtype=np.float64), labels, 0)
