"""PMI, PPMI, and shifted-PPMI association matrices.

All logs are natural.  Context-distribution smoothing (alpha < 1) raises the
context marginals to the power alpha before normalizing, which matches the
negative-sampling distribution used by prediction models; the shift exponent
scales the `log k` subtraction, so shift_exponent=0.75 subtracts
`log k^(3/4)`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import matio

PMI = "pmi"
PPMI = "ppmi"
SPPMI = "sppmi"


@dataclass(frozen=True)
class AssociationParams:
    kind: str
    alpha: float = 1.0
    shift_k: float = 1.0
    shift_exponent: float = 1.0
    reweighted: bool = False


@dataclass
class AssociationMatrix:
    matrix: sp.csr_matrix
    params: AssociationParams
    vocab_ref: str


def _pmi_triplets(counts, alpha):
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must be in (0, 1]")
    coo = counts.matrix.tocoo()
    if coo.nnz == 0:
        return coo.row, coo.col, np.zeros(0, dtype=np.float64)
    wm = counts.word_marginal.astype(np.float64)
    cm = counts.ctx_marginal.astype(np.float64)
    cm_alpha = cm**alpha
    z_alpha = cm_alpha.sum()
    values = np.log(
        coo.data.astype(np.float64)
        * z_alpha
        / (wm[coo.row] * cm_alpha[coo.col])
    )
    return coo.row, coo.col, values


def _build(counts, rows, cols, values, params):
    shape = counts.matrix.shape
    matrix = sp.csr_matrix(
        (values, (rows, cols)), shape=shape, dtype=np.float64
    )
    return AssociationMatrix(matrix, params, counts.vocab_ref)


def pmi(counts, alpha=1.0):
    """PMI over observed pairs only; unobserved cells are absent, not -inf."""
    rows, cols, values = _pmi_triplets(counts, alpha)
    return _build(counts, rows, cols, values, AssociationParams(PMI, alpha=alpha))


def ppmi(counts, alpha=1.0):
    """Positive PMI; cells that clamp to zero are dropped from storage."""
    rows, cols, values = _pmi_triplets(counts, alpha)
    keep = values > 0.0
    return _build(
        counts,
        rows[keep],
        cols[keep],
        values[keep],
        AssociationParams(PPMI, alpha=alpha),
    )


def sppmi(counts, k=5.0, alpha=1.0, shift_exponent=1.0):
    """Shifted positive PMI: max(PMI - shift_exponent * log k, 0)."""
    if k < 1.0:
        raise ValueError("shift k must be >= 1")
    if not (0.0 < shift_exponent <= 1.0):
        raise ValueError("shift_exponent must be in (0, 1]")
    rows, cols, values = _pmi_triplets(counts, alpha)
    values = values - shift_exponent * np.log(k)
    keep = values > 0.0
    return _build(
        counts,
        rows[keep],
        cols[keep],
        values[keep],
        AssociationParams(
            SPPMI, alpha=alpha, shift_k=float(k), shift_exponent=float(shift_exponent)
        ),
    )


def save_association(assoc, path):
    meta = {
        "kind": assoc.params.kind,
        "alpha": assoc.params.alpha,
        "shift_k": assoc.params.shift_k,
        "shift_exponent": assoc.params.shift_exponent,
        "reweighted": assoc.params.reweighted,
        "log_base": "e",
        "vocab_ref": assoc.vocab_ref,
    }
    matio.write_matrix(path, assoc.matrix, meta)


def load_association(path):
    matrix, meta = matio.read_matrix(path)
    params = AssociationParams(
        kind=meta["kind"],
        alpha=float(meta["alpha"]),
        shift_k=float(meta["shift_k"]),
        shift_exponent=float(meta["shift_exponent"]),
        reweighted=bool(meta.get("reweighted", False)),
    )
    return AssociationMatrix(matrix.astype(np.float64), params, meta.get("vocab_ref", ""))
