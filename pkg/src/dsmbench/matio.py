"""MatrixMarket serialization with a JSON metadata comment line."""

from __future__ import annotations

import json

import scipy.io
import scipy.sparse as sp

_MARKER = "dsmbench-meta:"


def write_matrix(path, matrix, meta):
    """Write a sparse matrix in coordinate format with `meta` embedded as a
    '%'-comment line after the header."""
    comment = _MARKER + json.dumps(meta, sort_keys=True)
    scipy.io.mmwrite(str(path), matrix.tocoo(), comment=comment)


def read_matrix(path):
    """Return (csr_matrix, meta dict) from a file written by write_matrix."""
    meta = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("%"):
                break
            stripped = line.lstrip("%").strip()
            if stripped.startswith(_MARKER):
                meta = json.loads(stripped[len(_MARKER):])
    matrix = scipy.io.mmread(str(path))
    return sp.csr_matrix(matrix), meta
