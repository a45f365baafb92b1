"""Dataset loading, text preprocessing, vocabularies, and category subsampling."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._porter import porter_stem

log = logging.getLogger(__name__)

TRAIN = "train"
TEST = "test"

NEWSGROUPS_DIRS = "newsgroupsdirs"
LABEL_PER_LINE = "labelperline"

_TOKEN_RE = re.compile(r"[a-z]+")


@dataclass(frozen=True)
class PreprocessOptions:
    stem: bool = True
    stopwords: frozenset = frozenset()
    min_token_length: int = 2


DEFAULT_OPTIONS = PreprocessOptions()


def preprocess(raw, options=DEFAULT_OPTIONS):
    """Turn raw text into tokens: lowercase, keep letter runs, drop short
    tokens and stopwords, then stem.

    Deterministic for fixed options; single characters disappear because the
    length floor defaults to 2, and stems that fall below the floor are
    dropped as well.
    """
    tokens = _TOKEN_RE.findall(raw.lower())
    kept = [
        t
        for t in tokens
        if len(t) >= options.min_token_length and t not in options.stopwords
    ]
    if options.stem:
        kept = [
            s
            for s in (porter_stem(t) for t in kept)
            if len(s) >= options.min_token_length
        ]
    return kept


@dataclass
class Document:
    id: str
    label: str
    tokens: list


@dataclass
class LabeledCorpus:
    documents: list
    split: str
    categories: list

    def __len__(self):
        return len(self.documents)

    def fingerprint(self):
        """Content hash used as a cache key component."""
        h = hashlib.sha256()
        h.update(self.split.encode())
        for d in self.documents:
            h.update(b"\x1f")
            h.update(d.id.encode())
            h.update(b"\x1e")
            h.update(d.label.encode())
            h.update(b"\x1e")
            h.update(" ".join(d.tokens).encode())
        return h.hexdigest()[:16]


class Vocabulary:
    """Word/id mapping with training-frequency counts.

    Ids are contiguous from 0, assigned in descending frequency order with
    ties broken lexicographically.
    """

    def __init__(self, words, counts, min_count=1):
        self.words = list(words)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.min_count = int(min_count)
        self.word_ids = {w: i for i, w in enumerate(self.words)}
        if len(self.word_ids) != len(self.words):
            raise ValueError("duplicate words in vocabulary")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.word_ids

    @property
    def total_tokens(self):
        return int(self.counts.sum())

    def id(self, word):
        return self.word_ids.get(word)

    def fingerprint(self):
        h = hashlib.sha256()
        for w, c in zip(self.words, self.counts):
            h.update(w.encode())
            h.update(b"\x1e")
            h.update(str(int(c)).encode())
            h.update(b"\x1f")
        return h.hexdigest()[:16]

    def save(self, path):
        """One `word<TAB>count` line per id; the id is the line number."""
        with open(path, "w", encoding="utf-8") as f:
            for w, c in zip(self.words, self.counts):
                f.write(f"{w}\t{int(c)}\n")

    @classmethod
    def load(cls, path):
        words, counts = [], []
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if not line:
                    continue
                w, c = line.split("\t")
                words.append(w)
                counts.append(int(c))
        return cls(words, counts)


def _strip_newsgroup_header(text):
    # Header lines run up to the first blank line; if the message has no
    # blank line at all, keep the whole text rather than dropping it.
    sep = re.search(r"\r?\n\s*\r?\n", text)
    if sep is None:
        return text
    return text[sep.end():]


def load_dataset(
    path,
    format,
    split=TRAIN,
    options=DEFAULT_OPTIONS,
    strip_header=True,
):
    """Load a dataset from disk and return a preprocessed LabeledCorpus.

    `newsgroupsdirs` expects `<root>/<category>/<doc-file>`; `labelperline`
    expects UTF-8 text with one `label<TAB>text` document per line.  Exact
    duplicate documents (identical token sequences) are removed, keeping the
    first occurrence.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset path does not exist: {path}")
    docs = []
    if format == NEWSGROUPS_DIRS:
        if not path.is_dir():
            raise NotADirectoryError(f"expected a directory: {path}")
        for cat_dir in sorted(p for p in path.iterdir() if p.is_dir()):
            label = cat_dir.name
            for doc_file in sorted(p for p in cat_dir.iterdir() if p.is_file()):
                text = doc_file.read_text(encoding="utf-8", errors="replace")
                if strip_header:
                    text = _strip_newsgroup_header(text)
                docs.append(
                    Document(f"{label}/{doc_file.name}", label, preprocess(text, options))
                )
    elif format == LABEL_PER_LINE:
        if not path.is_file():
            raise IsADirectoryError(f"expected a file: {path}")
        with open(path, encoding="utf-8", errors="replace") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                if "\t" not in line:
                    raise ValueError(
                        f"{path}:{lineno}: malformed line (missing tab separator)"
                    )
                label, text = line.split("\t", 1)
                if not label:
                    raise ValueError(f"{path}:{lineno}: empty label")
                docs.append(Document(f"L{lineno}", label, preprocess(text, options)))
    else:
        raise ValueError(f"unknown dataset format: {format!r}")

    seen = set()
    unique = []
    for d in docs:
        key = tuple(d.tokens)
        if key in seen:
            continue
        seen.add(key)
        unique.append(d)
    dropped = len(docs) - len(unique)
    if dropped:
        log.info("removed %d duplicate documents from %s", dropped, path)
    if not unique:
        raise ValueError(f"no documents loaded from {path}")
    categories = sorted({d.label for d in unique})
    return LabeledCorpus(unique, split, categories)


def build_vocabulary(corpus, min_count=1):
    """Vocabulary over the training split, keeping words with count >= min_count."""
    if corpus.split != TRAIN:
        raise ValueError("vocabulary must be built from the training split")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    freq = Counter()
    for d in corpus.documents:
        freq.update(d.tokens)
    items = [(w, c) for w, c in freq.items() if c >= min_count]
    if not items:
        raise ValueError("empty vocabulary (min_count too high?)")
    items.sort(key=lambda wc: (-wc[1], wc[0]))
    words = [w for w, _ in items]
    counts = [c for _, c in items]
    return Vocabulary(words, counts, min_count=min_count)


def restrict_categories(corpus, keep, seed=0, fraction=1.0):
    """Keep only documents in `keep` categories, subsampling each category
    to ceil(fraction * n) documents with a seeded uniform draw.

    Document order is preserved, so fraction 1.0 is the identity restriction
    up to dropped categories.
    """
    if not keep:
        raise ValueError("keep must name at least one category")
    keep_set = set(keep)
    unknown = keep_set - set(corpus.categories)
    if unknown:
        raise ValueError(f"unknown categories: {sorted(unknown)}")
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must be in (0, 1]")

    by_cat = {}
    for i, d in enumerate(corpus.documents):
        if d.label in keep_set:
            by_cat.setdefault(d.label, []).append(i)

    selected = set()
    rng = np.random.default_rng(seed)
    for cat in [c for c in corpus.categories if c in keep_set]:
        idxs = by_cat.get(cat, [])
        if not idxs:
            continue
        if fraction >= 1.0:
            selected.update(idxs)
        else:
            m = math.ceil(fraction * len(idxs))
            chosen = rng.choice(len(idxs), size=m, replace=False)
            selected.update(idxs[j] for j in chosen)

    docs = [corpus.documents[i] for i in sorted(selected)]
    if not docs:
        raise ValueError("restriction produced an empty corpus")
    categories = [c for c in corpus.categories if c in keep_set]
    return LabeledCorpus(docs, corpus.split, categories)


def save_corpus(corpus, path):
    """JSONL: a meta record first, then one record per document."""
    with open(path, "w", encoding="utf-8") as f:
        meta = {"split": corpus.split, "categories": corpus.categories}
        f.write(json.dumps({"meta": meta}) + "\n")
        for d in corpus.documents:
            f.write(
                json.dumps({"id": d.id, "label": d.label, "tokens": d.tokens}) + "\n"
            )


def load_corpus(path):
    with open(path, encoding="utf-8") as f:
        header = json.loads(f.readline())
        if "meta" not in header:
            raise ValueError(f"{path}: missing corpus meta record")
        meta = header["meta"]
        docs = []
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            docs.append(Document(rec["id"], rec["label"], rec["tokens"]))
    return LabeledCorpus(docs, meta["split"], meta["categories"])
