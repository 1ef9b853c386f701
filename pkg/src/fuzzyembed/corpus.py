"""Readers for GloVe text vectors and WordSim-353 similarity files."""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import Dataset

log = logging.getLogger(__name__)


class CorpusFormatError(ValueError):
    """Malformed embedding or similarity file."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class ScoredWordPair:
    word_a: str
    word_b: str
    score: float

    def __post_init__(self):
        if not self.word_a or not self.word_b:
            raise ValueError("pair words must be non-empty")
        if not 0.0 <= self.score <= 10.0:
            raise ValueError(f"score {self.score} outside [0, 10]")


class EmbeddingTable:
    """Word -> vector lookup backed by one ``(n_words, d)`` array."""

    def __init__(self, words: Sequence[str], vectors):
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(words):
            raise ValueError(f"{len(words)} words for vector array of shape {vectors.shape}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding contains non-finite coordinates")
        self.words = list(words)
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("words must be unique")
        vectors.setflags(write=False)
        self.vectors = vectors

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def __getitem__(self, word) -> np.ndarray:
        return self.vectors[self._index[word]]

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return self.words == other.words and np.array_equal(self.vectors, other.vectors)

    def __repr__(self):
        return f"EmbeddingTable({len(self)} words, d={self.d})"


def load_embeddings(source: Iterable[str], words: Optional[Iterable[str]] = None) -> EmbeddingTable:
    """Parse GloVe text format: ``word c1 c2 ... cd`` per line.

    The dimension is taken from the first parsed line and enforced on
    every later one. When ``words`` is given, only those entries are
    kept; lines for other words are skipped without parsing their
    coordinates, so filtering a full 400k-word file stays cheap. A
    repeated word keeps its first vector.
    """
    wanted = None if words is None else set(words)
    names: List[str] = []
    rows: List[List[float]] = []
    seen = set()
    d = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        parts = line.rstrip(" ").split(" ")
        word, coords = parts[0], parts[1:]
        if not word or not coords:
            raise CorpusFormatError("expected a word followed by coordinates", lineno)
        if d is None:
            d = len(coords)
        elif len(coords) != d:
            raise CorpusFormatError(f"inconsistent dimension: {len(coords)} coordinates, expected {d}", lineno)
        if wanted is not None and word not in wanted:
            continue
        if word in seen:
            log.warning("line %d: duplicate word %r ignored", lineno, word)
            continue
        try:
            vec = [float(x) for x in coords]
        except ValueError as exc:
            raise CorpusFormatError(f"unparseable coordinate ({exc})", lineno) from None
        if not all(math.isfinite(x) for x in vec):
            raise CorpusFormatError("non-finite coordinate", lineno)
        seen.add(word)
        names.append(word)
        rows.append(vec)
    if d is None:
        raise CorpusFormatError("no embedding lines found")
    return EmbeddingTable(names, np.array(rows, dtype=np.float64).reshape(len(rows), d))


def load_embeddings_file(path, words=None, encoding="utf-8") -> EmbeddingTable:
    with open(path, encoding=encoding) as fh:
        return load_embeddings(fh, words)


def dump_embeddings(table: EmbeddingTable, stream):
    """Write ``table`` back in GloVe text format (round-trips exactly)."""
    for w, v in zip(table.words, table.vectors):
        stream.write(w + " " + " ".join(repr(float(x)) for x in v) + "\n")


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_wordsim(source: Iterable[str]) -> List[ScoredWordPair]:
    """Parse a WordSim-353 style file into scored pairs.

    Lines are comma- or tab-delimited with at least three fields (word,
    word, mean score). Blank lines and ``#`` comments are skipped. The
    first data row is treated as a header when its third field is not
    numeric. Words are lowercased; duplicate pairs are kept.
    """
    pairs = []
    header_allowed = True
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        delim = "\t" if "\t" in line else ","
        fields = [f.strip() for f in line.split(delim)]
        if len(fields) < 3:
            raise CorpusFormatError(f"expected 3 fields, got {len(fields)}", lineno)
        if not _is_number(fields[2]):
            if header_allowed:
                header_allowed = False
                continue
            raise CorpusFormatError(f"score {fields[2]!r} is not a number", lineno)
        header_allowed = False
        a, b, score = fields[0].lower(), fields[1].lower(), float(fields[2])
        if not a or not b:
            raise CorpusFormatError("empty word", lineno)
        if not 0.0 <= score <= 10.0:
            raise CorpusFormatError(f"score {score} outside [0, 10]", lineno)
        pairs.append(ScoredWordPair(a, b, score))
    return pairs


def load_wordsim_file(path, encoding="utf-8") -> List[ScoredWordPair]:
    with open(path, encoding=encoding) as fh:
        return load_wordsim(fh)


def pair_vocabulary(pairs: Iterable[ScoredWordPair]) -> List[str]:
    """Distinct words of ``pairs`` in first-appearance order."""
    seen = {}
    for p in pairs:
        seen.setdefault(p.word_a, None)
        seen.setdefault(p.word_b, None)
    return list(seen)


def build_dataset(table: EmbeddingTable, words: Iterable[str]) -> Tuple[Dataset, List[str]]:
    """Dataset over ``words`` found in ``table``, preserving order.

    Returns the dataset and the list of requested words that had no
    vector. Requested duplicates are collapsed to their first position.
    """
    found, missing = [], []
    for w in dict.fromkeys(words):
        key = w if w in table else w.lower()
        if key in table:
            found.append(key)
        else:
            missing.append(w)
    found = list(dict.fromkeys(found))
    if not found:
        raise ValueError("none of the requested words has a vector")
    if missing:
        log.info("%d requested words missing from the embedding table", len(missing))
    X = np.stack([table[w] for w in found])
    return Dataset(tuple(found), X), missing
