"""
Per-representation inverted index from n-grams to documents.

Postings map each gram to {doc_id: term count}; document frequency is kept
incrementally alongside so query reduction never has to walk postings.
Document ids are opaque to the index. Snippet revisions use
``{post_id}_{local_id}_{history_label}`` (see SnippetDoc); the tuner indexes
project methods under ``{project}:{path}:{start}-{end}``.
"""

import json
import logging
import re
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ValidationError

from .config import IntQuad, SearchConfig
from .exceptions import ConfigError, CorruptIndex, DuplicateDoc, FormatVersionMismatch, OutputWriteError, TooSmall
from .extractor import canonical_lines, wrap_snippet
from .representations import REPRESENTATIONS, NgramSet, Representation, ngram_sets

if TYPE_CHECKING:
    from .revisions import SnippetRevision

logger = logging.getLogger(__name__)

INDEX_MAGIC = b"RSIX"
FORMAT_VERSION = 1
HEADER = struct.Struct(">4sHI")

ORIGINAL = "original"
LATEST = "latest"
DOC_ID_PATTERN = re.compile(r"^(\d+)_(\d+)_(original|latest|[1-9]\d*)$")


@dataclass(frozen=True)
class SnippetDoc:
    """One indexed revision of one code block of an accepted answer."""
    doc_id: str
    post_id: int
    local_id: int
    history_label: str
    body: Tuple[str, ...]
    ngram_sets: Dict[Representation, NgramSet] = field(default_factory=dict, compare=False)

    @staticmethod
    def make_doc_id(post_id: int, local_id: int, history_label: str) -> str:
        return f"{post_id}_{local_id}_{history_label}"

    @staticmethod
    def parse_doc_id(doc_id: str) -> Tuple[int, int, str]:
        """Split a snippet doc id into (post_id, local_id, history_label)."""
        match = DOC_ID_PATTERN.match(doc_id)
        if not match:
            raise ValueError(f"Not a snippet document id: {doc_id!r}")
        return int(match.group(1)), int(match.group(2)), match.group(3)

    @property
    def is_latest(self) -> bool:
        return self.history_label == LATEST


@dataclass(frozen=True)
class IndexStats:
    doc_count: int
    df: Mapping[Tuple[Representation, str], int]

    def frequency(self, rep: Representation, gram: str) -> int:
        return self.df.get((rep, gram), 0)


class CloneIndex:
    """In-memory inverted index over the four representations."""

    def __init__(self, ngram_size: Sequence[int]):
        self.ngram_size: IntQuad = tuple(ngram_size)
        self._docs: Dict[str, Tuple[str, ...]] = {}
        self._postings: Dict[Representation, Dict[str, Dict[str, int]]] = {rep: {} for rep in REPRESENTATIONS}
        self._df: Dict[Tuple[Representation, str], int] = {}

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    @property
    def doc_ids(self) -> List[str]:
        return sorted(self._docs)

    @property
    def stats(self) -> IndexStats:
        return IndexStats(len(self._docs), self._df)

    def document(self, doc_id: str) -> Tuple[str, ...]:
        return self._docs[doc_id]

    def postings(self, rep: Representation, gram: str) -> Mapping[str, int]:
        return self._postings[rep].get(gram, {})

    def vocabulary_size(self, rep: Representation) -> int:
        return len(self._postings[rep])

    def add_document(self, doc_id: str, body: Sequence[str]) -> Dict[Representation, NgramSet]:
        """Index a canonical body under doc_id in all four representations."""
        if doc_id in self._docs:
            raise DuplicateDoc(f"Document {doc_id} is already indexed")
        sets = ngram_sets(body, self.ngram_size)
        self._docs[doc_id] = tuple(body)
        for rep, grams in sets.items():
            postings = self._postings[rep]
            for gram, count in grams.grams.items():
                postings.setdefault(gram, {})[doc_id] = count
                self._df[(rep, gram)] = self._df.get((rep, gram), 0) + 1
        return sets

    def iter_postings(self) -> Iterator[Tuple[Representation, str, Dict[str, int]]]:
        for rep in REPRESENTATIONS:
            for gram, docs in self._postings[rep].items():
                yield rep, gram, docs


def index_snippet(
    index: CloneIndex,
    rev: "SnippetRevision",
    cfg: SearchConfig,
    label: Optional[str] = None,
) -> SnippetDoc:
    """Index one snippet revision.

    The label defaults to ``original`` for the first revision and the
    history sequence number otherwise; ingestion passes ``latest`` explicitly.
    Raises TooSmall when the comment-free canonical body is shorter than
    cfg.min_clone_size.
    """
    if tuple(cfg.ngram_size) != index.ngram_size:
        raise ConfigError(
            f"Index was built with n-gram sizes {index.ngram_size}, config asks for {cfg.ngram_size}"
        )
    if label is None:
        label = ORIGINAL if rev.history_seq == 0 else str(rev.history_seq)
    doc_id = SnippetDoc.make_doc_id(rev.post_id, rev.local_id, label)

    size = len(canonical_lines(rev.body))
    if size < cfg.min_clone_size:
        raise TooSmall(f"{doc_id}: {size} lines, minimum is {cfg.min_clone_size}")
    body = wrap_snippet(rev.body)

    sets = index.add_document(doc_id, body)
    return SnippetDoc(doc_id, rev.post_id, rev.local_id, label, tuple(body), sets)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

class IndexPayload(BaseModel):
    ngram_size: IntQuad
    docs: Dict[str, List[str]]
    postings: Dict[Representation, Dict[str, Dict[str, int]]]


def _payload(index: CloneIndex) -> bytes:
    payload = {
        "ngram_size": list(index.ngram_size),
        "docs": {doc_id: list(body) for doc_id, body in index._docs.items()},
        "postings": {rep.value: index._postings[rep] for rep in REPRESENTATIONS},
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return zlib.compress(text.encode("utf-8"), 9)


def save_index(index: CloneIndex, path: str) -> None:
    """Write the index as a single versioned binary file (layout in docs/format.md)."""
    data = _payload(index)
    try:
        with open(path, "wb") as f:
            f.write(HEADER.pack(INDEX_MAGIC, FORMAT_VERSION, len(data)))
            f.write(data)
    except OSError as e:
        raise OutputWriteError(f"Cannot write index to {path}: {e}") from e
    logger.info("Saved index with %d documents to %s", len(index), path)


def load_index(path: str) -> CloneIndex:
    """Read an index file written by save_index.

    A missing file raises FileNotFoundError; undecodable content raises
    CorruptIndex and a foreign format version FormatVersionMismatch.
    """
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise CorruptIndex(f"{path}: file too short for an index header")
    magic, version, length = HEADER.unpack_from(raw)
    if magic != INDEX_MAGIC:
        raise CorruptIndex(f"{path}: not an index file")
    if version != FORMAT_VERSION:
        raise FormatVersionMismatch(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    body = raw[HEADER.size:]
    if len(body) != length:
        raise CorruptIndex(f"{path}: payload length {len(body)} does not match header {length}")

    try:
        payload = IndexPayload.model_validate_json(zlib.decompress(body))
    except (zlib.error, ValidationError, ValueError) as e:
        raise CorruptIndex(f"{path}: {e}") from e

    index = CloneIndex(payload.ngram_size)
    index._docs = {doc_id: tuple(lines) for doc_id, lines in payload.docs.items()}
    for rep in REPRESENTATIONS:
        postings = payload.postings.get(rep, {})
        for gram, docs in postings.items():
            unknown = set(docs) - index._docs.keys()
            if unknown:
                raise CorruptIndex(f"{path}: postings reference unknown documents {sorted(unknown)[:3]}")
            index._df[(rep, gram)] = len(docs)
        index._postings[rep] = postings
    logger.info("Loaded index with %d documents from %s", len(index), path)
    return index
