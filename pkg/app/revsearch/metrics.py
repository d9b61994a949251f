"""
Revision and edit-size analytics over an answer-revision corpus.

Distances are character-level Levenshtein distances between the first and
last revision of each code block, measured on comment-stripped bodies in
their posted layout (lines joined with newlines). Answer-level views sum the
per-block distances of an answer.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, Sequence, Tuple

import Levenshtein
import numpy as np

from .exceptions import EmptyCorpus
from .extractor import strip_comments

if TYPE_CHECKING:
    from .revisions import SnippetRevision

logger = logging.getLogger(__name__)

# Lower edges of the distance histogram bins; the last bin is open-ended.
DISTANCE_BIN_EDGES = (0, 1, 10, 50, 100, 500, 1000, 5000, 10000)


def levenshtein(a: str, b: str) -> int:
    """Single-character insert/delete/substitute edit distance."""
    return Levenshtein.distance(a, b)


@dataclass(frozen=True)
class Summary:
    count: int
    min: float
    max: float
    mean: float
    std: float
    median: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Summary":
        data = np.asarray(values, dtype=float)
        if data.size == 0:
            return cls(0, 0.0, 0.0, 0.0, 0.0, 0.0)
        return cls(
            count=int(data.size),
            min=float(data.min()),
            max=float(data.max()),
            mean=float(data.mean()),
            std=float(data.std()),
            median=float(np.median(data)),
        )


@dataclass(frozen=True)
class BlockDistance:
    post_id: int
    local_id: int
    revisions: int
    edit_distance: int


@dataclass
class EditStats:
    answers: int
    blocks: int
    revision_counts: Dict[int, int]
    block_distances: List[BlockDistance]
    answer_distances: Dict[int, int]
    revisions_per_answer: Summary
    blocks_per_answer: Summary
    block_distance: Summary
    answer_distance: Summary
    most_revised: Tuple[int, int]
    identical_share: float
    histogram: List[Tuple[int, float, int]] = field(default_factory=list)

    def summary_rows(self) -> List[list]:
        rows = []
        for name in ("revisions_per_answer", "blocks_per_answer", "block_distance", "answer_distance"):
            s: Summary = getattr(self, name)
            rows.append([name, s.count, _fmt(s.min), _fmt(s.max), _fmt(s.mean), _fmt(s.std), _fmt(s.median)])
        return rows

    def histogram_rows(self) -> List[list]:
        rows = [["distance", low, "" if high == float("inf") else int(high), count]
                for low, high, count in self.histogram]
        per_count: Dict[int, int] = defaultdict(int)
        for count in self.revision_counts.values():
            per_count[count] += 1
        rows.extend(["revisions", n, n, per_count[n]] for n in sorted(per_count))
        return rows


SUMMARY_HEADER = ["metric", "count", "min", "max", "mean", "std", "median"]
HISTOGRAM_HEADER = ["kind", "lower", "upper", "count"]
PER_BLOCK_HEADER = ["post_id", "local_id", "revisions", "edit_distance"]


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _body_text(rev: "SnippetRevision") -> str:
    return "\n".join(strip_comments(rev.body))


def distance_histogram(distances: Sequence[int]) -> List[Tuple[int, float, int]]:
    """(lower, upper, count) rows over half-open bins; bin totals equal len(distances)."""
    top = max(max(distances, default=0), DISTANCE_BIN_EDGES[-1]) + 1
    edges = list(DISTANCE_BIN_EDGES) + [top]
    counts, _ = np.histogram(np.asarray(distances, dtype=float), bins=edges)
    uppers = list(DISTANCE_BIN_EDGES[1:]) + [float("inf")]
    return [(low, high, int(c)) for low, high, c in zip(DISTANCE_BIN_EDGES, uppers, counts)]


def revision_stats(revisions: Sequence["SnippetRevision"]) -> EditStats:
    """Revision counts and original-to-latest edit sizes for accepted answers."""
    accepted = [r for r in revisions if r.is_accepted]
    if not accepted:
        raise EmptyCorpus("corpus holds no accepted answer revisions")

    blocks: Dict[Tuple[int, int], List["SnippetRevision"]] = defaultdict(list)
    seqs_per_answer: Dict[int, set] = defaultdict(set)
    for rev in accepted:
        blocks[(rev.post_id, rev.local_id)].append(rev)
        seqs_per_answer[rev.post_id].add(rev.history_seq)

    block_distances = []
    answer_distances: Dict[int, int] = defaultdict(int)
    for (post_id, local_id), history in sorted(blocks.items()):
        history.sort(key=lambda r: r.history_seq)
        distance = levenshtein(_body_text(history[0]), _body_text(history[-1]))
        block_distances.append(BlockDistance(post_id, local_id, len(history), distance))
        answer_distances[post_id] += distance

    revision_counts = {post_id: len(seqs) for post_id, seqs in sorted(seqs_per_answer.items())}
    blocks_per_answer: Dict[int, int] = defaultdict(int)
    for post_id, _ in blocks:
        blocks_per_answer[post_id] += 1

    distances = [b.edit_distance for b in block_distances]
    most_revised = min(revision_counts.items(), key=lambda item: (-item[1], item[0]))
    stats = EditStats(
        answers=len(revision_counts),
        blocks=len(block_distances),
        revision_counts=revision_counts,
        block_distances=block_distances,
        answer_distances=dict(sorted(answer_distances.items())),
        revisions_per_answer=Summary.of(list(revision_counts.values())),
        blocks_per_answer=Summary.of([blocks_per_answer[p] for p in sorted(blocks_per_answer)]),
        block_distance=Summary.of(distances),
        answer_distance=Summary.of(list(answer_distances.values())),
        most_revised=most_revised,
        identical_share=sum(1 for d in distances if d == 0) / len(distances),
        histogram=distance_histogram(distances),
    )
    logger.info("Analysed %d answers, %d blocks", stats.answers, stats.blocks)
    return stats
