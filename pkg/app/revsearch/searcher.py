"""
Clone search for a single method.

Per representation the query keeps only its qr_threshold rarest distinct
grams. A candidate's similarity in that representation is the share of
those reduced grams it contains (0-100). Candidates pass when at least one
representation reaches its sim_threshold, and are scored by the weighted sum
of similarities, boosting weighting r0 only.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .config import FloatQuad, SearchConfig
from .exceptions import ConfigError, EmptyQuery, TooSmall
from .extractor import MethodRecord
from .indexer import CloneIndex, IndexStats
from .representations import REPRESENTATIONS, NgramSet, Representation, ngram_sets

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchHit:
    doc_id: str
    score: float
    per_rep_similarity: FloatQuad
    rank: int


def reduce_query(ngrams: NgramSet, rep: Representation, stats: IndexStats, cfg: SearchConfig) -> List[str]:
    """The qr_threshold[rep] rarest distinct grams, rarest first, ties by gram text."""
    limit = cfg.qr_threshold[rep.index]
    ordered = sorted(ngrams.grams, key=lambda gram: (stats.frequency(rep, gram), gram))
    return ordered[:limit]


def reduced_query(body: Sequence[str], index: CloneIndex, cfg: SearchConfig) -> Dict[Representation, List[str]]:
    sets = ngram_sets(body, cfg.ngram_size)
    stats = index.stats
    return {rep: reduce_query(sets[rep], rep, stats, cfg) for rep in REPRESENTATIONS}


def similarity(reduced: Dict[Representation, List[str]], index: CloneIndex, doc_id: str) -> FloatQuad:
    values = []
    for rep in REPRESENTATIONS:
        grams = reduced[rep]
        if not grams:
            values.append(0.0)
            continue
        matched = sum(1 for gram in grams if doc_id in index.postings(rep, gram))
        values.append(100.0 * matched / len(grams))
    return tuple(values)


def rank_hits(scored: List[Tuple[str, float, FloatQuad]]) -> List[SearchHit]:
    ordered = sorted(scored, key=lambda item: (-item[1], item[0]))
    return [SearchHit(doc_id, score, sims, rank) for rank, (doc_id, score, sims) in enumerate(ordered, start=1)]


def search_body(body: Sequence[str], index: CloneIndex, cfg: SearchConfig) -> List[SearchHit]:
    """Search with an already canonical body; no size or boilerplate checks."""
    if tuple(cfg.ngram_size) != index.ngram_size:
        raise ConfigError(
            f"Index was built with n-gram sizes {index.ngram_size}, config asks for {cfg.ngram_size}"
        )
    reduced = reduced_query(body, index, cfg)
    if not any(reduced.values()):
        raise EmptyQuery("query has no n-grams in any representation")

    candidates = set()
    for rep, grams in reduced.items():
        for gram in grams:
            candidates.update(index.postings(rep, gram))

    weights = cfg.weights()
    scored = []
    for doc_id in candidates:
        sims = similarity(reduced, index, doc_id)
        if not any(sims[i] >= cfg.sim_threshold[i] for i in range(len(sims))):
            continue
        score = sum(w * s for w, s in zip(weights, sims))
        scored.append((doc_id, score, sims))
    return rank_hits(scored)


def search(method: MethodRecord, index: CloneIndex, cfg: SearchConfig) -> List[SearchHit]:
    """Ranked clone hits for one method.

    Raises TooSmall below cfg.min_clone_size and EmptyQuery when no
    representation yields a single gram.
    """
    if method.line_count < cfg.min_clone_size:
        raise TooSmall(
            f"{method.path}:{method.start_line} {method.method_name}: "
            f"{method.line_count} lines, minimum is {cfg.min_clone_size}"
        )
    hits = search_body(method.body, index, cfg)
    logger.debug("%s:%d %s -> %d hits", method.path, method.start_line, method.method_name, len(hits))
    return hits
