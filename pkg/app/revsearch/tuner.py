"""
Exhaustive grid search over SearchConfig, maximising mean reciprocal rank.

Project methods form the index (doc ids ``{project}:{path}:{start}-{end}``)
and Q&A snippets are the queries. A hit counts as the expected method when it
lies in the same project file and the two line ranges overlap by at least
half of the shorter range.
"""

import itertools
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .config import FloatQuad, IntQuad, RunSettings, SearchConfig, as_quad
from .exceptions import ConfigError, EmptyQuery, EmptyQuerySet, RevSearchException, SchemaError
from .extractor import SourceFile, canonical_lines, extract_methods, wrap_snippet
from .indexer import CloneIndex
from .searcher import SearchHit, search_body
from .utils import FileManager

logger = logging.getLogger(__name__)

TUNING_PATTERNS = frozenset(("QS", "EX", "UD"))
ALL_PATTERNS = frozenset(("QS", "EX", "UD", "SQ", "BP", "IN", "NC"))
TRUTH_COLUMNS = ("query_file", "project", "path", "start", "end", "pattern")

# Similarity threshold sets (r0..r3) of the full search space
SIM_THRESHOLD_SETS: Tuple[FloatQuad, ...] = (
    (10.0, 20.0, 30.0, 40.0),
    (20.0, 30.0, 40.0, 50.0),
    (30.0, 40.0, 50.0, 60.0),
    (40.0, 50.0, 60.0, 70.0),
    (50.0, 60.0, 70.0, 80.0),
    (60.0, 70.0, 80.0, 90.0),
    (10.0, 30.0, 40.0, 50.0),
    (20.0, 40.0, 60.0, 70.0),
    (30.0, 60.0, 80.0, 90.0),
)

METHOD_DOC_PATTERN = re.compile(r"^(?P<project>[^:]+):(?P<path>.+):(?P<start>\d+)-(?P<end>\d+)$")


@dataclass(frozen=True)
class ExpectedLocation:
    project: str
    path: str
    start: int
    end: int

    def doc_id(self) -> str:
        return f"{self.project}:{self.path}:{self.start}-{self.end}"

    @classmethod
    def from_doc_id(cls, doc_id: str) -> Optional["ExpectedLocation"]:
        match = METHOD_DOC_PATTERN.match(doc_id)
        if not match:
            return None
        return cls(match["project"], match["path"], int(match["start"]), int(match["end"]))

    def overlaps(self, other: "ExpectedLocation") -> bool:
        """Same file and overlap of at least half the shorter line range."""
        if (self.project, self.path) != (other.project, other.path):
            return False
        overlap = min(self.end, other.end) - max(self.start, other.start) + 1
        shorter = min(self.end - self.start + 1, other.end - other.start + 1)
        return overlap > 0 and 2 * overlap >= shorter


@dataclass(frozen=True)
class GroundTruthPair:
    query_id: str
    query_lines: Tuple[str, ...]
    expected: ExpectedLocation
    pattern: str


def read_ground_truth(path: str) -> List[GroundTruthPair]:
    """Read the ground-truth CSV and keep the pairs usable for tuning.

    query_file paths are relative to the CSV's directory.
    """
    base = Path(path).parent
    try:
        rows = FileManager.read_csv(path, TRUTH_COLUMNS)
    except KeyError as e:
        raise SchemaError(f"{path}: missing columns {e}", 1) from e

    pairs = []
    dropped = 0
    for row in rows:
        line_no = row["_line"]
        pattern = (row["pattern"] or "").strip().upper()
        if pattern not in ALL_PATTERNS:
            raise SchemaError(f"unknown clone pattern {row['pattern']!r}", line_no)
        try:
            expected = ExpectedLocation(row["project"], row["path"], int(row["start"]), int(row["end"]))
        except (TypeError, ValueError) as e:
            raise SchemaError(f"bad start/end: {e}", line_no) from e
        if expected.end < expected.start:
            raise SchemaError("end precedes start", line_no)
        if pattern not in TUNING_PATTERNS:
            dropped += 1
            continue
        query_path = base / row["query_file"]
        try:
            text = FileManager.read_source(query_path)
        except OSError as e:
            raise SchemaError(f"cannot read query file {query_path}: {e}", line_no) from e
        pairs.append(GroundTruthPair(row["query_file"], tuple(text.splitlines()), expected, pattern))
    logger.info("Ground truth: %d pairs kept, %d outside %s", len(pairs), dropped, sorted(TUNING_PATTERNS))
    return pairs


# ---------------------------------------------------------------------------
# Ranking quality
# ---------------------------------------------------------------------------

def reciprocal_rank(hits: Sequence[SearchHit], expected: ExpectedLocation) -> float:
    for hit in hits:
        location = ExpectedLocation.from_doc_id(hit.doc_id)
        if location is not None and location.overlaps(expected):
            return 1.0 / hit.rank
    return 0.0


def mean_reciprocal_rank(rrs: Sequence[float]) -> float:
    if not rrs:
        raise EmptyQuerySet("no queries to evaluate")
    return sum(rrs) / len(rrs)


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

class GridSpec(BaseModel):
    """Candidate values per SearchConfig field; scalars expand to all four representations."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    ngram_size: List[IntQuad] = Field(min_length=1)
    qr_threshold: List[IntQuad] = Field(min_length=1)
    sim_threshold: List[FloatQuad] = Field(min_length=1)
    boosting: List[int] = Field(min_length=1)
    min_clone_size: List[int] = Field(min_length=1)

    @field_validator("ngram_size", "qr_threshold", "sim_threshold", mode="before")
    @classmethod
    def expand_scalars(cls, values):
        if not isinstance(values, (list, tuple)):
            values = [values]
        return [as_quad(v) for v in values]

    @model_validator(mode="after")
    def check_ranges(self) -> "GridSpec":
        for name in SearchConfig.model_fields:
            for value in getattr(self, name):
                try:
                    SearchConfig(**{name: value})
                except ValidationError as e:
                    raise ValueError(f"{name} value {value} is out of range") from e
        return self

    @classmethod
    def from_file(cls, path: str) -> "GridSpec":
        try:
            with open(path, encoding="utf-8") as f:
                return cls.model_validate_json(f.read())
        except ValidationError as e:
            problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
            raise ConfigError(f"Invalid grid {path}: {problems}") from e

    @classmethod
    def reduced_grid(cls) -> "GridSpec":
        """The reduced grid actually searched when the defaults were tuned."""
        return cls(
            ngram_size=[4, 6, 8],
            qr_threshold=[8, 10],
            sim_threshold=[(20, 40, 60, 80), (30, 50, 70, 90)],
            boosting=[-1, 10],
            min_clone_size=[6, 10],
        )

    @classmethod
    def full_grid(cls) -> "GridSpec":
        """The complete parameter space; one n-gram size and QR value applies to all representations."""
        return cls(
            ngram_size=list(range(4, 25)),
            qr_threshold=list(range(2, 21, 2)),
            sim_threshold=list(SIM_THRESHOLD_SETS),
            boosting=[-1, 1] + list(range(2, 21, 2)),
            min_clone_size=list(range(6, 17)),
        )

    @property
    def size(self) -> int:
        size = 1
        for name in SearchConfig.model_fields:
            size *= len(getattr(self, name))
        return size

    def points(self) -> List[SearchConfig]:
        """Every grid point, in a fixed field-major order."""
        names = list(SearchConfig.model_fields)
        return [
            SearchConfig(**dict(zip(names, values)))
            for values in itertools.product(*(getattr(self, name) for name in names))
        ]


@dataclass(frozen=True)
class GridScore:
    config: SearchConfig
    mrr: float

    def row(self) -> list:
        env = self.config.to_env()
        return [env["NGRAM_SIZE"], env["QR_THRESHOLD"], env["SIM_THRESHOLD"],
                env["BOOSTING"], env["MIN_CLONE_SIZE"], repr(self.mrr)]


SCORE_HEADER = ["ngram_size", "qr_threshold", "sim_threshold", "boosting", "min_clone_size", "mrr"]


@dataclass(frozen=True)
class TuningResult:
    best: SearchConfig
    best_mrr: float
    table: List[GridScore]


def selection_key(score: GridScore) -> tuple:
    """Highest MRR, then smaller min_clone_size, then lexicographic config order."""
    return (-score.mrr, score.config.min_clone_size, score.config.sort_key())


def build_method_index(
    corpus_dir: str,
    ngram_size: IntQuad,
    min_clone_size: int,
    settings: Optional[RunSettings] = None,
) -> CloneIndex:
    """Index every method of every project under corpus_dir (one sub-directory per project)."""
    settings = settings or RunSettings()
    base = Path(corpus_dir)
    projects = sorted(p for p in base.iterdir() if p.is_dir()) or [base]
    index = CloneIndex(ngram_size)
    for project in projects:
        for path in FileManager.source_files(str(project), settings.extensions):
            rel = path.relative_to(project).as_posix()
            source = SourceFile.from_text(project.name, rel, FileManager.read_source(path))
            try:
                methods = extract_methods(source, min_lines=min_clone_size)
            except RevSearchException as e:
                logger.warning("Skipping %s/%s: %s", project.name, rel, e)
                continue
            for method in methods:
                location = ExpectedLocation(project.name, rel, method.start_line, method.end_line)
                index.add_document(location.doc_id(), method.body)
    logger.info("Indexed %d methods for n-gram sizes %s, min size %d", len(index), ngram_size, min_clone_size)
    return index


def query_rank(pair: GroundTruthPair, index: CloneIndex, cfg: SearchConfig) -> float:
    """Reciprocal rank of one query; queries below the size gate or without grams score 0."""
    if len(canonical_lines(pair.query_lines)) < cfg.min_clone_size:
        return 0.0
    try:
        hits = search_body(wrap_snippet(pair.query_lines), index, cfg)
    except EmptyQuery:
        return 0.0
    return reciprocal_rank(hits, pair.expected)


def evaluate_point(cfg: SearchConfig, pairs: Sequence[GroundTruthPair], index: CloneIndex) -> float:
    return mean_reciprocal_rank([query_rank(pair, index, cfg) for pair in pairs])


def _index_key(cfg: SearchConfig) -> Tuple[IntQuad, int]:
    return tuple(cfg.ngram_size), cfg.min_clone_size


_WORKER: Dict[str, object] = {}


def _init_worker(indexes: Dict[Tuple[IntQuad, int], Optional[CloneIndex]], pairs: Sequence[GroundTruthPair]) -> None:
    _WORKER.update(indexes=indexes, pairs=pairs)


def _score_point(cfg: SearchConfig, indexes, pairs) -> float:
    index = indexes.get(_index_key(cfg))
    if index is None:
        return -1.0
    try:
        return evaluate_point(cfg, pairs, index)
    except RevSearchException as e:
        logger.warning("Grid point %s failed: %s", cfg.to_env(), e)
        return -1.0


def _score_worker(cfg: SearchConfig) -> float:
    return _score_point(cfg, _WORKER["indexes"], _WORKER["pairs"])


def grid_search(
    grid: GridSpec,
    pairs: Sequence[GroundTruthPair],
    corpus_dir: str,
    settings: Optional[RunSettings] = None,
) -> TuningResult:
    """Evaluate every grid point and return the best configuration with the full table."""
    if not pairs:
        raise EmptyQuerySet("ground truth holds no QS/EX/UD pairs")
    settings = settings or RunSettings()
    points = grid.points()

    indexes: Dict[Tuple[IntQuad, int], Optional[CloneIndex]] = {}
    for cfg in points:
        key = _index_key(cfg)
        if key in indexes:
            continue
        try:
            indexes[key] = build_method_index(corpus_dir, key[0], key[1], settings)
        except RevSearchException as e:
            logger.warning("Indexing failed for n-gram sizes %s, min size %d: %s", key[0], key[1], e)
            indexes[key] = None

    logger.info("Evaluating %d grid points over %d queries", len(points), len(pairs))
    if settings.jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(
            max_workers=settings.jobs, initializer=_init_worker, initargs=(indexes, tuple(pairs))
        ) as executor:
            scores = list(executor.map(_score_worker, points))
    else:
        scores = [_score_point(cfg, indexes, pairs) for cfg in points]

    table = [GridScore(cfg, mrr) for cfg, mrr in zip(points, scores)]
    best = min(table, key=selection_key)
    logger.info("Best MRR %.4f for %s", best.mrr, best.config.to_env())
    return TuningResult(best.config, best.mrr, table)


def write_score_table(result: TuningResult, path: str) -> None:
    FileManager.write_csv(path, SCORE_HEADER, (score.row() for score in result.table), description="score table")
