"""
Answer-revision ingestion and project scanning.

A revision dump is JSON Lines, one object per code-block revision:

    {"post_id": 8394534, "local_id": 0, "history_seq": 1, "is_accepted": true,
     "body": "public int add(int a, int b) {\\n    return a + b;\\n}"}

Only accepted answers are indexed. Consecutive revisions whose code block is
unchanged (text-only edits) collapse into one. Kept revisions of a block are
labelled ``original``, ``1`` .. ``k``, ``latest``; a block with a single kept
revision is indexed only as ``latest``.
"""

import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .boilerplate import BoilerplatePattern, default_patterns, is_boilerplate
from .config import RunSettings, SearchConfig
from .exceptions import EmptyQuery, SchemaError, TooSmall, UnparsableFile
from .extractor import MethodRecord, SourceFile, extract_methods
from .indexer import LATEST, ORIGINAL, CloneIndex, SnippetDoc, index_snippet
from .metrics import levenshtein
from .searcher import search
from .utils import FileManager

logger = logging.getLogger(__name__)


class RevisionRecord(BaseModel):
    """Schema of one dump line."""

    model_config = ConfigDict(extra="forbid", strict=True)

    post_id: int = Field(gt=0)
    local_id: int = Field(ge=0)
    history_seq: int = Field(ge=0)
    is_accepted: bool
    body: str


@dataclass(frozen=True)
class SnippetRevision:
    post_id: int
    local_id: int
    history_seq: int
    body: Tuple[str, ...]
    is_accepted: bool = True

    @property
    def block(self) -> Tuple[int, int]:
        return self.post_id, self.local_id


@dataclass
class IngestionReport:
    answers: int = 0
    blocks: int = 0
    revisions_indexed: int = 0
    skipped_too_small: int = 0
    deduplicated: int = 0
    skipped_not_accepted: int = 0

    def as_dict(self) -> Dict[str, int]:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Recommendation:
    project_id: str
    path: str
    method_name: str
    start_line: int
    end_line: int
    matched_doc_id: str
    latest_post_id: int
    latest_body: Tuple[str, ...] = field(repr=False)
    edit_distance: int

    @property
    def latest_doc_id(self) -> str:
        _, local_id, _ = SnippetDoc.parse_doc_id(self.matched_doc_id)
        return SnippetDoc.make_doc_id(self.latest_post_id, local_id, LATEST)


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

def read_revisions(path: str) -> List[SnippetRevision]:
    """Parse and validate a revision dump.

    Raises SchemaError naming the offending line for malformed records,
    duplicate (post_id, local_id, history_seq) triples and history gaps.
    """
    revisions = []
    first_line: Dict[Tuple[int, int], int] = {}
    seen = set()
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = RevisionRecord.model_validate_json(line)
            except ValidationError as e:
                problems = "; ".join(
                    f"{'.'.join(str(p) for p in err['loc']) or 'record'}: {err['msg']}" for err in e.errors()
                )
                raise SchemaError(problems, line_no) from e
            key = (record.post_id, record.local_id, record.history_seq)
            if key in seen:
                raise SchemaError(f"duplicate revision {key}", line_no)
            seen.add(key)
            first_line.setdefault(key[:2], line_no)
            revisions.append(SnippetRevision(
                post_id=record.post_id,
                local_id=record.local_id,
                history_seq=record.history_seq,
                body=tuple(record.body.splitlines()),
                is_accepted=record.is_accepted,
            ))

    seqs: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for rev in revisions:
        seqs[rev.block].append(rev.history_seq)
    for block, values in seqs.items():
        if sorted(values) != list(range(len(values))):
            raise SchemaError(
                f"history_seq of block {block[0]}_{block[1]} is not contiguous from 0: {sorted(values)}",
                first_line[block],
            )
    logger.info("Read %d revisions from %s", len(revisions), path)
    return revisions


def group_blocks(revisions: Sequence[SnippetRevision]) -> Dict[Tuple[int, int], List[SnippetRevision]]:
    """Accepted revisions per (post_id, local_id), in history order, blocks sorted."""
    blocks: Dict[Tuple[int, int], List[SnippetRevision]] = defaultdict(list)
    for rev in revisions:
        if rev.is_accepted:
            blocks[rev.block].append(rev)
    return {block: sorted(blocks[block], key=lambda r: r.history_seq) for block in sorted(blocks)}


def dedupe_history(history: Sequence[SnippetRevision]) -> List[SnippetRevision]:
    """Drop revisions whose code block equals the previous kept revision."""
    kept: List[SnippetRevision] = []
    for rev in history:
        if kept and kept[-1].body == rev.body:
            continue
        kept.append(rev)
    return kept


def history_labels(count: int) -> List[str]:
    if count == 1:
        return [LATEST]
    return [ORIGINAL] + [str(i) for i in range(1, count - 1)] + [LATEST]


def ingest_revisions(
    revisions: Sequence[SnippetRevision],
    cfg: SearchConfig,
    index: Optional[CloneIndex] = None,
) -> Tuple[CloneIndex, IngestionReport]:
    """Index every qualifying revision; results do not depend on input order."""
    index = index if index is not None else CloneIndex(cfg.ngram_size)
    report = IngestionReport()
    report.skipped_not_accepted = sum(1 for r in revisions if not r.is_accepted)

    blocks = group_blocks(revisions)
    report.blocks = len(blocks)
    report.answers = len({post_id for post_id, _ in blocks})
    for history in blocks.values():
        kept = dedupe_history(history)
        report.deduplicated += len(history) - len(kept)
        for rev, label in zip(kept, history_labels(len(kept))):
            try:
                index_snippet(index, rev, cfg, label=label)
            except TooSmall as e:
                report.skipped_too_small += 1
                logger.debug("Skipped %s", e)
                continue
            report.revisions_indexed += 1

    logger.info(
        "Indexed %d revisions of %d blocks (%d too small, %d deduplicated)",
        report.revisions_indexed, report.blocks, report.skipped_too_small, report.deduplicated,
    )
    return index, report


def ingest_dump(path: str, cfg: SearchConfig) -> Tuple[CloneIndex, IngestionReport]:
    return ingest_revisions(read_revisions(path), cfg)


# ---------------------------------------------------------------------------
# Scanning
# ---------------------------------------------------------------------------

def recommend(method: MethodRecord, index: CloneIndex, cfg: SearchConfig) -> Optional[Recommendation]:
    """Recommendation for one method, or None when the best match needs no update."""
    try:
        hits = search(method, index, cfg)
    except (EmptyQuery, TooSmall) as e:
        logger.debug("Skipped %s:%d: %s", method.path, method.start_line, e)
        return None
    if not hits:
        return None

    top = hits[0]
    try:
        post_id, local_id, label = SnippetDoc.parse_doc_id(top.doc_id)
    except ValueError:
        logger.debug("Rank-1 document %s is not a snippet revision", top.doc_id)
        return None
    if label == LATEST:
        return None

    latest_id = SnippetDoc.make_doc_id(post_id, local_id, LATEST)
    if latest_id not in index:
        logger.warning("No indexed latest revision for %s; no recommendation for %s:%d",
                       top.doc_id, method.path, method.start_line)
        return None
    latest_body = index.document(latest_id)
    return Recommendation(
        project_id=method.project_id,
        path=method.path,
        method_name=method.method_name,
        start_line=method.start_line,
        end_line=method.end_line,
        matched_doc_id=top.doc_id,
        latest_post_id=post_id,
        latest_body=latest_body,
        edit_distance=levenshtein("\n".join(index.document(top.doc_id)), "\n".join(latest_body)),
    )


def scan_file(
    source: SourceFile,
    index: CloneIndex,
    cfg: SearchConfig,
    patterns: Sequence[BoilerplatePattern],
) -> List[Recommendation]:
    try:
        methods = extract_methods(source, min_lines=cfg.min_clone_size)
    except UnparsableFile as e:
        logger.warning("Skipping %s: %s", source.path, e)
        return []

    recommendations = []
    for method in methods:
        boilerplate, pattern = is_boilerplate(method, patterns)
        if boilerplate:
            logger.debug("Boilerplate %s:%d (%s)", method.path, method.start_line, pattern)
            continue
        rec = recommend(method, index, cfg)
        if rec is not None:
            recommendations.append(rec)
    return recommendations


_WORKER: Dict[str, object] = {}


def _init_worker(index: CloneIndex, cfg: SearchConfig, patterns: Sequence[BoilerplatePattern]) -> None:
    _WORKER.update(index=index, cfg=cfg, patterns=patterns)


def _scan_worker(task: Tuple[str, str, str]) -> List[Recommendation]:
    project_id, rel_path, text = task
    return scan_file(
        SourceFile.from_text(project_id, rel_path, text),
        _WORKER["index"], _WORKER["cfg"], _WORKER["patterns"],
    )


def scan_project(
    root: str,
    index: CloneIndex,
    cfg: SearchConfig,
    settings: Optional[RunSettings] = None,
    patterns: Optional[Sequence[BoilerplatePattern]] = None,
    project_id: Optional[str] = None,
) -> List[Recommendation]:
    """Recommendations for every outdated snippet clone under root, sorted by (path, start_line)."""
    settings = settings or RunSettings()
    patterns = tuple(patterns) if patterns is not None else default_patterns()
    base = Path(root)
    project_id = project_id or base.resolve().name

    tasks = []
    for path in FileManager.source_files(root, settings.extensions):
        try:
            text = FileManager.read_source(path)
        except OSError as e:
            logger.warning("Skipping %s: %s", path, e)
            continue
        tasks.append((project_id, path.relative_to(base).as_posix(), text))
    logger.info("Scanning %d files of %s", len(tasks), project_id)

    if settings.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(
            max_workers=settings.jobs, initializer=_init_worker, initargs=(index, cfg, patterns)
        ) as executor:
            results = list(executor.map(_scan_worker, tasks))
    else:
        results = [
            scan_file(SourceFile.from_text(pid, rel, text), index, cfg, patterns)
            for pid, rel, text in tasks
        ]

    recommendations = [rec for batch in results for rec in batch]
    recommendations.sort(key=lambda r: (r.path, r.start_line))
    logger.info("%d recommendations for %s", len(recommendations), project_id)
    return recommendations


RECOMMENDATION_HEADER = ["file", "method", "start_line", "end_line", "post_id", "matched_doc_id", "edit_distance"]


def write_recommendations_csv(recs: Sequence[Recommendation], out_path: str) -> None:
    FileManager.write_csv(
        out_path,
        RECOMMENDATION_HEADER,
        ([r.path, r.method_name, r.start_line, r.end_line, r.latest_post_id, r.matched_doc_id, r.edit_distance]
         for r in recs),
        description="recommendations",
    )


def write_latest_revisions(recs: Sequence[Recommendation], directory: str) -> List[Path]:
    """Write each recommended latest revision to ``<doc_id>.java`` under directory."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for doc_id, body in sorted({r.latest_doc_id: r.latest_body for r in recs}.items()):
        path = target / f"{doc_id}.java"
        path.write_text("\n".join(body) + "\n", encoding="utf-8")
        written.append(path)
    return written
