"""
Popularity tiers from joint quartile position of stars, forks and watchers.

    high      every metric >  q3
    low       every metric <= q1
    medium    every metric in (q1, q3]
    excluded  anything else (metrics disagree)

Quartiles use linear interpolation between closest ranks (numpy's default
percentile method). Repository filtering (language, forks, open issues) is
expected to have happened before the metadata CSV was produced.
"""

import logging
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from .exceptions import SchemaError, TooFewProjects
from .utils import FileManager

logger = logging.getLogger(__name__)

METRICS = ("stars", "forks", "watchers")
METADATA_COLUMNS = ("project_id",) + METRICS


class Tier(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    EXCLUDED = "excluded"


@dataclass(frozen=True)
class ProjectMeta:
    project_id: str
    stars: int
    forks: int
    watchers: int
    tier: Optional[Tier] = None
    lines: Optional[int] = None

    def metric_values(self) -> Tuple[int, int, int]:
        return self.stars, self.forks, self.watchers


@dataclass(frozen=True)
class MetricQuartiles:
    q1: float
    median: float
    q3: float


@dataclass(frozen=True)
class QuartileTable:
    stars: MetricQuartiles
    forks: MetricQuartiles
    watchers: MetricQuartiles

    def for_metric(self, name: str) -> MetricQuartiles:
        return getattr(self, name)


def compute_quartiles(projects: Sequence[ProjectMeta]) -> QuartileTable:
    if len(projects) < 4:
        raise TooFewProjects(f"quartiles need at least 4 projects, got {len(projects)}")
    quartiles = {}
    for name in METRICS:
        values = np.asarray([getattr(p, name) for p in projects], dtype=float)
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        quartiles[name] = MetricQuartiles(float(q1), float(median), float(q3))
    return QuartileTable(**quartiles)


def assign_tier(p: ProjectMeta, q: QuartileTable) -> Tier:
    bounds = [q.for_metric(name) for name in METRICS]
    values = p.metric_values()
    if all(v > b.q3 for v, b in zip(values, bounds)):
        return Tier.HIGH
    if all(v <= b.q1 for v, b in zip(values, bounds)):
        return Tier.LOW
    if all(b.q1 < v <= b.q3 for v, b in zip(values, bounds)):
        return Tier.MEDIUM
    return Tier.EXCLUDED


def tier_projects(projects: Sequence[ProjectMeta]) -> Tuple[List[ProjectMeta], QuartileTable]:
    """Quartiles over the whole set, then one tier per project."""
    table = compute_quartiles(projects)
    tiered = [replace(p, tier=assign_tier(p, table)) for p in projects]
    counts = Counter(p.tier for p in tiered)
    logger.info("Tiers: %s", ", ".join(f"{t.value}={counts.get(t, 0)}" for t in Tier))
    return tiered, table


# ---------------------------------------------------------------------------
# Group summaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TierSummary:
    tier: Tier
    projects: int
    mean_lines: Optional[float] = None
    std_lines: Optional[float] = None


def summarize_tiers(projects: Sequence[ProjectMeta]) -> List[TierSummary]:
    """Project count per tier, with line-count mean/std when every project has one."""
    with_lines = all(p.lines is not None for p in projects)
    summaries = []
    for tier in Tier:
        members = [p for p in projects if p.tier is tier]
        if with_lines and members:
            lines = np.asarray([p.lines for p in members], dtype=float)
            summaries.append(TierSummary(tier, len(members), float(lines.mean()), float(lines.std())))
        else:
            summaries.append(TierSummary(tier, len(members)))
    return summaries


def recommendations_by_tier(projects: Sequence[ProjectMeta], project_ids: Iterable[str]) -> Dict[Tier, int]:
    """Count recommendations (given by their project ids) per project tier."""
    tiers = {p.project_id: p.tier for p in projects}
    counts = {tier: 0 for tier in Tier}
    for project_id in project_ids:
        tier = tiers.get(project_id)
        if tier is None:
            logger.warning("Recommendation for unknown project %s", project_id)
            continue
        counts[tier] += 1
    return counts


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

class ProjectRow(BaseModel):
    project_id: str = Field(min_length=1)
    stars: int = Field(ge=0)
    forks: int = Field(ge=0)
    watchers: int = Field(ge=0)
    lines: Optional[int] = Field(default=None, ge=0)

    @field_validator("lines", mode="before")
    @classmethod
    def blank_lines(cls, value):
        return None if value == "" else value


def read_project_metadata(path: str) -> List[ProjectMeta]:
    try:
        rows = FileManager.read_csv(path, METADATA_COLUMNS)
    except KeyError as e:
        raise SchemaError(f"{path}: missing columns {e}", 1) from e

    projects = []
    for row in rows:
        line_no = row.pop("_line")
        fields = {k: v for k, v in row.items() if k in ProjectRow.model_fields}
        try:
            record = ProjectRow(**fields)
        except ValidationError as e:
            problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
            raise SchemaError(problems, line_no) from e
        projects.append(ProjectMeta(**record.model_dump()))
    return projects


def write_tiers_csv(projects: Sequence[ProjectMeta], path: str) -> None:
    with_lines = any(p.lines is not None for p in projects)
    header = list(METADATA_COLUMNS) + (["lines"] if with_lines else []) + ["tier"]
    rows = []
    for p in projects:
        row = [p.project_id, p.stars, p.forks, p.watchers]
        if with_lines:
            row.append("" if p.lines is None else p.lines)
        row.append(p.tier.value if p.tier else "")
        rows.append(row)
    FileManager.write_csv(path, header, rows, description="tiers")


def read_recommendation_sources(sources: Sequence[str]) -> List[str]:
    """Project id of every row in per-project recommendation CSVs.

    A source is ``PROJECT_ID=PATH``; a bare path is keyed by its file stem.
    """
    project_ids = []
    for source in sources:
        project_id, sep, path = source.partition("=")
        if not sep:
            project_id, path = Path(source).stem, source
        if not project_id:
            raise SchemaError(f"recommendation source {source!r} has an empty project id", 1)
        try:
            rows = FileManager.read_csv(path, ("file",))
        except KeyError as e:
            raise SchemaError(f"{path}: missing columns {e}", 1) from e
        project_ids.extend(project_id for _ in rows)
    return project_ids


def write_tier_summary_csv(
    summaries: Sequence[TierSummary],
    path: str,
    recommendations: Optional[Dict[Tier, int]] = None,
) -> None:
    header = ["tier", "projects", "mean_lines", "std_lines"]
    if recommendations is not None:
        header.append("recommendations")
    rows = []
    for s in summaries:
        row = [s.tier.value, s.projects,
               "" if s.mean_lines is None else f"{s.mean_lines:.6g}",
               "" if s.std_lines is None else f"{s.std_lines:.6g}"]
        if recommendations is not None:
            row.append(recommendations.get(s.tier, 0))
        rows.append(row)
    FileManager.write_csv(path, header, rows, description="tier summary")
