import argparse
import logging
import os
import sys
from typing import Optional

from dotenv import load_dotenv

from .boilerplate import load_patterns
from .config import RunSettings, load_config, write_config
from .exceptions import RevSearchException
from .indexer import LATEST, SnippetDoc, load_index, save_index
from .manifest import RunManifest, append_manifest, manifest_path
from .metrics import HISTOGRAM_HEADER, PER_BLOCK_HEADER, SUMMARY_HEADER, revision_stats
from .representations import REPRESENTATIONS
from .revisions import (
    ingest_revisions,
    read_revisions,
    scan_project,
    write_latest_revisions,
    write_recommendations_csv,
)
from .tiering import (
    read_project_metadata,
    read_recommendation_sources,
    recommendations_by_tier,
    summarize_tiers,
    tier_projects,
    write_tier_summary_csv,
    write_tiers_csv,
)
from .tuner import GridSpec, grid_search, read_ground_truth, write_score_table
from .utils import FileManager

logger = logging.getLogger("app.revsearch")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: Optional[str] = None) -> None:
    """Configure root logging once; level from REVSEARCH_LOG_LEVEL, default WARNING."""
    name = (level or os.getenv("REVSEARCH_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(level=getattr(logging, name, logging.WARNING), format=LOG_FORMAT, stream=sys.stderr)


def _settings(args, config_settings: RunSettings) -> RunSettings:
    if getattr(args, "jobs", None):
        config_settings.jobs = max(1, args.jobs)
    return config_settings


def _finish(manifest: RunManifest, args, primary_output: str) -> None:
    append_manifest(manifest, args.manifest or manifest_path(primary_output))


def cmd_index(args) -> int:
    cfg, settings = load_config(args.config)
    manifest = RunManifest(command="index", config=cfg.to_env())
    manifest.add_input(args.dump)

    with manifest.timed("ingest"):
        index, report = ingest_revisions(read_revisions(args.dump), cfg)
    with manifest.timed("save"):
        save_index(index, args.out)

    manifest.outputs.append(args.out)
    manifest.counts.update(report.as_dict())
    _finish(manifest, args, args.out)
    print(f"✓ Indexed {report.revisions_indexed} revisions of {report.blocks} blocks "
          f"({report.skipped_too_small} too small, {report.deduplicated} deduplicated) to {args.out}")
    return 0


def cmd_scan(args) -> int:
    cfg, settings = load_config(args.config)
    settings = _settings(args, settings)
    manifest = RunManifest(command="scan", config=cfg.to_env())
    manifest.add_input(args.index)
    manifest.add_input(args.project, settings.extensions)

    with manifest.timed("load"):
        index = load_index(args.index)
    patterns = load_patterns(settings.boilerplate_patterns) if settings.boilerplate_patterns else None
    with manifest.timed("scan"):
        recs = scan_project(args.project, index, cfg, settings, patterns, project_id=args.project_id)

    write_recommendations_csv(recs, args.out)
    manifest.outputs.append(args.out)
    if args.latest_dir:
        written = write_latest_revisions(recs, args.latest_dir)
        manifest.outputs.extend(str(p) for p in written)
    manifest.counts["recommendations"] = len(recs)
    _finish(manifest, args, args.out)
    print(f"✓ Saved {len(recs)} recommendations to {args.out}")
    return 0


GRID_PRESETS = {"reduced": GridSpec.reduced_grid, "full": GridSpec.full_grid}


def select_grid(args) -> GridSpec:
    """The --grid file if given, else the named preset."""
    if args.grid:
        return GridSpec.from_file(args.grid)
    return GRID_PRESETS[args.preset]()


def cmd_tune(args) -> int:
    _, settings = load_config(args.config)
    settings = _settings(args, settings)
    grid = select_grid(args)
    manifest = RunManifest(command="tune", config={"grid_points": str(grid.size)})
    if args.grid:
        manifest.add_input(args.grid)
    manifest.add_input(args.truth)
    manifest.add_input(args.corpus, settings.extensions)

    pairs = read_ground_truth(args.truth)
    with manifest.timed("grid_search"):
        result = grid_search(grid, pairs, args.corpus, settings)

    write_score_table(result, args.out)
    manifest.outputs.append(args.out)
    if args.best_config:
        write_config(result.best, args.best_config)
        manifest.outputs.append(args.best_config)
    manifest.config.update(result.best.to_env())
    manifest.counts.update(queries=len(pairs), grid_points=len(result.table))
    _finish(manifest, args, args.out)

    print(f"✓ Best MRR {result.best_mrr:.4f} over {len(pairs)} queries and {len(result.table)} grid points")
    for key, value in result.best.to_env().items():
        print(f"{key}={value}")
    return 0


def cmd_tier(args) -> int:
    manifest = RunManifest(command="tier")
    manifest.add_input(args.metadata)

    projects = read_project_metadata(args.metadata)
    tiered, table = tier_projects(projects)
    by_tier = None
    if args.recommendations:
        for source in args.recommendations:
            manifest.add_input(source.partition("=")[2] or source)
        by_tier = recommendations_by_tier(tiered, read_recommendation_sources(args.recommendations))
        manifest.counts.update({f"recommendations_{tier.value}": n for tier, n in by_tier.items()})

    write_tiers_csv(tiered, args.out)
    manifest.outputs.append(args.out)
    if args.summary:
        write_tier_summary_csv(summarize_tiers(tiered), args.summary, by_tier)
        manifest.outputs.append(args.summary)
    for name in ("stars", "forks", "watchers"):
        q = table.for_metric(name)
        manifest.config[name] = f"{q.q1:g},{q.median:g},{q.q3:g}"
    manifest.counts.update({s.tier.value: s.projects for s in summarize_tiers(tiered)})
    _finish(manifest, args, args.out)
    print(f"✓ Tiered {len(tiered)} projects to {args.out}")
    if by_tier is not None:
        print("Recommendations by tier: " + ", ".join(f"{tier.value}={n}" for tier, n in by_tier.items()))
    return 0


def cmd_stats(args) -> int:
    manifest = RunManifest(command="stats")
    manifest.add_input(args.dump)

    stats = revision_stats(read_revisions(args.dump))
    FileManager.write_csv(args.out, SUMMARY_HEADER, stats.summary_rows(), description="revision statistics")
    manifest.outputs.append(args.out)
    if args.per_block:
        FileManager.write_csv(
            args.per_block,
            PER_BLOCK_HEADER,
            ([b.post_id, b.local_id, b.revisions, b.edit_distance] for b in stats.block_distances),
            description="per-block distances",
        )
        manifest.outputs.append(args.per_block)
    if args.histogram:
        FileManager.write_csv(args.histogram, HISTOGRAM_HEADER, stats.histogram_rows(), description="histogram")
        manifest.outputs.append(args.histogram)
    manifest.counts.update(answers=stats.answers, blocks=stats.blocks)
    _finish(manifest, args, args.out)

    post_id, revisions = stats.most_revised
    print(f"✓ {stats.answers} answers, {stats.blocks} blocks; "
          f"mean {stats.revisions_per_answer.mean:.2f} revisions per answer")
    print(f"Most revised answer: {post_id} ({revisions} revisions); "
          f"unchanged code blocks: {stats.identical_share:.1%}")
    return 0


def cmd_info(args) -> int:
    index = load_index(args.index)
    blocks = set()
    latest = 0
    for doc_id in index.doc_ids:
        try:
            post_id, local_id, label = SnippetDoc.parse_doc_id(doc_id)
        except ValueError:
            continue
        blocks.add((post_id, local_id))
        latest += label == LATEST
    print(f"Index: {args.index}")
    print(f"Documents: {len(index)}")
    print(f"Blocks: {len(blocks)} ({latest} with a latest revision)")
    print(f"N-gram sizes: {','.join(str(n) for n in index.ngram_size)}")
    for rep in REPRESENTATIONS:
        print(f"Vocabulary {rep.value}: {index.vocabulary_size(rep)}")
    if args.manifest:
        manifest = RunManifest(command="info", counts={"documents": len(index), "blocks": len(blocks)})
        manifest.add_input(args.index)
        append_manifest(manifest, args.manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="revsearch",
        description="Revision-aware clone search between Q&A answer histories and Java projects.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--manifest", help="Manifest file to append to (default: <output>.manifest.jsonl)")
        return p

    p = command("index", cmd_index, "Index every revision of accepted answers")
    p.add_argument("--dump", required=True, help="Revision dump (JSON Lines)")
    p.add_argument("--out", required=True, help="Index file to write")
    p.add_argument("--config", help="Key-value config file (default: built-in tuned values)")

    p = command("scan", cmd_scan, "Scan a project for clones of outdated revisions")
    p.add_argument("--index", required=True, help="Index file written by 'index'")
    p.add_argument("--project", required=True, help="Project root directory")
    p.add_argument("--out", required=True, help="Recommendation CSV to write")
    p.add_argument("--config", help="Key-value config file")
    p.add_argument("--project-id", help="Project id (default: directory name)")
    p.add_argument("--latest-dir", help="Also write each recommended latest revision into this directory")
    p.add_argument("--jobs", type=int, help="Worker processes (default: REVSEARCH_JOBS or 1)")

    p = command("tune", cmd_tune, "Grid search for the configuration with the best MRR")
    p.add_argument("--grid", help="Grid JSON file (overrides --preset)")
    p.add_argument("--preset", choices=sorted(GRID_PRESETS), default="reduced",
                   help="Built-in grid used without --grid (default: reduced)")
    p.add_argument("--truth", required=True, help="Ground-truth CSV")
    p.add_argument("--corpus", required=True, help="Directory with one sub-directory per project")
    p.add_argument("--out", required=True, help="Score table CSV to write")
    p.add_argument("--best-config", help="Write the winning configuration as a config file")
    p.add_argument("--config", help="Key-value config file (run settings only)")
    p.add_argument("--jobs", type=int, help="Worker processes (default: REVSEARCH_JOBS or 1)")

    p = command("tier", cmd_tier, "Split projects into popularity tiers")
    p.add_argument("--metadata", required=True, help="CSV with project_id,stars,forks,watchers[,lines]")
    p.add_argument("--out", required=True, help="Tiered CSV to write")
    p.add_argument("--summary", help="Per-tier summary CSV to write")
    p.add_argument("--recommendations", nargs="+", metavar="PROJECT_ID=CSV",
                   help="Scan outputs to count per tier (a bare path is keyed by its file stem)")

    p = command("stats", cmd_stats, "Revision counts and edit-size statistics")
    p.add_argument("--dump", required=True, help="Revision dump (JSON Lines)")
    p.add_argument("--out", required=True, help="Summary CSV to write")
    p.add_argument("--per-block", help="Per-block distance CSV to write")
    p.add_argument("--histogram", help="Histogram CSV to write")

    p = command("info", cmd_info, "Describe an index file")
    p.add_argument("--index", required=True, help="Index file")

    return parser


def main(argv=None) -> int:
    load_dotenv()
    setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except RevSearchException as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
