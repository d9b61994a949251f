"""Append-only run manifests: what ran, with which config, on which inputs."""

import hashlib
import logging
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, List, Sequence

from pydantic import BaseModel, Field

from .exceptions import OutputWriteError
from .utils import FileManager

logger = logging.getLogger(__name__)


class RunManifest(BaseModel):
    command: str
    started_at: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    config: Dict[str, str] = Field(default_factory=dict)
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    counts: Dict[str, int] = Field(default_factory=dict)

    def add_input(self, path: str, extensions: Sequence[str] = (".java",)) -> None:
        """Record the sha256 of a file, or a digest over a directory's source files."""
        target = Path(path)
        if target.is_dir():
            self.inputs[str(path)] = tree_digest(target, extensions)
        else:
            self.inputs[str(path)] = FileManager.sha256(str(target))

    @contextmanager
    def timed(self, phase: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[phase] = round(time.perf_counter() - start, 6)


def tree_digest(root: Path, extensions: Sequence[str]) -> str:
    digest = hashlib.sha256()
    for path in FileManager.source_files(str(root), extensions):
        digest.update(path.relative_to(root).as_posix().encode("utf-8"))
        digest.update(b"\0")
        digest.update(FileManager.sha256(str(path)).encode("ascii"))
        digest.update(b"\n")
    return digest.hexdigest()


def manifest_path(primary_output: str) -> str:
    return f"{primary_output}.manifest.jsonl"


def append_manifest(manifest: RunManifest, path: str) -> None:
    try:
        with open(path, "a", encoding="utf-8") as f:
            f.write(manifest.model_dump_json() + "\n")
    except OSError as e:
        raise OutputWriteError(f"Failed to append manifest to {path}: {e}") from e
    logger.info("Appended %s manifest to %s", manifest.command, path)
