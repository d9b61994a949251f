import csv
import hashlib
import logging
from pathlib import Path
from typing import Iterable, List, Sequence

from .exceptions import OutputWriteError

logger = logging.getLogger(__name__)


class FileManager:
    """Handles file I/O operations."""

    @staticmethod
    def source_files(root: str, extensions: Sequence[str]) -> List[Path]:
        """Files under root with an allowed extension, sorted by relative path."""
        base = Path(root)
        if not base.is_dir():
            raise NotADirectoryError(f"Project root is not a directory: {root}")
        allowed = {ext.lower() for ext in extensions}
        found = [p for p in base.rglob("*") if p.is_file() and p.suffix.lower() in allowed]
        return sorted(found, key=lambda p: p.relative_to(base).as_posix())

    @staticmethod
    def read_source(path: Path) -> str:
        """Read source text; undecodable bytes are replaced rather than fatal."""
        return Path(path).read_text(encoding="utf-8", errors="replace")

    @staticmethod
    def sha256(path: str) -> str:
        digest = hashlib.sha256()
        with open(path, "rb") as f:
            for block in iter(lambda: f.read(1 << 16), b""):
                digest.update(block)
        return digest.hexdigest()

    @staticmethod
    def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence], description: str = "output") -> int:
        """Write header plus rows as UTF-8 CSV; returns the number of data rows."""
        count = 0
        try:
            with open(path, "w", newline="", encoding="utf-8") as csvfile:
                writer = csv.writer(csvfile)
                writer.writerow(header)
                for row in rows:
                    writer.writerow(row)
                    count += 1
        except OSError as e:
            raise OutputWriteError(f"Failed to save {description} to {path}: {e}") from e
        logger.info("Saved %s (%d rows) to %s", description, count, path)
        return count

    @staticmethod
    def read_csv(path: str, required: Sequence[str]) -> List[dict]:
        """Rows of a headed CSV as dicts (line numbers in '_line'); missing columns raise KeyError."""
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            columns = reader.fieldnames or []
            missing = [name for name in required if name not in columns]
            if missing:
                raise KeyError(", ".join(missing))
            rows = []
            for row in reader:
                row["_line"] = reader.line_num
                rows.append(row)
            return rows
