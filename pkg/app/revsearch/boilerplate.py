"""Named regular-expression table of boilerplate methods excluded from search."""

import logging
import re
from functools import lru_cache
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from .exceptions import ConfigError
from .extractor import MethodRecord

logger = logging.getLogger(__name__)

DEFAULT_PATTERNS = Path(__file__).with_name("boilerplate_patterns.txt")


@dataclass(frozen=True)
class BoilerplatePattern:
    name: str
    regex: re.Pattern

    def matches(self, flat_body: str) -> bool:
        return self.regex.fullmatch(flat_body) is not None


def load_patterns(path: Optional[Union[str, Path]] = None) -> List[BoilerplatePattern]:
    """Read a ``name: regex`` table; defaults to the table shipped with the package."""
    table = Path(path) if path is not None else DEFAULT_PATTERNS
    try:
        lines = table.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ConfigError(f"Cannot read boilerplate patterns from {table}: {e}") from e

    patterns = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        name, sep, expression = stripped.partition(":")
        if not sep or not name.strip() or not expression.strip():
            raise ConfigError(f"{table}:{line_no}: expected 'name: regex'")
        try:
            regex = re.compile(expression.strip())
        except re.error as e:
            raise ConfigError(f"{table}:{line_no}: bad pattern {name.strip()!r}: {e}") from e
        patterns.append(BoilerplatePattern(name.strip(), regex))
    logger.debug("Loaded %d boilerplate patterns from %s", len(patterns), table)
    return patterns


@lru_cache(maxsize=1)
def default_patterns() -> Tuple[BoilerplatePattern, ...]:
    return tuple(load_patterns())


def flatten(body: Sequence[str]) -> str:
    return " ".join(line.strip() for line in body if line.strip())


def is_boilerplate(
    method: MethodRecord,
    patterns: Optional[Sequence[BoilerplatePattern]] = None,
) -> Tuple[bool, Optional[str]]:
    """(True, pattern name) for the first matching pattern, else (False, None)."""
    if patterns is None:
        patterns = default_patterns()
    flat = flatten(method.body)
    for pattern in patterns:
        if pattern.matches(flat):
            return True, pattern.name
    return False, None
