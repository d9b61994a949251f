import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator

from .exceptions import ConfigError

IntQuad = Tuple[int, int, int, int]
FloatQuad = Tuple[float, float, float, float]

# Parameter bounds of the tuning search space
NGRAM_BOUNDS = (1, 24)
QR_BOUNDS = (2, 20)
MIN_CLONE_BOUNDS = (6, 16)


def as_quad(value):
    """Accept '1,4,4,4', a scalar, or a sequence for a four-representation field."""
    if isinstance(value, str):
        parts = [p.strip().rstrip("%").strip() for p in value.split(",") if p.strip()]
        return tuple(parts * 4) if len(parts) == 1 else tuple(parts)
    if isinstance(value, (int, float)):
        return (value,) * 4
    return value


class SearchConfig(BaseModel):
    """Tunable clone search parameters, one value per representation r0..r3."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    ngram_size: IntQuad = (1, 4, 4, 4)
    qr_threshold: IntQuad = (9, 6, 5, 9)
    sim_threshold: FloatQuad = (50.0, 60.0, 70.0, 80.0)
    boosting: int = -1
    min_clone_size: int = 6

    @field_validator("ngram_size", "qr_threshold", "sim_threshold", mode="before")
    @classmethod
    def split_quads(cls, value):
        return as_quad(value)

    @field_validator("ngram_size")
    @classmethod
    def check_ngram_size(cls, value: IntQuad) -> IntQuad:
        low, high = NGRAM_BOUNDS
        if any(not low <= n <= high for n in value):
            raise ValueError(f"n-gram sizes must lie in [{low}, {high}], got {value}")
        return value

    @field_validator("qr_threshold")
    @classmethod
    def check_qr_threshold(cls, value: IntQuad) -> IntQuad:
        low, high = QR_BOUNDS
        if any(not low <= q <= high for q in value):
            raise ValueError(f"QR thresholds must lie in [{low}, {high}], got {value}")
        return value

    @field_validator("sim_threshold")
    @classmethod
    def check_sim_threshold(cls, value: FloatQuad) -> FloatQuad:
        if any(not 0 < s <= 100 for s in value):
            raise ValueError(f"similarity thresholds must lie in (0, 100], got {value}")
        return value

    @field_validator("boosting")
    @classmethod
    def check_boosting(cls, value: int) -> int:
        if value != -1 and value < 1:
            raise ValueError(f"boosting is -1 (off) or a positive weight, got {value}")
        return value

    @field_validator("min_clone_size")
    @classmethod
    def check_min_clone_size(cls, value: int) -> int:
        low, high = MIN_CLONE_BOUNDS
        if not low <= value <= high:
            raise ValueError(f"min_clone_size must lie in [{low}, {high}], got {value}")
        return value

    def weights(self) -> FloatQuad:
        """Score weight per representation; boosting only lifts r0."""
        r0 = float(self.boosting) if self.boosting > 0 else 1.0
        return (r0, 1.0, 1.0, 1.0)

    def sort_key(self) -> tuple:
        return (
            self.ngram_size,
            self.qr_threshold,
            self.sim_threshold,
            self.boosting,
            self.min_clone_size,
        )

    def to_env(self) -> Dict[str, str]:
        """Key-value form accepted by load_config."""
        return {
            "NGRAM_SIZE": ",".join(str(n) for n in self.ngram_size),
            "QR_THRESHOLD": ",".join(str(q) for q in self.qr_threshold),
            "SIM_THRESHOLD": ",".join(f"{s:g}" for s in self.sim_threshold),
            "BOOSTING": str(self.boosting),
            "MIN_CLONE_SIZE": str(self.min_clone_size),
        }


@dataclass
class RunSettings:
    """Per-run settings that are not part of the tuned parameter set."""
    extensions: Tuple[str, ...] = (".java",)
    jobs: int = 1
    boilerplate_patterns: Optional[Path] = None

    @classmethod
    def from_environment(cls) -> "RunSettings":
        try:
            jobs = int(os.getenv("REVSEARCH_JOBS", "1"))
        except ValueError as e:
            raise ConfigError(f"REVSEARCH_JOBS must be an integer: {e}") from e
        return cls(jobs=max(1, jobs))


SEARCH_KEYS = {
    "NGRAM_SIZE": "ngram_size",
    "QR_THRESHOLD": "qr_threshold",
    "SIM_THRESHOLD": "sim_threshold",
    "BOOSTING": "boosting",
    "MIN_CLONE_SIZE": "min_clone_size",
}
RUN_KEYS = {"EXTENSIONS", "BOILERPLATE_PATTERNS"}


def build_search_config(values: Dict[str, object]) -> SearchConfig:
    """Validate raw field values, turning pydantic errors into ConfigError."""
    try:
        return SearchConfig(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid search configuration: {problems}") from e


def load_config(path: Optional[str]) -> Tuple[SearchConfig, RunSettings]:
    """Read a KEY=VALUE config document. No path means the built-in defaults."""
    settings = RunSettings.from_environment()
    if path is None:
        return SearchConfig(), settings

    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {config_path}")

    raw = dotenv_values(config_path)
    unknown = sorted(set(raw) - set(SEARCH_KEYS) - RUN_KEYS)
    if unknown:
        raise ConfigError(f"Unknown config keys in {config_path}: {', '.join(unknown)}")

    values = {
        SEARCH_KEYS[key]: value
        for key, value in raw.items()
        if key in SEARCH_KEYS and value not in (None, "")
    }
    if raw.get("EXTENSIONS"):
        settings.extensions = tuple(
            ext if ext.startswith(".") else f".{ext}"
            for ext in (e.strip().lower() for e in raw["EXTENSIONS"].split(","))
            if ext
        )
    if raw.get("BOILERPLATE_PATTERNS"):
        patterns = Path(raw["BOILERPLATE_PATTERNS"])
        if not patterns.is_absolute():
            patterns = config_path.parent / patterns
        settings.boilerplate_patterns = patterns

    return build_search_config(values), settings


def write_config(config: SearchConfig, path: str, extensions: List[str] | None = None) -> None:
    """Write a config file that load_config reads back to the same SearchConfig."""
    lines = [f"{key}={value}" for key, value in config.to_env().items()]
    if extensions:
        lines.append(f"EXTENSIONS={','.join(extensions)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
