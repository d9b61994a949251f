"""
Tests for search configuration loading.
"""

from pathlib import Path

import pytest

from app.revsearch.config import SearchConfig, as_quad, load_config, write_config
from app.revsearch.exceptions import ConfigError

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "data" / "default_config.env"


def write_env(path, *lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestSearchConfig:
    """Tests for SearchConfig validation."""

    def test_defaults(self):
        cfg = SearchConfig()
        assert cfg.ngram_size == (1, 4, 4, 4)
        assert cfg.qr_threshold == (9, 6, 5, 9)
        assert cfg.sim_threshold == (50.0, 60.0, 70.0, 80.0)
        assert (cfg.boosting, cfg.min_clone_size) == (-1, 6)

    def test_scalar_applies_to_every_representation(self):
        cfg = SearchConfig(ngram_size=3, sim_threshold="70%")
        assert cfg.ngram_size == (3, 3, 3, 3)
        assert cfg.sim_threshold == (70.0, 70.0, 70.0, 70.0)

    @pytest.mark.parametrize("field,value", [
        ("ngram_size", (0, 4, 4, 4)),
        ("ngram_size", (1, 4, 4, 25)),
        ("qr_threshold", (1, 6, 5, 9)),
        ("sim_threshold", (0, 60, 70, 80)),
        ("sim_threshold", (50, 60, 70, 101)),
        ("boosting", 0),
        ("min_clone_size", 5),
        ("min_clone_size", 17),
    ])
    def test_out_of_range(self, field, value):
        with pytest.raises(ValueError):
            SearchConfig(**{field: value})

    def test_weights(self):
        assert SearchConfig().weights() == (1.0, 1.0, 1.0, 1.0)
        assert SearchConfig(boosting=4).weights() == (4.0, 1.0, 1.0, 1.0)

    def test_as_quad(self):
        assert as_quad("1, 4,4 ,4") == ("1", "4", "4", "4")
        assert as_quad("50%,60%,70%,80%") == ("50", "60", "70", "80")
        assert as_quad(2.5) == (2.5, 2.5, 2.5, 2.5)


class TestLoadConfig:
    """Tests for load_config."""

    def test_no_path_gives_defaults(self):
        cfg, settings = load_config(None)
        assert cfg == SearchConfig()
        assert settings.extensions == (".java",)
        assert settings.jobs == 1

    def test_shipped_defaults_match_built_in(self):
        cfg, settings = load_config(str(DEFAULT_CONFIG))
        assert cfg == SearchConfig()
        assert settings.extensions == (".java",)

    def test_reads_values(self, tmp_path):
        path = write_env(
            tmp_path / "cfg.env",
            "# tuned",
            "NGRAM_SIZE=2,3,4,5",
            "QR_THRESHOLD=10",
            "SIM_THRESHOLD=55%,65%,75%,85%",
            "BOOSTING=4",
            "MIN_CLONE_SIZE=8",
        )
        cfg, _ = load_config(path)
        assert cfg == SearchConfig(
            ngram_size=(2, 3, 4, 5),
            qr_threshold=(10, 10, 10, 10),
            sim_threshold=(55, 65, 75, 85),
            boosting=4,
            min_clone_size=8,
        )

    def test_missing_keys_keep_defaults(self, tmp_path):
        cfg, _ = load_config(write_env(tmp_path / "cfg.env", "MIN_CLONE_SIZE=10"))
        assert cfg == SearchConfig(min_clone_size=10)

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="NGRAMSIZE"):
            load_config(write_env(tmp_path / "cfg.env", "NGRAMSIZE=4"))

    @pytest.mark.parametrize("line", [
        "NGRAM_SIZE=1,4,4",
        "NGRAM_SIZE=four",
        "QR_THRESHOLD=30",
        "SIM_THRESHOLD=0",
        "MIN_CLONE_SIZE=3",
        "BOOSTING=-3",
    ])
    def test_invalid_value(self, tmp_path, line):
        with pytest.raises(ConfigError, match="Invalid search configuration"):
            load_config(write_env(tmp_path / "cfg.env", line))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(str(tmp_path / "absent.env"))

    def test_extensions(self, tmp_path):
        _, settings = load_config(write_env(tmp_path / "cfg.env", "EXTENSIONS=java, .JAV"))
        assert settings.extensions == (".java", ".jav")

    def test_boilerplate_path_relative_to_config(self, tmp_path):
        _, settings = load_config(write_env(tmp_path / "cfg.env", "BOILERPLATE_PATTERNS=patterns.txt"))
        assert settings.boilerplate_patterns == tmp_path / "patterns.txt"

    def test_jobs_from_environment(self, monkeypatch):
        monkeypatch.setenv("REVSEARCH_JOBS", "4")
        assert load_config(None)[1].jobs == 4
        monkeypatch.setenv("REVSEARCH_JOBS", "0")
        assert load_config(None)[1].jobs == 1

    def test_bad_jobs(self, monkeypatch):
        monkeypatch.setenv("REVSEARCH_JOBS", "many")
        with pytest.raises(ConfigError, match="REVSEARCH_JOBS"):
            load_config(None)


class TestWriteConfig:
    """Tests for write_config."""

    @pytest.mark.parametrize("cfg", [
        SearchConfig(),
        SearchConfig(ngram_size=(1, 2, 3, 24), sim_threshold=(12.5, 60, 99.5, 100), boosting=8, min_clone_size=16),
    ])
    def test_reads_back(self, tmp_path, cfg):
        path = tmp_path / "out.env"
        write_config(cfg, str(path))
        assert load_config(str(path))[0] == cfg

    def test_extensions_written(self, tmp_path):
        path = tmp_path / "out.env"
        write_config(SearchConfig(), str(path), extensions=[".java", ".jav"])
        assert "EXTENSIONS=.java,.jav" in path.read_text(encoding="utf-8")
        assert load_config(str(path))[1].extensions == (".java", ".jav")
