import unittest
from pathlib import Path

import pytest

from logical_layout.config import Config, DATA_DIR, DEFAULT_RULE_FILE, DEFAULT_THRESHOLDS, load_config, \
    merge_thresholds
from logical_layout.errors import ConfigError
from logical_layout.texts import DEFAULT_HEADER_PHRASES


class ConfigTester(unittest.TestCase):
    """ Tests `Config` class. """

    def test_defaults(self):
        config = Config()
        assert config.rule_file == DEFAULT_RULE_FILE
        assert config.thresholds == DEFAULT_THRESHOLDS
        assert config.seed == 0
        assert config.jobs == 1
        assert len(config.header_word_set()) == len(DEFAULT_HEADER_PHRASES)

    def test_shipped_header_words(self):
        words = Config(header_words=DATA_DIR / "header_words.txt").header_word_set()
        assert tuple(words) == DEFAULT_HEADER_PHRASES

    def test_rule_book(self):
        book = Config(thresholds={"header_max_lines": 20}).rule_book()
        b6 = book.block.resolutions[0]
        assert b6.clauses[0].atoms[0].operand.value == 20


@pytest.mark.parametrize(["overrides", "expected"], [
    ({}, DEFAULT_THRESHOLDS),
    ({"title_max_lines": 6}, dict(DEFAULT_THRESHOLDS, title_max_lines=6)),
    ({"header_similarity": 87.5, "ctn_total": True}, dict(DEFAULT_THRESHOLDS, header_similarity=87.5, ctn_total=True)),
])
def test_merge_thresholds(overrides, expected):
    assert merge_thresholds(overrides) == expected


@pytest.mark.parametrize("overrides", [
    {"unknown": 3},
    {"title_max_lines": "four"},
    {"title_max_lines": True},
    {"ctn_total": 1},
])
def test_merge_thresholds_invalid(overrides):
    with pytest.raises(ConfigError):
        merge_thresholds(overrides)


def test_load_config(tmp_path):
    (tmp_path / "rules").mkdir()
    (tmp_path / "rules" / "custom.rules").write_text("default block -> Text\n", encoding="utf-8")
    (tmp_path / "words.txt").write_text("Petit Journal\n", encoding="utf-8")
    path = tmp_path / "config.yaml"
    path.write_text(
        "rule_file: rules/custom.rules\n"
        "header_words: words.txt\n"
        "doc_title: Le Petit Journal\n"
        "seed: 3\n"
        "thresholds:\n"
        "  header_similarity: 80\n",
        encoding="utf-8")
    config = load_config(path)
    assert config.rule_file == tmp_path / "rules" / "custom.rules"
    assert list(config.header_word_set()) == ["Petit Journal"]
    assert config.doc_title == "Le Petit Journal"
    assert config.seed == 3
    assert config.jobs == 1
    assert config.thresholds["header_similarity"] == 80
    assert config.thresholds["title_max_lines"] == 4
    assert config.rule_book().block.default_label.value == "Text"


def test_load_config_overrides(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("seed: 3\njobs: 2\n", encoding="utf-8")
    config = load_config(path, seed=11, jobs=None, rule_file="other.rules")
    assert config.seed == 11
    assert config.jobs == 2
    assert config.rule_file == Path("other.rules")


def test_load_config_defaults():
    assert load_config() == Config()
    assert load_config(seed=5).seed == 5


@pytest.mark.parametrize("content", [
    "colour: blue\n",
    "thresholds:\n  nope: 1\n",
    "thresholds: [1, 2]\n",
    "- a\n- b\n",
    "seed: [unclosed\n",
])
def test_load_config_invalid(tmp_path, content):
    path = tmp_path / "config.yaml"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)
