"""
Configuration of the annotation pipeline.

All pixel and count constants of the shipped rule set are named thresholds, so that corpora scanned at another
resolution can be recalibrated from a YAML file without touching the rules.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Union

import yaml

from logical_layout.errors import ConfigError
from logical_layout.texts import HeaderWordSet

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_RULE_FILE = DATA_DIR / "default.rules"

DEFAULT_THRESHOLDS = {
    # blocks
    "text_word_divisor": 3,
    "title_max_lines": 4,
    "header_similarity": 90,
    "header_first_page_lines": 30,
    "header_other_page_lines": 4,
    "header_max_lines": 15,
    "header_max_words": 50,
    "title_height_divisor": 2,
    "ctn_total": False,
    # lines
    "line_title_max_similarity": 60,
    "title_min_capitals": 10,
    "title_indent_min": 104,
    "firstline_indent_max": 105,
    "title_max_capitals": 15,
}

_KEYS = {"rule_file", "header_words", "thresholds", "doc_title", "seed", "jobs"}


@dataclass
class Config:
    rule_file: Path = DEFAULT_RULE_FILE
    header_words: Optional[Path] = None
    thresholds: Dict[str, Union[int, float, bool]] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    doc_title: Optional[str] = None
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self.thresholds = merge_thresholds(self.thresholds)

    def header_word_set(self):
        """ The configured header word set, or the built-in one. """
        if self.header_words is None:
            return HeaderWordSet()
        return HeaderWordSet.from_file(self.header_words)

    def rule_book(self):
        """ Loads the configured rule file against the configured thresholds. """
        from logical_layout.rules import load_rule_file
        return load_rule_file(self.rule_file, thresholds=self.thresholds)


def merge_thresholds(overrides):
    """
    Default thresholds updated with `overrides`.

    Raises
    ------
    ConfigError :
        If an override names an unknown threshold or has a non-numeric value.

    """
    unknown = sorted(set(overrides) - set(DEFAULT_THRESHOLDS))
    if unknown:
        raise ConfigError("Unknown threshold(s): {}. Known thresholds are: {}".format(
            ", ".join(unknown), ", ".join(sorted(DEFAULT_THRESHOLDS))))
    merged = dict(DEFAULT_THRESHOLDS)
    for name, value in overrides.items():
        default = DEFAULT_THRESHOLDS[name]
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError("Threshold '{}' must be true or false, got {!r}.".format(name, value))
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("Threshold '{}' must be a number, got {!r}.".format(name, value))
        merged[name] = value
    return merged


def load_config(path=None, **overrides):
    """
    Reads a YAML configuration file. Every key is optional; relative paths are resolved against the directory of the
    configuration file.

    Parameters
    ----------
    path : str or Path, optional
        Configuration file. Without it the defaults are used.
    overrides : dict
        Values taking precedence over the file (None values are ignored), e.g. `seed` from the command line.

    Returns
    -------
    Config

    Raises
    ------
    ConfigError :
        If the file cannot be parsed or contains unknown keys or thresholds.

    """
    data = {}
    base = Path(".")
    if path is not None:
        path = Path(path)
        base = path.parent
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise ConfigError("Cannot parse configuration '{}': {}".format(path, e))
        if not isinstance(data, dict):
            raise ConfigError("Configuration '{}' must be a mapping.".format(path))
        unknown = sorted(set(data) - _KEYS)
        if unknown:
            raise ConfigError("Unknown configuration key(s) in '{}': {}".format(path, ", ".join(unknown)))
    kwargs = {}
    if data.get("rule_file"):
        kwargs["rule_file"] = base / data["rule_file"]
    if data.get("header_words"):
        kwargs["header_words"] = base / data["header_words"]
    if "thresholds" in data:
        if not isinstance(data["thresholds"] or {}, dict):
            raise ConfigError("'thresholds' must be a mapping.")
        kwargs["thresholds"] = data["thresholds"] or {}
    for key in ("doc_title", "seed", "jobs"):
        if data.get(key) is not None:
            kwargs[key] = data[key]
    kwargs.update({k: (Path(v) if k in ("rule_file", "header_words") else v)
                   for k, v in overrides.items() if v is not None})
    config = Config(**kwargs)
    logger.debug("Loaded configuration %s", config)
    return config
