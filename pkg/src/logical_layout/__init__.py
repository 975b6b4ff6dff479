# -*- coding: utf-8 -*-
from importlib.metadata import version, PackageNotFoundError

try:
    # Change here if project is renamed and does not equal the distribution name
    dist_name = 'logical-layout'
    __version__ = version(dist_name)
except PackageNotFoundError:
    __version__ = 'unknown'

from logical_layout.alto_model import LogicalLabel, Document, parse_alto, parse_alto_file, write_annotated
from logical_layout.config import Config, load_config
from logical_layout.errors import *
from logical_layout.evaluation import score, compare, load_predictions, load_truth
from logical_layout.features import extract_features
from logical_layout.rule_engine import annotate
from logical_layout.rules import load_rules, load_rule_file
