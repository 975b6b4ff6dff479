import pytest

from logical_layout.alto_model import parse_alto
from logical_layout.config import Config
from tests.builders import FIXTURES, newspaper


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def default_rules():
    return Config().rule_book()


@pytest.fixture
def newspaper_doc():
    data, truth = newspaper()
    return parse_alto(data, document_id="newspaper"), truth
