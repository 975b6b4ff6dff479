import os

import pytest

import logical_layout  # registers the output writers
from logical_layout.utils import median, quantile, writer, has_writer, get_writer, writer_formats, atomic_write, \
    _writers


@pytest.mark.parametrize(["values", "expected"], [
    ([2, 5, 3, 8, 11], 5),
    ([1, 3], 2),
    ([4], 4),
    ([], 0),
    ([1.5, 2.5, 10, -1], 2),
])
def test_median(values, expected):
    assert median(values) == expected


def test_median_empty_value():
    assert median([], empty=5) == 5


@pytest.mark.parametrize(["values", "probability", "expected"], [
    ([1, 2, 3, 4], 0.75, 3.25),
    ([1, 2, 3, 4], 0.5, 2.5),
    ([10, 0], 0.75, 7.5),
    ([7], 0.75, 7),
    ([], 0.75, 0),
])
def test_quantile(values, probability, expected):
    assert quantile(values, probability) == pytest.approx(expected)


def test_quantile_invalid_probability():
    with pytest.raises(ValueError):
        quantile([1, 2, 3], 1.5)


def test_writer_registry():
    assert has_writer("alto")
    assert has_writer("json")
    assert has_writer("csv")
    assert not has_writer("pdf")
    assert {"alto", "csv", "json"} <= set(writer_formats())


def test_register_writer():
    try:
        @writer("upper")
        def write_upper(text):
            return text.upper()

        assert has_writer("upper")
        assert get_writer("upper")("abc") == "ABC"
        assert "upper" in writer_formats()
    finally:
        _writers.pop("upper", None)
    assert not has_writer("upper")


def test_atomic_write(tmp_path):
    path = tmp_path / "sub" / "out.txt"
    atomic_write(path, "héllo")
    assert path.read_bytes() == "héllo".encode("utf-8")
    atomic_write(path, b"bye")
    assert path.read_bytes() == b"bye"
    assert os.listdir(str(tmp_path / "sub")) == ["out.txt"]
