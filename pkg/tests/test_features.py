import random
import statistics
import unittest

import Levenshtein
import pytest

from logical_layout.alto_model import Document, Page, TextBlock, TextLine, parse_alto, parse_alto_file
from logical_layout.errors import EmptyDocumentError
from logical_layout.features import LINE_ID_COLUMNS, LINE_FEATURES, BLOCK_ID_COLUMNS, BLOCK_FEATURES, \
    BLOCK_LEARNING_FEATURES, DOCUMENT_FEATURES, extract_features, extract_line_features, \
    extract_block_features, extract_document_features, feature_csv
from tests.builders import FIXTURES, alto, block, line

# words with known header cues: "Page" and "—" are first marks, the date a second mark
VOCABULARY = ["Page", "—", "12/03/1890", "42", "fin.", "Lorem", "ipsum", "DOLOR", "sit"]


def random_document(rng, number):
    pages = []
    for p in range(1, rng.randint(1, 2) + 1):
        blocks = []
        for b in range(rng.randint(1, 5)):
            lines = []
            for j in range(rng.randint(0, 4)):
                lines.append(TextLine(
                    id="D{}_P{}_B{}_L{}".format(number, p, b, j),
                    hpos=rng.randint(0, 500), vpos=rng.randint(0, 2000),
                    height=rng.randint(10, 80), width=rng.randint(50, 600),
                    words=[rng.choice(VOCABULARY) for _ in range(rng.randint(0, 6))]))
            blocks.append(TextBlock(id="D{}_P{}_B{}".format(number, p, b), hpos=rng.randint(0, 500),
                                    vpos=rng.randint(0, 2000), height=rng.randint(0, 400),
                                    width=rng.randint(0, 700), lines=lines))
        pages.append(Page(number=p, blocks=blocks))
    if not any(b.lines for page in pages for b in page.blocks):
        pages[0].blocks[0].lines.append(TextLine(id="D{}_extra".format(number), hpos=1, vpos=1, height=20,
                                                 width=100, words=["Lorem"]))
    title = rng.choice(["", "Lorem ipsum", "Page 42 —"])
    return Document(id="doc{}".format(number), pages=pages, doc_title=title)


def gap(upper, lower):
    return max(0, lower.vpos - upper.vpos - upper.height)


def third_quartile(values):
    ordered = sorted(values)
    position = 0.75 * (len(ordered) - 1)
    below = int(position)
    above = min(below + 1, len(ordered) - 1)
    return ordered[below] + (position - below) * (ordered[above] - ordered[below])


def expected_line_rows(doc):
    rows = []
    for page in doc.pages:
        page_lines = [(b, l) for b in page.blocks for l in b.lines]
        for i, (b, l) in enumerate(page_lines):
            text = " ".join(l.words)
            visible = text.replace(" ", "")
            rows.append({
                "element_id": l.id,
                "block_id": b.id,
                "precedingSpace": gap(page_lines[i - 1][1], l) if i else 0,
                "followingSpace": gap(l, page_lines[i + 1][1]) if i + 1 < len(page_lines) else 0,
                "diffHpos": l.hpos - statistics.median([x.hpos for x in b.lines]),
                "wordCount": len(l.words),
                "capitalProp": 100. * sum(c.isupper() for c in visible) / len(visible) if visible else 0,
                "stwCapital": bool(l.words) and l.words[0][0].isupper(),
                "headerMark1": "Page" in l.words or "—" in l.words,
                "headerMark2": "12/03/1890" in l.words,
                "simTitle": 0 if not doc.doc_title else
                100. * (1 - Levenshtein.distance(text.lower(), doc.doc_title.lower()) /
                        max(len(text), len(doc.doc_title))),
            })
    return rows


def expected_document_features(doc):
    heights, widths, word_counts, spaces = [], [], [], []
    block_heights, block_widths, block_spaces, ratios, counts = [], [], [], [], []
    for page in doc.pages:
        page_lines = [l for b in page.blocks for l in b.lines]
        spaces += [0] + [gap(a, b) for a, b in zip(page_lines, page_lines[1:])] if page_lines else []
        heights += [l.height for l in page_lines]
        widths += [l.width for l in page_lines]
        word_counts += [len(l.words) for l in page_lines]
        for i, b in enumerate(page.blocks):
            if not b.lines:
                continue
            block_heights.append(b.height)
            block_widths.append(b.width)
            block_spaces.append(gap(page.blocks[i - 1], b) if i else 0)
            ratios.append(sum(len(l.words) for l in b.lines) / len(b.lines))
            counts.append(len(b.lines))
    return {
        "medHeight": statistics.median(heights),
        "medWidth": statistics.median(widths),
        "medWordCount": statistics.median(word_counts),
        "medLineSpace": statistics.median(spaces),
        "thirdQuartileLineSpace": third_quartile(spaces),
        "medBlockHeight": statistics.median(block_heights),
        "medBlockWidth": statistics.median(block_widths),
        "medBlockSpace": statistics.median(block_spaces),
        "medWordRatio": statistics.median(ratios),
        "medLineCount": statistics.median(counts),
    }


def test_features_match_reference():
    rng = random.Random(7)
    for number in range(100):
        doc = random_document(rng, number)
        features = extract_features(doc)

        expected = expected_line_rows(doc)
        assert list(features.lines["element_id"]) == [r["element_id"] for r in expected]
        for (_, row), reference in zip(features.lines.iterrows(), expected):
            for name, value in reference.items():
                if isinstance(value, (bool, str)):
                    assert row[name] == value, (doc.id, row["element_id"], name)
                else:
                    assert row[name] == pytest.approx(value), (doc.id, row["element_id"], name)

        block_ids = [b.id for page in doc.pages for b in page.blocks]
        assert list(features.blocks["element_id"]) == block_ids
        for (_, row), b in zip(features.blocks.iterrows(), (b for page in doc.pages for b in page.blocks)):
            assert row["linecount"] == len(b.lines)
            if b.lines:
                assert row["wordRatio"] == pytest.approx(sum(len(l.words) for l in b.lines) / len(b.lines))
                assert row["medHeight"] == pytest.approx(statistics.median([l.height for l in b.lines]))
                spaces = [gap(x, y) for x, y in zip(b.lines, b.lines[1:])]
                assert row["medLineSpace"] == pytest.approx(statistics.median(spaces) if spaces else 0)
                assert row["firstvpos"] == b.lines[0].vpos
                assert row["lasthpos"] == b.lines[-1].hpos
            else:
                assert row["wordCount"] == 0
                assert row["height"] == 0
                assert not row["headerMark1"]

        document = features.document.to_dict()
        for name, value in expected_document_features(doc).items():
            assert document[name] == pytest.approx(value), (doc.id, name)


class FeatureTester(unittest.TestCase):
    """ Tests the feature extraction of the two column page. """

    def setUp(self):
        self.doc = parse_alto_file(FIXTURES / "2col_page.xml")

    def test_columns(self):
        """ Tests the columns of the feature matrices. """
        lines = extract_line_features(self.doc)
        blocks = extract_block_features(self.doc)
        assert list(lines.columns) == LINE_ID_COLUMNS + LINE_FEATURES
        assert list(blocks.columns) == BLOCK_ID_COLUMNS + BLOCK_FEATURES
        assert len(lines) == 22
        assert len(blocks) == 8
        assert "medHeight" not in BLOCK_LEARNING_FEATURES
        assert "blockType" not in BLOCK_LEARNING_FEATURES
        assert "linecount" in BLOCK_LEARNING_FEATURES

    def test_line_features(self):
        """ Tests `extract_line_features` function. """
        lines = extract_line_features(self.doc).set_index("element_id")
        first = lines.loc["TB1_L1"]
        assert first["precedingSpace"] == 0
        assert first["followingSpace"] == 5
        assert first["diffHpos"] == 30
        assert first["wordCount"] == 8
        assert first["stwCapital"]
        assert first["simTitle"] == 100
        assert first["blockType"] == ""
        title = lines.loc["TB2_L1"]
        assert title["precedingSpace"] == 50
        assert title["capitalProp"] == 100
        assert title["block_id"] == "TB2"
        # the next column starts higher on the page
        assert lines.loc["TB4_L3"]["followingSpace"] == 0
        assert lines.loc["TB5_L1"]["precedingSpace"] == 0

    def test_block_features(self):
        """ Tests `extract_block_features` function. """
        blocks = extract_block_features(self.doc).set_index("element_id")
        title = blocks.loc["TB2"]
        assert title["precedingSpace"] == 50
        assert title["followingSpace"] == 50
        assert title["linecount"] == 2
        assert title["wordRatio"] == 1
        assert title["medHeight"] == 60
        assert title["medLineSpace"] == 5
        text = blocks.loc["TB4"]
        assert text["precedingSpace"] == 15
        assert text["wordCount"] == 21
        assert text["firsthpos"] == 130
        assert text["lastvpos"] == 610
        assert text["medWidth"] == 520

    def test_document_features(self):
        """ Tests `extract_document_features` function. """
        document = extract_document_features(self.doc)
        assert list(document.to_dict()) == DOCUMENT_FEATURES
        assert document.medHeight == 30
        assert document.medWidth == 520
        assert document.medWordCount == 8
        assert document.medLineSpace == 5
        assert document.thirdQuartileLineSpace == pytest.approx(12.5)
        assert document.medBlockHeight == 100
        assert document.medBlockWidth == 550
        assert document.medBlockSpace == pytest.approx(32.5)
        assert document.medWordRatio == 7
        assert document.medLineCount == 3


def test_empty_blocks():
    doc = parse_alto(alto([[block("E", [], box=(10, 10, 100, 100), type="illustration"),
                            block("B", [line("B_L1", 10, 200, 100, text=["Lorem"])])]]))
    blocks = extract_block_features(doc)
    empty = blocks.iloc[0]
    assert empty["linecount"] == 0
    assert empty["medHeight"] == 0
    assert empty["blockType"] == "illustration"
    assert not empty["headerMark2"]
    # empty blocks still separate their neighbours
    assert blocks.iloc[1]["precedingSpace"] == 90
    assert extract_document_features(doc).medBlockSpace == 90


def test_document_without_lines():
    doc = parse_alto(alto([[block("E", [], box=(10, 10, 100, 100))]]))
    with pytest.raises(EmptyDocumentError):
        extract_document_features(doc)


def test_feature_csv():
    doc = parse_alto_file(FIXTURES / "2col_page.xml")
    text = feature_csv(extract_block_features(doc))
    header, first = text.splitlines()[:2]
    assert header.split(",") == BLOCK_ID_COLUMNS + BLOCK_FEATURES
    assert first.startswith("2col_page,TB1,1,,21,0,50,100,100,100,550,130,100,100,170,3,7,")
