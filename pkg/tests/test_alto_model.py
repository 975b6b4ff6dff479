import json
import unittest

import pytest
from lxml import etree

from logical_layout.alto_model import LogicalLabel, Document, Page, TextBlock, TextLine, BLOCK, LINE, \
    label_from_type, parse_alto, parse_alto_file, reading_order, write_annotated, annotation_records
from logical_layout.errors import AltoParseError, EmptyDocumentError, IncompleteAnnotationError
from tests.builders import FIXTURES, alto, block, line, single_block_page

ALTO_NS = {"a": "http://www.loc.gov/standards/alto/ns-v3#"}

COMPOSED = b"""<?xml version="1.0" encoding="UTF-8"?>
<alto xmlns="http://www.loc.gov/standards/alto/ns-v3#">
<Layout><Page ID="P1" PHYSICAL_IMG_NR="1"><PrintSpace>
  <TextBlock ID="A" HPOS="10" VPOS="10" WIDTH="100" HEIGHT="30">
    <TextLine ID="A1" HPOS="10" VPOS="10" WIDTH="100" HEIGHT="30">
      <String CONTENT="Premier"/><SP/><String CONTENT="ar-"/><HYP CONTENT="-"/>
    </TextLine>
  </TextBlock>
  <ComposedBlock ID="C">
    <TextBlock ID="B" HPOS="10" VPOS="50" WIDTH="100" HEIGHT="30" TYPE="advertisement">
      <TextLine ID="B1" HPOS="10" VPOS="50" WIDTH="100" HEIGHT="30"><String CONTENT="Savon"/></TextLine>
    </TextBlock>
    <TextBlock ID="D" HPOS="10" VPOS="90" WIDTH="100">
      <TextLine ID="D1" HPOS="10" VPOS="90" WIDTH="100" HEIGHT="abc"><String CONTENT="ticle"/></TextLine>
    </TextBlock>
  </ComposedBlock>
</PrintSpace></Page></Layout>
</alto>
"""


class LogicalLabelTester(unittest.TestCase):
    """ Tests `LogicalLabel` enumeration. """

    def test_parse(self):
        assert LogicalLabel.parse("title") is LogicalLabel.TITLE
        assert LogicalLabel.parse(" FIRSTLINE ") is LogicalLabel.FIRSTLINE
        assert LogicalLabel.parse(LogicalLabel.HEADER) is LogicalLabel.HEADER
        with pytest.raises(ValueError):
            LogicalLabel.parse("caption")

    def test_emitted(self):
        assert LogicalLabel.LASTLINE.emitted() is LogicalLabel.TEXT
        assert LogicalLabel.TITLE.emitted() is LogicalLabel.TITLE
        assert LogicalLabel.LASTLINE.type_value == "text"
        assert LogicalLabel.FIRSTLINE.type_value == "firstline"
        assert str(LogicalLabel.HEADER) == "Header"


@pytest.mark.parametrize(["type_attr", "kind", "expected"], [
    (None, BLOCK, None),
    ("title", BLOCK, LogicalLabel.TITLE),
    ("Header", LINE, LogicalLabel.HEADER),
    ("firstline", LINE, LogicalLabel.FIRSTLINE),
    ("firstline", BLOCK, LogicalLabel.OTHER),
    ("lastline", LINE, LogicalLabel.OTHER),
    ("advertisement", BLOCK, LogicalLabel.OTHER),
    ("illegible", LINE, LogicalLabel.OTHER),
])
def test_label_from_type(type_attr, kind, expected):
    assert label_from_type(type_attr, kind) == expected


class ParseAltoTester(unittest.TestCase):
    """ Tests `parse_alto` function. """

    def test_two_columns(self):
        doc = parse_alto_file(FIXTURES / "2col_page.xml")
        assert doc.id == "2col_page"
        assert len(doc.pages) == 1
        page = doc.pages[0]
        assert page.number == 1
        assert page.width == 1400
        assert [b.id for b in page.blocks] == ["TB{}".format(i) for i in range(1, 9)]
        assert doc.line_count == 22
        title = page.blocks[1]
        assert [l.words for l in title.lines] == [["GRANDE"], ["NOUVELLE"]]
        assert (title.hpos, title.vpos, title.width, title.height) == (250, 250, 250, 125)
        assert title.language == "fr"
        assert doc.doc_title == "Lorem ipsum dolor sit amet consectetur adipiscing elit"
        assert doc.warnings == []

    def test_doc_title(self):
        doc = parse_alto_file(FIXTURES / "2col_page.xml", doc_title="Le Petit Journal")
        assert doc.doc_title == "Le Petit Journal"

    def test_composed_blocks(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        assert [b.id for _, b in doc.blocks()] == ["A", "B", "D"]
        assert doc.pages[0].blocks[0].lines[0].words == ["Premier", "ar-"]
        assert doc.pages[0].blocks[1].type_attr == "advertisement"
        assert doc.pages[0].blocks[2].height == 0
        assert doc.pages[0].blocks[2].lines[0].height == 0
        assert len(doc.warnings) == 2
        assert "D: missing HEIGHT" in doc.warnings[0]
        assert "D1: invalid HEIGHT" in doc.warnings[1]

    def test_invalid_print_space(self):
        data = (FIXTURES / "2col_page.xml").read_bytes().replace(
            b'<PrintSpace HPOS="0" VPOS="0" WIDTH="1400"', b'<PrintSpace HPOS="0" VPOS="0" WIDTH="abc"')
        doc = parse_alto(data, document_id="bad_print_space")
        assert doc.pages[0].width is None
        assert doc.pages[0].height == 2000
        assert doc.line_count == 22
        assert len(doc.warnings) == 1
        assert "invalid PrintSpace WIDTH value 'abc' (line 6)" in doc.warnings[0]

    def test_malformed(self):
        with pytest.raises(AltoParseError) as e:
            parse_alto_file(FIXTURES / "malformed.xml")
        assert e.value.line is not None
        assert e.value.offset is not None

    def test_no_print_space(self):
        data = b'<alto xmlns="http://www.loc.gov/standards/alto/ns-v3#"><Layout><Page ID="P1"/></Layout></alto>'
        with pytest.raises(EmptyDocumentError):
            parse_alto(data)

    def test_duplicate_ids(self):
        lines = [line("L1", 0, 0, 100, text=["a"]), line("L1", 0, 40, 100, text=["b"])]
        with pytest.raises(AltoParseError):
            parse_alto(alto([single_block_page(lines)]))

    def test_missing_ids(self):
        data = alto([single_block_page([line("", 0, 0, 100, text=["a"])])])
        doc = parse_alto(data)
        assert doc.pages[0].blocks[0].lines[0].id == "TB1_TL1"
        assert len(doc.warnings) == 1

    def test_reading_order(self):
        first = block("B1", [line("B1_L1", 0, 0, 100, text=["a"]), line("B1_L2", 0, 40, 100, text=["b"])])
        second = block("B2", [line("B2_L1", 0, 0, 100, text=["c"])])
        doc = parse_alto(alto([[first], [second]]))
        assert [(b.id, l.id) for b, l in reading_order(doc)] == [("B1", "B1_L1"), ("B1", "B1_L2"), ("B2", "B2_L1")]
        assert [kind for kind, _, _ in doc.elements()] == [BLOCK, LINE, LINE, BLOCK, LINE]


def _label_all(doc, label=LogicalLabel.TEXT):
    for kind, _, element in doc.elements():
        if element.type_attr is None:
            element.label = label


class WriteAnnotatedTester(unittest.TestCase):
    """ Tests `write_annotated` function. """

    def test_incomplete(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        with pytest.raises(IncompleteAnnotationError) as e:
            write_annotated(doc)
        assert e.value.element_ids == ["A", "A1", "B1", "D", "D1"]

    def test_unknown_format(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        _label_all(doc)
        with pytest.raises(ValueError):
            write_annotated(doc, fmt="pdf")

    def test_alto(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        _label_all(doc)
        doc.pages[0].blocks[0].lines[0].label = LogicalLabel.LASTLINE
        root = etree.fromstring(write_annotated(doc))
        types = {el.get("ID"): el.get("TYPE") for el in root.iter("{*}TextBlock", "{*}TextLine")}
        assert types == {"A": "text", "A1": "text", "B": "advertisement", "B1": "text", "D": "text", "D1": "text"}
        # everything else is untouched
        assert root.find(".//a:ComposedBlock", ALTO_NS).get("ID") == "C"
        assert root.find(".//a:HYP", ALTO_NS) is not None
        assert root.find(".//a:TextLine", ALTO_NS).get("HPOS") == "10"

    def test_alto_reparse(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        _label_all(doc, LogicalLabel.TITLE)
        reparsed = parse_alto(write_annotated(doc), document_id="composed")
        assert reparsed.effective_label(reparsed.pages[0].blocks[0], BLOCK) is LogicalLabel.TITLE
        assert reparsed.effective_label(reparsed.pages[0].blocks[1], BLOCK) is LogicalLabel.OTHER

    def test_alto_without_tree(self):
        doc = Document(id="built", pages=[Page(number=1, width=1000, height=2000, blocks=[
            TextBlock(id="B1", hpos=1, vpos=2, width=300, height=40.5, lines=[
                TextLine(id="B1_L1", hpos=1, vpos=2, width=300, height=40.5, words=["Grande", "nouvelle"],
                         label=LogicalLabel.TITLE)], label=LogicalLabel.TITLE)])])
        reparsed = parse_alto(write_annotated(doc), document_id="built")
        block_ = reparsed.pages[0].blocks[0]
        assert block_.type_attr == "title"
        assert block_.height == 40.5
        assert block_.lines[0].words == ["Grande", "nouvelle"]
        assert block_.lines[0].type_attr == "title"
        assert reparsed.pages[0].width == 1000

    def test_json(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        _label_all(doc)
        doc.pages[0].blocks[0].label = LogicalLabel.HEADER
        rows = [json.loads(row) for row in write_annotated(doc, fmt="json").decode("utf-8").splitlines()]
        assert len(rows) == 6
        assert rows[0] == {"documentId": "composed", "page": 1, "elementId": "A", "elementKind": "block",
                           "label": "Header"}
        assert rows[2]["label"] == "Other"

    def test_csv(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        _label_all(doc)
        lines = write_annotated(doc, fmt="csv").decode("utf-8").splitlines()
        assert lines[0] == "document_id,page,element_id,kind,label"
        assert lines[1] == "composed,1,A,block,Text"
        assert lines[4] == "composed,1,B1,line,Text"
        assert len(lines) == 7

    def test_annotation_records(self):
        doc = parse_alto(COMPOSED, document_id="composed")
        _label_all(doc, LogicalLabel.LASTLINE)
        labels = {r["element_id"]: r["label"] for r in annotation_records(doc)}
        assert labels == {"A": "Text", "A1": "Text", "B": "Other", "B1": "Text", "D": "Text", "D1": "Text"}
