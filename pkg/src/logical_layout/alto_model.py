"""
In-memory model of XML ALTO documents.

Parsing keeps the physical layout (pages, text blocks, text lines, words) in the reading order given by the file and
remembers the source tree, so that annotated documents can be written back as ALTO with only TYPE attributes added.
"""
import copy
import csv
import enum
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from lxml import etree

from logical_layout.errors import AltoParseError, EmptyDocumentError, IncompleteAnnotationError
from logical_layout.utils import writer, has_writer, get_writer, writer_formats

logger = logging.getLogger(__name__)

ALTO_V3_NAMESPACE = "http://www.loc.gov/standards/alto/ns-v3#"

CSV_COLUMNS = ["document_id", "page", "element_id", "kind", "label"]

BLOCK = "block"
LINE = "line"


class LogicalLabel(enum.Enum):
    """ Logical roles of text blocks and text lines. `LASTLINE` is a working label of the line rules only. """
    TEXT = "Text"
    TITLE = "Title"
    HEADER = "Header"
    FIRSTLINE = "Firstline"
    OTHER = "Other"
    LASTLINE = "Lastline"

    def __str__(self):
        return self.value

    @property
    def type_value(self):
        """ Value of the ALTO TYPE attribute carrying this label. """
        return self.emitted().value.lower()

    def emitted(self):
        """ Label as written to outputs: the transient Lastline becomes Text. """
        return LogicalLabel.TEXT if self is LogicalLabel.LASTLINE else self

    @classmethod
    def parse(cls, value):
        """
        Case-insensitive lookup of a label by name.

        Parameters
        ----------
        value : str or LogicalLabel
            Label name, e.g. "title" or "Firstline".

        Returns
        -------
        LogicalLabel

        Raises
        ------
        ValueError :
            If `value` does not name a label.

        """
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for label in cls:
            if label.value.lower() == key:
                return label
        raise ValueError("Unknown logical label '{}'.".format(value))


# Labels a text block or text line may carry in outputs and ground truth.
BLOCK_LABELS = (LogicalLabel.TEXT, LogicalLabel.TITLE, LogicalLabel.HEADER, LogicalLabel.OTHER)
LINE_LABELS = (LogicalLabel.TEXT, LogicalLabel.TITLE, LogicalLabel.HEADER, LogicalLabel.FIRSTLINE,
               LogicalLabel.OTHER)


def label_from_type(type_attr, kind=BLOCK):
    """
    Logical label implied by a pre-existing TYPE attribute. Values naming a label of the tagset map to that label,
    everything else (e.g. "illegible", "advertisement") maps to Other.

    """
    if type_attr is None:
        return None
    allowed = BLOCK_LABELS if kind == BLOCK else LINE_LABELS
    try:
        label = LogicalLabel.parse(type_attr)
    except ValueError:
        return LogicalLabel.OTHER
    return label if label in allowed else LogicalLabel.OTHER


@dataclass
class TextLine:
    id: str
    hpos: float = 0
    vpos: float = 0
    height: float = 0
    width: float = 0
    words: List[str] = field(default_factory=list)
    type_attr: Optional[str] = None
    label: Optional[LogicalLabel] = None

    @property
    def text(self):
        return " ".join(self.words)


@dataclass
class TextBlock:
    id: str
    hpos: float = 0
    vpos: float = 0
    height: float = 0
    width: float = 0
    lines: List[TextLine] = field(default_factory=list)
    language: Optional[str] = None
    type_attr: Optional[str] = None
    label: Optional[LogicalLabel] = None

    @property
    def text(self):
        return " ".join(line.text for line in self.lines)

    @property
    def word_count(self):
        return sum(len(line.words) for line in self.lines)


@dataclass
class Page:
    number: int
    blocks: List[TextBlock] = field(default_factory=list)
    width: Optional[float] = None
    height: Optional[float] = None


@dataclass
class Document:
    id: str
    pages: List[Page] = field(default_factory=list)
    source_path: str = ""
    doc_title: str = ""
    warnings: List[str] = field(default_factory=list)
    tree: Optional[object] = field(default=None, repr=False, compare=False)

    def blocks(self):
        """ Yields (page, block) pairs in reading order. """
        for page in self.pages:
            for block in page.blocks:
                yield page, block

    def lines(self):
        """ Yields (page, block, line) triples in reading order. """
        for page in self.pages:
            for block in page.blocks:
                for line in block.lines:
                    yield page, block, line

    def elements(self):
        """ Yields (kind, page, element) for every block followed by its lines. """
        for page in self.pages:
            for block in page.blocks:
                yield BLOCK, page, block
                for line in block.lines:
                    yield LINE, page, line

    @property
    def line_count(self):
        return sum(len(block.lines) for _, block in self.blocks())

    def effective_label(self, element, kind):
        """ The computed label, or the label implied by a pre-existing TYPE attribute. """
        if element.label is not None:
            return element.label.emitted()
        return label_from_type(element.type_attr, kind)


########################################################################################################################
# Parsing
########################################################################################################################

def _local(element):
    return etree.QName(element).localname


def _attr(element, name):
    value = element.get(name)
    if value is None:
        value = element.get(name.lower())
    return value


def _number(element, name, element_id, warnings):
    raw = _attr(element, name)
    if raw is None:
        msg = "{}: missing {} attribute, using 0".format(element_id, name)
        logger.warning(msg)
        warnings.append(msg)
        return 0
    try:
        value = float(raw)
    except ValueError:
        msg = "{}: invalid {} value '{}', using 0".format(element_id, name, raw)
        logger.warning(msg)
        warnings.append(msg)
        return 0
    if value < 0:
        msg = "{}: negative {} value {}, using 0".format(element_id, name, raw)
        logger.warning(msg)
        warnings.append(msg)
        return 0
    return int(value) if value.is_integer() else value


def _dimension(print_space, name, page_number, warnings):
    """ Optional PrintSpace size: None when missing or invalid. """
    raw = _attr(print_space, name)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        msg = "page {}: invalid PrintSpace {} value '{}' (line {}), ignored".format(
            page_number, name, raw, print_space.sourceline)
        logger.warning(msg)
        warnings.append(msg)
        return None


def _byte_offset(data, line, column):
    if line is None:
        return None
    lines = data.splitlines(keepends=True)
    return sum(len(chunk) for chunk in lines[:max(line - 1, 0)]) + max(column - 1, 0)


def parse_alto(xml_bytes, document_id=None, source_path="", doc_title=None):
    """
    Parses an XML ALTO document into a `Document`.

    TextBlocks nested in ComposedBlocks are flattened into the page's block list in file order. Words are taken from
    the CONTENT attribute of String elements only (SP and HYP elements are ignored). Missing or invalid coordinates
    are replaced by 0 and recorded in `Document.warnings`.

    Parameters
    ----------
    xml_bytes : bytes
        The ALTO file content.
    document_id : str, optional
        Identifier of the document. Defaults to the stem of `source_path`, or "document".
    source_path : str, optional
        Path the content was read from.
    doc_title : str, optional
        Title of the document used by the title similarity feature. Defaults to the text of the first line of page 1.

    Returns
    -------
    Document :
        The parsed document.

    Raises
    ------
    AltoParseError :
        If the content is not well-formed XML or contains duplicate element ids.
    EmptyDocumentError :
        If the document has no PrintSpace.

    """
    if isinstance(xml_bytes, str):
        xml_bytes = xml_bytes.encode("utf-8")
    parser = etree.XMLParser(resolve_entities=False, huge_tree=True)
    try:
        root = etree.fromstring(xml_bytes, parser=parser)
    except etree.XMLSyntaxError as e:
        line, column = e.position if e.position else (None, None)
        raise AltoParseError("Malformed XML: {}".format(e.msg), offset=_byte_offset(xml_bytes, line, column or 1),
                             line=line)

    if document_id is None:
        document_id = Path(source_path).stem if source_path else "document"
    doc = Document(id=document_id, source_path=str(source_path), tree=root)

    seen_ids = set()

    def element_id(element, default):
        value = _attr(element, "ID")
        if not value:
            msg = "{}: element without ID".format(default)
            logger.warning(msg)
            doc.warnings.append(msg)
            value = default
        if value in seen_ids:
            raise AltoParseError("Duplicate element id '{}'".format(value), line=element.sourceline)
        seen_ids.add(value)
        return value

    page_elements = [el for el in root.iter(etree.Element) if _local(el) == "Page"]
    print_spaces = 0
    for page_number, page_element in enumerate(page_elements, start=1):
        page = Page(number=page_number)
        for print_space in (el for el in page_element.iter(etree.Element) if _local(el) == "PrintSpace"):
            print_spaces += 1
            page.width = _dimension(print_space, "WIDTH", page_number, doc.warnings)
            page.height = _dimension(print_space, "HEIGHT", page_number, doc.warnings)
            for block_element in (el for el in print_space.iter(etree.Element) if _local(el) == "TextBlock"):
                block_id = element_id(block_element, "P{}_TB{}".format(page_number, len(page.blocks) + 1))
                block = TextBlock(
                    id=block_id,
                    hpos=_number(block_element, "HPOS", block_id, doc.warnings),
                    vpos=_number(block_element, "VPOS", block_id, doc.warnings),
                    height=_number(block_element, "HEIGHT", block_id, doc.warnings),
                    width=_number(block_element, "WIDTH", block_id, doc.warnings),
                    language=_attr(block_element, "LANGUAGE") or _attr(block_element, "LANG"),
                    type_attr=_attr(block_element, "TYPE"),
                )
                for line_element in block_element.iterchildren(etree.Element):
                    if _local(line_element) != "TextLine":
                        continue
                    line_id = element_id(line_element, "{}_TL{}".format(block_id, len(block.lines) + 1))
                    block.lines.append(TextLine(
                        id=line_id,
                        hpos=_number(line_element, "HPOS", line_id, doc.warnings),
                        vpos=_number(line_element, "VPOS", line_id, doc.warnings),
                        height=_number(line_element, "HEIGHT", line_id, doc.warnings),
                        width=_number(line_element, "WIDTH", line_id, doc.warnings),
                        words=[_attr(s, "CONTENT") for s in line_element.iter(etree.Element)
                               if _local(s) == "String" and _attr(s, "CONTENT")],
                        type_attr=_attr(line_element, "TYPE"),
                    ))
                page.blocks.append(block)
        doc.pages.append(page)

    if print_spaces == 0:
        raise EmptyDocumentError("The document '{}' has no PrintSpace.".format(document_id))

    doc.doc_title = doc_title if doc_title else _first_line_text(doc)
    logger.debug("Parsed %s: %d pages, %d lines", doc.id, len(doc.pages), doc.line_count)
    return doc


def parse_alto_file(path, doc_title=None):
    """ Reads and parses an ALTO file; the document id is the file stem. """
    path = Path(path)
    return parse_alto(path.read_bytes(), document_id=path.stem, source_path=str(path), doc_title=doc_title)


def _first_line_text(doc):
    if not doc.pages:
        return ""
    for block in doc.pages[0].blocks:
        if block.lines:
            return block.lines[0].text
    return ""


def reading_order(doc):
    """
    Linear reading order of a document: blocks in file order and lines within each block.

    Parameters
    ----------
    doc : Document
        A parsed document.

    Returns
    -------
    list of tuple :
        (block, line) pairs.

    """
    return [(block, line) for _, block, line in doc.lines()]


########################################################################################################################
# Writing
########################################################################################################################

def write_annotated(doc, fmt="alto"):
    """
    Serialises an annotated document.

    Parameters
    ----------
    doc : Document
        Document whose blocks and lines all carry a label or a pre-existing TYPE attribute.
    fmt : str, optional
        One of "alto", "json" or "csv" (default is "alto").

    Returns
    -------
    bytes :
        The serialised document.

    Raises
    ------
    IncompleteAnnotationError :
        If an element has neither a label nor a TYPE attribute.

    """
    if not has_writer(fmt):
        raise ValueError("Unknown output format '{}', expected one of {}.".format(fmt, ", ".join(writer_formats())))
    unlabeled = [element.id for kind, _, element in doc.elements() if doc.effective_label(element, kind) is None]
    if unlabeled:
        raise IncompleteAnnotationError(unlabeled)
    return get_writer(fmt)(doc)


def annotation_records(doc):
    """ One record per block and line: document id, page, element id, kind and emitted label. """
    for kind, page, element in doc.elements():
        yield {
            "document_id": doc.id,
            "page": page.number,
            "element_id": element.id,
            "kind": kind,
            "label": doc.effective_label(element, kind).value,
        }


@writer("json")
def _write_json(doc):
    rows = []
    for record in annotation_records(doc):
        rows.append(json.dumps({
            "documentId": record["document_id"],
            "page": record["page"],
            "elementId": record["element_id"],
            "elementKind": record["kind"],
            "label": record["label"],
        }, ensure_ascii=False))
    return ("\n".join(rows) + "\n").encode("utf-8") if rows else b""


@writer("csv")
def _write_csv(doc):
    buffer = io.StringIO()
    csv_writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    csv_writer.writeheader()
    for record in annotation_records(doc):
        csv_writer.writerow(record)
    return buffer.getvalue().encode("utf-8")


@writer("alto")
def _write_alto(doc):
    if doc.tree is None:
        root = _build_alto(doc)
    else:
        root = copy.deepcopy(doc.tree)
        labels = {element.id: (kind, element) for kind, _, element in doc.elements()}
        for el in root.iter(etree.Element):
            if _local(el) not in ("TextBlock", "TextLine"):
                continue
            entry = labels.get(_attr(el, "ID"))
            if entry is None or _attr(el, "TYPE") is not None:
                continue
            kind, element = entry
            el.set("TYPE", doc.effective_label(element, kind).type_value)
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=doc.tree is None)


def _format_number(value):
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _build_alto(doc):
    ns = "{%s}" % ALTO_V3_NAMESPACE
    root = etree.Element(ns + "alto", nsmap={None: ALTO_V3_NAMESPACE})
    layout = etree.SubElement(root, ns + "Layout")
    for page in doc.pages:
        page_el = etree.SubElement(layout, ns + "Page", ID="P{}".format(page.number),
                                   PHYSICAL_IMG_NR=str(page.number))
        print_space = etree.SubElement(page_el, ns + "PrintSpace")
        if page.width is not None:
            print_space.set("WIDTH", _format_number(page.width))
        if page.height is not None:
            print_space.set("HEIGHT", _format_number(page.height))
        for block in page.blocks:
            block_el = etree.SubElement(print_space, ns + "TextBlock", ID=block.id)
            _set_box(block_el, block)
            if block.language:
                block_el.set("LANGUAGE", block.language)
            label = doc.effective_label(block, BLOCK)
            block_el.set("TYPE", block.type_attr if block.type_attr is not None else label.type_value)
            for line in block.lines:
                line_el = etree.SubElement(block_el, ns + "TextLine", ID=line.id)
                _set_box(line_el, line)
                label = doc.effective_label(line, LINE)
                line_el.set("TYPE", line.type_attr if line.type_attr is not None else label.type_value)
                for position, word in enumerate(line.words):
                    if position:
                        etree.SubElement(line_el, ns + "SP")
                    etree.SubElement(line_el, ns + "String", CONTENT=word)
    return root


def _set_box(element, box):
    for name in ("HPOS", "VPOS", "HEIGHT", "WIDTH"):
        element.set(name, _format_number(getattr(box, name.lower())))
