"""
Feature extraction at text line, text block and document level.

Line and block features are returned as `pandas.DataFrame`s with one row per element in reading order and the
feature columns ordered as in the feature table (identifier columns first). Document features are a small
dataclass of medians and quartiles used as reference values by the rule sets.
"""
import dataclasses
import json
import logging
from dataclasses import dataclass

import pandas as pd

from logical_layout.errors import EmptyDocumentError
from logical_layout.texts import char_proportions, header_marks, levenshtein_similarity, sim_header_set, \
    starts_with, ends_with_punctuation
from logical_layout.utils import median, quantile

logger = logging.getLogger(__name__)

LINE_ID_COLUMNS = ["document_id", "element_id", "block_id"]
BLOCK_ID_COLUMNS = ["document_id", "element_id"]

LINE_FEATURES = [
    "page", "blockType", "wordCount", "precedingSpace", "followingSpace", "height", "width", "hpos", "vpos",
    "diffHpos", "capitalProp", "digitProp", "nonAlphaProp", "stwCapital", "stwDigit", "endsPunct", "headerMark1",
    "headerMark2", "simTitle", "simHeaderSet",
]

BLOCK_FEATURES = [
    "page", "blockType", "wordCount", "precedingSpace", "followingSpace", "hpos", "vpos", "height", "width",
    "firsthpos", "firstvpos", "lasthpos", "lastvpos", "linecount", "wordRatio", "medHeight", "medWidth", "medHpos",
    "medVpos", "medWordCount", "medLineSpace", "capitalProp", "digitProp", "headerMark1", "headerMark2",
]

# Features computed from other features; only the hand-written rules use them.
BLOCK_DERIVED_FEATURES = ["medHeight", "medWidth", "medHpos", "medVpos", "medWordCount", "medLineSpace"]

LINE_LEARNING_FEATURES = list(LINE_FEATURES)
# The TYPE attribute of annotated training blocks carries their label.
BLOCK_LEARNING_FEATURES = [f for f in BLOCK_FEATURES if f not in BLOCK_DERIVED_FEATURES and f != "blockType"]

BOOLEAN_FEATURES = {"stwCapital", "stwDigit", "endsPunct", "headerMark1", "headerMark2"}
CATEGORICAL_FEATURES = {"blockType"}


@dataclass(frozen=True)
class DocumentFeatures:
    medHeight: float
    medWidth: float
    medWordCount: float
    medLineSpace: float
    thirdQuartileLineSpace: float
    medBlockHeight: float
    medBlockWidth: float
    medBlockSpace: float
    medWordRatio: float
    medLineCount: float

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"


DOCUMENT_FEATURES = [f.name for f in dataclasses.fields(DocumentFeatures)]


@dataclass
class FeatureSet:
    """ The three feature levels of one document. """
    lines: pd.DataFrame
    blocks: pd.DataFrame
    document: DocumentFeatures


def _gap(upper, lower):
    """ Vertical space between the bottom of `upper` and the top of `lower`, clamped to 0. """
    return max(0, lower.vpos - (upper.vpos + upper.height))


########################################################################################################################
# Line features
########################################################################################################################

def extract_line_features(doc, header_words=None):
    """
    Computes the text line feature matrix.

    Spaces are vertical gaps to the previous and next line of the same page in reading order (0 at page
    boundaries), `diffHpos` is the offset of the line to the median horizontal position of its block, and the
    similarity features compare the line text with the document title and the header word set.

    Parameters
    ----------
    doc : Document
        A parsed document.
    header_words : HeaderWordSet, optional
        Header phrases for `simHeaderSet` (default is the built-in set).

    Returns
    -------
    pd.DataFrame :
        One row per line in reading order, columns `LINE_ID_COLUMNS + LINE_FEATURES`.

    """
    rows = []
    for page in doc.pages:
        page_lines = [(block, line) for block in page.blocks for line in block.lines]
        med_hpos = {block.id: median([line.hpos for line in block.lines]) for block in page.blocks}
        for i, (block, line) in enumerate(page_lines):
            preceding = _gap(page_lines[i - 1][1], line) if i > 0 else 0
            following = _gap(line, page_lines[i + 1][1]) if i + 1 < len(page_lines) else 0
            text = line.text
            capital, digit, non_alpha = char_proportions(text)
            stw_capital, stw_digit = starts_with(line.words)
            mark1, mark2 = header_marks(text)
            rows.append({
                "document_id": doc.id,
                "element_id": line.id,
                "block_id": block.id,
                "page": page.number,
                "blockType": block.type_attr or "",
                "wordCount": len(line.words),
                "precedingSpace": preceding,
                "followingSpace": following,
                "height": line.height,
                "width": line.width,
                "hpos": line.hpos,
                "vpos": line.vpos,
                "diffHpos": line.hpos - med_hpos[block.id],
                "capitalProp": capital,
                "digitProp": digit,
                "nonAlphaProp": non_alpha,
                "stwCapital": stw_capital,
                "stwDigit": stw_digit,
                "endsPunct": ends_with_punctuation(text),
                "headerMark1": mark1,
                "headerMark2": mark2,
                "simTitle": levenshtein_similarity(text, doc.doc_title) if doc.doc_title.strip() else 0.,
                "simHeaderSet": sim_header_set(text, header_words),
            })
    return _frame(rows, LINE_ID_COLUMNS + LINE_FEATURES)


########################################################################################################################
# Block features
########################################################################################################################

def extract_block_features(doc):
    """
    Computes the text block feature matrix.

    Parameters
    ----------
    doc : Document
        A parsed document.

    Returns
    -------
    pd.DataFrame :
        One row per block in reading order, columns `BLOCK_ID_COLUMNS + BLOCK_FEATURES`. Blocks without lines get
        0 for every feature except `page` and `blockType`.

    """
    rows = []
    for page in doc.pages:
        for i, block in enumerate(page.blocks):
            row = {"document_id": doc.id, "element_id": block.id, "page": page.number,
                   "blockType": block.type_attr or ""}
            if not block.lines:
                row.update({f: 0 for f in BLOCK_FEATURES if f not in row})
                for f in BOOLEAN_FEATURES.intersection(BLOCK_FEATURES):
                    row[f] = False
                rows.append(row)
                continue
            lines = block.lines
            text = block.text
            word_count = block.word_count
            capital, digit, _ = char_proportions(text)
            mark1, mark2 = header_marks(text)
            row.update({
                "wordCount": word_count,
                "precedingSpace": _gap(page.blocks[i - 1], block) if i > 0 else 0,
                "followingSpace": _gap(block, page.blocks[i + 1]) if i + 1 < len(page.blocks) else 0,
                "hpos": block.hpos,
                "vpos": block.vpos,
                "height": block.height,
                "width": block.width,
                "firsthpos": lines[0].hpos,
                "firstvpos": lines[0].vpos,
                "lasthpos": lines[-1].hpos,
                "lastvpos": lines[-1].vpos,
                "linecount": len(lines),
                "wordRatio": word_count / len(lines),
                "medHeight": median([line.height for line in lines]),
                "medWidth": median([line.width for line in lines]),
                "medHpos": median([line.hpos for line in lines]),
                "medVpos": median([line.vpos for line in lines]),
                "medWordCount": median([len(line.words) for line in lines]),
                "medLineSpace": median([_gap(a, b) for a, b in zip(lines, lines[1:])]),
                "capitalProp": capital,
                "digitProp": digit,
                "headerMark1": mark1,
                "headerMark2": mark2,
            })
            rows.append(row)
    return _frame(rows, BLOCK_ID_COLUMNS + BLOCK_FEATURES)


def _frame(rows, columns):
    frame = pd.DataFrame(rows, columns=columns)
    for column in BOOLEAN_FEATURES.intersection(columns):
        frame[column] = frame[column].astype(bool)
    return frame


########################################################################################################################
# Document features
########################################################################################################################

def extract_document_features(doc, line_matrix=None, block_matrix=None):
    """
    Computes the document level statistics used by the rule sets.

    Line statistics run over all lines, the line space distribution being the `precedingSpace` values of all lines.
    Block statistics run over all blocks containing at least one line.

    Parameters
    ----------
    doc : Document
        A parsed document with at least one line.
    line_matrix : pd.DataFrame, optional
        Precomputed line features of `doc`.
    block_matrix : pd.DataFrame, optional
        Precomputed block features of `doc`.

    Returns
    -------
    DocumentFeatures

    Raises
    ------
    EmptyDocumentError :
        If the document has no line.

    """
    if doc.line_count == 0:
        raise EmptyDocumentError("The document '{}' contains no text lines.".format(doc.id))
    lines = line_matrix if line_matrix is not None else extract_line_features(doc)
    blocks = block_matrix if block_matrix is not None else extract_block_features(doc)
    blocks = blocks[blocks["linecount"] > 0]
    heights = {block.id: (block.height, block.width) for _, block in doc.blocks() if block.lines}
    block_heights = [heights[b][0] for b in blocks["element_id"]]
    block_widths = [heights[b][1] for b in blocks["element_id"]]
    line_spaces = lines["precedingSpace"].to_numpy(dtype=float)
    return DocumentFeatures(
        medHeight=median(lines["height"]),
        medWidth=median(lines["width"]),
        medWordCount=median(lines["wordCount"]),
        medLineSpace=median(line_spaces),
        thirdQuartileLineSpace=quantile(line_spaces, 0.75),
        medBlockHeight=median(block_heights),
        medBlockWidth=median(block_widths),
        medBlockSpace=median(blocks["precedingSpace"]),
        medWordRatio=median(blocks["wordRatio"]),
        medLineCount=median(blocks["linecount"]),
    )


def extract_features(doc, header_words=None):
    """ Computes the line, block and document features of `doc`. """
    lines = extract_line_features(doc, header_words)
    blocks = extract_block_features(doc)
    document = extract_document_features(doc, lines, blocks)
    logger.debug("Extracted features of %s: %d lines, %d blocks", doc.id, len(lines), len(blocks))
    return FeatureSet(lines=lines, blocks=blocks, document=document)


def feature_csv(matrix):
    """ CSV serialisation of a feature matrix with a header row and stable column order. """
    return matrix.to_csv(index=False, float_format="%.10g")
