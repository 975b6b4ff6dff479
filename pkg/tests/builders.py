"""
Builders of synthetic ALTO documents and feature rows for the tests.
"""
from pathlib import Path
from xml.sax.saxutils import quoteattr

from logical_layout.alto_model import LogicalLabel
from logical_layout.features import LINE_FEATURES, BLOCK_FEATURES, BOOLEAN_FEATURES, DOCUMENT_FEATURES

LOREM = ("lorem ipsum dolor sit amet consectetur adipiscing elit sed do eiusmod tempor incididunt ut labore et "
         "dolore magna aliqua ut enim ad minim veniam quis nostrud exercitation ullamco laboris nisi").split()

FIXTURES = Path(__file__).parent / "fixtures"

TITLE_WORDS = [("MAGNA", "ALIQUA"), ("TEMPOR", "INCIDIDUNT"), ("VENIAM", "NOSTRUD"), ("ULLAMCO", "LABORIS"),
               ("DOLORE", "MINIM"), ("EXERCITATION", "NISI")]


def words(n, start=0, capital=False):
    chosen = [LOREM[(start + i) % len(LOREM)] for i in range(n)]
    if capital and chosen:
        chosen[0] = chosen[0].capitalize()
    return chosen


def line(id, hpos, vpos, width, height=30, text=(), type=None):
    return {"id": id, "hpos": hpos, "vpos": vpos, "width": width, "height": height, "words": list(text),
            "type": type}


def block(id, lines, type=None, box=None):
    """ A text block whose box encloses its lines (or `box` = (hpos, vpos, width, height) for empty blocks). """
    if lines:
        hpos = min(l["hpos"] for l in lines)
        vpos = min(l["vpos"] for l in lines)
        right = max(l["hpos"] + l["width"] for l in lines)
        bottom = max(l["vpos"] + l["height"] for l in lines)
        box = (hpos, vpos, right - hpos, bottom - vpos)
    hpos, vpos, width, height = box or (0, 0, 0, 0)
    return {"id": id, "hpos": hpos, "vpos": vpos, "width": width, "height": height, "lines": list(lines),
            "type": type}


def _type(element):
    return " TYPE={}".format(quoteattr(element["type"])) if element.get("type") else ""


def alto(pages, page_width=2200, page_height=3000):
    """ ALTO v3 document of `pages`, each a list of blocks built with `block`. """
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<alto xmlns="http://www.loc.gov/standards/alto/ns-v3#">',
           "<Layout>"]
    for number, blocks in enumerate(pages, start=1):
        out.append('<Page ID="P{0}" PHYSICAL_IMG_NR="{0}" WIDTH="{1}" HEIGHT="{2}">'.format(
            number, page_width, page_height))
        out.append('<PrintSpace WIDTH="{}" HEIGHT="{}">'.format(page_width, page_height))
        for b in blocks:
            out.append('<TextBlock ID="{id}" HPOS="{hpos}" VPOS="{vpos}" WIDTH="{width}" HEIGHT="{height}"'
                       .format(**b) + _type(b) + ">")
            for l in b["lines"]:
                out.append('<TextLine ID="{id}" HPOS="{hpos}" VPOS="{vpos}" WIDTH="{width}" HEIGHT="{height}"'
                           .format(**l) + _type(l) + ">")
                strings = ["<String CONTENT={}/>".format(quoteattr(w)) for w in l["words"]]
                out.append("<SP/>".join(strings))
                out.append("</TextLine>")
            out.append("</TextBlock>")
        out.append("</PrintSpace>")
        out.append("</Page>")
    out += ["</Layout>", "</alto>"]
    return "\n".join(out).encode("utf-8")


def single_block_page(lines, block_type=None):
    return [block("TB1", lines, type=block_type)]


########################################################################################################################
# Three page newspaper with known labels
########################################################################################################################

TEXT_LINE_HEIGHT = 30
LINE_PITCH = 35
TITLE_LINE_HEIGHT = 90
COLUMN_WIDTH = 650
# vertical gaps
GAP_BEFORE_TITLE = 40
GAP_AFTER_TITLE = 20
GAP_BETWEEN_TEXTS = 15

# (kind, number of lines, line indices starting a paragraph)
COLUMN = [("text", 5, {0}), ("title", 1, set()), ("text", 5, {0}), ("text", 5, {0}), ("title", 1, set()),
          ("text", 7, {0, 4})]


def _text_block(block_id, x, y, n_lines, starts, truth, seed):
    lines = []
    for j in range(n_lines):
        line_id = "{}_L{}".format(block_id, j + 1)
        vpos = y + j * LINE_PITCH
        if j in starts:
            lines.append(line(line_id, x + 30, vpos, COLUMN_WIDTH - 30,
                              text=words(8, seed + j, capital=True)))
            truth[line_id] = LogicalLabel.FIRSTLINE
        elif j + 1 == n_lines or j + 1 in starts:
            lines.append(line(line_id, x, vpos, 400, text=words(4, seed + j)))
            truth[line_id] = LogicalLabel.TEXT
        else:
            lines.append(line(line_id, x, vpos, COLUMN_WIDTH, text=words(9, seed + j)))
            truth[line_id] = LogicalLabel.TEXT
    truth[block_id] = LogicalLabel.TEXT
    return block(block_id, lines)


def newspaper():
    """
    A three page, three column newspaper: a masthead on page 1, a running head on pages 2 and 3, and in every column
    text blocks of indented paragraphs with two headline blocks.

    Returns
    -------
    tuple :
        (ALTO bytes, dict mapping every block and line id to its true label)

    """
    truth = {}
    pages = []
    for p in range(1, 4):
        blocks = []
        if p == 1:
            texts = [("LE", "PETIT", "JOURNAL"), ("Abonnement", "Paris", "cinq", "francs"),
                     ("Quotidien", "du", "matin")]
            lines = [line("P1_MH_L{}".format(i + 1), 100, 50 + 50 * i, 2000, height=40, text=t)
                     for i, t in enumerate(texts)]
            blocks.append(block("P1_MH", lines))
            top = 240
        else:
            lines = [line("P{}_RH_L1".format(p), 100, 50, 2000, text=("Page", str(p), "Le", "Petit", "Journal"))]
            blocks.append(block("P{}_RH".format(p), lines))
            top = 120
        for b in blocks:
            truth[b["id"]] = LogicalLabel.HEADER
            for l in b["lines"]:
                truth[l["id"]] = LogicalLabel.HEADER

        for c in range(3):
            x = 100 + c * 700
            y = top
            previous = None
            for k, (kind, n_lines, starts) in enumerate(COLUMN):
                block_id = "P{}_C{}_B{}".format(p, c + 1, k + 1)
                if previous is not None:
                    y += GAP_BEFORE_TITLE if kind == "title" else \
                        GAP_AFTER_TITLE if previous == "title" else GAP_BETWEEN_TEXTS
                if kind == "title":
                    title = TITLE_WORDS[(p * 3 + c + k) % len(TITLE_WORDS)]
                    title_line = line(block_id + "_L1", x + 175, y, 300, height=TITLE_LINE_HEIGHT, text=title)
                    blocks.append(block(block_id, [title_line]))
                    truth[block_id] = truth[title_line["id"]] = LogicalLabel.TITLE
                    y += TITLE_LINE_HEIGHT
                else:
                    blocks.append(_text_block(block_id, x, y, n_lines, starts, truth, seed=p + c + k))
                    y += (n_lines - 1) * LINE_PITCH + TEXT_LINE_HEIGHT
                previous = kind
        pages.append(blocks)
    return alto(pages), truth


########################################################################################################################
# Feature rows
########################################################################################################################

def line_row(**features):
    row = {f: (False if f in BOOLEAN_FEATURES else 0) for f in LINE_FEATURES}
    row["blockType"] = ""
    row.update(features)
    return row


def block_row(**features):
    row = {f: (False if f in BOOLEAN_FEATURES else 0) for f in BLOCK_FEATURES}
    row["blockType"] = ""
    row.update(features)
    return row


def doc_stats(**features):
    stats = {f: 0. for f in DOCUMENT_FEATURES}
    stats.update(features)
    return stats
