import re
from pathlib import Path

import Levenshtein

from logical_layout.errors import ConfigError


DEFAULT_HEADER_PHRASES = (
    "Rubrique Locale", "Gérant", "Publicité", "Abonnement", "Envoyez les fonds", "Conservez chaque numéro",
    "Rédacteur", "Directeur", "Numéro", "Chèque postal", "Dépôt", "Achat-Vente-Echange", "Annonce", "Imprimerie",
    "En vente partout", "Paraissant",
)

DASHES = ("-", "–", "—")
END_PUNCTUATION = (".", "!", "?", ":", ";", ",")

_FRENCH_MONTHS = ("janvier|février|fevrier|mars|avril|mai|juin|juillet|août|aout|septembre|octobre|novembre|"
                  "décembre|decembre")

_PAGE_PATTERN = re.compile(r"\bpage\b", re.IGNORECASE)
_DATE_PATTERNS = (
    re.compile(r"\b\d{1,2}(?:er)?\s+(?:" + _FRENCH_MONTHS + r")\s+\d{4}\b", re.IGNORECASE),
    re.compile(r"\b\d{1,2}[/.]\d{1,2}[/.]\d{2,4}\b"),
)
_CURRENCY_PATTERN = re.compile(r"\b\d+(?:[.,]\d+)?\s*(?:francs?\b|centimes?\b|fr\.|c\.)", re.IGNORECASE)
_ADDRESS_PATTERN = re.compile(r"\b\d+(?:\s*(?:bis|ter))?,?\s+(?:rue|place|avenue|boulevard)\b", re.IGNORECASE)


class HeaderWordSet:
    """
    Words and phrases typical of newspaper headers (mastheads, subscription and publisher notices).

    Parameters
    ----------
    phrases : iterable of str, optional
        Phrases of the set. Defaults to the French newspaper header vocabulary.

    """
    def __init__(self, phrases=None):
        phrases = DEFAULT_HEADER_PHRASES if phrases is None else phrases
        self.phrases = tuple(p.strip() for p in phrases if p and p.strip())
        if not self.phrases:
            raise ConfigError("The header word set must contain at least one phrase.")
        self._normalized = tuple((_normalize(p), len(p.split())) for p in self.phrases)

    @classmethod
    def from_file(cls, path):
        """ Reads one phrase per line from a UTF-8 text file; blank lines and '#' comments are skipped. """
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        phrases = [line for line in lines if line.strip() and not line.lstrip().startswith("#")]
        if not phrases:
            raise ConfigError("The header word set file '{}' contains no phrase.".format(path))
        return cls(phrases)

    def __iter__(self):
        return iter(self.phrases)

    def __len__(self):
        return len(self.phrases)


def _normalize(text):
    return " ".join(text.lower().split())


def levenshtein_similarity(a, b):
    """
    Similarity of two strings derived from their Levenshtein distance, after lowercasing and collapsing whitespace.

    Parameters
    ----------
    a : str
        First string.
    b : str
        Second string.

    Returns
    -------
    float :
        100 * (1 - distance / length of the longer string), 100 if both strings are empty.

    """
    a, b = _normalize(a), _normalize(b)
    longest = max(len(a), len(b))
    if longest == 0:
        return 100.
    return 100. * (1. - Levenshtein.distance(a, b) / longest)


def sim_header_set(text, header_words=None):
    """
    Highest similarity between a header phrase and any window of consecutive words of `text` having as many words as
    the phrase. Lines shorter than a phrase are compared as a whole.

    Parameters
    ----------
    text : str
        Line text.
    header_words : HeaderWordSet, optional
        Phrases to compare with (default is the built-in set).

    Returns
    -------
    float :
        Similarity between 0 and 100; 0 for an empty text.

    """
    words = _normalize(text).split()
    if not words:
        return 0.
    header_words = header_words if header_words is not None else _DEFAULT_SET
    best = 0.
    for phrase, size in header_words._normalized:
        if len(words) <= size:
            windows = [" ".join(words)]
        else:
            windows = (" ".join(words[i:i + size]) for i in range(len(words) - size + 1))
        for window in windows:
            best = max(best, levenshtein_similarity(phrase, window))
            if best == 100.:
                return best
    return best


def header_marks(text):
    """
    Header cues of a text.

    Parameters
    ----------
    text : str
        Line or block text.

    Returns
    -------
    tuple of bool :
        (contains the word "Page" or a dash, contains a date, an amount of money or a street address)

    """
    mark1 = bool(_PAGE_PATTERN.search(text)) or any(dash in text for dash in DASHES)
    mark2 = any(p.search(text) for p in _DATE_PATTERNS) or bool(_CURRENCY_PATTERN.search(text)) \
        or bool(_ADDRESS_PATTERN.search(text))
    return mark1, mark2


def char_proportions(text):
    """
    Percentages of upper-case letters, digits and non-alphanumeric characters among the non-whitespace characters.

    Parameters
    ----------
    text : str
        Line or block text.

    Returns
    -------
    tuple of float :
        (capitalProp, digitProp, nonAlphaProp), all 0 for a text without visible characters.

    """
    chars = [c for c in text if not c.isspace()]
    if not chars:
        return 0., 0., 0.
    n = len(chars)
    capitals = sum(1 for c in chars if c.isupper())
    digits = sum(1 for c in chars if c.isdigit())
    non_alpha = sum(1 for c in chars if not c.isalnum())
    return 100. * capitals / n, 100. * digits / n, 100. * non_alpha / n


def starts_with(words):
    """ (first character is upper-case, first character is a digit) of the first word. """
    if not words or not words[0]:
        return False, False
    first = words[0][0]
    return first.isupper(), first.isdigit()


def ends_with_punctuation(text):
    stripped = text.rstrip()
    return bool(stripped) and stripped[-1] in END_PUNCTUATION


_DEFAULT_SET = HeaderWordSet()
