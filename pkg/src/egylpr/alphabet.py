"""The 26 plate symbols: nine Hindi digits and seventeen Arabic letters."""

from dataclasses import dataclass

DIGIT = "digit"
LETTER = "letter"


@dataclass(frozen=True)
class Symbol:
    id: str
    glyph: str
    index: int
    kind: str
    latin: str


_DIGITS = [("d%d" % i, chr(0x0660 + i), str(i)) for i in range(1, 10)]
_LETTERS = [
    ("alef", "أ", "A"), ("beh", "ب", "B"), ("jeem", "ج", "G"), ("dal", "د", "D"),
    ("reh", "ر", "R"), ("seen", "س", "S"), ("sad", "ص", "C"), ("tah", "ط", "T"),
    ("ain", "ع", "E"), ("feh", "ف", "F"), ("qaf", "ق", "K"), ("lam", "ل", "L"),
    ("meem", "م", "M"), ("noon", "ن", "N"), ("heh", "ه", "H"), ("waw", "و", "W"),
    ("yeh", "ى", "Y"),
]


class LabelAlphabet:
    def __init__(self):
        syms = [Symbol(i, g, n, DIGIT, lat) for n, (i, g, lat) in enumerate(_DIGITS)]
        syms += [Symbol(i, g, len(_DIGITS) + n, LETTER, lat)
                 for n, (i, g, lat) in enumerate(_LETTERS)]
        self.symbols = syms
        self._by_id = {s.id: s for s in syms}
        self._by_glyph = {s.glyph: s for s in syms}
        # bare alef and dotless yeh are common spellings of the same plate letters
        self._by_glyph.setdefault("ا", self._by_id["alef"])
        self._by_glyph.setdefault("ي", self._by_id["yeh"])
        assert len(syms) == 26 and len(self._by_id) == 26

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def by_id(self, sid):
        try:
            return self._by_id[sid]
        except KeyError:
            raise ValueError(f"unknown symbol id {sid!r}") from None

    def by_glyph(self, ch):
        try:
            return self._by_glyph[ch]
        except KeyError:
            raise ValueError(f"symbol {ch!r} is not a plate character") from None

    def by_index(self, i):
        return self.symbols[i]

    @property
    def digits(self):
        return [s for s in self.symbols if s.kind == DIGIT]

    @property
    def letters(self):
        return [s for s in self.symbols if s.kind == LETTER]


ALPHABET = LabelAlphabet()


def parse_plate_text(text):
    """Split ``"١٢٣ أ ب ج"`` into (digit symbols, letter symbols).

    Digits come first in visual left-to-right order, then letters;
    whitespace is ignored.
    """
    syms = [ALPHABET.by_glyph(c) for c in text if not c.isspace()]
    if not syms:
        raise ValueError("empty plate text")
    n = 0
    while n < len(syms) and syms[n].kind == DIGIT:
        n += 1
    digits, letters = syms[:n], syms[n:]
    for s in letters:
        if s.kind != LETTER:
            raise ValueError(f"digit {s.glyph!r} follows the letter group")
    return digits, letters


def format_plate_text(digits, letters):
    d = "".join(s.glyph for s in digits)
    l = " ".join(s.glyph for s in letters)
    return " ".join(p for p in (d, l) if p)
