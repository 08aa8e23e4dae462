"""Canonical phoneme-level text representation and script transliteration.

Internally every phoneme is one SLP1 character, so a PhonemeString is just a
validated str over the SLP1 alphabet.  IAST and Devanagari are user-facing
renderings of the same sequence; the correspondence table ships as a
versioned data file (``data/translit.tsv``).

IAST uses digraphs (ai, kh, bh, ...), so a few phoneme sequences would
collide with them under prefix-greedy reading (e.g. a+i vs the diphthong).
Rendering inserts a zero-width non-joiner between the two symbols in exactly
those cases; the reader skips it anywhere.  Devanagari needs no separator.
"""

from __future__ import annotations

import enum
import unicodedata
from importlib import resources

from .errors import InvalidCharacter, ParseError

ZWNJ = "‌"  # IAST digraph separator, skipped on input
VIRAMA = "्"

# Devanagari dependent vowel signs; the inherent vowel "a" has none.
_MATRA = {
    "A": "ा", "i": "ि", "I": "ी", "u": "ु", "U": "ू",
    "f": "ृ", "F": "ॄ", "x": "ॢ", "X": "ॣ",
    "e": "े", "E": "ै", "o": "ो", "O": "ौ",
}

VOWELS = frozenset("aAiIuUfFxXeEoO")
MARKS = frozenset("MH")


class Script(enum.Enum):
    SLP1 = "SLP1"
    IAST = "IAST"
    DEVANAGARI = "DEVANAGARI"

    @classmethod
    def parse(cls, name: str) -> "Script":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown script {name!r}") from None


class Inventory:
    """Phoneme inventory with per-script symbol tables, loaded from a TSV file."""

    def __init__(self, rows: list[tuple[str, str, str]], version: str):
        self.version = version
        self.slp1 = [r[0] for r in rows]
        self.to_iast = {r[0]: r[1] for r in rows}
        self.to_deva = {r[0]: r[2] for r in rows}
        self.from_iast = {r[1]: r[0] for r in rows}
        self.from_deva = {r[2]: r[0] for r in rows}
        self.index = {p: n for n, p in enumerate(self.slp1)}
        # longest-first for prefix-greedy reading
        self._iast_symbols = sorted(self.from_iast, key=len, reverse=True)
        self._matra_to_vowel = {m: v for v, m in _MATRA.items()}

    @property
    def size(self) -> int:
        return len(self.slp1)

    def is_vowel(self, p: str) -> bool:
        return p in VOWELS

    def is_consonant(self, p: str) -> bool:
        return p in self.index and p not in VOWELS and p not in MARKS


def _load_inventory() -> Inventory:
    rows = []
    version = "unversioned"
    text = resources.files("sankit.data").joinpath("translit.tsv").read_text("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip("\n")
        if line.startswith("# version:"):
            version = line.split(":", 1)[1].strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ParseError(lineno, f"expected 3 columns, got {len(cols)}")
        if len(cols[0]) != 1:
            raise ParseError(lineno, "SLP1 symbol must be a single character")
        rows.append((cols[0], cols[1], cols[2]))
    return Inventory(rows, version)


INVENTORY = _load_inventory()


class PhonemeString(str):
    """A str whose characters are all members of the SLP1 inventory."""

    def __new__(cls, value: str = "") -> "PhonemeString":
        for pos, ch in enumerate(value):
            if ch not in INVENTORY.index:
                raise InvalidCharacter(pos, ch)
        return super().__new__(cls, value)

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(self)


def _parse_slp1(text: str) -> PhonemeString:
    return PhonemeString(text)


def _parse_iast(text: str) -> PhonemeString:
    text = unicodedata.normalize("NFC", text)
    out = []
    pos = 0
    while pos < len(text):
        if text[pos] == ZWNJ:
            pos += 1
            continue
        for sym in INVENTORY._iast_symbols:
            if text.startswith(sym, pos):
                out.append(INVENTORY.from_iast[sym])
                pos += len(sym)
                break
        else:
            raise InvalidCharacter(pos, text[pos])
    return PhonemeString("".join(out))


def _parse_devanagari(text: str) -> PhonemeString:
    text = unicodedata.normalize("NFC", text)
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        p = INVENTORY.from_deva.get(ch)
        if p is None:
            raise InvalidCharacter(pos, ch)
        if INVENTORY.is_consonant(p):
            out.append(p)
            pos += 1
            if pos < n and text[pos] == VIRAMA:
                pos += 1
            elif pos < n and text[pos] in INVENTORY._matra_to_vowel:
                out.append(INVENTORY._matra_to_vowel[text[pos]])
                pos += 1
            else:
                out.append("a")
        else:
            out.append(p)
            pos += 1
    return PhonemeString("".join(out))


def _render_slp1(ps: str) -> str:
    return str(ps)


def _render_iast(ps: str) -> str:
    parts: list[str] = []
    for p in ps:
        sym = INVENTORY.to_iast[p]
        if parts:
            # would prefix-greedy reading of the junction swallow more than
            # the previous symbol?  exact check against the symbol table
            joined = parts[-1] + sym
            for cand in INVENTORY._iast_symbols:
                if joined.startswith(cand):
                    if cand != parts[-1]:
                        parts.append(ZWNJ)
                    break
        parts.append(sym)
    return "".join(parts)


def _render_devanagari(ps: str) -> str:
    out: list[str] = []
    n = len(ps)
    for i, p in enumerate(ps):
        if INVENTORY.is_consonant(p):
            out.append(INVENTORY.to_deva[p])
            nxt = ps[i + 1] if i + 1 < n else None
            if nxt is None or not INVENTORY.is_vowel(nxt):
                out.append(VIRAMA)
        elif INVENTORY.is_vowel(p):
            prev = ps[i - 1] if i > 0 else None
            if prev is not None and INVENTORY.is_consonant(prev):
                if p != "a":
                    out.append(_MATRA[p])
            else:
                out.append(INVENTORY.to_deva[p])
        else:  # M, H
            out.append(INVENTORY.to_deva[p])
    return "".join(out)


_PARSERS = {
    Script.SLP1: _parse_slp1,
    Script.IAST: _parse_iast,
    Script.DEVANAGARI: _parse_devanagari,
}
_RENDERERS = {
    Script.SLP1: _render_slp1,
    Script.IAST: _render_iast,
    Script.DEVANAGARI: _render_devanagari,
}


def to_phonemes(text: str, script: Script) -> PhonemeString:
    """Parse text in the given script into the canonical phoneme sequence."""
    return _PARSERS[script](text)


def render(ps: str, script: Script) -> str:
    """Render a phoneme sequence in the given script."""
    return _RENDERERS[script](ps)


def transliterate(text: str, source: Script, target: Script) -> str:
    return render(to_phonemes(text, source), target)


_SEPARATORS = " -"


def transliterate_text(text: str, source: Script, target: Script) -> str:
    """Sentence-level wrapper: whitespace and compound hyphens pass through."""
    out = []
    chunk = []
    for ch in text:
        if ch in _SEPARATORS:
            if chunk:
                out.append(transliterate("".join(chunk), source, target))
                chunk = []
            out.append(ch)
        else:
            chunk.append(ch)
    if chunk:
        out.append(transliterate("".join(chunk), source, target))
    return "".join(out)


def tokenize_text(text: str, script: Script) -> list[PhonemeString]:
    """Split on whitespace and convert each chunk (hyphens removed by joining
    is the caller's concern; this keeps hyphenated chunks intact)."""
    return [to_phonemes(t, script) for t in text.split()]
