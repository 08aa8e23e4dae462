"""Inflected-form lexicon: surface -> {lemma, morphological analysis}.

A fully enumerated table stands in for a generative morphology engine.
Tags are structured (pos/case/number/gender/person/tense_mood) and
serialize to a compact comma-joined spec string, e.g. ``NOUN,NOM,SG,M``
or ``VERB,SG,3,PRES``; NONE-valued fields are omitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import ConstraintViolation, ParseError
from .text import PhonemeString

POS_VALUES = ("NOUN", "VERB", "ADJ", "PRON", "INDECL")
CASE_VALUES = ("NOM", "ACC", "INS", "DAT", "ABL", "GEN", "LOC", "VOC")
NUMBER_VALUES = ("SG", "DU", "PL")
GENDER_VALUES = ("M", "F", "N")
PERSON_VALUES = ("1", "2", "3")
TENSE_MOOD_VALUES = ("PRES", "IMPF", "FUT", "OPT", "IMP", "PERF", "AOR")

_NOMINAL = {"NOUN", "ADJ", "PRON"}


@dataclass(frozen=True, order=True)
class MorphTag:
    pos: str
    case: str | None = None
    number: str | None = None
    gender: str | None = None
    person: str | None = None
    tense_mood: str | None = None

    def __post_init__(self):
        if self.pos not in POS_VALUES:
            raise ValueError(f"bad pos {self.pos!r}")
        for val, allowed in ((self.case, CASE_VALUES), (self.number, NUMBER_VALUES),
                             (self.gender, GENDER_VALUES), (self.person, PERSON_VALUES),
                             (self.tense_mood, TENSE_MOOD_VALUES)):
            if val is not None and val not in allowed:
                raise ValueError(f"bad field value {val!r}")
        if (self.case or self.gender) and self.pos not in _NOMINAL:
            raise ValueError(f"case/gender not allowed for pos {self.pos}")
        if (self.person or self.tense_mood) and self.pos != "VERB":
            raise ValueError(f"person/tense_mood not allowed for pos {self.pos}")
        if self.pos == "INDECL" and any(
                v is not None for v in (self.case, self.number, self.gender, self.person, self.tense_mood)):
            raise ValueError("INDECL carries no other fields")

    def spec(self) -> str:
        parts = [self.pos]
        for v in (self.case, self.number, self.gender, self.person, self.tense_mood):
            if v is not None:
                parts.append(v)
        return ",".join(parts)

    def __str__(self) -> str:
        return self.spec()

    @classmethod
    def parse(cls, spec: str) -> "MorphTag":
        parts = [p for p in spec.strip().split(",") if p]
        if not parts:
            raise ValueError("empty tag spec")
        pos = parts[0]
        fields: dict[str, str] = {}
        for p in parts[1:]:
            if p in CASE_VALUES:
                key = "case"
            elif p in NUMBER_VALUES:
                key = "number"
            elif p in GENDER_VALUES:
                key = "gender"
            elif p in PERSON_VALUES:
                key = "person"
            elif p in TENSE_MOOD_VALUES:
                key = "tense_mood"
            else:
                raise ValueError(f"unknown tag field {p!r}")
            if key in fields:
                raise ValueError(f"duplicate tag field {p!r}")
            fields[key] = p
        return cls(pos=pos, **fields)


@dataclass(frozen=True, order=True)
class LexEntry:
    surface: PhonemeString
    lemma: PhonemeString
    tag: MorphTag

    def __post_init__(self):
        if not self.surface or not self.lemma:
            raise ValueError("surface and lemma must be non-empty")


class Lexicon:
    """Immutable exact-match lookup table of inflected forms."""

    def __init__(self, entries: list[LexEntry]):
        self._by_surface: dict[str, tuple[LexEntry, ...]] = {}
        grouped: dict[str, set[LexEntry]] = {}
        for e in entries:
            grouped.setdefault(str(e.surface), set()).add(e)
        for surface, group in grouped.items():
            self._by_surface[surface] = tuple(sorted(group, key=lambda e: (e.lemma, e.tag.spec())))
        self._size = sum(len(v) for v in self._by_surface.values())

    def __len__(self) -> int:
        return self._size

    def __contains__(self, form: str) -> bool:
        return form in self._by_surface

    def lookup(self, form: str) -> tuple[LexEntry, ...]:
        return self._by_surface.get(str(form), ())

    def surfaces(self) -> list[str]:
        return sorted(self._by_surface)

    def entries(self) -> list[LexEntry]:
        return [e for s in self.surfaces() for e in self._by_surface[s]]

    def tags(self) -> list[MorphTag]:
        return sorted({e.tag for e in self.entries()}, key=MorphTag.spec)

    @classmethod
    def load(cls, path) -> "Lexicon":
        entries: list[LexEntry] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 3:
                    raise ParseError(lineno, f"expected 3 columns, got {len(cols)}")
                try:
                    tag = MorphTag.parse(cols[2])
                except ValueError as exc:
                    raise ConstraintViolation(lineno, str(exc)) from exc
                try:
                    entries.append(LexEntry(PhonemeString(cols[0]), PhonemeString(cols[1]), tag))
                except Exception as exc:
                    raise ParseError(lineno, str(exc)) from exc
        return cls(entries)

    @classmethod
    def bundled(cls) -> "Lexicon":
        with resources.as_file(resources.files("sankit.data").joinpath("lexicon.tsv")) as p:
            return cls.load(p)
