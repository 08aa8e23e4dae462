"""Forward sandhi joining and inverse split-candidate generation.

Rules are declarative triples (left_final, right_initial, surface): the
rule fires at a word junction when the left word ends with ``left_final``
and the right word starts with ``right_initial``; the two affixes are
replaced by ``surface``.  Priority is file order.  Joining with no matching
rule is plain concatenation, so joining always succeeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import ConstraintViolation, IndexOutOfRange, ParseError
from .text import PhonemeString

MAX_WINDOW = 3  # phonemes per rule field; bounds split cost per junction


@dataclass(frozen=True)
class SandhiRule:
    id: str
    left_final: PhonemeString
    right_initial: PhonemeString
    surface: PhonemeString


@dataclass(frozen=True)
class SplitCandidate:
    left: PhonemeString
    right: PhonemeString
    rule: str | None  # rule id, None = plain concatenation
    junction: int  # index where the rule's surface pattern starts

    def sort_key(self):
        return (self.left, self.right, self.rule or "")


class RuleTable:
    """Ordered, immutable collection of sandhi rules."""

    def __init__(self, rules: list[SandhiRule]):
        self.rules = tuple(rules)
        self.by_id = {r.id: r for r in self.rules}
        # distinct non-empty left_final strings: the suffixes a word may
        # concede to the junction on its right (used by the lattice builder)
        self.left_finals = tuple(sorted({r.left_final for r in self.rules if r.left_final}))

    def __len__(self) -> int:
        return len(self.rules)

    @classmethod
    def load(cls, path) -> "RuleTable":
        rules: list[SandhiRule] = []
        seen: set[str] = set()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 4:
                    raise ParseError(lineno, f"expected 4 columns, got {len(cols)}")
                rid, lf, ri, sf = cols
                if rid in seen:
                    raise ConstraintViolation(lineno, f"duplicate rule id {rid!r}")
                seen.add(rid)
                lf = "" if lf == "-" else lf
                ri = "" if ri == "-" else ri
                sf = "" if sf == "-" else sf
                if not lf and not ri:
                    raise ConstraintViolation(lineno, "left_final and right_initial both empty")
                if max(len(lf), len(ri), len(sf)) > MAX_WINDOW:
                    raise ConstraintViolation(lineno, f"rule window exceeds {MAX_WINDOW} phonemes")
                try:
                    rules.append(SandhiRule(rid, PhonemeString(lf), PhonemeString(ri), PhonemeString(sf)))
                except Exception as exc:
                    raise ParseError(lineno, str(exc)) from exc
        return cls(rules)

    @classmethod
    def bundled(cls) -> "RuleTable":
        with resources.as_file(resources.files("sankit.data").joinpath("sandhi_rules.tsv")) as p:
            return cls.load(p)


def match_rule(left: str, right: str, table: RuleTable) -> SandhiRule | None:
    """Highest-priority rule applicable at the junction, or None."""
    if not left or not right:
        return None
    for rule in table.rules:
        if left.endswith(rule.left_final) and right.startswith(rule.right_initial):
            return rule
    return None


def apply_join(left: str, right: str, table: RuleTable) -> PhonemeString:
    surface, _ = apply_join_info(left, right, table)
    return surface


def apply_join_info(left: str, right: str, table: RuleTable) -> tuple[PhonemeString, SandhiRule | None]:
    """Join two words; also report which rule fired (None = concatenation)."""
    rule = match_rule(left, right, table)
    if rule is None:
        return PhonemeString(left + right), None
    joined = left[: len(left) - len(rule.left_final)] + rule.surface + right[len(rule.right_initial):]
    return PhonemeString(joined), rule


def mechanical_join(left: str, right: str, rule: SandhiRule | None) -> PhonemeString:
    """Apply one specific rule (or plain concatenation) regardless of priority."""
    if rule is None:
        return PhonemeString(left + right)
    if not left.endswith(rule.left_final) or not right.startswith(rule.right_initial):
        raise ConstraintViolation(0, f"rule {rule.id} does not match the junction")
    return PhonemeString(left[: len(left) - len(rule.left_final)] + rule.surface + right[len(rule.right_initial):])


def split_candidates(surface: str, junction: int, table: RuleTable) -> list[SplitCandidate]:
    """All ways to undo one junction at the given surface position.

    Every returned candidate re-joins to the exact surface via apply_join;
    exhaustive over the rule table plus the plain split.
    """
    if not 0 < junction <= len(surface):
        raise IndexOutOfRange(f"junction {junction} outside 1..{len(surface)}")
    out: list[SplitCandidate] = []
    left = PhonemeString(surface[:junction])
    right = PhonemeString(surface[junction:])
    if apply_join(left, right, table) == surface:
        out.append(SplitCandidate(left, right, None, junction))
    for rule in table.rules:
        pat = rule.surface
        if surface[junction: junction + len(pat)] != pat:
            continue
        cand_left = PhonemeString(surface[:junction] + rule.left_final)
        cand_right = PhonemeString(rule.right_initial + surface[junction + len(pat):])
        if apply_join(cand_left, cand_right, table) == surface:
            out.append(SplitCandidate(cand_left, cand_right, rule.id, junction))
    out.sort(key=SplitCandidate.sort_key)
    return out


@dataclass(frozen=True)
class JoinedWord:
    """One word of a multi-word join with its materialized surface block."""

    word: PhonemeString
    start: int
    end: int
    rule_in: str | None  # rule fired at the junction on this word's left


def join_words(words: list[str] | tuple[str, ...], table: RuleTable) -> tuple[PhonemeString, list[JoinedWord]]:
    """Left fold of apply_join over the words, tracking each word's block.

    A junction rule's surface pattern is accounted to the word on its
    right; the left word's block ends where the pattern starts.
    """
    if not words:
        return PhonemeString(""), []
    surface = PhonemeString(words[0])
    blocks = [[words[0], 0, len(words[0]), None]]
    for w in words[1:]:
        joined, rule = apply_join_info(surface, w, table)
        lf = len(rule.left_final) if rule else 0
        junction = len(surface) - lf
        if junction < blocks[-1][1]:
            raise ConstraintViolation(0, f"junction before {w!r} consumes past the previous word")
        blocks[-1][2] = junction
        blocks.append([w, junction, len(joined), rule.id if rule else None])
        surface = joined
    return surface, [JoinedWord(PhonemeString(w), s, e, r) for w, s, e, r in blocks]
