import random

import pytest

from sankit.errors import ConstraintViolation, IndexOutOfRange, ParseError
from sankit.lexicon import Lexicon
from sankit.sandhi import (RuleTable, apply_join, apply_join_info, join_words,
                           mechanical_join, split_candidates)
from sankit.text import PhonemeString


@pytest.fixture(scope="module")
def rules():
    return RuleTable.bundled()


def test_visarga_join(rules):
    assert apply_join("dAsaH", "Bava", rules) == "dAsoBava"


def test_vowel_join(rules):
    assert apply_join("pIta", "ambaram", rules) == "pItAmbaram"


def test_empty_right_concatenation(rules):
    assert apply_join("rAmaH", "", rules) == "rAmaH"
    assert apply_join("", "Bava", rules) == "Bava"


def test_split_inverse_of_visarga_join(rules):
    cands = split_candidates("dAsoBava", 3, rules)
    assert any(c.left == "dAsaH" and c.right == "Bava" and c.rule == "vi_aH_B" for c in cands)


def test_split_boundary_plain(rules):
    cands = split_candidates("rAma", 4, rules)
    assert any(c.left == "rAma" and c.right == "" and c.rule is None for c in cands)


def test_split_inverse_of_vowel_join(rules):
    cands = split_candidates("pItAmbaram", 3, rules)
    assert any(c.left == "pIta" and c.right == "ambaram" and c.rule == "av_a_a" for c in cands)


def test_split_junction_out_of_range(rules):
    with pytest.raises(IndexOutOfRange):
        split_candidates("rAma", 0, rules)
    with pytest.raises(IndexOutOfRange):
        split_candidates("rAma", 5, rules)


def test_split_determinism(rules):
    a = split_candidates("dAsoBava", 3, rules)
    b = split_candidates("dAsoBava", 3, rules)
    assert a == b


def _random_word(rng, lexemes):
    return lexemes[rng.randrange(len(lexemes))]


def test_inverse_soundness_and_completeness(rules):
    """Random joins split back: the used rule appears among candidates and
    every candidate re-joins to the same surface."""
    lexemes = Lexicon.bundled().surfaces()
    rng = random.Random(13)
    checked = 0
    while checked < 300:
        left = PhonemeString(_random_word(rng, lexemes))
        right = PhonemeString(_random_word(rng, lexemes))
        surface, rule = apply_join_info(left, right, rules)
        lf = len(rule.left_final) if rule else 0
        junction = len(left) - lf
        if junction <= 0:
            continue
        cands = split_candidates(surface, junction, rules)
        want = rule.id if rule else None
        assert any(c.left == left and c.right == right and c.rule == want for c in cands), \
            f"{left}+{right} -> {surface} missing at junction {junction}"
        for c in cands:
            rule_obj = rules.by_id[c.rule] if c.rule else None
            assert mechanical_join(c.left, c.right, rule_obj) == surface
            assert apply_join(c.left, c.right, rules) == surface
        checked += 1


def test_join_words_blocks(rules):
    surface, blocks = join_words(["dAsaH", "Bava"], rules)
    assert surface == "dAsoBava"
    assert [(b.word, b.start, b.end, b.rule_in) for b in blocks] == [
        ("dAsaH", 0, 3, None), ("Bava", 3, 8, "vi_aH_B")]


def test_join_words_longer(rules):
    surface, blocks = join_words(["praBUta", "nara", "nAgena"], rules)
    assert surface == "praBUtanaranAgena"
    assert blocks[0].start == 0 and blocks[-1].end == len(surface)


def test_rule_table_validation(tmp_path):
    p = tmp_path / "rules.tsv"
    p.write_text("r1\ta\ta\tA\nr1\tb\tb\tB\n", encoding="utf-8")
    with pytest.raises(ConstraintViolation):
        RuleTable.load(p)
    p.write_text("r1\t-\t-\tA\n", encoding="utf-8")
    with pytest.raises(ConstraintViolation):
        RuleTable.load(p)
    p.write_text("r1\taaaa\ta\tA\n", encoding="utf-8")
    with pytest.raises(ConstraintViolation):
        RuleTable.load(p)
    p.write_text("r1\ta\ta\n", encoding="utf-8")
    with pytest.raises(ParseError):
        RuleTable.load(p)


def test_bundled_table_loads(rules):
    assert len(rules) >= 40
    assert "vi_aH_B" in rules.by_id
