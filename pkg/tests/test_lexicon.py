import pytest

from sankit.errors import ConstraintViolation, ParseError
from sankit.lexicon import LexEntry, Lexicon, MorphTag
from sankit.text import PhonemeString


def test_empty_file(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("", encoding="utf-8")
    assert len(Lexicon.load(p)) == 0


def test_duplicate_lines_dedup(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("dAsaH\tdAsa\tNOUN,NOM,SG,M\ndAsaH\tdAsa\tNOUN,NOM,SG,M\n", encoding="utf-8")
    lex = Lexicon.load(p)
    assert len(lex) == 1


def test_lookup_by_construction(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("dAsaH\tdAsa\tNOUN,NOM,SG,M\n", encoding="utf-8")
    lex = Lexicon.load(p)
    entries = lex.lookup("dAsaH")
    assert len(entries) == 1
    assert entries[0].lemma == "dAsa"
    assert entries[0].tag == MorphTag("NOUN", case="NOM", number="SG", gender="M")


def test_lookup_unknown_form_empty():
    assert Lexicon([]).lookup("nemo") == ()


def test_syncretic_form_two_entries(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("sItAyAH\tsItA\tNOUN,GEN,SG,F\nsItAyAH\tsItA\tNOUN,ABL,SG,F\n", encoding="utf-8")
    lex = Lexicon.load(p)
    entries = lex.lookup("sItAyAH")
    assert len(entries) == 2
    assert {e.tag.case for e in entries} == {"GEN", "ABL"}


def test_load_errors(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text("a\tb\n", encoding="utf-8")
    with pytest.raises(ParseError):
        Lexicon.load(p)
    p.write_text("gacCati\tgam\tVERB,NOM,SG\n", encoding="utf-8")
    with pytest.raises(ConstraintViolation):
        Lexicon.load(p)


def test_morph_tag_invariants():
    with pytest.raises(ValueError):
        MorphTag("INDECL", case="NOM")
    with pytest.raises(ValueError):
        MorphTag("VERB", gender="M")
    with pytest.raises(ValueError):
        MorphTag("NOUN", person="3")
    # pronouns may omit gender (1st/2nd person)
    MorphTag("PRON", case="NOM", number="SG")
    # verbs carry number
    MorphTag("VERB", number="SG", person="3", tense_mood="PRES")


def test_tag_spec_round_trip():
    for spec in ("NOUN,NOM,SG,M", "VERB,SG,3,PRES", "INDECL", "ADJ,ACC,PL,N", "PRON,GEN,SG,M"):
        assert MorphTag.parse(spec).spec() == spec
    with pytest.raises(ValueError):
        MorphTag.parse("NOUN,XYZ")


def test_entry_nonempty():
    with pytest.raises(ValueError):
        LexEntry(PhonemeString(""), PhonemeString("a"), MorphTag("INDECL"))


def test_bundled_lexicon():
    lex = Lexicon.bundled()
    assert len(lex) > 1500
    assert any(e.tag.spec() == "NOUN,NOM,SG,M" for e in lex.lookup("dAsaH"))
    assert any(e.tag.spec() == "VERB,SG,2,IMP" for e in lex.lookup("Bava"))
    # lookup never fabricates: every returned entry is in the entry set
    all_entries = set(lex.entries())
    for form in ("rAmaH", "gacCati", "ca"):
        for e in lex.lookup(form):
            assert e in all_entries
