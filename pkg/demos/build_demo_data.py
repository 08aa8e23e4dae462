"""Regenerate the bundled toy lexicon and the synthetic demo corpora.

Everything is deterministic (fixed seed); rerunning reproduces the files
byte-for-byte.  Outputs land in src/sankit/data/.
"""

from __future__ import annotations

import random
from pathlib import Path

from sankit.lexicon import LexEntry, Lexicon, MorphTag
from sankit.sandhi import RuleTable, apply_join, join_words
from sankit.text import PhonemeString

DATA = Path(__file__).resolve().parent.parent / "src" / "sankit" / "data"
SEED = 20240801

CASES = ("NOM", "ACC", "INS", "DAT", "ABL", "GEN", "LOC", "VOC")

# a-stem masculine endings, per case, for SG / DU / PL
A_MASC = {
    "SG": ("aH", "am", "ena", "Aya", "At", "asya", "e", "a"),
    "DU": ("O", "O", "AByAm", "AByAm", "AByAm", "ayoH", "ayoH", "O"),
    "PL": ("AH", "An", "EH", "eByaH", "eByaH", "ARAm", "ezu", "AH"),
}
# neuter differs in NOM / ACC / VOC only
A_NEUT = {
    "SG": ("am", "am", "ena", "Aya", "At", "asya", "e", "a"),
    "DU": ("e", "e", "AByAm", "AByAm", "AByAm", "ayoH", "ayoH", "e"),
    "PL": ("Ani", "Ani", "EH", "eByaH", "eByaH", "ARAm", "ezu", "Ani"),
}
# A-stem feminine endings attach to the stem minus its final A
AA_FEM = {
    "SG": ("A", "Am", "ayA", "AyE", "AyAH", "AyAH", "AyAm", "e"),
    "DU": ("e", "e", "AByAm", "AByAm", "AByAm", "ayoH", "ayoH", "e"),
    "PL": ("AH", "AH", "ABiH", "AByaH", "AByaH", "AnAm", "Asu", "AH"),
}

MASC_STEMS = ["rAma", "deva", "nara", "gaja", "aSva", "putra", "grAma", "loka",
              "mfga", "siMha", "bAla", "vIra", "megha", "candra", "sUrya",
              "vfkza", "kumAra", "nfpa", "hasta", "pAda", "mArga", "parvata",
              "sAgara", "nAga", "dAsa"]
NEUT_STEMS = ["vana", "Pala", "jala", "puzpa", "pustaka", "ambara", "netra",
              "mitra", "kzetra", "patra", "gfha", "mUla", "bala", "Dana"]
FEM_STEMS = ["sItA", "mAlA", "kanyA", "latA", "vidyA", "prajA", "senA",
             "SAlA", "BAzA", "CAyA"]
ADJ_STEMS = ["pIta", "nava", "sundara", "dIrGa", "alpa", "SuBa", "praBUta"]

# (lemma, present stem) for thematic verbs
VERBS = [("BU", "Bava"), ("gam", "gacCa"), ("vad", "vada"), ("car", "cara"),
         ("pat", "pata"), ("pac", "paca"), ("jIv", "jIva"), ("smf", "smara"),
         ("nI", "naya"), ("liK", "liKa"), ("vas", "vasa"), ("Df", "Dara"),
         ("dfS", "paSya"), ("viS", "viSa")]

PRONOUNS = [
    ("aham", "asmad", "PRON,NOM,SG"), ("mAm", "asmad", "PRON,ACC,SG"),
    ("mayA", "asmad", "PRON,INS,SG"), ("mama", "asmad", "PRON,GEN,SG"),
    ("mayi", "asmad", "PRON,LOC,SG"), ("vayam", "asmad", "PRON,NOM,PL"),
    ("asmAn", "asmad", "PRON,ACC,PL"), ("tvam", "yuzmad", "PRON,NOM,SG"),
    ("tvAm", "yuzmad", "PRON,ACC,SG"), ("yUyam", "yuzmad", "PRON,NOM,PL"),
    ("saH", "tad", "PRON,NOM,SG,M"), ("tam", "tad", "PRON,ACC,SG,M"),
    ("tena", "tad", "PRON,INS,SG,M"), ("tasya", "tad", "PRON,GEN,SG,M"),
    ("tasmin", "tad", "PRON,LOC,SG,M"), ("te", "tad", "PRON,NOM,PL,M"),
    ("tAn", "tad", "PRON,ACC,PL,M"), ("sA", "tad", "PRON,NOM,SG,F"),
    ("tAm", "tad", "PRON,ACC,SG,F"), ("tayA", "tad", "PRON,INS,SG,F"),
    ("tat", "tad", "PRON,NOM,SG,N"), ("tAni", "tad", "PRON,NOM,PL,N"),
]

INDECLS = ["ca", "na", "hi", "vA", "eva", "iti", "atra", "tatra", "yadA",
           "tadA", "kutra", "aDunA", "api", "tu", "saha", "vinA", "ha",
           "sma", "kila", "upa", "prati", "anu"]

EXTRA = [
    # perfect form needed by the multi-chunk segmentation demo
    ("upaviveSa", "upaviS", "VERB,SG,3,PERF"),
]


def nominal_rows(stem: str, lemma: str, pos: str, gender: str, table) -> list[tuple[str, str, str]]:
    rows = []
    base = stem[:-1]
    for number, endings in table.items():
        for case, ending in zip(CASES, endings):
            form = base + ending
            rows.append((form, lemma, f"{pos},{case},{number},{gender}"))
    return rows


def verb_rows(lemma: str, stem: str) -> list[tuple[str, str, str]]:
    base = stem[:-1]
    rows = [
        (stem + "ti", lemma, "VERB,SG,3,PRES"), (stem + "taH", lemma, "VERB,DU,3,PRES"),
        (stem + "nti", lemma, "VERB,PL,3,PRES"), (stem + "si", lemma, "VERB,SG,2,PRES"),
        (stem + "TaH", lemma, "VERB,DU,2,PRES"), (stem + "Ta", lemma, "VERB,PL,2,PRES"),
        (base + "Ami", lemma, "VERB,SG,1,PRES"), (base + "AvaH", lemma, "VERB,DU,1,PRES"),
        (base + "AmaH", lemma, "VERB,PL,1,PRES"),
        (stem, lemma, "VERB,SG,2,IMP"), (stem + "tu", lemma, "VERB,SG,3,IMP"),
    ]
    return rows


def build_lexicon_rows() -> list[tuple[str, str, str]]:
    rows: list[tuple[str, str, str]] = []
    for stem in MASC_STEMS:
        rows += nominal_rows(stem, stem, "NOUN", "M", A_MASC)
    for stem in NEUT_STEMS:
        rows += nominal_rows(stem, stem, "NOUN", "N", A_NEUT)
    for stem in FEM_STEMS:
        rows += nominal_rows(stem, stem, "NOUN", "F", AA_FEM)
    for stem in ADJ_STEMS:
        rows += nominal_rows(stem, stem, "ADJ", "M", A_MASC)
        rows += nominal_rows(stem, stem, "ADJ", "N", A_NEUT)
        rows += nominal_rows(stem + "A", stem, "ADJ", "F", AA_FEM)
    for lemma, stem in VERBS:
        rows += verb_rows(lemma, stem)
    rows += PRONOUNS
    rows += [(w, w, "INDECL") for w in INDECLS]
    rows += EXTRA
    return rows


def write_lexicon() -> None:
    rows = build_lexicon_rows()
    seen = set()
    out = ["# version: 1", "# Toy inflected-form lexicon: surface<TAB>lemma<TAB>tag-spec"]
    for surface, lemma, tag in rows:
        MorphTag.parse(tag)  # validate
        key = (surface, lemma, tag)
        if key in seen:
            continue
        seen.add(key)
        out.append(f"{surface}\t{lemma}\t{tag}")
    (DATA / "lexicon.tsv").write_text("\n".join(out) + "\n", encoding="utf-8")
    print(f"lexicon.tsv: {len(out) - 2} entries")


# ---------------------------------------------------------------- corpora

def canonical_entry(lex: Lexicon, form: str) -> LexEntry:
    return lex.lookup(form)[0]


def pick(rng: random.Random, forms: list[str]) -> str:
    return forms[rng.randrange(len(forms))]


def sentence_templates(lex: Lexicon, rng: random.Random, n: int) -> list[list[str]]:
    """Distinct token sequences mixing nominals, verbs and particles; the
    final token is always the (single) verb, and tokens never repeat within
    a sentence."""
    by_pos: dict[str, list[str]] = {"NOUN": [], "VERB": [], "ADJ": [], "PRON": [], "INDECL": []}
    for form in lex.surfaces():
        by_pos[canonical_entry(lex, form).tag.pos].append(form)
    sents: list[list[str]] = []
    seen: set[tuple[str, ...]] = set()
    while len(sents) < n:
        length = rng.randrange(3, 7)
        toks = []
        for i in range(length):
            if i == length - 1:
                pool = by_pos["VERB"]
            elif rng.random() < 0.15:
                pool = by_pos["INDECL"]
            elif rng.random() < 0.15:
                pool = by_pos["PRON"]
            elif rng.random() < 0.2:
                pool = by_pos["ADJ"]
            else:
                pool = by_pos["NOUN"]
            toks.append(pick(rng, pool))
        key = tuple(toks)
        if len(set(toks)) == len(toks) and key not in seen:
            seen.add(key)
            sents.append(toks)
    return sents


def write_segmentation_corpus(lex: Lexicon, rules: RuleTable, rng: random.Random) -> None:
    sents = sentence_templates(lex, rng, 50)
    lines = []
    for toks in sents:
        join_words(toks, rules)  # raises if the join degenerates
        lines.append("_".join(toks))
    (DATA / "demo" / "segmentation.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("segmentation.txt: 50 sentences")


LABELS = ["kartf", "karman", "karaRa", "sampradAna", "apAdAna", "aDikaraRa", "sambanDa", "viSezaRa"]

CASE_LABEL = {"NOM": "kartf", "ACC": "karman", "INS": "karaRa",
              "DAT": "sampradAna", "ABL": "apAdAna", "GEN": "sambanDa",
              "LOC": "aDikaraRa", "VOC": "viSezaRa"}


def kakara_tree(lex: Lexicon, toks: list[str]) -> tuple[list[int], list[str]]:
    """Deterministic attachment: the sentence-final verb heads the clause,
    nominals hang off the verb by case, adjectives modify an adjacent
    following noun, particles lean on the preceding token."""
    n = len(toks)
    tags = [canonical_entry(lex, t).tag for t in toks]
    verb = n  # templates put the single verb last
    heads = [0] * n
    labels = ["kartf"] * n
    for i in range(1, n + 1):
        tag = tags[i - 1]
        if i == verb:
            heads[i - 1] = 0
            labels[i - 1] = "kartf"
        elif tag.pos == "ADJ":
            if i < n and tags[i].pos == "NOUN":
                heads[i - 1] = i + 1
            else:
                heads[i - 1] = verb
            labels[i - 1] = "viSezaRa"
        elif tag.pos == "INDECL":
            heads[i - 1] = i - 1 if i > 1 else verb
            labels[i - 1] = "sambanDa"
        else:  # NOUN / PRON
            heads[i - 1] = verb
            labels[i - 1] = CASE_LABEL.get(tag.case or "NOM", "kartf")
    return heads, labels


def write_treebank(lex: Lexicon, rng: random.Random) -> None:
    sents = sentence_templates(lex, rng, 50)
    blocks = []
    for toks in sents:
        heads, labels = kakara_tree(lex, toks)
        lines = []
        for i, tok in enumerate(toks, start=1):
            e = canonical_entry(lex, tok)
            lines.append(f"{i}\t{tok}\t{e.lemma}\t_\t{e.tag.spec()}\t_\t{heads[i-1]}\t{labels[i-1]}\t_\t_")
        blocks.append("\n".join(lines))
    (DATA / "demo" / "treebank.conllu").write_text("\n\n".join(blocks) + "\n", encoding="utf-8")
    print("treebank.conllu: 50 sentences")


def write_compounds(lex: Lexicon, rules: RuleTable, rng: random.Random) -> None:
    """30 labeled compound instances, incl. a context-contrast pair."""
    rows: list[tuple[list[str], int, list[str], str]] = []

    def compound(c1: str, c2: str) -> str:
        return str(apply_join(PhonemeString(c1), PhonemeString(c2), rules))

    # the yellow-cloth sentence: adjective + noun compound in first person
    rows.append((["aham", compound("pIta", "ambaram"), "DarAmi"], 1, ["pIta", "ambaram"], "TATPURUSHA"))
    # context-contrast pair: same constituents, different reading
    rp = compound("rAma", "putraH")
    rows.append(([rp, "vanam", "gacCati"], 0, ["rAma", "putraH"], "TATPURUSHA"))
    rows.append((["saH", rp, "nfpaH", "atra", "vasati"], 1, ["rAma", "putraH"], "BAHUVRIHI"))

    adj = ["nava", "sundara", "dIrGa", "alpa", "SuBa", "pIta", "praBUta"]
    nouns_acc = ["vanam", "Palam", "jalam", "puzpam", "pustakam", "patram", "gfham"]
    nouns_nom = ["naraH", "gajaH", "aSvaH", "putraH", "bAlaH", "vIraH", "nAgaH"]
    verbs = ["paSyati", "gacCati", "vadati", "smarati", "nayati", "carati"]
    subj = ["saH", "naraH", "bAlaH", "vIraH", "aham", "kumAraH"]

    while len(rows) < 24:
        a, n = pick(rng, adj), pick(rng, nouns_acc)
        comp = compound(a, n)
        sent = [pick(rng, subj), comp, pick(rng, verbs)]
        rows.append((sent, 1, [a, n], "TATPURUSHA"))
    # dvandva: two nominatives coordinated
    while len(rows) < 27:
        n1, n2 = pick(rng, MASC_STEMS), pick(rng, nouns_nom)
        comp = compound(n1, n2)
        sent = [comp, pick(rng, nouns_acc), pick(rng, verbs)]
        rows.append((sent, 0, [n1, n2], "DVANDVA"))
    # avyayibhava: particle + noun
    for p in ["upa", "prati", "anu"]:
        comp = compound(p, "vanam")
        sent = ["te", comp, "vasanti"]
        rows.append((sent, 1, [p, "vanam"], "AVYAYIBHAVA"))

    seen = set()
    lines = []
    for sent, span, constituents, label in rows[:30]:
        key = tuple(sent)
        if key in seen:
            continue
        seen.add(key)
        lines.append(f"{' '.join(sent)}\t{span}\t{'+'.join(constituents)}\t{label}")
    (DATA / "demo" / "compounds.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"compounds.tsv: {len(lines)} instances")


def write_embedding_corpus(lex: Lexicon, rng: random.Random) -> None:
    sents = sentence_templates(lex, rng, 240)
    text = "\n".join(" ".join(t) for t in sents) + "\n"
    (DATA / "demo" / "embedding_corpus.txt").write_text(text, encoding="utf-8")
    print("embedding_corpus.txt: 240 sentences")


def write_inventories(lex: Lexicon) -> None:
    inv = DATA / "demo" / "inventories"
    inv.mkdir(parents=True, exist_ok=True)

    analogy = ["task\tANALOGY"]
    pairs = [("rAmaH", "rAmam"), ("devaH", "devam"), ("naraH", "naram"),
             ("gajaH", "gajam"), ("aSvaH", "aSvam"), ("putraH", "putram"),
             ("bAlaH", "bAlam"), ("vIraH", "vIram")]
    for i in range(len(pairs) - 1):
        a, b = pairs[i]
        c, d = pairs[i + 1]
        analogy.append(f"{a}\t{b}\t{c}\t{d}")
    analogy.append("qqq\twww\teee\trrr")  # all-OOV tuple, counted separately
    (inv / "analogy.tsv").write_text("\n".join(analogy) + "\n", encoding="utf-8")

    synonym = ["task\tSYNONYM",
               "nfpaH\tdevaH|gacCati|ca\t0",
               "vanam\tkzetram|vadati|hi\t0",
               "gacCati\tcarati|Palam|eva\t0",
               "bAlaH\tkumAraH|jalam\t0",
               "zzz\tqqq|www\t0"]
    (inv / "synonym.tsv").write_text("\n".join(synonym) + "\n", encoding="utf-8")

    relatedness = ["task\tRELATEDNESS",
                   "rAmaH\tsItA\t9.0",
                   "vanam\tvfkzaH\t8.0",
                   "gajaH\taSvaH\t7.0",
                   "jalam\tsAgaraH\t7.5",
                   "pustakam\tgacCati\t2.0",
                   "ca\tparvataH\t1.0"]
    (inv / "relatedness.tsv").write_text("\n".join(relatedness) + "\n", encoding="utf-8")

    cat = ["task\tCATEGORIZATION"]
    for w in ["rAmaH", "devaH", "naraH", "gajaH", "aSvaH", "putraH"]:
        cat.append(f"{w}\tbeing")
    for w in ["gacCati", "vadati", "carati", "patati", "jIvati", "smarati"]:
        cat.append(f"{w}\taction")
    for w in ["ca", "hi", "eva", "iti"]:
        cat.append(f"{w}\tparticle")
    (inv / "categorization.tsv").write_text("\n".join(cat) + "\n", encoding="utf-8")
    print("inventories: analogy/synonym/relatedness/categorization")


def main() -> None:
    (DATA / "demo").mkdir(parents=True, exist_ok=True)
    write_lexicon()
    lex = Lexicon.load(DATA / "lexicon.tsv")
    rules = RuleTable.load(DATA / "sandhi_rules.tsv")
    rng = random.Random(SEED)
    write_segmentation_corpus(lex, rules, rng)
    write_treebank(lex, rng)
    write_compounds(lex, rules, rng)
    write_embedding_corpus(lex, rng)
    write_inventories(lex)


if __name__ == "__main__":
    main()
