"""Shared fixtures: bundled resources and small trained demo models.

The demo models train on short corpora so the whole suite stays fast; the
full-corpus overfit runs live in the acceptance module.
"""

import pytest

from sankit.compound import CompoundModel, load_compound_corpus, train_compound
from sankit.conllu import parse_conllu
from sankit.lexicon import Lexicon
from sankit.ml import TrainConfig
from sankit.parser import ParserModel, train_parser
from sankit.sandhi import RuleTable
from sankit.segmenter import SegModel, load_seg_corpus, train_segmenter
from sankit.tagger import TagModel, train_tagger
from sankit.pipeline import Toolkit

DEMO_LABELS = ["kartf", "karman", "karaRa", "sampradAna", "apAdAna",
               "aDikaraRa", "sambanDa", "viSezaRa"]

FIXTURE_CONLLU = """\
1	dAsaH	dAsa	_	NOUN,NOM,SG,M	_	2	kartf	_	_
2	Bava	BU	_	VERB,SG,2,IMP	_	0	kartf	_	_

1	rAmaH	rAma	_	NOUN,NOM,SG,M	_	3	kartf	_	_
2	vanam	vana	_	NOUN,ACC,SG,N	_	3	karman	_	_
3	gacCati	gam	_	VERB,SG,3,PRES	_	0	kartf	_	_

1	aham	asmad	_	PRON,NOM,SG	_	3	kartf	_	_
2	pItAmbaram	pIta	_	ADJ,ACC,SG,N	_	3	karman	_	_
3	DarAmi	Df	_	VERB,SG,1,PRES	_	0	kartf	_	_

1	bAlaH	bAla	_	NOUN,NOM,SG,M	_	4	kartf	_	_
2	jalam	jala	_	NOUN,ACC,SG,N	_	4	karman	_	_
3	eva	eva	_	INDECL	_	2	sambanDa	_	_
4	paSyati	dfS	_	VERB,SG,3,PRES	_	0	kartf	_	_
"""

FIXTURE_SEG_LINES = [
    "dAsaH_Bava",
    "rAmaH_vanam_gacCati",
    "bAlaH_jalam_eva_paSyati",
    "naraH_Palam_paSyati",
    "te_gfham_gacCanti",
]


@pytest.fixture(scope="session")
def bundled_rules():
    return RuleTable.bundled()


@pytest.fixture(scope="session")
def bundled_lexicon():
    return Lexicon.bundled()


@pytest.fixture(scope="session")
def fixture_treebank():
    return parse_conllu(FIXTURE_CONLLU)


@pytest.fixture(scope="session")
def demo_seg_model(bundled_rules, bundled_lexicon, tmp_path_factory):
    path = tmp_path_factory.mktemp("seg") / "corpus.txt"
    path.write_text("\n".join(FIXTURE_SEG_LINES) + "\n", encoding="utf-8")
    corpus = load_seg_corpus(path, bundled_rules)
    model = SegModel.build(bundled_rules, bundled_lexicon, seed=17)
    cfg = TrainConfig(learning_rate=0.05, epochs=2, seed=1)
    trained, _ = train_segmenter(model, corpus, bundled_lexicon, bundled_rules, cfg, rounds=4)
    return trained


@pytest.fixture(scope="session")
def demo_tag_model(fixture_treebank, bundled_lexicon):
    model = TagModel.build(fixture_treebank, bundled_lexicon, seed=18)
    cfg = TrainConfig(learning_rate=0.25, epochs=50, seed=2,
                      loss_weights={"tag": 1.0, "lemma": 0.5})
    trained, _ = train_tagger(model, fixture_treebank, cfg)
    return trained


@pytest.fixture(scope="session")
def demo_parser_model(fixture_treebank):
    model = ParserModel.build(fixture_treebank, DEMO_LABELS, seed=19)
    cfg = TrainConfig(learning_rate=0.25, epochs=80, seed=3,
                      loss_weights={"arc": 1.0, "label": 1.0})
    trained, _ = train_parser(model, fixture_treebank, cfg)
    return trained


@pytest.fixture(scope="session")
def demo_compound_model(bundled_rules, bundled_lexicon):
    from importlib import resources
    with resources.as_file(resources.files("sankit.data").joinpath("demo/compounds.tsv")) as p:
        corpus = load_compound_corpus(p, bundled_rules)
    tokens = {t for inst, _ in corpus for t in inst.sentence}
    tokens |= {str(c) for inst, _ in corpus for c in inst.constituents}
    tag_inventory = sorted({e.tag.spec() for e in bundled_lexicon.entries()})
    model = CompoundModel.build(tokens, tag_inventory, DEMO_LABELS, seed=20)
    cfg = TrainConfig(learning_rate=0.25, epochs=120, seed=4,
                      loss_weights={"class": 1.0})
    trained, _ = train_compound(model, corpus, cfg)
    return trained


@pytest.fixture(scope="session")
def demo_toolkit(bundled_rules, bundled_lexicon, demo_seg_model, demo_tag_model,
                 demo_parser_model, demo_compound_model):
    return Toolkit(bundled_lexicon, bundled_rules,
                   seg_model=demo_seg_model, tag_model=demo_tag_model,
                   parser_model=demo_parser_model, compound_model=demo_compound_model)
