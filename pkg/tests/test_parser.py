import itertools

import numpy as np
import pytest

from sankit.conllu import parse_conllu, read_conllu, render_conllu
from sankit.errors import LengthMismatch, MissingGold, UnknownLabel
from sankit.lexicon import Lexicon
from sankit.ml import TrainConfig, grad_check
from sankit.parser import (AuxEncoder, DependencyTree, ParserModel,
                           augment_treebank, aux_gold, evaluate_parser,
                           is_arborescence, load_parser_model, mst_decode,
                           prepare_parse_dataset, pretrain_aux,
                           save_parser_model, train_parser, uas_las)

LABELS = ["kartf", "karman", "karaRa", "sampradAna", "apAdAna", "aDikaraRa",
          "sambanDa", "viSezaRa"]

CONLLU = """\
1	rAmaH	rAma	_	NOUN,NOM,SG,M	_	2	kartf	_	_
2	gacCati	gam	_	VERB,SG,3,PRES	_	0	kartf	_	_

1	bAlaH	bAla	_	NOUN,NOM,SG,M	_	3	kartf	_	_
2	vanam	vana	_	NOUN,ACC,SG,N	_	3	karman	_	_
3	paSyati	dfS	_	VERB,SG,3,PRES	_	0	kartf	_	_

1	naraH	nara	_	NOUN,NOM,SG,M	_	4	kartf	_	_
2	jalam	jala	_	NOUN,ACC,SG,N	_	4	karman	_	_
3	eva	eva	_	INDECL	_	2	sambanDa	_	_
4	nayati	nI	_	VERB,SG,3,PRES	_	0	kartf	_	_
"""


@pytest.fixture(scope="module")
def corpus():
    return parse_conllu(CONLLU)


@pytest.fixture(scope="module")
def model(corpus):
    return ParserModel.build(corpus, LABELS, seed=2, dim=6, hidden=8)


def brute_force_best_score(scores: np.ndarray) -> float:
    n = scores.shape[0] - 1
    best = -np.inf
    for heads in itertools.product(*(tuple(h for h in range(n + 1) if h != d)
                                     for d in range(1, n + 1))):
        if not is_arborescence(list(heads)):
            continue
        total = sum(scores[h, d] for d, h in enumerate(heads, start=1))
        best = max(best, total)
    return best


def tree_score(scores: np.ndarray, tree: DependencyTree) -> float:
    return sum(scores[h, d] for d, h in enumerate(tree.heads, start=1))


def test_mst_single_token():
    tree = mst_decode(np.zeros((2, 2)))
    assert tree.heads == (0,)


def test_mst_two_tokens_example():
    s = np.zeros((3, 3))
    s[0, 1] = 1.0
    s[0, 2] = 1.0
    s[1, 2] = 5.0
    s[2, 1] = 0.0
    # all three arborescences score 2, 6, 1; the chain root->1->2 wins
    tree = mst_decode(s)
    assert tree.heads == (0, 1)
    assert tree_score(s, tree) == 6.0


def test_mst_oracle_random_matrices():
    rng = np.random.default_rng(23)
    for _ in range(120):
        n = int(rng.integers(1, 7))
        scores = rng.normal(size=(n + 1, n + 1))
        tree = mst_decode(scores)
        assert is_arborescence(list(tree.heads))
        assert tree_score(scores, tree) == pytest.approx(brute_force_best_score(scores), abs=1e-9)


def test_mst_cycle_contraction_case():
    # two tokens loving each other more than the root: forces contraction
    s = np.zeros((3, 3))
    s[0, 1] = 1.0
    s[0, 2] = 0.5
    s[1, 2] = 10.0
    s[2, 1] = 10.0
    tree = mst_decode(s)
    assert is_arborescence(list(tree.heads))
    assert tree_score(s, tree) == pytest.approx(11.0)


def test_dependency_tree_validation():
    with pytest.raises(ValueError):
        DependencyTree((2, 1))  # cycle
    t = DependencyTree((0, 1, 1))
    assert t.single_root
    t2 = DependencyTree((0, 0))
    assert not t2.single_root


def test_uas_las():
    gold = DependencyTree((2, 0, 2, 2), ("a", "b", "c", "d"))
    same = DependencyTree((2, 0, 2, 2), ("a", "b", "c", "d"))
    assert uas_las(same, gold) == (1.0, 1.0)
    labels_wrong = DependencyTree((2, 0, 2, 2), ("x", "x", "x", "x"))
    assert uas_las(labels_wrong, gold) == (1.0, 0.0)
    # 3 of 4 heads correct, 2 of those labels correct
    pred = DependencyTree((2, 0, 2, 0), ("a", "b", "x", "d"))
    assert uas_las(pred, gold) == (0.75, 0.5)
    with pytest.raises(LengthMismatch):
        uas_las(DependencyTree((0,)), gold)
    las_le_uas = uas_las(pred, gold)
    assert las_le_uas[1] <= las_le_uas[0]


def test_aux_gold_values(corpus):
    ct = aux_gold("CT", corpus[0])
    assert ct == ["NOM", "NONE"]  # verbs carry no case
    mt = aux_gold("MT", corpus[0])
    assert mt == ["NOUN,NOM,SG,M", "VERB,SG,3,PRES"]
    lt = aux_gold("LT", corpus[0])
    assert lt == ["kartf", "kartf"]
    bad = parse_conllu("1	rAmaH	rAma	_	_	_	0	kartf	_	_\n")
    with pytest.raises(MissingGold):
        aux_gold("MT", bad[0])


def test_pretrain_aux_overfits(corpus):
    cfg = TrainConfig(learning_rate=0.3, epochs=80, seed=4)
    aux = pretrain_aux("MT", corpus, cfg, seed=4)
    assert aux.train_accuracy >= 0.99


def test_pretrain_lt_rejects_foreign_labels(corpus):
    cfg = TrainConfig(learning_rate=0.1, epochs=1)
    with pytest.raises(UnknownLabel):
        pretrain_aux("LT", corpus, cfg, label_inventory=["somethingelse"])


def test_encode_without_aux_is_parser_output(model, corpus):
    tokens = corpus[0].forms()
    h, _ = model.encode(tokens)
    p, _ = model.enc.forward(model.vocab.ids(["<root>"] + tokens))
    assert np.array_equal(h, p)


def _gated(model, corpus, seed=5):
    cfg = TrainConfig(learning_rate=0.2, epochs=10, seed=1)
    aux = [pretrain_aux(t, corpus, cfg, seed=i) for i, t in enumerate(("LT", "MT", "CT"))]
    return model.attach_aux(aux, seed=seed)


def test_gate_zero_weights_mixes_half(model, corpus):
    gated = _gated(model, corpus)
    gated.params["gate.W"][:] = 0.0
    gated.params["gate.b"][:] = 0.0
    tokens = corpus[0].forms()
    h, (cache_p, gate_cache) = gated.encode(tokens)
    p, a_concat, a, pa, g = gate_cache
    assert np.all(g == 0.5)
    assert np.array_equal(h, (p + a) / 2.0)


def test_gate_saturation_reproduces_parser(model, corpus):
    gated = _gated(model, corpus)
    gated.params["gate.b"][:] = 50.0
    gated.params["gate.W"][:] = 0.0
    tokens = corpus[0].forms()
    h, (cache_p, gate_cache) = gated.encode(tokens)
    p = gate_cache[0]
    assert np.max(np.abs(h - p)) <= 1e-15


def test_detach_aux_identical_decodes(model, corpus):
    gated = _gated(model, corpus)
    detached = gated.detach_aux()
    for sent in corpus:
        a = detached.parse(sent.forms())
        b = model.parse(sent.forms())
        assert a.heads == b.heads and a.labels == b.labels


def test_score_arcs_zero_params(corpus):
    m = ParserModel.build(corpus, LABELS, seed=0, dim=4, hidden=5)
    for name in m.params.names():
        m.params[name][:] = 0.0
    s = m.score_arcs(corpus[0].forms())
    assert np.all(s == 0.0)


def test_score_arcs_matches_hand_computation(corpus):
    m = ParserModel.build(corpus, LABELS, seed=3, dim=4, hidden=5)
    tokens = corpus[0].forms()
    h, _ = m.encode(tokens)
    s = m.score_arcs(tokens)
    u, vh, vd, b = (m.params["arc.U"], m.params["arc.head"],
                    m.params["arc.dep"], m.params["arc.b"][0])
    for hh in range(len(tokens) + 1):
        for dd in range(len(tokens) + 1):
            expected = float(h[hh] @ u @ h[dd] + vh @ h[hh] + vd @ h[dd] + b)
            assert s[hh, dd] == pytest.approx(expected, abs=1e-12)


def test_label_arcs_zero_weights_first_label(corpus):
    m = ParserModel.build(corpus, LABELS, seed=0)
    m.params["label.W"][:] = 0.0
    m.params["label.b"][:] = 0.0
    labels = m.label_arcs(corpus[0].forms(), [2, 0])
    assert labels == [m.labels[0]] * 2


def test_label_arcs_single_label_inventory(corpus):
    m = ParserModel.build(corpus, ["only"], seed=0)
    assert m.label_arcs(corpus[0].forms(), [2, 0]) == ["only", "only"]


def test_grad_check_parser_plain_and_gated(model, corpus):
    cfg = TrainConfig(learning_rate=0.1, epochs=1, loss_weights={"arc": 1.0, "label": 0.5})
    dataset = prepare_parse_dataset(model, corpus, cfg)
    assert grad_check(model, dataset[1], epsilon=1e-5) <= 1e-4
    gated = _gated(model, corpus)
    dataset_g = prepare_parse_dataset(gated, corpus, cfg)
    gated_err = grad_check(gated, dataset_g[2], epsilon=1e-5)
    assert gated_err <= 1e-4


def test_train_rejects_bad_gold(model):
    bad = parse_conllu("1	rAmaH	rAma	_	NOUN,NOM,SG,M	_	0	nolabel	_	_\n")
    with pytest.raises(UnknownLabel):
        prepare_parse_dataset(model, bad, TrainConfig(learning_rate=0.1, epochs=1))
    missing = parse_conllu("1	rAmaH	rAma	_	NOUN,NOM,SG,M	_	_	kartf	_	_\n")
    with pytest.raises(MissingGold):
        prepare_parse_dataset(model, missing, TrainConfig(learning_rate=0.1, epochs=1))


def test_overfit_uas(corpus):
    m = ParserModel.build(corpus, LABELS, seed=6, dim=10, hidden=16)
    cfg = TrainConfig(learning_rate=0.25, epochs=120, seed=3,
                      loss_weights={"arc": 1.0, "label": 1.0})
    trained, trace = train_parser(m, corpus, cfg)
    report = evaluate_parser(trained, corpus)
    assert report["uas"] == 1.0
    assert trace[-1] < trace[0]


def test_augmenter_preserves_structure(corpus):
    lex = Lexicon.bundled()
    variants = augment_treebank(corpus, lex, seed=9, copies=2)
    assert variants
    originals = {tuple(s.forms()) for s in corpus}
    changed = [v for v in variants if tuple(v.forms()) not in originals]
    assert changed


def test_save_load_round_trip(tmp_path, model, corpus):
    gated = _gated(model, corpus)
    p = tmp_path / "parser.bin"
    save_parser_model(gated, p)
    loaded = load_parser_model(p)
    assert loaded.labels == gated.labels
    assert [a.task for a in loaded.aux] == [a.task for a in gated.aux]
    for sent in corpus:
        a = loaded.parse(sent.forms())
        b = gated.parse(sent.forms())
        assert a.heads == b.heads and a.labels == b.labels


def test_conllu_round_trip(tmp_path, corpus):
    text = render_conllu(corpus)
    again = render_conllu(parse_conllu(text))
    assert text == again
    p = tmp_path / "tb.conllu"
    p.write_text(text, encoding="utf-8")
    assert render_conllu(read_conllu(p)) == text
