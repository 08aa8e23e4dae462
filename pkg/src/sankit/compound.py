"""Compound semantic-class identification from constituents plus context.

The classifier sees the compound's constituents, a context window around
its position in the sentence, and (when available) the compound token's
morph tag and incoming dependency label as auxiliary features; missing
auxiliary inputs contribute zero feature blocks.  At training time two
auxiliary heads (morph tag, dependency label) share the encoder, weighted
by the loss_weights config.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConstituentJoinMismatch, SpanOutOfRange, UnknownLabel)
from .ml import (ParamStore, TrainConfig, Vocab, WindowEncoder, init_grads,
                 sgd_train, softmax)
from .sandhi import RuleTable, join_words
from .text import PhonemeString

DEFAULT_CLASSES = ("TATPURUSHA", "BAHUVRIHI", "DVANDVA", "AVYAYIBHAVA")


@dataclass(frozen=True)
class CompoundInstance:
    constituents: tuple[PhonemeString, ...]
    sentence: tuple[str, ...]
    span: int

    def __post_init__(self):
        if len(self.constituents) < 2:
            raise ValueError("a compound has at least two constituents")

    def validate(self, rules: RuleTable) -> None:
        if not 0 <= self.span < len(self.sentence):
            raise SpanOutOfRange(f"span {self.span} outside 0..{len(self.sentence) - 1}")
        joined, _ = join_words([str(c) for c in self.constituents], rules)
        if str(joined) != self.sentence[self.span]:
            raise ConstituentJoinMismatch(str(joined), self.sentence[self.span])


class CompoundModel:
    MODULE_ID = "compound"

    def __init__(self, params: ParamStore, vocab: Vocab, classes: list[str],
                 tag_inventory: list[str], label_inventory: list[str], radius: int = 3):
        self.params = params
        self.vocab = vocab
        self.classes = list(classes)
        self.class_index = {c: i for i, c in enumerate(self.classes)}
        self.tags = list(tag_inventory)
        self.tag_index = {t: i for i, t in enumerate(self.tags)}
        self.labels = list(label_inventory)
        self.label_index = {l: i for i, l in enumerate(self.labels)}
        self.radius = radius
        self.enc = WindowEncoder.attach(params, "enc", radius)

    @classmethod
    def build(cls, corpus_tokens, tag_inventory: list[str], label_inventory: list[str],
              classes: list[str] | None = None, seed: int = 0, dim: int = 10,
              enc_hidden: int = 14, rep_dim: int = 16, tag_dim: int = 6,
              lab_dim: int = 6, radius: int = 3) -> "CompoundModel":
        classes = list(classes) if classes else list(DEFAULT_CLASSES)
        vocab = Vocab(corpus_tokens)
        rng = np.random.default_rng(seed)
        params = ParamStore()
        WindowEncoder(params, "enc", len(vocab), dim, radius, enc_hidden, rng)
        params.declare("tag.emb", (len(tag_inventory), tag_dim), rng)
        params.declare("dep.emb", (len(label_inventory), lab_dim), rng)
        params.declare("mix.W", (enc_hidden + dim + tag_dim + lab_dim, rep_dim), rng)
        params.declare("mix.b", (rep_dim,), rng)
        params.declare("cls.W", (rep_dim, len(classes)), rng)
        params.declare("cls.b", (len(classes),), rng)
        params.declare("auxtag.W", (rep_dim, len(tag_inventory)), rng)
        params.declare("auxtag.b", (len(tag_inventory),), rng)
        params.declare("auxdep.W", (rep_dim, len(label_inventory)), rng)
        params.declare("auxdep.b", (len(label_inventory),), rng)
        return cls(params, vocab, classes, tag_inventory, label_inventory, radius)

    def clone(self) -> "CompoundModel":
        return CompoundModel(self.params.copy(), self.vocab, self.classes,
                             self.tags, self.labels, self.radius)

    # ----------------------------------------------------------- features

    def _forward(self, instance: CompoundInstance, morph_tag: str | None,
                 dep_label: str | None):
        p = self.params
        ids = self.vocab.ids(instance.sentence)
        h, enc_cache = self.enc.forward(ids)
        h_span = h[instance.span]
        const_ids = np.array(self.vocab.ids([str(c) for c in instance.constituents]), dtype=np.intp)
        const_mean = p["enc.emb"][const_ids].mean(axis=0)
        tag_id = self.tag_index.get(morph_tag) if morph_tag is not None else None
        lab_id = self.label_index.get(dep_label) if dep_label is not None else None
        tag_feat = p["tag.emb"][tag_id] if tag_id is not None else np.zeros(p["tag.emb"].shape[1])
        lab_feat = p["dep.emb"][lab_id] if lab_id is not None else np.zeros(p["dep.emb"].shape[1])
        x = np.concatenate([h_span, const_mean, tag_feat, lab_feat])
        rep = np.tanh(x @ p["mix.W"] + p["mix.b"])
        cache = (instance.span, enc_cache, h, const_ids, tag_id, lab_id, x, rep)
        return rep, cache

    def _backward(self, cache, drep: np.ndarray, grads) -> None:
        p = self.params
        span, enc_cache, h, const_ids, tag_id, lab_id, x, rep = cache
        dx_pre = drep * (1.0 - rep * rep)
        grads["mix.W"] += np.outer(x, dx_pre)
        grads["mix.b"] += dx_pre
        dx = p["mix.W"] @ dx_pre
        eh = self.enc.hidden
        d = p["enc.emb"].shape[1]
        td = p["tag.emb"].shape[1]
        dh_span = dx[:eh]
        dconst = dx[eh: eh + d]
        dtag = dx[eh + d: eh + d + td]
        dlab = dx[eh + d + td:]
        dh = np.zeros_like(h)
        dh[span] += dh_span
        self.enc.backward(enc_cache, dh, grads)
        demb = np.tile(dconst / len(const_ids), (len(const_ids), 1))
        np.add.at(grads["enc.emb"], const_ids, demb)
        if tag_id is not None:
            grads["tag.emb"][tag_id] += dtag
        if lab_id is not None:
            grads["dep.emb"][lab_id] += dlab

    # ------------------------------------------------------------ predict

    def classify(self, instance: CompoundInstance, rules: RuleTable,
                 morph_tag: str | None = None, dep_label: str | None = None
                 ) -> tuple[str, np.ndarray]:
        """Returns (argmax class, probability vector over the inventory)."""
        instance.validate(rules)
        rep, _ = self._forward(instance, morph_tag, dep_label)
        scores = rep @ self.params["cls.W"] + self.params["cls.b"]
        probs = softmax(scores)
        return self.classes[int(np.argmax(probs))], probs

    # ----------------------------------------------------------- training

    def loss_and_grads(self, example):
        instance, morph_tag, dep_label, class_id, aux_tag_id, aux_lab_id, weights = example
        w_cls, w_m, w_d = weights
        p = self.params
        rep, cache = self._forward(instance, morph_tag, dep_label)
        grads = init_grads(p)
        drep = np.zeros_like(rep)
        loss = 0.0
        heads = [("cls", w_cls, class_id)]
        if aux_tag_id is not None and w_m > 0.0:
            heads.append(("auxtag", w_m, aux_tag_id))
        if aux_lab_id is not None and w_d > 0.0:
            heads.append(("auxdep", w_d, aux_lab_id))
        for name, w, gold in heads:
            W, b = p[f"{name}.W"], p[f"{name}.b"]
            scores = rep @ W + b
            probs = softmax(scores)
            loss += -w * float(np.log(probs[gold]))
            dscores = probs
            dscores[gold] -= 1.0
            dscores *= w
            grads[f"{name}.W"] += np.outer(rep, dscores)
            grads[f"{name}.b"] += dscores
            drep += W @ dscores
        self._backward(cache, drep, grads)
        return loss, grads


def load_compound_corpus(path, rules: RuleTable):
    """TSV: sentence<TAB>span-index<TAB>c1+c2+...<TAB>label."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            sent, span, consts, label = line.split("\t")
            instance = CompoundInstance(
                tuple(PhonemeString(c) for c in consts.split("+")),
                tuple(sent.split()), int(span))
            instance.validate(rules)
            out.append((instance, label))
    return out


def prepare_compound_dataset(model: CompoundModel, corpus, config: TrainConfig,
                             aux_annotations=None):
    """corpus: list of (instance, label).  aux_annotations: optional parallel
    list of (morph_tag, dep_label) pairs (either member may be None)."""
    w_cls = config.weight("class", 1.0)
    w_m = config.weight("morph", 0.0)
    w_d = config.weight("dep", 0.0)
    dataset = []
    for i, (instance, label) in enumerate(corpus):
        if label not in model.class_index:
            raise UnknownLabel(label)
        morph_tag, dep_label = (aux_annotations[i] if aux_annotations else (None, None))
        aux_tag_id = model.tag_index.get(morph_tag) if morph_tag else None
        aux_lab_id = model.label_index.get(dep_label) if dep_label else None
        dataset.append((instance, morph_tag, dep_label, model.class_index[label],
                        aux_tag_id, aux_lab_id, (w_cls, w_m, w_d)))
    return dataset


def train_compound(model: CompoundModel, corpus, config: TrainConfig,
                   aux_annotations=None):
    dataset = prepare_compound_dataset(model, corpus, config, aux_annotations)
    return sgd_train(model, dataset, config)


def evaluate_compound(model: CompoundModel, corpus, rules: RuleTable,
                      aux_annotations=None) -> dict:
    from .tagger import classification_scores
    gold, pred = [], []
    for i, (instance, label) in enumerate(corpus):
        morph_tag, dep_label = (aux_annotations[i] if aux_annotations else (None, None))
        cls, _ = model.classify(instance, rules, morph_tag, dep_label)
        gold.append(label)
        pred.append(cls)
    scores = classification_scores(gold, pred)
    return {"accuracy": scores["accuracy"], "macro_f1": scores["macro_f1"],
            "instances": len(gold), "class_inventory": model.classes}


# ------------------------------------------------------------- persistence

def save_compound_model(model: CompoundModel, path) -> None:
    from .ml import save_params
    meta = {"vocab": model.vocab.tokens(), "classes": model.classes,
            "tags": model.tags, "labels": model.labels, "radius": model.radius}
    save_params(model.params, path, CompoundModel.MODULE_ID, meta)


def load_compound_model(path) -> CompoundModel:
    from .ml import load_params
    params, _, meta = load_params(path, expected_module=CompoundModel.MODULE_ID)
    return CompoundModel(params, Vocab.from_tokens(meta["vocab"]), meta["classes"],
                         meta["tags"], meta["labels"], meta["radius"])
