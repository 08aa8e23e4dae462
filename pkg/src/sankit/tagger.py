"""Joint morphological tagging and lemmatization.

One shared windowed encoder feeds two heads: a monolithic-tag classifier
decoded with first-order Viterbi (count-based transitions), and an
edit-script classifier for lemmas (strip-k-append-s suffix rewrites, exact
by construction on the training data).  Lexicon candidate tags get an
additive decode-time bonus rather than a hard mask, so the model can
disagree with the lexicon.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conllu import Sentence
from .errors import EmptyInput, UnknownLabel, UnreachableLemma
from .lexicon import Lexicon, MorphTag
from .ml import (ParamStore, TrainConfig, Vocab, WindowEncoder, init_grads,
                 sgd_train, softmax)
from .text import PhonemeString

EditScript = tuple[int, str]  # (chars stripped from the end, string appended)


def induce_script(token: str, lemma: str) -> EditScript:
    lcp = 0
    for a, b in zip(token, lemma):
        if a != b:
            break
        lcp += 1
    return (len(token) - lcp, lemma[lcp:])


def apply_script(script: EditScript, token: str) -> str:
    strip, append = script
    keep = max(len(token) - strip, 0)
    return token[:keep] + append


@dataclass(frozen=True)
class TokenAnalysis:
    token: PhonemeString
    tag: MorphTag
    lemma: PhonemeString
    candidates: tuple[MorphTag, ...]

    @property
    def in_candidates(self) -> bool:
        return self.tag in self.candidates


def candidate_tags(token: str, lexicon: Lexicon) -> tuple[MorphTag, ...]:
    return tuple(sorted({e.tag for e in lexicon.lookup(token)}, key=MorphTag.spec))


def viterbi(emissions: np.ndarray, start: np.ndarray, transitions: np.ndarray) -> list[int]:
    """Best tag sequence; ties resolve to the smallest tag index, settled
    from the last token backwards (matches argmax-first backtracing)."""
    n, t = emissions.shape
    delta = start + emissions[0]
    back = np.zeros((n, t), dtype=np.intp)
    for i in range(1, n):
        cand = delta[:, None] + transitions
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(t)] + emissions[i]
    best = [int(np.argmax(delta))]
    for i in range(n - 1, 0, -1):
        best.append(int(back[i][best[-1]]))
    return best[::-1]


class TagModel:
    MODULE_ID = "tagger"

    def __init__(self, params: ParamStore, trans_params: ParamStore, vocab: Vocab,
                 tag_inventory: list[str], scripts: list[EditScript],
                 radius: int = 2, beta: float = 2.0):
        self.params = params
        self.trans_params = trans_params
        self.vocab = vocab
        self.tags = list(tag_inventory)
        self.tag_index = {t: i for i, t in enumerate(self.tags)}
        self.scripts = [tuple(s) if not isinstance(s, tuple) else s for s in scripts]
        self.script_index = {s: i for i, s in enumerate(self.scripts)}
        self.radius = radius
        self.beta = beta
        self.enc = WindowEncoder.attach(params, "enc", radius)

    @classmethod
    def build(cls, corpus: list[Sentence], lexicon: Lexicon, seed: int = 0,
              dim: int = 12, hidden: int = 24, radius: int = 2, beta: float = 2.0) -> "TagModel":
        forms = {t.form for sent in corpus for t in sent.tokens}
        vocab = Vocab(forms | set(lexicon.surfaces()))
        tags = {t.xpos for sent in corpus for t in sent.tokens}
        tags |= {e.tag.spec() for e in lexicon.entries()}
        inventory = sorted(tags)
        scripts = {induce_script(t.form, t.lemma) for sent in corpus for t in sent.tokens}
        scripts.add((0, ""))  # identity always available
        script_list = sorted(scripts)
        rng = np.random.default_rng(seed)
        params = ParamStore()
        WindowEncoder(params, "enc", len(vocab), dim, radius, hidden, rng)
        params.declare("tag.W", (hidden, len(inventory)), rng)
        params.declare("tag.b", (len(inventory),), rng)
        params.declare("lemma.W", (hidden, len(script_list)), rng)
        params.declare("lemma.b", (len(script_list),), rng)
        trans = ParamStore()
        trans.declare("trans.M", (len(inventory), len(inventory)))
        trans.declare("trans.start", (len(inventory),))
        return cls(params, trans, vocab, inventory, script_list, radius, beta)

    def clone(self) -> "TagModel":
        return TagModel(self.params.copy(), self.trans_params.copy(), self.vocab,
                        self.tags, self.scripts, self.radius, self.beta)

    # ----------------------------------------------------------- scoring

    def _forward(self, tokens: list[str]):
        ids = self.vocab.ids(tokens)
        h, cache = self.enc.forward(ids)
        tag_scores = h @ self.params["tag.W"] + self.params["tag.b"]
        lemma_scores = h @ self.params["lemma.W"] + self.params["lemma.b"]
        return tag_scores, lemma_scores, h, cache

    def fit_transitions(self, corpus: list[Sentence], alpha: float = 0.1) -> None:
        t = len(self.tags)
        counts = np.zeros((t, t))
        starts = np.zeros(t)
        for sent in corpus:
            idxs = [self.tag_index[tok.xpos] for tok in sent.tokens]
            starts[idxs[0]] += 1
            for a, b in zip(idxs, idxs[1:]):
                counts[a, b] += 1
        self.trans_params["trans.M"] = np.log((counts + alpha) / (counts.sum(axis=1, keepdims=True) + alpha * t))
        self.trans_params["trans.start"] = np.log((starts + alpha) / (starts.sum() + alpha * t))

    def tag_sentence(self, tokens: list[str], lexicon: Lexicon) -> list[TokenAnalysis]:
        if not tokens:
            raise EmptyInput("cannot tag an empty sentence")
        tag_scores, lemma_scores, _, _ = self._forward(tokens)
        cand_sets = [candidate_tags(tok, lexicon) for tok in tokens]
        emissions = tag_scores.copy()
        for i, cands in enumerate(cand_sets):
            for tag in cands:
                j = self.tag_index.get(tag.spec())
                if j is not None:
                    emissions[i, j] += self.beta
        path = viterbi(emissions, self.trans_params["trans.start"], self.trans_params["trans.M"])
        out = []
        for i, tok in enumerate(tokens):
            script = self.scripts[int(np.argmax(lemma_scores[i]))]
            out.append(TokenAnalysis(
                token=PhonemeString(tok),
                tag=MorphTag.parse(self.tags[path[i]]),
                lemma=PhonemeString(apply_script(script, tok)),
                candidates=cand_sets[i],
            ))
        return out

    # ---------------------------------------------------------- training

    def loss_and_grads(self, example):
        tokens, gold_tag_ids, gold_script_ids, weights = example
        w_tag, w_lemma = weights
        n = len(tokens)
        ids = self.vocab.ids(tokens)
        h, cache = self.enc.forward(ids)
        grads = init_grads(self.params)
        loss = 0.0
        dh = np.zeros_like(h)
        for head, w, gold_ids in (("tag", w_tag, gold_tag_ids), ("lemma", w_lemma, gold_script_ids)):
            if w == 0.0:
                continue
            W, b = self.params[f"{head}.W"], self.params[f"{head}.b"]
            scores = h @ W + b
            probs = softmax(scores, axis=1)
            rows = np.arange(n)
            loss += -w * float(np.sum(np.log(probs[rows, gold_ids]))) / n
            dscores = probs.copy()
            dscores[rows, gold_ids] -= 1.0
            dscores *= w / n
            grads[f"{head}.W"] += h.T @ dscores
            grads[f"{head}.b"] += dscores.sum(axis=0)
            dh += dscores @ W.T
        self.enc.backward(cache, dh, grads)
        return loss, grads


def prepare_tag_dataset(model: TagModel, corpus: list[Sentence], config: TrainConfig):
    w_tag = config.weight("tag")
    w_lemma = config.weight("lemma")
    dataset = []
    for sent in corpus:
        tag_ids, script_ids = [], []
        for tok in sent.tokens:
            if tok.xpos not in model.tag_index:
                raise UnknownLabel(tok.xpos)
            script = induce_script(tok.form, tok.lemma)
            if script not in model.script_index:
                raise UnreachableLemma(tok.form, tok.lemma)
            tag_ids.append(model.tag_index[tok.xpos])
            script_ids.append(model.script_index[script])
        dataset.append((sent.forms(), np.array(tag_ids), np.array(script_ids), (w_tag, w_lemma)))
    return dataset


def train_tagger(model: TagModel, corpus: list[Sentence], config: TrainConfig):
    dataset = prepare_tag_dataset(model, corpus, config)
    trained, trace = sgd_train(model, dataset, config)
    trained.fit_transitions(corpus)
    return trained, trace


# ----------------------------------------------------------------- metrics

def classification_scores(gold: list[str], pred: list[str]) -> dict:
    """Accuracy plus micro/macro F1; macro averages over classes present in
    the gold labels (classes that only appear in predictions are ignored)."""
    if len(gold) != len(pred):
        raise ValueError("length mismatch")
    n = len(gold)
    correct = sum(1 for g, p in zip(gold, pred) if g == p)
    labels = sorted(set(gold))
    per_class = {}
    for lab in labels:
        tp = sum(1 for g, p in zip(gold, pred) if g == lab and p == lab)
        gp = sum(1 for p in pred if p == lab)
        gg = sum(1 for g in gold if g == lab)
        prec = tp / gp if gp else 0.0
        rec = tp / gg if gg else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per_class[lab] = f1
    micro_p = correct / len(pred) if pred else 0.0
    micro_r = correct / len(gold) if gold else 0.0
    micro = 2 * micro_p * micro_r / (micro_p + micro_r) if micro_p + micro_r else 0.0
    return {
        "accuracy": correct / n if n else 0.0,
        "micro_f1": micro,
        "macro_f1": float(np.mean(list(per_class.values()))) if per_class else 0.0,
        "per_class_f1": per_class,
    }


def evaluate_tagger(model: TagModel, corpus: list[Sentence], lexicon: Lexicon) -> dict:
    gold_tags, pred_tags = [], []
    gold_lemmas, pred_lemmas = [], []
    for sent in corpus:
        analyses = model.tag_sentence(sent.forms(), lexicon)
        for tok, ana in zip(sent.tokens, analyses):
            gold_tags.append(tok.xpos)
            pred_tags.append(ana.tag.spec())
            gold_lemmas.append(tok.lemma)
            pred_lemmas.append(str(ana.lemma))
    scores = classification_scores(gold_tags, pred_tags)
    lemma_acc = (sum(1 for g, p in zip(gold_lemmas, pred_lemmas) if g == p) / len(gold_lemmas)
                 if gold_lemmas else 0.0)
    return {
        "token_accuracy": scores["accuracy"],
        "micro_f1_tags": scores["micro_f1"],
        "macro_f1_tags": scores["macro_f1"],
        "lemma_accuracy": lemma_acc,
        "tokens": len(gold_tags),
        "f1_basis": "single-label per-token tags; micro and macro both reported",
    }


# ------------------------------------------------------------- persistence

def save_tag_model(model: TagModel, path) -> None:
    from .ml import save_params
    merged = ParamStore()
    for store in (model.params, model.trans_params):
        for name, arr in store.items():
            merged._arrays[name] = arr.copy()
    merged.version = model.params.version
    meta = {
        "vocab": model.vocab.tokens(), "tags": model.tags,
        "scripts": [[s, a] for s, a in model.scripts],
        "radius": model.radius, "beta": model.beta,
    }
    save_params(merged, path, TagModel.MODULE_ID, meta)


def load_tag_model(path) -> TagModel:
    from .ml import load_params
    merged, _, meta = load_params(path, expected_module=TagModel.MODULE_ID)
    params, trans = ParamStore(), ParamStore()
    for name, arr in merged.items():
        (trans if name.startswith("trans.") else params)._arrays[name] = arr
    params.version = merged.version
    vocab = Vocab.from_tokens(meta["vocab"])
    scripts = [(int(s), a) for s, a in meta["scripts"]]
    return TagModel(params, trans, vocab, meta["tags"], scripts, meta["radius"], meta["beta"])
