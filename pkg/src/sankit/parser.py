"""Arc-factored dependency parsing with maximum-arborescence decoding.

Auxiliary encoders pretrained on sequence-labeling tasks (dependency label
LT, monolithic morph tag MT, case CT) can be attached to the parser
encoder through a gating mechanism: h = g * p + (1 - g) * a, where p is
the parser encoder output, a the concatenated-then-projected auxiliary
output, and g a logistic gate over [p; a].  With no auxiliaries attached
the encoder output is exactly p, so detaching reproduces the baseline
parser bit for bit.  Auxiliary parameters stay frozen after pretraining.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conllu import Sentence
from .errors import LengthMismatch, MissingGold, UnknownLabel
from .lexicon import Lexicon, MorphTag
from .ml import (ParamStore, TrainConfig, Vocab, WindowEncoder, init_grads,
                 sgd_train, sigmoid, softmax)

ROOT_TOKEN = "<root>"
AUX_TASKS = ("LT", "MT", "CT")


# ----------------------------------------------------------------- trees

def is_arborescence(heads: list[int]) -> bool:
    """heads[i] is the head of token i+1, 0 = virtual root."""
    n = len(heads)
    if any(not 0 <= h <= n for h in heads):
        return False
    for start in range(1, n + 1):
        seen = {start}
        cur = start
        while cur != 0:
            cur = heads[cur - 1]
            if cur in seen:
                return False
            seen.add(cur)
    return True


@dataclass(frozen=True)
class DependencyTree:
    heads: tuple[int, ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not is_arborescence(list(self.heads)):
            raise ValueError(f"heads {self.heads} do not form an arborescence")
        if self.labels is not None and len(self.labels) != len(self.heads):
            raise ValueError("labels length must match heads length")

    @property
    def n(self) -> int:
        return len(self.heads)

    @property
    def single_root(self) -> bool:
        return sum(1 for h in self.heads if h == 0) == 1


def uas_las(pred: DependencyTree, gold: DependencyTree) -> tuple[float, float]:
    if pred.n != gold.n:
        raise LengthMismatch(f"{pred.n} vs {gold.n} tokens")
    if pred.n == 0:
        return 1.0, 1.0
    head_ok = [p == g for p, g in zip(pred.heads, gold.heads)]
    uas = sum(head_ok) / pred.n
    if pred.labels is None or gold.labels is None:
        return uas, 0.0
    las = sum(1 for i, ok in enumerate(head_ok)
              if ok and pred.labels[i] == gold.labels[i]) / pred.n
    return uas, las


# ------------------------------------------------------- Chu-Liu/Edmonds

def _find_cycle(best_in: dict[int, int], root: int) -> list[int] | None:
    color: dict[int, int] = {}
    for start in sorted(best_in):
        if color.get(start):
            continue
        path = []
        cur = start
        while cur != root and color.get(cur) != 2:
            if color.get(cur) == 1:
                cycle = path[path.index(cur):]
                m = cycle.index(min(cycle))
                return cycle[m:] + cycle[:m]
            color[cur] = 1
            path.append(cur)
            cur = best_in[cur]
        for v in path:
            color[v] = 2
    return None


def _max_arborescence(nodes: list[int], scores: dict[tuple[int, int], float],
                      root: int) -> dict[int, int]:
    best_in: dict[int, int] = {}
    for v in nodes:
        if v == root:
            continue
        best_u, best_s = None, None
        for u in nodes:
            if u == v:
                continue
            s = scores.get((u, v))
            if s is None:
                continue
            if best_s is None or s > best_s or (s == best_s and u < best_u):
                best_u, best_s = u, s
        if best_u is None:
            raise ValueError(f"node {v} has no incoming edge")
        best_in[v] = best_u
    cycle = _find_cycle(best_in, root)
    if cycle is None:
        return best_in

    cycle_set = set(cycle)
    pred_in_cycle = {v: best_in[v] for v in cycle}
    c = max(nodes) + 1
    new_nodes = [x for x in nodes if x not in cycle_set] + [c]
    new_scores: dict[tuple[int, int], float] = {}
    enter_choice: dict[int, int] = {}
    exit_choice: dict[int, int] = {}
    for u in nodes:
        if u in cycle_set:
            continue
        best = None
        for v in cycle:
            s = scores.get((u, v))
            if s is None:
                continue
            adj = s - scores[(pred_in_cycle[v], v)]
            if best is None or adj > best[0] or (adj == best[0] and v < best[1]):
                best = (adj, v)
        if best is not None:
            new_scores[(u, c)] = best[0]
            enter_choice[u] = best[1]
    for w in nodes:
        if w in cycle_set or w == root:
            continue
        best = None
        for v in cycle:
            s = scores.get((v, w))
            if s is None:
                continue
            if best is None or s > best[0] or (s == best[0] and v < best[1]):
                best = (s, v)
        if best is not None:
            new_scores[(c, w)] = best[0]
            exit_choice[w] = best[1]
        for u in nodes:
            if u not in cycle_set and u != w and (u, w) in scores:
                new_scores[(u, w)] = scores[(u, w)]
    sub = _max_arborescence(new_nodes, new_scores, root)

    heads: dict[int, int] = {}
    for v, u in sub.items():
        if v == c:
            entry = enter_choice[u]
            heads[entry] = u
            for x in cycle:
                if x != entry:
                    heads[x] = pred_in_cycle[x]
        elif u == c:
            heads[v] = exit_choice[v]
        else:
            heads[v] = u
    return heads


def mst_decode(scores: np.ndarray) -> DependencyTree:
    """Maximum-total-score arborescence rooted at node 0.

    Ties prefer the smaller head index, then the smaller dependent, applied
    consistently inside contractions.  Multiple children of the root are
    allowed (the score alone decides).
    """
    n = scores.shape[0] - 1
    if scores.shape != (n + 1, n + 1):
        raise ValueError("scores must be square")
    if n == 0:
        return DependencyTree(())
    if not np.all(np.isfinite(scores[:, 1:])):
        raise ValueError("arc scores must be finite")
    table = {(u, v): float(scores[u, v])
             for u in range(n + 1) for v in range(1, n + 1) if u != v}
    best = _max_arborescence(list(range(n + 1)), table, root=0)
    return DependencyTree(tuple(best[v] for v in range(1, n + 1)))


# ---------------------------------------------------------- aux encoders

class AuxEncoder:
    """Frozen per-token classifier encoder for one auxiliary task."""

    def __init__(self, task: str, params: ParamStore, vocab: Vocab,
                 classes: list[str], radius: int, train_accuracy: float = 0.0):
        if task not in AUX_TASKS:
            raise ValueError(f"unknown auxiliary task {task!r}")
        self.task = task
        self.params = params
        self.vocab = vocab
        self.classes = list(classes)
        self.radius = radius
        self.train_accuracy = train_accuracy
        self.enc = WindowEncoder.attach(params, "enc", radius)

    @property
    def hidden(self) -> int:
        return self.enc.hidden

    def encode(self, tokens: list[str]) -> np.ndarray:
        h, _ = self.enc.forward(self.vocab.ids(tokens))
        return h

    def predict(self, tokens: list[str]) -> list[str]:
        h = self.encode(tokens)
        scores = h @ self.params["head.W"] + self.params["head.b"]
        return [self.classes[int(i)] for i in np.argmax(scores, axis=1)]


class _AuxClassifier:
    def __init__(self, params: ParamStore, vocab: Vocab, classes: list[str], radius: int):
        self.params = params
        self.vocab = vocab
        self.classes = classes
        self.radius = radius
        self.enc = WindowEncoder.attach(params, "enc", radius)

    def clone(self):
        return _AuxClassifier(self.params.copy(), self.vocab, self.classes, self.radius)

    def loss_and_grads(self, example):
        tokens, gold_ids = example
        h, cache = self.enc.forward(self.vocab.ids(tokens))
        scores = h @ self.params["head.W"] + self.params["head.b"]
        probs = softmax(scores, axis=1)
        n = len(tokens)
        rows = np.arange(n)
        loss = -float(np.sum(np.log(probs[rows, gold_ids]))) / n
        dscores = probs
        dscores[rows, gold_ids] -= 1.0
        dscores /= n
        grads = init_grads(self.params)
        grads["head.W"] += h.T @ dscores
        grads["head.b"] += dscores.sum(axis=0)
        self.enc.backward(cache, dscores @ self.params["head.W"].T, grads)
        return loss, grads


def aux_gold(task: str, sent: Sentence) -> list[str]:
    out = []
    for tok in sent.tokens:
        if task == "LT":
            if tok.deprel == "_":
                raise MissingGold("LT")
            out.append(tok.deprel)
        elif task == "MT":
            if tok.xpos == "_":
                raise MissingGold("MT")
            out.append(tok.xpos)
        else:  # CT: case attribute of nominals, NONE otherwise
            if tok.xpos == "_":
                raise MissingGold("CT")
            tag = MorphTag.parse(tok.xpos)
            out.append(tag.case if tag.case is not None else "NONE")
    return out


def pretrain_aux(task: str, corpus: list[Sentence], config: TrainConfig,
                 label_inventory: list[str] | None = None, seed: int = 0,
                 dim: int = 8, hidden: int = 12, radius: int = 2) -> AuxEncoder:
    golds = [aux_gold(task, sent) for sent in corpus]
    if task == "LT" and label_inventory is not None:
        allowed = set(label_inventory)
        for gold in golds:
            for lab in gold:
                if lab not in allowed:
                    raise UnknownLabel(lab)
    classes = sorted({lab for gold in golds for lab in gold})
    vocab = Vocab({t.form for sent in corpus for t in sent.tokens})
    rng = np.random.default_rng(seed)
    params = ParamStore()
    WindowEncoder(params, "enc", len(vocab), dim, radius, hidden, rng)
    params.declare("head.W", (hidden, len(classes)), rng)
    params.declare("head.b", (len(classes),), rng)
    model = _AuxClassifier(params, vocab, classes, radius)
    class_index = {c: i for i, c in enumerate(classes)}
    dataset = [(sent.forms(), np.array([class_index[g] for g in gold]))
               for sent, gold in zip(corpus, golds)]
    trained, _ = sgd_train(model, dataset, config)
    correct = total = 0
    aux = AuxEncoder(task, trained.params, vocab, classes, radius)
    for sent, gold in zip(corpus, golds):
        pred = aux.predict(sent.forms())
        correct += sum(1 for p, g in zip(pred, gold) if p == g)
        total += len(gold)
    aux.train_accuracy = correct / total if total else 0.0
    return aux


# ----------------------------------------------------------------- parser

class ParserModel:
    MODULE_ID = "parser"

    def __init__(self, params: ParamStore, vocab: Vocab, labels: list[str],
                 radius: int = 2, aux: tuple[AuxEncoder, ...] = ()):
        self.params = params
        self.vocab = vocab
        self.labels = list(labels)
        self.label_index = {l: i for i, l in enumerate(self.labels)}
        self.radius = radius
        self.aux = tuple(aux)
        self.enc = WindowEncoder.attach(params, "enc", radius)

    @classmethod
    def build(cls, corpus: list[Sentence], labels: list[str], seed: int = 0,
              dim: int = 12, hidden: int = 20, radius: int = 2) -> "ParserModel":
        vocab = Vocab({t.form for sent in corpus for t in sent.tokens},
                      extra_reserved=(ROOT_TOKEN,))
        rng = np.random.default_rng(seed)
        params = ParamStore()
        WindowEncoder(params, "enc", len(vocab), dim, radius, hidden, rng)
        params.declare("arc.U", (hidden, hidden), rng)
        params.declare("arc.head", (hidden,), rng)
        params.declare("arc.dep", (hidden,), rng)
        params.declare("arc.b", (1,), rng)
        params.declare("label.W", (2 * hidden, len(labels)), rng)
        params.declare("label.b", (len(labels),), rng)
        return cls(params, vocab, labels, radius)

    def clone(self) -> "ParserModel":
        return ParserModel(self.params.copy(), self.vocab, self.labels, self.radius, self.aux)

    def attach_aux(self, aux: list[AuxEncoder], seed: int = 0) -> "ParserModel":
        """New model with gate and projection parameters for the given
        (frozen) auxiliary encoders; parser parameters are copied."""
        if not aux:
            return self.clone()
        params = self.params.copy()
        rng = np.random.default_rng(seed)
        hidden = self.enc.hidden
        total_aux = sum(a.hidden for a in aux)
        params.declare("aux.proj.W", (total_aux, hidden), rng)
        params.declare("aux.proj.b", (hidden,), rng)
        params.declare("gate.W", (2 * hidden, hidden), rng)
        params.declare("gate.b", (hidden,), rng)
        order = {t: i for i, t in enumerate(AUX_TASKS)}
        aux_sorted = tuple(sorted(aux, key=lambda a: order[a.task]))
        return ParserModel(params, self.vocab, self.labels, self.radius, aux_sorted)

    def detach_aux(self) -> "ParserModel":
        params = ParamStore()
        for name, arr in self.params.items():
            if not (name.startswith("aux.") or name.startswith("gate.")):
                params._arrays[name] = arr
        params.version = self.params.version
        return ParserModel(params, self.vocab, self.labels, self.radius, ())

    # ---------------------------------------------------------- encoding

    def encode(self, tokens: list[str]):
        """Representations for [root] + tokens; h == p when no aux attached."""
        seq = [ROOT_TOKEN] + list(tokens)
        p, cache_p = self.enc.forward(self.vocab.ids(seq))
        if not self.aux:
            return p, (cache_p, None)
        a_concat = np.concatenate([ax.encode(seq) for ax in self.aux], axis=1)
        a = a_concat @ self.params["aux.proj.W"] + self.params["aux.proj.b"]
        pa = np.concatenate([p, a], axis=1)
        g = sigmoid(pa @ self.params["gate.W"] + self.params["gate.b"])
        h = g * p + (1.0 - g) * a
        return h, (cache_p, (p, a_concat, a, pa, g))

    def encode_backward(self, cache, dh: np.ndarray, grads) -> None:
        cache_p, gate_cache = cache
        if gate_cache is None:
            self.enc.backward(cache_p, dh, grads)
            return
        p, a_concat, a, pa, g = gate_cache
        dg = dh * (p - a)
        dp = dh * g
        da = dh * (1.0 - g)
        dz = dg * g * (1.0 - g)
        grads["gate.W"] += pa.T @ dz
        grads["gate.b"] += dz.sum(axis=0)
        dpa = dz @ self.params["gate.W"].T
        hidden = p.shape[1]
        dp += dpa[:, :hidden]
        da += dpa[:, hidden:]
        grads["aux.proj.W"] += a_concat.T @ da
        grads["aux.proj.b"] += da.sum(axis=0)
        # auxiliary encoders are frozen: no gradient past a_concat
        self.enc.backward(cache_p, dp, grads)

    # ----------------------------------------------------------- scoring

    def _arc_scores_from(self, h: np.ndarray) -> np.ndarray:
        u = self.params["arc.U"]
        s = (h @ u) @ h.T
        s += (h @ self.params["arc.head"])[:, None]
        s += (h @ self.params["arc.dep"])[None, :]
        s += self.params["arc.b"][0]
        return s

    def score_arcs(self, tokens: list[str]) -> np.ndarray:
        """(n+1)x(n+1) matrix; rows are heads (0 = root), columns dependents.
        Column 0 and the diagonal are ignored by decoding."""
        h, _ = self.encode(tokens)
        return self._arc_scores_from(h)

    def label_arcs(self, tokens: list[str], heads: list[int]) -> list[str]:
        h, _ = self.encode(tokens)
        out = []
        for dep in range(1, len(tokens) + 1):
            feat = np.concatenate([h[heads[dep - 1]], h[dep]])
            scores = feat @ self.params["label.W"] + self.params["label.b"]
            out.append(self.labels[int(np.argmax(scores))])
        return out

    def parse(self, tokens: list[str]) -> DependencyTree:
        scores = self.score_arcs(tokens)
        tree = mst_decode(scores)
        labels = self.label_arcs(tokens, list(tree.heads))
        return DependencyTree(tree.heads, tuple(labels))

    # ---------------------------------------------------------- training

    def loss_and_grads(self, example):
        tokens, gold_heads, gold_label_ids, (w_arc, w_label) = example
        n = len(tokens)
        h, cache = self.encode(tokens)
        grads = init_grads(self.params)
        dh = np.zeros_like(h)
        loss = 0.0

        if w_arc > 0.0:
            s = self._arc_scores_from(h)
            ds = np.zeros_like(s)
            for dep in range(1, n + 1):
                col = s[:, dep].copy()
                col[dep] = -np.inf
                probs = softmax(col)
                loss += -w_arc * float(np.log(probs[gold_heads[dep - 1]])) / n
                dcol = probs
                dcol[gold_heads[dep - 1]] -= 1.0
                dcol[dep] = 0.0
                ds[:, dep] += dcol * (w_arc / n)
            u = self.params["arc.U"]
            grads["arc.U"] += h.T @ ds @ h
            dh += ds @ (h @ u.T)
            dh += ds.T @ (h @ u)
            grads["arc.head"] += ds.sum(axis=1) @ h
            grads["arc.dep"] += ds.sum(axis=0) @ h
            grads["arc.b"][0] += ds.sum()
            dh += np.outer(ds.sum(axis=1), self.params["arc.head"])
            dh += np.outer(ds.sum(axis=0), self.params["arc.dep"])

        if w_label > 0.0:
            lw = self.params["label.W"]
            hidden = h.shape[1]
            for dep in range(1, n + 1):
                gh = gold_heads[dep - 1]
                feat = np.concatenate([h[gh], h[dep]])
                scores = feat @ lw + self.params["label.b"]
                probs = softmax(scores)
                gold = gold_label_ids[dep - 1]
                loss += -w_label * float(np.log(probs[gold])) / n
                dscores = probs
                dscores[gold] -= 1.0
                dscores *= w_label / n
                grads["label.W"] += np.outer(feat, dscores)
                grads["label.b"] += dscores
                dfeat = lw @ dscores
                dh[gh] += dfeat[:hidden]
                dh[dep] += dfeat[hidden:]

        self.encode_backward(cache, dh, grads)
        return loss, grads


def prepare_parse_dataset(model: ParserModel, corpus: list[Sentence], config: TrainConfig):
    w_arc = config.weight("arc")
    w_label = config.weight("label")
    dataset = []
    for sent in corpus:
        heads = []
        label_ids = []
        for tok in sent.tokens:
            if tok.head is None:
                raise MissingGold("PARSE")
            if tok.deprel not in model.label_index:
                raise UnknownLabel(tok.deprel)
            heads.append(tok.head)
            label_ids.append(model.label_index[tok.deprel])
        if not is_arborescence(heads):
            raise ValueError("gold heads do not form an arborescence")
        dataset.append((sent.forms(), heads, label_ids, (w_arc, w_label)))
    return dataset


def train_parser(model: ParserModel, corpus: list[Sentence], config: TrainConfig):
    dataset = prepare_parse_dataset(model, corpus, config)
    return sgd_train(model, dataset, config)


def evaluate_parser(model: ParserModel, corpus: list[Sentence]) -> dict:
    head_ok = label_ok = total = 0
    for sent in corpus:
        pred = model.parse(sent.forms())
        for i, tok in enumerate(sent.tokens):
            total += 1
            if pred.heads[i] == tok.head:
                head_ok += 1
                if pred.labels[i] == tok.deprel:
                    label_ok += 1
    return {"uas": head_ok / total if total else 0.0,
            "las": label_ok / total if total else 0.0,
            "tokens": total}


# ------------------------------------------------------- data augmentation

def augment_treebank(corpus: list[Sentence], lexicon: Lexicon, seed: int = 0,
                     copies: int = 1) -> list[Sentence]:
    """Lexicon-driven token substitution preserving the morph tag; gold
    heads and labels are untouched (asserted)."""
    by_tag: dict[str, list] = {}
    for e in lexicon.entries():
        by_tag.setdefault(e.tag.spec(), []).append(e)
    rng = np.random.default_rng(seed)
    out: list[Sentence] = []
    for sent in corpus:
        for _ in range(copies):
            candidates = [i for i, tok in enumerate(sent.tokens)
                          if len(by_tag.get(tok.xpos, [])) >= 2]
            if not candidates:
                continue
            i = int(rng.choice(candidates))
            tok = sent.tokens[i]
            options = [e for e in by_tag[tok.xpos] if str(e.surface) != tok.form]
            entry = options[int(rng.integers(len(options)))]
            new_tokens = [Token_copy(t) for t in sent.tokens]
            new_tokens[i].form = str(entry.surface)
            new_tokens[i].lemma = str(entry.lemma)
            variant = Sentence(new_tokens)
            assert variant.heads() == sent.heads()
            assert variant.deprels() == sent.deprels()
            out.append(variant)
    return out


def Token_copy(tok):
    from .conllu import Token
    return Token(tok.id, tok.form, tok.lemma, tok.upos, tok.xpos, tok.feats,
                 tok.head, tok.deprel, tok.deps, tok.misc)


# ------------------------------------------------------------- persistence

def save_parser_model(model: ParserModel, path) -> None:
    from .ml import save_params
    merged = ParamStore()
    for name, arr in model.params.items():
        merged._arrays[name] = arr.copy()
    aux_meta = []
    for i, ax in enumerate(model.aux):
        for name, arr in ax.params.items():
            merged._arrays[f"auxenc{i}.{name}"] = arr.copy()
        aux_meta.append({"task": ax.task, "classes": ax.classes, "radius": ax.radius,
                         "vocab": ax.vocab.tokens(), "train_accuracy": ax.train_accuracy})
    merged.version = model.params.version
    meta = {"vocab": model.vocab.tokens(), "labels": model.labels,
            "radius": model.radius, "aux": aux_meta}
    save_params(merged, path, ParserModel.MODULE_ID, meta)


def load_parser_model(path) -> ParserModel:
    from .ml import load_params
    merged, _, meta = load_params(path, expected_module=ParserModel.MODULE_ID)
    params = ParamStore()
    aux_stores: dict[int, ParamStore] = {}
    for name, arr in merged.items():
        if name.startswith("auxenc"):
            idx, rest = name.split(".", 1)
            store = aux_stores.setdefault(int(idx[len("auxenc"):]), ParamStore())
            store._arrays[rest] = arr
        else:
            params._arrays[name] = arr
    params.version = merged.version
    aux = []
    for i, am in enumerate(meta["aux"]):
        aux.append(AuxEncoder(am["task"], aux_stores[i], Vocab.from_tokens(am["vocab"]),
                              am["classes"], am["radius"], am.get("train_accuracy", 0.0)))
    vocab = Vocab.from_tokens(meta["vocab"], reserved_count=3)
    return ParserModel(params, vocab, meta["labels"], meta["radius"], tuple(aux))
