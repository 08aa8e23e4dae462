"""Token-level embeddings: skip-gram-with-negative-sampling training and
four intrinsic evaluation tasks over query inventories.

The vector interchange format is the plain text one (first line ``|V| d``,
then one ``word v1 ... vd`` row per word), so externally trained
embeddings can be evaluated through the same harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (EmptyCorpus, InsufficientPairs, ParseError, TaskMismatch)
from .ml import ParamStore, TrainConfig, init_grads, log_sigmoid, sgd_train, sigmoid

TASKS = ("ANALOGY", "SYNONYM", "RELATEDNESS", "CATEGORIZATION")


class EmbeddingTable:
    def __init__(self, words: list[str], vectors: np.ndarray):
        if len(words) != vectors.shape[0]:
            raise ValueError("vocabulary and matrix size disagree")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("vectors must be finite")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        self.vectors = np.asarray(vectors, dtype=np.float64)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]

    def unit_vectors(self) -> np.ndarray:
        norms = np.linalg.norm(self.vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return self.vectors / norms

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(self.words)} {self.dim}\n")
            for w, row in zip(self.words, self.vectors):
                fh.write(w + " " + " ".join(f"{x:.17g}" for x in row) + "\n")

    @classmethod
    def load(cls, path) -> "EmbeddingTable":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            if len(header) != 2:
                raise ParseError(1, "expected '|V| d' header")
            count, dim = int(header[0]), int(header[1])
            words, rows = [], []
            for lineno, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split(" ")
                if len(parts) != dim + 1:
                    raise ParseError(lineno, f"expected {dim + 1} fields")
                words.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        if len(words) != count:
            raise ParseError(0, f"header says {count} words, file has {len(words)}")
        return cls(words, np.array(rows) if rows else np.zeros((0, dim)))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


# -------------------------------------------------------------- skip-gram

class _SkipGram:
    def __init__(self, params: ParamStore):
        self.params = params

    def clone(self) -> "_SkipGram":
        return _SkipGram(self.params.copy())

    def loss_and_grads(self, example):
        center, context, negatives = example
        p = self.params
        v = p["in.emb"][center]
        grads = init_grads(self.params)
        pos_score = float(p["out.emb"][context] @ v)
        loss = -float(log_sigmoid(np.array(pos_score)))
        dpos = -(1.0 - sigmoid(np.array([pos_score]))[0])
        grads["out.emb"][context] += dpos * v
        dv = dpos * p["out.emb"][context]
        for neg in negatives:
            neg_score = float(p["out.emb"][neg] @ v)
            loss += -float(log_sigmoid(np.array(-neg_score)))
            dneg = sigmoid(np.array([neg_score]))[0]
            grads["out.emb"][neg] += dneg * v
            dv += dneg * p["out.emb"][neg]
        grads["in.emb"][center] += dv
        return loss, grads


def build_skipgram_dataset(sentences: list[list[str]], words: list[str],
                           window: int, negatives: int, seed: int):
    index = {w: i for i, w in enumerate(words)}
    counts = np.zeros(len(words))
    for sent in sentences:
        for tok in sent:
            counts[index[tok]] += 1
    probs = counts ** 0.75
    probs /= probs.sum()
    rng = np.random.default_rng(seed + 1)
    dataset = []
    for sent in sentences:
        ids = [index[t] for t in sent]
        for i, center in enumerate(ids):
            lo = max(0, i - window)
            hi = min(len(ids), i + window + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                negs = tuple(int(x) for x in rng.choice(len(words), size=negatives, p=probs))
                dataset.append((center, ids[j], negs))
    return dataset


def train_skipgram(corpus: list[list[str]], dim: int = 16, window: int = 2,
                   negatives: int = 3, epochs: int = 3, seed: int = 0,
                   learning_rate: float = 0.05, with_context: bool = False):
    """Deterministic SGNS; negatives are drawn once per (center, context)
    pair from the unigram^0.75 distribution with the given seed.

    Returns the word (input) vectors; with_context=True additionally
    returns the context (output) vectors as a second table.
    """
    sentences = [s for s in corpus if s]
    if not sentences:
        raise EmptyCorpus("no sentences")
    if dim < 1 or window < 1 or negatives < 1:
        raise ValueError("dim, window, negatives must all be >= 1")
    words = sorted({t for s in sentences for t in s})
    rng = np.random.default_rng(seed)
    params = ParamStore()
    params.declare("in.emb", (len(words), dim), rng)
    params.declare("out.emb", (len(words), dim), rng)
    model = _SkipGram(params)
    if epochs > 0:
        dataset = build_skipgram_dataset(sentences, words, window, negatives, seed)
        cfg = TrainConfig(learning_rate=learning_rate, epochs=epochs, seed=seed)
        model, _ = sgd_train(model, dataset, cfg)
    table = EmbeddingTable(words, model.params["in.emb"].copy())
    if with_context:
        return table, EmbeddingTable(words, model.params["out.emb"].copy())
    return table


def skipgram_model_for_checks(corpus: list[list[str]], dim: int = 6, seed: int = 0):
    """Small trainable SGNS instance plus one example, for gradient checks."""
    words = sorted({t for s in corpus for t in s})
    rng = np.random.default_rng(seed)
    params = ParamStore()
    params.declare("in.emb", (len(words), dim), rng)
    params.declare("out.emb", (len(words), dim), rng)
    dataset = build_skipgram_dataset(corpus, words, window=2, negatives=2, seed=seed)
    return _SkipGram(params), dataset


# ------------------------------------------------------------ inventories

@dataclass(frozen=True)
class QueryInventory:
    task: str
    items: tuple

    @classmethod
    def load(cls, path) -> "QueryInventory":
        with open(path, encoding="utf-8") as fh:
            lines = [l.rstrip("\n") for l in fh
                     if l.strip() and not l.startswith("#")]
        if not lines:
            raise ParseError(0, "empty inventory file")
        head = lines[0].split("\t")
        if len(head) != 2 or head[0] != "task" or head[1] not in TASKS:
            raise ParseError(1, "first line must be 'task<TAB><NAME>'")
        task = head[1]
        items = []
        for lineno, line in enumerate(lines[1:], start=2):
            cols = line.split("\t")
            try:
                if task == "ANALOGY":
                    a, b, c, d = cols
                    items.append((a, b, c, d))
                elif task == "SYNONYM":
                    query, options, answer = cols
                    opts = tuple(options.split("|"))
                    idx = int(answer)
                    if not 0 <= idx < len(opts):
                        raise ValueError("answer index out of range")
                    items.append((query, opts, idx))
                elif task == "RELATEDNESS":
                    w1, w2, score = cols
                    items.append((w1, w2, float(score)))
                else:
                    word, category = cols
                    items.append((word, category))
            except ValueError as exc:
                raise ParseError(lineno, str(exc)) from exc
        if not items:
            raise ParseError(0, "inventory has no records")
        return cls(task, tuple(items))


def _require_task(inventory: QueryInventory, task: str) -> None:
    if inventory.task != task:
        raise TaskMismatch(task, inventory.task)


def eval_analogy(table: EmbeddingTable, inventory: QueryInventory) -> dict:
    """3CosAdd: argmax over vocabulary minus {a, b, c} of cos(v, b - a + c)."""
    _require_task(inventory, "ANALOGY")
    unit = table.unit_vectors()
    correct = evaluated = oov = 0
    for a, b, c, d in inventory.items:
        if any(w not in table for w in (a, b, c, d)):
            oov += 1
            continue
        target = table.vector(b) - table.vector(a) + table.vector(c)
        norm = np.linalg.norm(target)
        sims = unit @ (target / norm) if norm > 0 else np.zeros(len(table))
        for w in (a, b, c):
            sims[table.index[w]] = -np.inf
        pred = table.words[int(np.argmax(sims))]
        evaluated += 1
        if pred == d:
            correct += 1
    accuracy = correct / evaluated if evaluated else None
    return {"task": "ANALOGY", "accuracy": accuracy, "evaluated": evaluated,
            "oov": oov, "total": len(inventory.items)}


def eval_pair_scores(table: EmbeddingTable, inventory: QueryInventory) -> dict:
    """Spearman rank correlation between cosine similarity and human scores."""
    _require_task(inventory, "RELATEDNESS")
    sims, human = [], []
    oov = 0
    for w1, w2, score in inventory.items:
        if w1 not in table or w2 not in table:
            oov += 1
            continue
        sims.append(cosine(table.vector(w1), table.vector(w2)))
        human.append(score)
    if len(sims) < 2:
        raise InsufficientPairs(f"only {len(sims)} in-vocabulary pairs")
    rho = float(stats.spearmanr(sims, human)[0])
    return {"task": "RELATEDNESS", "spearman": rho, "pairs": len(sims),
            "oov": oov, "total": len(inventory.items)}


def eval_synonym(table: EmbeddingTable, inventory: QueryInventory) -> dict:
    """Multiple choice by max cosine to the query; OOV options score -inf."""
    _require_task(inventory, "SYNONYM")
    correct = answerable = unanswerable = 0
    for query, options, answer in inventory.items:
        if query not in table:
            unanswerable += 1
            continue
        q = table.vector(query)
        scores = [cosine(q, table.vector(o)) if o in table else -np.inf
                  for o in options]
        if all(s == -np.inf for s in scores):
            unanswerable += 1
            continue
        answerable += 1
        if int(np.argmax(scores)) == answer:
            correct += 1
    accuracy = correct / answerable if answerable else None
    return {"task": "SYNONYM", "accuracy": accuracy, "evaluated": answerable,
            "oov": unanswerable, "total": len(inventory.items)}


def eval_categorization(table: EmbeddingTable, inventory: QueryInventory,
                        max_iterations: int = 100) -> dict:
    """Seeded k-means purity on cosine-normalized vectors.

    Initialization: one centroid per category, at the vector of the
    category's first in-vocabulary word (inventory order).  Assignment ties
    go to the smaller cluster index; empty clusters keep their centroid.
    """
    _require_task(inventory, "CATEGORIZATION")
    in_vocab = [(w, c) for w, c in inventory.items if w in table]
    oov = len(inventory.items) - len(in_vocab)
    categories: list[str] = []
    for _, c in in_vocab:
        if c not in categories:
            categories.append(c)
    if len(categories) < 2:
        raise InsufficientPairs("need at least 2 categories with in-vocabulary words")
    unit = table.unit_vectors()
    points = np.stack([unit[table.index[w]] for w, _ in in_vocab])
    gold = np.array([categories.index(c) for _, c in in_vocab])
    centroids = np.stack([points[int(np.argmax(gold == k))] for k in range(len(categories))])
    assign = None
    for _ in range(max_iterations):
        dists = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(dists, axis=1)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for k in range(len(categories)):
            members = points[assign == k]
            if len(members):
                centroids[k] = members.mean(axis=0)
    purity = 0.0
    for k in range(len(categories)):
        members = gold[assign == k]
        if len(members):
            purity += np.bincount(members).max()
    purity /= len(points)
    return {"task": "CATEGORIZATION", "purity": float(purity),
            "clusters": len(categories), "evaluated": len(points),
            "oov": oov, "total": len(inventory.items)}


def evaluate_inventory(table: EmbeddingTable, inventory: QueryInventory) -> dict:
    dispatch = {"ANALOGY": eval_analogy, "SYNONYM": eval_synonym,
                "RELATEDNESS": eval_pair_scores, "CATEGORIZATION": eval_categorization}
    return dispatch[inventory.task](table, inventory)


def load_token_corpus(path) -> list[list[str]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            toks = line.split()
            if toks:
                out.append(toks)
    return out
