"""Sandhi-aware word segmentation over an exhaustive candidate lattice.

The lattice packs every way of reading the surface string as a sequence of
lexicon words glued by sandhi rules, plus single-character fallback edges
so out-of-vocabulary material is always coverable.  A junction rule's
surface pattern is accounted to the edge on its right; the left word's
sandhi-consumed suffix is "conceded" to that junction, so an edge's span
can omit up to three trailing phonemes of its word.  Two consecutive edges
compose only when the first edge's conceded suffix equals the second
edge's rule left-side pattern; paths are always checked under that rule.

Decoding is exact k-best dynamic programming over (position, conceded
suffix) states restricted to states that can still complete, so whenever k
is at least the number of full paths the ranking equals brute-force
enumeration.  A character-level scorer scores edges; an additive bonus
weighted by ``lam`` prioritizes in-lexicon edges; a separate word-level
linear ranker re-scores the beam output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAPath
from .lexicon import Lexicon
from .ml import ParamStore, TrainConfig, init_grads, sgd_train
from .sandhi import RuleTable, join_words, mechanical_join
from .text import INVENTORY, PhonemeString


@dataclass(frozen=True)
class Edge:
    start: int
    end: int
    word: PhonemeString
    rule_in: str | None
    in_lexicon: bool

    def sort_key(self):
        return (self.start, self.end, self.word, self.rule_in or "")


class Lattice:
    """Candidate word-split graph over a surface string."""

    def __init__(self, surface: PhonemeString, edges, rules: RuleTable):
        self.surface = surface
        self.n = len(surface)
        self.rules = rules
        self.edges = tuple(sorted(edges, key=Edge.sort_key))
        self._by_start: dict[int, list[Edge]] = {}
        for e in self.edges:
            self._by_start.setdefault(e.start, []).append(e)
        self._can_finish_cache: dict[tuple[int, str], bool] = {}

    def edges_from(self, pos: int) -> list[Edge]:
        return self._by_start.get(pos, [])

    def rule_of(self, edge: Edge):
        return self.rules.by_id[edge.rule_in] if edge.rule_in else None

    def concession(self, edge: Edge) -> str:
        """Suffix of the edge's word consumed by the junction on its right."""
        rule = self.rule_of(edge)
        pat = len(rule.surface) if rule else 0
        ri = len(rule.right_initial) if rule else 0
        visible = edge.end - edge.start - pat
        return str(edge.word[ri + visible:])

    def _demand(self, edge: Edge) -> str:
        rule = self.rule_of(edge)
        return str(rule.left_final) if rule else ""

    def can_finish(self, pos: int, pending: str) -> bool:
        """Can a partial path in this state still reach (n, no concession)?"""
        key = (pos, pending)
        cached = self._can_finish_cache.get(key)
        if cached is not None:
            return cached
        if pos == self.n:
            result = pending == ""
        else:
            self._can_finish_cache[key] = False  # cycle guard
            result = any(
                self._demand(e) == pending and self.can_finish(e.end, self.concession(e))
                for e in self.edges_from(pos))
        self._can_finish_cache[key] = result
        return result

    def validate_path(self, path) -> None:
        if not path:
            raise NotAPath("empty path")
        if path[0].start != 0 or path[-1].end != self.n:
            raise NotAPath("path does not span the surface")
        edge_set = set(self.edges)
        pending = ""
        pos = 0
        for e in path:
            if e not in edge_set:
                raise NotAPath(f"edge {e} not in lattice")
            if e.start != pos:
                raise NotAPath("path edges are not contiguous")
            if self._demand(e) != pending:
                raise NotAPath("junction rule does not match the conceded suffix")
            pending = self.concession(e)
            pos = e.end
        if pending != "":
            raise NotAPath("path ends with a dangling concession")

    def rejoin(self, path) -> PhonemeString:
        """Join the path's words under each edge's stated junction rule."""
        acc = PhonemeString("")
        for e in path:
            acc = mechanical_join(acc, e.word, self.rule_of(e)) if e.rule_in else PhonemeString(acc + e.word)
        return acc

    def iter_full_paths(self, limit: int | None = None):
        """DFS enumeration of all full paths, canonical edge order."""
        out: list[tuple[Edge, ...]] = []

        def walk(pos: int, pending: str, acc: list[Edge]):
            if limit is not None and len(out) >= limit:
                return
            if pos == self.n:
                if pending == "":
                    out.append(tuple(acc))
                return
            for e in self.edges_from(pos):
                if self._demand(e) == pending:
                    acc.append(e)
                    walk(e.end, self.concession(e), acc)
                    acc.pop()

        walk(0, "", [])
        return out

    def count_full_paths(self) -> int:
        memo: dict[tuple[int, str], int] = {}

        def count(pos: int, pending: str) -> int:
            if pos == self.n:
                return 1 if pending == "" else 0
            key = (pos, pending)
            if key not in memo:
                memo[key] = 0  # cycle guard; edges always advance pos
                memo[key] = sum(count(e.end, self.concession(e))
                                for e in self.edges_from(pos) if self._demand(e) == pending)
            return memo[key]

        return count(0, "")


def build_lattice(surface: PhonemeString, lexicon: Lexicon, rules: RuleTable,
                  max_word_len: int = 20) -> Lattice:
    """Exhaustive lattice: every in-lexicon reading of every span under every
    applicable junction rule, plus single-character fallback edges."""
    if not surface:
        raise ValueError("surface must be non-empty")
    if max_word_len < 1:
        raise ValueError("max_word_len must be >= 1")
    n = len(surface)
    concessions = ("",) + rules.left_finals
    found: dict[tuple[int, int, str, str | None], bool] = {}

    for i in range(n):
        # rule options at this junction: plain entry anywhere, rule entry
        # only at interior junctions
        options: list[tuple[str | None, str, str]] = [(None, "", "")]
        if i > 0:
            for rule in rules.rules:
                pat = str(rule.surface)
                if surface[i: i + len(pat)] == pat:
                    options.append((rule.id, pat, str(rule.right_initial)))
        for rule_id, pat, ri in options:
            rest = i + len(pat)
            max_visible = min(max_word_len - len(pat), n - rest)
            for visible_len in range(0, max_visible + 1):
                j = rest + visible_len
                if j == i:
                    continue  # a word must occupy at least one surface position
                visible = str(surface[rest: j])
                for sigma in concessions:
                    if sigma and j == n:
                        continue  # the last word concedes nothing
                    word = ri + visible + sigma
                    if word and word in lexicon:
                        key = (i, j, word, rule_id)
                        found[key] = True

    edges = [Edge(i, j, PhonemeString(w), r, True) for (i, j, w, r) in found]
    for i in range(n):
        key = (i, i + 1, str(surface[i]), None)
        if key not in found:
            edges.append(Edge(i, i + 1, PhonemeString(surface[i]), None, False))
    return Lattice(surface, edges, rules)


@dataclass(frozen=True)
class Segmentation:
    words: tuple[PhonemeString, ...]
    score: float
    path: tuple[Edge, ...] = field(compare=False, default=())

    @property
    def used_fallback(self) -> bool:
        return any(not e.in_lexicon for e in self.path)


def perfect_match(pred_words, gold_words) -> int:
    return int(tuple(map(str, pred_words)) == tuple(map(str, gold_words)))


class SegModel:
    """Character-level edge scorer + soft lexicon prioritization + word-level
    path ranker."""

    MODULE_ID = "segmenter"

    def __init__(self, char_params: ParamStore, ranker_params: ParamStore,
                 rule_ids: list[str], word_vocab: list[str],
                 lam: float = 1.0, beam_k: int = 8, max_word_len: int = 20):
        if beam_k < 1:
            raise ValueError("beam width must be >= 1")
        if lam < 0:
            raise ValueError("lam must be >= 0")
        self.char_params = char_params
        self.ranker_params = ranker_params
        self.rule_ids = list(rule_ids)
        self._rule_index = {rid: i + 1 for i, rid in enumerate(self.rule_ids)}  # 0 = no rule
        self.word_vocab = list(word_vocab)
        self._word_index = {w: i + 1 for i, w in enumerate(self.word_vocab)}  # 0 = oov bucket
        self.lam = lam
        self.beam_k = beam_k
        self.max_word_len = max_word_len

    @classmethod
    def build(cls, rules: RuleTable, lexicon: Lexicon, seed: int = 0,
              char_dim: int = 8, char_hidden: int = 8, word_dim: int = 8,
              lam: float = 1.0, beam_k: int = 8, max_word_len: int = 20) -> "SegModel":
        rng = np.random.default_rng(seed)
        cp = ParamStore()
        cp.declare("char.emb", (INVENTORY.size, char_dim), rng)
        cp.declare("char.W1", (char_dim, char_hidden), rng)
        cp.declare("char.b1", (char_hidden,), rng)
        cp.declare("char.w2", (char_hidden,), rng)
        cp.declare("char.b2", (1,), rng)
        cp.declare("char.start", (INVENTORY.size,), rng)
        cp.declare("char.end", (INVENTORY.size,), rng)
        cp.declare("char.len", (1,), rng)
        cp.declare("char.fallback", (1,), rng)
        cp.declare("char.rule", (len(rules.rules) + 1,), rng)
        word_vocab = lexicon.surfaces()
        rp = ParamStore()
        rp.declare("ranker.emb", (len(word_vocab) + 1, word_dim), rng)
        rp.declare("ranker.w", (word_dim,), rng)
        rp.declare("ranker.len", (1,), rng)
        rp.declare("ranker.oov", (1,), rng)
        rp.declare("ranker.b", (1,), rng)
        return cls(cp, rp, [r.id for r in rules.rules], word_vocab,
                   lam=lam, beam_k=beam_k, max_word_len=max_word_len)

    def clone_with(self, char_params=None, ranker_params=None) -> "SegModel":
        return SegModel(char_params or self.char_params.copy(),
                        ranker_params or self.ranker_params.copy(),
                        self.rule_ids, self.word_vocab,
                        lam=self.lam, beam_k=self.beam_k, max_word_len=self.max_word_len)

    # ---------------------------------------------------- char edge scorer

    def _phoneme_ids(self, word: str) -> np.ndarray:
        return np.array([INVENTORY.index[p] for p in word], dtype=np.intp)

    def edge_score(self, surface: str, edge: Edge) -> float:
        score, _ = self._edge_forward(surface, edge)
        return score

    def _edge_forward(self, surface: str, edge: Edge):
        p = self.char_params
        ids = self._phoneme_ids(edge.word)
        mean_emb = p["char.emb"][ids].mean(axis=0)
        pre = mean_emb @ p["char.W1"] + p["char.b1"]
        hid = np.tanh(pre)
        mlp = float(hid @ p["char.w2"] + p["char.b2"][0])
        s = mlp
        s += float(p["char.start"][INVENTORY.index[surface[edge.start]]])
        s += float(p["char.end"][INVENTORY.index[surface[edge.end - 1]]])
        s += float(p["char.len"][0]) * (edge.end - edge.start)
        if not edge.in_lexicon:
            s += float(p["char.fallback"][0])
        s += float(p["char.rule"][self._rule_index.get(edge.rule_in, 0)])
        cache = (ids, mean_emb, hid, edge)
        return s, cache

    def _edge_backward(self, surface: str, cache, dscore: float, grads) -> None:
        p = self.char_params
        ids, mean_emb, hid, edge = cache
        grads["char.w2"] += dscore * hid
        grads["char.b2"][0] += dscore
        dhid = dscore * p["char.w2"]
        dpre = dhid * (1.0 - hid * hid)
        grads["char.W1"] += np.outer(mean_emb, dpre)
        grads["char.b1"] += dpre
        dmean = p["char.W1"] @ dpre
        np.add.at(grads["char.emb"], ids, dmean / len(ids))
        grads["char.start"][INVENTORY.index[surface[edge.start]]] += dscore
        grads["char.end"][INVENTORY.index[surface[edge.end - 1]]] += dscore
        grads["char.len"][0] += dscore * (edge.end - edge.start)
        if not edge.in_lexicon:
            grads["char.fallback"][0] += dscore
        grads["char.rule"][self._rule_index.get(edge.rule_in, 0)] += dscore

    def score_path(self, lattice: Lattice, path) -> float:
        lattice.validate_path(path)
        total = 0.0
        for e in path:
            # one addition per edge, matching decode's accumulation exactly
            total += self.edge_score(lattice.surface, e) + (self.lam if e.in_lexicon else 0.0)
        return total

    # ------------------------------------------------------------- decode

    def decode(self, lattice: Lattice, k: int | None = None) -> list[Segmentation]:
        """Exact k-best paths by score (desc), ties by word sequence (asc)."""
        k = self.beam_k if k is None else k
        edge_scores = {e: self.edge_score(lattice.surface, e) + (self.lam if e.in_lexicon else 0.0)
                       for e in lattice.edges}
        # beam items: (score, words tuple, edges tuple), per live state
        beams: dict[tuple[int, str], list] = {(0, ""): [(0.0, (), ())]}
        for pos in range(lattice.n):
            states_here = [s for s in beams if s[0] == pos]
            for state in sorted(states_here, key=lambda s: s[1]):
                items = beams.pop(state)
                for e in lattice.edges_from(pos):
                    if lattice._demand(e) != state[1]:
                        continue
                    nxt = (e.end, lattice.concession(e))
                    if not lattice.can_finish(*nxt):
                        continue
                    bucket = beams.setdefault(nxt, [])
                    for score, words, edges in items:
                        bucket.append((score + edge_scores[e], words + (e.word,), edges + (e,)))
                    bucket.sort(key=lambda it: (-it[0], it[1]))
                    del bucket[k:]
        finished = beams.get((lattice.n, ""), [])
        finished = sorted(finished, key=lambda it: (-it[0], it[1]))[:k]
        return [Segmentation(words, score, edges) for score, words, edges in finished]

    # ------------------------------------------------------------- ranker

    def _rank_features(self, seg: Segmentation):
        ids = np.array([self._word_index.get(str(w), 0) for w in seg.words], dtype=np.intp)
        if seg.path:
            n_oov = sum(1 for e in seg.path if not e.in_lexicon)
        else:
            n_oov = sum(1 for w in seg.words if str(w) not in self._word_index)
        return ids, len(seg.words), n_oov

    def rank_score(self, seg: Segmentation) -> float:
        p = self.ranker_params
        ids, n_words, n_oov = self._rank_features(seg)
        mean_emb = p["ranker.emb"][ids].mean(axis=0)
        return float(mean_emb @ p["ranker.w"] + p["ranker.len"][0] * n_words
                     + p["ranker.oov"][0] * n_oov + p["ranker.b"][0])

    def rank_paths(self, candidates: list[Segmentation]) -> Segmentation:
        """Re-rank the beam output; ties keep decode order (stable sort)."""
        if not candidates:
            raise ValueError("candidates must be non-empty")
        ranked = sorted(candidates, key=lambda s: -self.rank_score(s))
        return ranked[0]

    def segment(self, surface: PhonemeString, lexicon: Lexicon, rules: RuleTable,
                k: int | None = None) -> tuple[Segmentation, list[Segmentation], Lattice]:
        lattice = build_lattice(surface, lexicon, rules, self.max_word_len)
        cands = self.decode(lattice, k)
        best = self.rank_paths(cands)
        return best, cands, lattice


# ------------------------------------------------------------ train facades

class _CharHinge:
    """Structured hinge on path scores with a fixed wrong path per example."""

    def __init__(self, model: SegModel, margin: float = 1.0):
        self.model = model
        self.params = model.char_params
        self.margin = margin

    def clone(self) -> "_CharHinge":
        return _CharHinge(self.model.clone_with(char_params=self.params.copy(),
                                                ranker_params=self.model.ranker_params),
                          self.margin)

    def loss_and_grads(self, example):
        lattice, gold_path, wrong_path = example
        grads = init_grads(self.params)
        if wrong_path is None:
            return 0.0, grads
        model = self.model

        def path_score_and_caches(path):
            total, caches = 0.0, []
            for e in path:
                s, cache = model._edge_forward(lattice.surface, e)
                total += s + (model.lam if e.in_lexicon else 0.0)
                caches.append(cache)
            return total, caches

        s_gold, c_gold = path_score_and_caches(gold_path)
        s_wrong, c_wrong = path_score_and_caches(wrong_path)
        loss = self.margin - s_gold + s_wrong
        if loss <= 0.0:
            return 0.0, grads
        for cache in c_gold:
            model._edge_backward(lattice.surface, cache, -1.0, grads)
        for cache in c_wrong:
            model._edge_backward(lattice.surface, cache, +1.0, grads)
        return float(loss), grads


class _RankHinge:
    """Hinge on ranker scores: gold candidate vs best wrong candidate."""

    def __init__(self, model: SegModel, margin: float = 1.0):
        self.model = model
        self.params = model.ranker_params
        self.margin = margin

    def clone(self) -> "_RankHinge":
        return _RankHinge(self.model.clone_with(char_params=self.model.char_params,
                                                ranker_params=self.params.copy()),
                          self.margin)

    def _score_with_cache(self, seg: Segmentation):
        p = self.params
        ids, n_words, n_oov = self.model._rank_features(seg)
        mean_emb = p["ranker.emb"][ids].mean(axis=0)
        s = float(mean_emb @ p["ranker.w"] + p["ranker.len"][0] * n_words
                  + p["ranker.oov"][0] * n_oov + p["ranker.b"][0])
        return s, (ids, mean_emb, n_words, n_oov)

    def _backward(self, cache, dscore: float, grads) -> None:
        p = self.params
        ids, mean_emb, n_words, n_oov = cache
        demb = np.tile(dscore * p["ranker.w"] / len(ids), (len(ids), 1))
        np.add.at(grads["ranker.emb"], ids, demb)
        grads["ranker.w"] += dscore * mean_emb
        grads["ranker.len"][0] += dscore * n_words
        grads["ranker.oov"][0] += dscore * n_oov
        grads["ranker.b"][0] += dscore

    def loss_and_grads(self, example):
        gold_seg, wrong_seg = example
        grads = init_grads(self.params)
        if wrong_seg is None:
            return 0.0, grads
        s_gold, c_gold = self._score_with_cache(gold_seg)
        s_wrong, c_wrong = self._score_with_cache(wrong_seg)
        loss = self.margin - s_gold + s_wrong
        if loss <= 0.0:
            return 0.0, grads
        self._backward(c_gold, -1.0, grads)
        self._backward(c_wrong, +1.0, grads)
        return float(loss), grads


def gold_path_in_lattice(lattice: Lattice, words, rules: RuleTable) -> tuple[Edge, ...] | None:
    """Map a gold word sequence onto lattice edges via the join block layout."""
    surface, blocks = join_words(list(map(str, words)), rules)
    if surface != lattice.surface:
        return None
    path = []
    edge_index = {(e.start, e.end, str(e.word), e.rule_in): e for e in lattice.edges}
    for b in blocks:
        e = edge_index.get((b.start, b.end, str(b.word), b.rule_in))
        if e is None:
            return None
        path.append(e)
    try:
        lattice.validate_path(tuple(path))
    except NotAPath:
        return None
    return tuple(path)


def load_seg_corpus(path, rules: RuleTable) -> list[tuple[tuple[PhonemeString, ...], PhonemeString]]:
    """One sentence per line, gold words joined by '_'; surfaces re-joined here."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            words = tuple(PhonemeString(w) for w in line.split("_"))
            surface, _ = join_words([str(w) for w in words], rules)
            out.append((words, surface))
    return out


def train_segmenter(model: SegModel, corpus, lexicon: Lexicon, rules: RuleTable,
                    config: TrainConfig, rank_config: TrainConfig | None = None,
                    rounds: int = 8):
    """Two-phase training: hinge on the char scorer (wrong paths refreshed
    between rounds), then hinge on the word-level ranker over the beam."""
    lattices = []
    for words, surface in corpus:
        lat = build_lattice(surface, lexicon, rules, model.max_word_len)
        gold = gold_path_in_lattice(lat, words, rules)
        if gold is None:
            raise ValueError(f"gold segmentation {words} is not a lattice path")
        lattices.append((lat, words, gold))

    trace: list[float] = []
    current = model
    for _ in range(rounds):
        dataset = []
        for lat, words, gold in lattices:
            cands = current.decode(lat)
            wrong = next((c.path for c in cands if c.words != words), None)
            dataset.append((lat, gold, wrong))
        trainer = _CharHinge(current)
        trained, round_trace = sgd_train(trainer, dataset, config)
        trace.extend(round_trace)
        current = current.clone_with(char_params=trained.params, ranker_params=current.ranker_params)

    rank_config = rank_config or config
    rank_dataset = []
    for lat, words, gold in lattices:
        cands = current.decode(lat)
        gold_seg = next((c for c in cands if c.words == words), None)
        if gold_seg is None:
            gold_seg = Segmentation(words, 0.0, gold)
        wrong_seg = next((c for c in cands if c.words != words), None)
        rank_dataset.append((gold_seg, wrong_seg))
    rtrainer = _RankHinge(current)
    rtrained, rtrace = sgd_train(rtrainer, rank_dataset, rank_config)
    trace.extend(rtrace)
    current = current.clone_with(char_params=current.char_params, ranker_params=rtrained.params)
    return current, trace


def evaluate_segmenter(model: SegModel, corpus, lexicon: Lexicon, rules: RuleTable) -> dict:
    per_sentence = []
    for words, surface in corpus:
        best, _, _ = model.segment(surface, lexicon, rules)
        per_sentence.append({
            "surface": str(surface),
            "gold": [str(w) for w in words],
            "predicted": [str(w) for w in best.words],
            "pm": perfect_match(best.words, words),
            "used_fallback": best.used_fallback,
        })
    corpus_pm = float(np.mean([s["pm"] for s in per_sentence])) if per_sentence else 0.0
    return {"per_sentence": per_sentence, "corpus_pm": corpus_pm,
            "sentences": len(per_sentence)}


# ------------------------------------------------------------ persistence

def save_seg_model(model: SegModel, path) -> None:
    from .ml import save_params
    merged = ParamStore()
    for store in (model.char_params, model.ranker_params):
        for name, arr in store.items():
            merged._arrays[name] = arr.copy()
    merged.version = max(model.char_params.version, model.ranker_params.version)
    meta = {"rule_ids": model.rule_ids, "word_vocab": model.word_vocab,
            "lam": model.lam, "beam_k": model.beam_k, "max_word_len": model.max_word_len}
    save_params(merged, path, SegModel.MODULE_ID, meta)


def load_seg_model(path) -> SegModel:
    from .ml import load_params
    merged, _, meta = load_params(path, expected_module=SegModel.MODULE_ID)
    cp, rp = ParamStore(), ParamStore()
    for name, arr in merged.items():
        (cp if name.startswith("char.") else rp)._arrays[name] = arr
    cp.version = rp.version = merged.version
    return SegModel(cp, rp, meta["rule_ids"], meta["word_vocab"],
                    lam=meta["lam"], beam_k=meta["beam_k"], max_word_len=meta["max_word_len"])
