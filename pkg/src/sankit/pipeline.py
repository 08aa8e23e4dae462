"""End-to-end analysis pipeline and the session-facing correction logic.

The pipeline order is segmentation -> tagging -> parsing -> compound
features.  Compounds are marked in the input with hyphens between
constituents (e.g. ``pIta-ambaram``); a hyphenated chunk bypasses lattice
segmentation, since the user already supplied the split, and its sandhi
join becomes the token surface.
"""

from __future__ import annotations

from .compound import CompoundInstance, CompoundModel
from .errors import (InvalidCorrection, InvalidRequest, ModelMissing)
from .lexicon import Lexicon, MorphTag
from .parser import ParserModel, is_arborescence
from .sandhi import RuleTable, join_words
from .segmenter import Edge, Lattice, SegModel, gold_path_in_lattice
from .tagger import TagModel, candidate_tags
from .text import PhonemeString, Script, to_phonemes
from . import conllu

TASKS = ("SEGMENT", "MORPH", "PARSE", "COMPOUND")
EXPORT_SCHEMA_VERSION = 1


def _edge_to_json(e: Edge) -> dict:
    return {"start": e.start, "end": e.end, "word": str(e.word),
            "rule": e.rule_in, "in_lexicon": e.in_lexicon}


def _edge_from_json(d: dict) -> Edge:
    return Edge(d["start"], d["end"], PhonemeString(d["word"]), d["rule"], d["in_lexicon"])


class Toolkit:
    def __init__(self, lexicon: Lexicon, rules: RuleTable,
                 seg_model: SegModel | None = None,
                 tag_model: TagModel | None = None,
                 parser_model: ParserModel | None = None,
                 compound_model: CompoundModel | None = None):
        self.lexicon = lexicon
        self.rules = rules
        self.seg_model = seg_model
        self.tag_model = tag_model
        self.parser_model = parser_model
        self.compound_model = compound_model

    def loaded_models(self) -> dict[str, bool]:
        return {"SEGMENT": self.seg_model is not None,
                "MORPH": self.tag_model is not None,
                "PARSE": self.parser_model is not None,
                "COMPOUND": self.compound_model is not None}

    def _require(self, task: str):
        model = {"SEGMENT": self.seg_model, "MORPH": self.tag_model,
                 "PARSE": self.parser_model, "COMPOUND": self.compound_model}[task]
        if model is None:
            raise ModelMissing(task)
        return model

    # ------------------------------------------------------------ analyze

    def analyze(self, text: str, script: Script, tasks) -> dict:
        task_set = {str(t).upper() for t in tasks}
        if not task_set:
            raise InvalidRequest("empty task set")
        unknown = task_set - set(TASKS)
        if unknown:
            raise InvalidRequest(f"unknown tasks: {sorted(unknown)}")
        for t in TASKS:
            if t in task_set:
                self._require(t)
        chunks = text.split()
        if not chunks:
            raise InvalidRequest("empty input text")

        tokens: list[str] = []
        compound_spans: list[tuple[int, tuple[str, ...]]] = []
        chunk_reports: list[dict] = []
        used_fallback = False
        for chunk in chunks:
            if "-" in chunk:
                constituents = tuple(str(to_phonemes(p, script)) for p in chunk.split("-") if p)
                surface, _ = join_words(list(constituents), self.rules)
                compound_spans.append((len(tokens), constituents))
                tokens.append(str(surface))
                chunk_reports.append({"surface": str(surface), "given_split": list(constituents),
                                      "words": [str(surface)], "lattice": None,
                                      "predicted_path": None, "candidates": []})
                continue
            surface = to_phonemes(chunk, script)
            if "SEGMENT" in task_set:
                best, cands, lattice = self.seg_model.segment(surface, self.lexicon, self.rules)
                tokens.extend(str(w) for w in best.words)
                used_fallback = used_fallback or best.used_fallback
                edges = list(lattice.edges)
                edge_idx = {e: i for i, e in enumerate(edges)}
                chunk_reports.append({
                    "surface": str(surface),
                    "words": [str(w) for w in best.words],
                    "lattice": {"surface": str(surface),
                                "edges": [_edge_to_json(e) for e in edges]},
                    "predicted_path": [edge_idx[e] for e in best.path],
                    "candidates": [{"words": [str(w) for w in c.words],
                                    "score": float(c.score)} for c in cands],
                })
            else:
                tokens.append(str(surface))
                chunk_reports.append({"surface": str(surface), "words": [str(surface)],
                                      "lattice": None, "predicted_path": None,
                                      "candidates": []})

        predictions: dict = {
            "tasks": sorted(task_set),
            "tokens": tokens,
            "chunks": chunk_reports,
            "used_fallback": used_fallback,
        }

        analyses = None
        if "MORPH" in task_set:
            analyses = self.tag_model.tag_sentence(tokens, self.lexicon)
            predictions["morph"] = {"tokens": [{
                "token": str(a.token),
                "tag": a.tag.spec(),
                "lemma": str(a.lemma),
                "candidates": [t.spec() for t in a.candidates],
                "in_candidates": a.in_candidates,
            } for a in analyses]}

        tree = None
        if "PARSE" in task_set:
            tree = self.parser_model.parse(tokens)
            predictions["parse"] = {"heads": list(tree.heads),
                                    "labels": list(tree.labels),
                                    "label_inventory": list(self.parser_model.labels)}

        if "COMPOUND" in task_set:
            out = []
            for span, constituents in compound_spans:
                morph_tag = predictions["morph"]["tokens"][span]["tag"] if analyses else None
                dep_label = predictions["parse"]["labels"][span] if tree else None
                instance = CompoundInstance(tuple(PhonemeString(c) for c in constituents),
                                            tuple(tokens), span)
                cls, probs = self.compound_model.classify(instance, self.rules,
                                                          morph_tag, dep_label)
                out.append({"span": span, "constituents": list(constituents),
                            "class": cls,
                            "distribution": {c: float(p) for c, p in
                                             zip(self.compound_model.classes, probs)}})
            predictions["compound"] = {"instances": out,
                                       "class_inventory": list(self.compound_model.classes)}
        return predictions

    # -------------------------------------------------------- corrections

    def validate_correction(self, predictions: dict, prior_corrections: list,
                            task: str, payload: dict) -> dict:
        task = str(task).upper()
        if task not in TASKS:
            raise InvalidCorrection(f"unknown task {task!r}")
        if task == "SEGMENT":
            return self._validate_segment(predictions, payload)
        if task == "MORPH":
            return self._validate_morph(predictions, payload)
        if task == "PARSE":
            return self._validate_parse(predictions, prior_corrections, payload)
        return self._validate_compound(predictions, payload)

    def _validate_segment(self, predictions: dict, payload: dict) -> dict:
        try:
            chunk_idx = int(payload["chunk"])
            words = [str(w) for w in payload["words"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCorrection(f"malformed SEGMENT payload: {exc}") from exc
        chunks = predictions.get("chunks", [])
        if not 0 <= chunk_idx < len(chunks):
            raise InvalidCorrection(f"chunk {chunk_idx} out of range")
        chunk = chunks[chunk_idx]
        if chunk.get("lattice") is None:
            raise InvalidCorrection("chunk has no lattice (compound or unsegmented input)")
        lattice = Lattice(PhonemeString(chunk["lattice"]["surface"]),
                          [_edge_from_json(d) for d in chunk["lattice"]["edges"]],
                          self.rules)
        path = gold_path_in_lattice(lattice, words, self.rules)
        if path is None:
            raise InvalidCorrection("words are not a full lattice path for this chunk")
        return {"chunk": chunk_idx, "words": words}

    def _validate_morph(self, predictions: dict, payload: dict) -> dict:
        try:
            index = int(payload["index"])
            tag_spec = str(payload["tag"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCorrection(f"malformed MORPH payload: {exc}") from exc
        tokens = predictions.get("tokens", [])
        if not 0 <= index < len(tokens):
            raise InvalidCorrection(f"token index {index} out of range")
        try:
            tag = MorphTag.parse(tag_spec)
        except ValueError as exc:
            raise InvalidCorrection(f"bad tag spec: {exc}") from exc
        cands = candidate_tags(tokens[index], self.lexicon)
        normalized = {"index": index, "tag": tag.spec(),
                      "in_candidates": tag in cands}
        if "lemma" in payload and payload["lemma"] is not None:
            normalized["lemma"] = str(payload["lemma"])
        return normalized

    def _effective_heads(self, predictions: dict, prior_corrections: list) -> list[int]:
        heads = list(predictions["parse"]["heads"])
        for corr in prior_corrections:
            if corr["task"] == "PARSE":
                heads[corr["payload"]["index"] - 1] = corr["payload"]["head"]
        return heads

    def _validate_parse(self, predictions: dict, prior_corrections: list,
                        payload: dict) -> dict:
        if "parse" not in predictions:
            raise InvalidCorrection("session has no parse prediction")
        try:
            index = int(payload["index"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCorrection(f"malformed PARSE payload: {exc}") from exc
        n = len(predictions["parse"]["heads"])
        if not 1 <= index <= n:
            raise InvalidCorrection(f"dependent index {index} out of range 1..{n}")
        normalized: dict = {"index": index}
        heads = self._effective_heads(predictions, prior_corrections)
        if "head" in payload and payload["head"] is not None:
            head = int(payload["head"])
            if not 0 <= head <= n:
                raise InvalidCorrection(f"head {head} out of range 0..{n}")
            if head == index:
                raise InvalidCorrection("cycle")
            heads[index - 1] = head
            if not is_arborescence(heads):
                raise InvalidCorrection("cycle")
            normalized["head"] = head
        if "label" in payload and payload["label"] is not None:
            label = str(payload["label"])
            inventory = predictions["parse"].get("label_inventory", [])
            if inventory and label not in inventory:
                raise InvalidCorrection(f"label {label!r} not in inventory")
            normalized["label"] = label
        if "head" not in normalized and "label" not in normalized:
            raise InvalidCorrection("PARSE correction must change a head or a label")
        return normalized

    def _validate_compound(self, predictions: dict, payload: dict) -> dict:
        if "compound" not in predictions:
            raise InvalidCorrection("session has no compound prediction")
        try:
            span = int(payload["span"])
            cls = str(payload["class"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCorrection(f"malformed COMPOUND payload: {exc}") from exc
        spans = {inst["span"] for inst in predictions["compound"]["instances"]}
        if span not in spans:
            raise InvalidCorrection(f"no compound at span {span}")
        inventory = predictions["compound"]["class_inventory"]
        if cls not in inventory:
            raise InvalidCorrection(f"class {cls!r} not in inventory {inventory}")
        return {"span": span, "class": cls}

    # ------------------------------------------------------------- export

    def effective_view(self, session) -> dict:
        """Predictions with corrections applied on top, in arrival order."""
        predictions = session.predictions
        tokens = list(predictions["tokens"])
        morph = [dict(t) for t in predictions.get("morph", {}).get("tokens", [])]
        heads = list(predictions.get("parse", {}).get("heads", []))
        labels = list(predictions.get("parse", {}).get("labels", []))
        compounds = {inst["span"]: dict(inst)
                     for inst in predictions.get("compound", {}).get("instances", [])}
        for corr in session.corrections:
            task, payload = corr["task"], corr["payload"]
            if task == "SEGMENT":
                chunk_words = []
                for i, chunk in enumerate(predictions["chunks"]):
                    if i == payload["chunk"]:
                        chunk_words.extend(payload["words"])
                    else:
                        chunk_words.extend(chunk["words"])
                tokens = chunk_words
            elif task == "MORPH":
                i = payload["index"]
                if i < len(morph):
                    morph[i]["tag"] = payload["tag"]
                    morph[i]["in_candidates"] = payload["in_candidates"]
                    if "lemma" in payload:
                        morph[i]["lemma"] = payload["lemma"]
                elif i < len(tokens):
                    morph.extend({"token": tokens[j], "tag": "_", "lemma": "_",
                                  "candidates": [], "in_candidates": False}
                                 for j in range(len(morph), len(tokens)))
                    morph[i]["tag"] = payload["tag"]
                    morph[i]["in_candidates"] = payload["in_candidates"]
            elif task == "PARSE":
                i = payload["index"] - 1
                if i < len(heads):
                    if "head" in payload:
                        heads[i] = payload["head"]
                    if "label" in payload:
                        labels[i] = payload["label"]
            elif task == "COMPOUND":
                if payload["span"] in compounds:
                    compounds[payload["span"]]["class"] = payload["class"]
        return {"tokens": tokens, "morph": morph, "heads": heads,
                "labels": labels,
                "compounds": [compounds[k] for k in sorted(compounds)]}

    def export_conllu(self, session) -> str:
        view = self.effective_view(session)
        tokens = view["tokens"]
        morph = view["morph"]
        heads = view["heads"]
        labels = view["labels"]
        rows = []
        for i, form in enumerate(tokens):
            lemma = morph[i]["lemma"] if i < len(morph) else "_"
            xpos = morph[i]["tag"] if i < len(morph) else "_"
            head = heads[i] if i < len(heads) else None
            deprel = labels[i] if i < len(labels) else "_"
            rows.append(conllu.Token(i + 1, form, lemma, "_", xpos, "_",
                                     head, deprel, "_", "_"))
        return conllu.render_conllu([conllu.Sentence(rows)])

    def export_json(self, session) -> dict:
        return {"version": EXPORT_SCHEMA_VERSION,
                "session": session.to_dict(),
                "effective": self.effective_view(session)}
