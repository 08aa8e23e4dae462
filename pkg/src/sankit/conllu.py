"""CoNLL-U treebank reading and writing.

Only the columns this toolkit uses carry content (ID, FORM, LEMMA, XPOS,
HEAD, DEPREL); the rest round-trip as underscores.  The writer emits a
canonical form: no comments, one blank line between sentences, trailing
newline, so write(read(write(x))) is byte-identical to write(x).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError


@dataclass
class Token:
    id: int
    form: str
    lemma: str = "_"
    upos: str = "_"
    xpos: str = "_"
    feats: str = "_"
    head: int | None = None
    deprel: str = "_"
    deps: str = "_"
    misc: str = "_"

    def line(self) -> str:
        head = "_" if self.head is None else str(self.head)
        return "\t".join([str(self.id), self.form, self.lemma, self.upos, self.xpos,
                          self.feats, head, self.deprel, self.deps, self.misc])


@dataclass
class Sentence:
    tokens: list[Token] = field(default_factory=list)

    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    def lemmas(self) -> list[str]:
        return [t.lemma for t in self.tokens]

    def xpos(self) -> list[str]:
        return [t.xpos for t in self.tokens]

    def heads(self) -> list[int | None]:
        return [t.head for t in self.tokens]

    def deprels(self) -> list[str]:
        return [t.deprel for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)


def parse_conllu(text: str) -> list[Sentence]:
    sentences: list[Sentence] = []
    current: list[Token] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            if current:
                sentences.append(Sentence(current))
                current = []
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(lineno, f"expected 10 columns, got {len(cols)}")
        try:
            tid = int(cols[0])
        except ValueError:
            raise ParseError(lineno, f"bad token id {cols[0]!r}") from None
        head = None if cols[6] == "_" else int(cols[6])
        current.append(Token(tid, cols[1], cols[2], cols[3], cols[4], cols[5],
                             head, cols[7], cols[8], cols[9]))
    if current:
        sentences.append(Sentence(current))
    for sent in sentences:
        for i, tok in enumerate(sent.tokens, start=1):
            if tok.id != i:
                raise ParseError(0, f"token ids not contiguous in sentence ({tok.id} at {i})")
            if tok.head is not None and not 0 <= tok.head <= len(sent.tokens):
                raise ParseError(0, f"head {tok.head} out of range")
    return sentences


def read_conllu(path) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read())


def render_conllu(sentences: list[Sentence]) -> str:
    blocks = ["\n".join(t.line() for t in sent.tokens) for sent in sentences]
    return "\n\n".join(blocks) + "\n"


def write_conllu(sentences: list[Sentence], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_conllu(sentences))
