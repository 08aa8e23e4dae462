"""Rule-based help chatbot: first matching rule wins, fixed fallback."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConstraintViolation


@dataclass(frozen=True)
class ChatRule:
    id: str
    patterns: tuple[str, ...]
    response: str
    links: tuple[str, ...] = ()
    _compiled: tuple = field(default=(), repr=False, compare=False)

    def matches(self, message: str) -> bool:
        return any(p.search(message) for p in self._compiled)


@dataclass(frozen=True)
class ChatRuleTable:
    rules: tuple[ChatRule, ...]
    fallback: str


def load_chat_rules(path=None) -> ChatRuleTable:
    if path is None:
        raw = resources.files("sankit.data").joinpath("chat_rules.json").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            raw = fh.read()
    doc = json.loads(raw)
    rules = []
    for i, spec in enumerate(doc.get("rules", [])):
        patterns = tuple(spec.get("patterns", ()))
        if not patterns:
            raise ConstraintViolation(i, f"rule {spec.get('id', i)!r} has no patterns")
        compiled = tuple(re.compile(p, re.IGNORECASE) for p in patterns)
        rules.append(ChatRule(str(spec.get("id", i)), patterns, spec["response"],
                              tuple(spec.get("links", ())), compiled))
    return ChatRuleTable(tuple(rules), doc.get("fallback", "Sorry, I cannot help with that."))


def chat_respond(table: ChatRuleTable, message: str) -> dict:
    """Stateless: first rule in file order with any matching pattern wins."""
    for rule in table.rules:
        if rule.matches(message or ""):
            return {"response": rule.response, "links": list(rule.links), "rule_id": rule.id}
    return {"response": table.fallback, "links": [], "rule_id": None}
