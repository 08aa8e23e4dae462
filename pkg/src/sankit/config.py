"""Service configuration: one JSON file plus SANKIT_* env-var overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


def _bundled(name: str) -> str:
    return str(resources.files("sankit.data").joinpath(name))


@dataclass
class Config:
    data_dir: str = "./sankit-data"
    lexicon_path: str = field(default_factory=lambda: _bundled("lexicon.tsv"))
    rules_path: str = field(default_factory=lambda: _bundled("sandhi_rules.tsv"))
    chat_rules_path: str = field(default_factory=lambda: _bundled("chat_rules.json"))
    leaderboard_path: str = field(default_factory=lambda: _bundled("leaderboard.json"))
    models: dict = field(default_factory=dict)  # task -> model file path
    host: str = "127.0.0.1"
    port: int = 8787
    static_dir: str | None = None  # built web UI, served at /ui when present

    @classmethod
    def load(cls, path=None, env: dict | None = None) -> "Config":
        env = os.environ if env is None else env
        cfg = cls()
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
            for key in ("data_dir", "lexicon_path", "rules_path", "chat_rules_path",
                        "leaderboard_path", "host", "static_dir"):
                if key in doc:
                    setattr(cfg, key, doc[key])
            if "port" in doc:
                cfg.port = int(doc["port"])
            cfg.models = dict(doc.get("models", {}))
        if "SANKIT_DATA_DIR" in env:
            cfg.data_dir = env["SANKIT_DATA_DIR"]
        if "SANKIT_HOST" in env:
            cfg.host = env["SANKIT_HOST"]
        if "SANKIT_PORT" in env:
            cfg.port = int(env["SANKIT_PORT"])
        for task in ("SEGMENT", "MORPH", "PARSE", "COMPOUND"):
            key = f"SANKIT_{task}_MODEL"
            if key in env:
                cfg.models[task] = env[key]
        return cfg

    def ensure_data_dir(self) -> Path:
        p = Path(self.data_dir)
        p.mkdir(parents=True, exist_ok=True)
        return p
