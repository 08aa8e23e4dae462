"""Command-line entry points: serve, train <task>, eval <task>, export-session."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import Config
from .lexicon import Lexicon
from .ml import TrainConfig
from .sandhi import RuleTable


def _load_config(path: str | None) -> Config:
    return Config.load(path)


def _corpus_paths(cfg: Config, override: str | None, default_name: str) -> Path:
    if override:
        return Path(override)
    from importlib import resources
    return Path(str(resources.files("sankit.data").joinpath(f"demo/{default_name}")))


@click.group()
def main():
    """Sanskrit analysis toolkit: segmentation, tagging, parsing, compounds."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(config_path):
    """Run the annotation service."""
    import uvicorn

    from .server import app_from_config

    cfg = _load_config(config_path)
    app = app_from_config(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")


@main.command()
@click.argument("task", type=click.Choice(["segmenter", "tagger", "parser", "compound", "embeddings"]))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--corpus", type=click.Path(exists=True), default=None,
              help="Training corpus; defaults to the bundled demo corpus.")
@click.option("--out", type=click.Path(), required=True, help="Output model/vector file.")
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--learning-rate", type=float, default=None)
@click.option("--with-aux/--no-aux", "with_aux", default=False,
              help="parser only: pretrain LT/MT/CT encoders and gate them in.")
def train(task, config_path, corpus, out, epochs, seed, learning_rate, with_aux):
    """Train a model on a corpus and write it to --out."""
    _train_impl(task, config_path, corpus, out, epochs, seed, learning_rate, with_aux)


def _train_impl(task, config_path, corpus, out, epochs, seed, learning_rate, with_aux):
    cfg = _load_config(config_path)
    lexicon = Lexicon.load(cfg.lexicon_path)
    rules = RuleTable.load(cfg.rules_path)

    if task == "segmenter":
        from .segmenter import SegModel, load_seg_corpus, save_seg_model, train_segmenter
        data = load_seg_corpus(_corpus_paths(cfg, corpus, "segmentation.txt"), rules)
        model = SegModel.build(rules, lexicon, seed=seed)
        tc = TrainConfig(learning_rate=learning_rate or 0.05, epochs=epochs or 2, seed=seed)
        trained, trace = train_segmenter(model, data, lexicon, rules, tc)
        save_seg_model(trained, out)
    elif task == "tagger":
        from .conllu import read_conllu
        from .tagger import TagModel, save_tag_model, train_tagger
        data = read_conllu(_corpus_paths(cfg, corpus, "treebank.conllu"))
        model = TagModel.build(data, lexicon, seed=seed)
        tc = TrainConfig(learning_rate=learning_rate or 0.2, epochs=epochs or 60,
                         seed=seed, loss_weights={"tag": 1.0, "lemma": 0.5})
        trained, trace = train_tagger(model, data, tc)
        save_tag_model(trained, out)
    elif task == "parser":
        from .conllu import read_conllu
        from .parser import (ParserModel, pretrain_aux, save_parser_model, train_parser)
        data = read_conllu(_corpus_paths(cfg, corpus, "treebank.conllu"))
        labels = sorted({t.deprel for s in data for t in s.tokens})
        model = ParserModel.build(data, labels, seed=seed)
        if with_aux:
            aux_cfg = TrainConfig(learning_rate=0.2, epochs=40, seed=seed)
            aux = [pretrain_aux(t, data, aux_cfg, seed=seed + i)
                   for i, t in enumerate(("LT", "MT", "CT"))]
            model = model.attach_aux(aux, seed=seed)
        tc = TrainConfig(learning_rate=learning_rate or 0.25, epochs=epochs or 120,
                         seed=seed, loss_weights={"arc": 1.0, "label": 1.0})
        trained, trace = train_parser(model, data, tc)
        save_parser_model(trained, out)
    elif task == "compound":
        from .compound import (CompoundModel, load_compound_corpus,
                               save_compound_model, train_compound)
        data = load_compound_corpus(_corpus_paths(cfg, corpus, "compounds.tsv"), rules)
        tokens = {t for inst, _ in data for t in inst.sentence}
        tokens |= {str(c) for inst, _ in data for c in inst.constituents}
        tag_inventory = sorted({e.tag.spec() for e in lexicon.entries()})
        labels = ["kartf", "karman", "karaRa", "sampradAna", "apAdAna",
                  "aDikaraRa", "sambanDa", "viSezaRa"]
        model = CompoundModel.build(tokens, tag_inventory, labels, seed=seed)
        tc = TrainConfig(learning_rate=learning_rate or 0.25, epochs=epochs or 180,
                         seed=seed, loss_weights={"class": 1.0, "morph": 0.2, "dep": 0.2})
        trained, trace = train_compound(model, data, tc)
        save_compound_model(trained, out)
    else:  # embeddings
        from .embeddings import load_token_corpus, train_skipgram
        data = load_token_corpus(_corpus_paths(cfg, corpus, "embedding_corpus.txt"))
        table = train_skipgram(data, dim=16, window=2, negatives=3,
                               epochs=epochs or 3, seed=seed,
                               learning_rate=learning_rate or 0.05)
        table.save(out)
        trace = []
    click.echo(json.dumps({"task": task, "out": str(out),
                           "final_loss": trace[-1] if trace else None}))


@main.command("eval")
@click.argument("task", type=click.Choice(["segmenter", "tagger", "parser", "compound", "embeddings"]))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True,
              help="Model file (or vector file for embeddings).")
@click.option("--corpus", type=click.Path(exists=True), default=None,
              help="Evaluation corpus; defaults to the bundled demo corpus.")
@click.option("--inventory", type=click.Path(exists=True), default=None,
              help="embeddings only: query inventory file.")
@click.option("--out", type=click.Path(), default=None, help="Write the JSON report here.")
def eval_cmd(task, config_path, model_path, corpus, inventory, out):
    """Evaluate a trained model and emit a JSON report."""
    cfg = _load_config(config_path)
    lexicon = Lexicon.load(cfg.lexicon_path)
    rules = RuleTable.load(cfg.rules_path)

    if task == "segmenter":
        from .segmenter import evaluate_segmenter, load_seg_corpus, load_seg_model
        model = load_seg_model(model_path)
        data = load_seg_corpus(_corpus_paths(cfg, corpus, "segmentation.txt"), rules)
        report = evaluate_segmenter(model, data, lexicon, rules)
    elif task == "tagger":
        from .conllu import read_conllu
        from .tagger import evaluate_tagger, load_tag_model
        model = load_tag_model(model_path)
        data = read_conllu(_corpus_paths(cfg, corpus, "treebank.conllu"))
        report = evaluate_tagger(model, data, lexicon)
    elif task == "parser":
        from .conllu import read_conllu
        from .parser import evaluate_parser, load_parser_model
        model = load_parser_model(model_path)
        data = read_conllu(_corpus_paths(cfg, corpus, "treebank.conllu"))
        report = evaluate_parser(model, data)
    elif task == "compound":
        from .compound import evaluate_compound, load_compound_corpus, load_compound_model
        model = load_compound_model(model_path)
        data = load_compound_corpus(_corpus_paths(cfg, corpus, "compounds.tsv"), rules)
        report = evaluate_compound(model, data, rules)
    else:
        from .embeddings import EmbeddingTable, QueryInventory, evaluate_inventory
        if inventory is None:
            raise click.UsageError("embeddings evaluation needs --inventory")
        table = EmbeddingTable.load(model_path)
        report = evaluate_inventory(table, QueryInventory.load(inventory))
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    click.echo(text)


@main.command("export-session")
@click.argument("session_id")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--format", "fmt", type=click.Choice(["conllu", "json"]), default="json")
def export_session(session_id, config_path, fmt):
    """Print a session export (corrections take precedence)."""
    from .server import build_toolkit
    from .sessions import SessionStore

    cfg = _load_config(config_path)
    toolkit = build_toolkit(cfg)
    store = SessionStore(cfg.ensure_data_dir())
    session = store.get(session_id)
    if fmt == "conllu":
        sys.stdout.write(toolkit.export_conllu(session))
    else:
        click.echo(json.dumps(toolkit.export_json(session), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
