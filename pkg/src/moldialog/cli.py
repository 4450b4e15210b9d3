"""Command-line entry points: dataset builds, evaluation, chat, service."""
from __future__ import annotations

import json
import random
import sys

import click

from .chat import (BackendError, ChatSession, generate_turn, session_to_jsonl,
                   understand_turn)
from .config import load_config, make_backend
from .dialogue import BackendProvider, ReplayProvider, build_dataset, pair_rng
from .graph import SmilesError
from .knowledge import (make_mapping_records, make_mlm_record, make_name_records,
                        make_property_records, make_prompt, make_spatial_records,
                        TaskRecord)
from .lexicon import load_kb
from .metrics import evaluate_generation, evaluate_understanding, read_records
from .parser import parse


@click.group()
@click.option("--config", "config_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON config file.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.pass_context
def main(ctx, config_path, seed):
    """Conversational molecular design toolkit."""
    ctx.obj = load_config(config_path, seed)


def _write_jsonl(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")


@main.command("build-dialogues")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--stats-out", type=click.Path(), default=None)
@click.option("--provider", "provider_kind",
              type=click.Choice(["retrieval", "replay"]), default="retrieval")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True),
              default=None, help="Retrieval corpus (defaults to config corpus_path).")
@click.option("--replay", "replay_path", type=click.Path(exists=True),
              default=None, help="Recorded candidates for the replay provider.")
@click.pass_obj
def build_dialogues(config, input_path, output_path, stats_out, provider_kind,
                    corpus_path, replay_path):
    """Build the multi-turn dialogue dataset from description pairs."""
    pairs = read_records(input_path)
    if provider_kind == "replay":
        if not replay_path:
            raise click.ClickException("--provider replay needs --replay")
        provider = ReplayProvider(read_records(replay_path))
    else:
        corpus = read_records(corpus_path) if corpus_path else None
        try:
            provider = BackendProvider(make_backend(config, corpus=corpus))
        except ValueError as exc:
            raise click.ClickException(str(exc))
    dialogues, stats = build_dataset(
        pairs, provider, seed=config.seed, retain_prob=config.retain_prob,
        candidates_per_turn=config.candidates_per_turn)
    _write_jsonl(output_path, (d.to_dict() for d in dialogues))
    stats_json = json.dumps(stats.to_dict(), indent=2, sort_keys=True)
    if stats_out:
        with open(stats_out, "w", encoding="utf-8") as handle:
            handle.write(stats_json + "\n")
    click.echo(stats_json)


@main.command("gen-pretrain")
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.pass_obj
def gen_pretrain(config, manifest_path, output_path):
    """Generate mixed pre-training task records from a source manifest.

    The manifest is JSON: {"text": [files], "smiles": [files],
    "property": [files], "lexicon": file?, "pairs": [files]}.  Text files
    hold one passage per line; smiles files one molecule per line; property
    files are JSONL {"smiles","property","value"}; pairs files are JSONL
    description pairs whose text gets entity-annotated prompts.
    """
    with open(manifest_path, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    records: list[TaskRecord] = []
    skipped = 0

    for f_idx, path in enumerate(manifest.get("text") or []):
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                rng = pair_rng(config.seed, f"text:{f_idx}:{line_no}")
                record = make_mlm_record(line, rng, "mlm_text")
                if record is not None:
                    records.append(record)

    for f_idx, path in enumerate(manifest.get("smiles") or []):
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                smiles = line.strip()
                if not smiles:
                    continue
                try:
                    graph = parse(smiles)
                except SmilesError:
                    skipped += 1
                    continue
                rng = pair_rng(config.seed, f"smiles:{f_idx}:{line_no}")
                record = make_mlm_record(smiles, rng, "mlm_smiles")
                if record is not None:
                    records.append(record)
                records.extend(make_spatial_records(graph, rng))

    for f_idx, path in enumerate(manifest.get("property") or []):
        for row in read_records(path):
            try:
                records.extend(make_property_records(
                    row["smiles"], [(row["property"], row["value"])]))
            except (KeyError, SmilesError, ValueError) as exc:
                raise click.ClickException(f"{path}: bad property row: {exc}")

    lexicon = None
    if manifest.get("lexicon"):
        lexicon, _report = load_kb(manifest["lexicon"])
        for entry in lexicon.entries.values():
            records.extend(make_name_records(entry.preferred_name, entry.smiles))

    for f_idx, path in enumerate(manifest.get("pairs") or []):
        if lexicon is None:
            raise click.ClickException("pairs sources need a lexicon for entity tagging")
        for row in read_records(path):
            text = row.get("description") or ""
            answer = row.get("smiles") or ""
            entities = [(m.surface, m.smiles, m.preferred_name)
                        for m in lexicon.recognize(text)]
            records.extend(make_mapping_records(text, entities))
            records.append(TaskRecord(
                task="map_text2smiles", prefix="Text to SMILES:",
                input=make_prompt(text, entities, [answer]), target=answer,
                meta={"id": row.get("id"), "prompted": True}))

    random.Random(config.seed).shuffle(records)
    _write_jsonl(output_path, (r.to_dict() for r in records))
    click.echo(json.dumps({"records": len(records), "skipped_smiles": skipped}))


@main.command("evaluate")
@click.option("--task", required=True,
              type=click.Choice(["generation", "understanding"]))
@click.option("--predictions", "predictions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--references", "references_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--report-out", type=click.Path(), default=None)
@click.pass_obj
def evaluate(config, task, predictions_path, references_path, report_out):
    """Score predictions against references and print the report JSON."""
    predictions = read_records(predictions_path)
    references = read_records(references_path)
    try:
        if task == "generation":
            report = evaluate_generation(predictions, references)
        else:
            report = evaluate_understanding(predictions, references)
    except (ValueError, SmilesError) as exc:
        raise click.ClickException(str(exc))
    text = report.to_json()
    if report_out:
        with open(report_out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    click.echo(text)


@main.command("chat")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True),
              default=None, help="Retrieval corpus (defaults to config corpus_path).")
@click.option("--log", "log_path", type=click.Path(), default=None)
@click.option("--k", type=int, default=3, show_default=True)
@click.pass_obj
def chat(config, corpus_path, log_path, k):
    """Interactive loop: plain text asks for molecules, "mol: X" describes one."""
    corpus = read_records(corpus_path) if corpus_path else None
    try:
        backend = make_backend(config, corpus=corpus)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    session = ChatSession("s0001", getattr(backend, "id", "backend"))
    try:
        while True:
            try:
                line = input()
            except EOFError:
                break
            line = line.strip()
            if not line:
                continue
            if line in ("quit", "exit"):
                break
            try:
                if line.startswith("mol:"):
                    description = understand_turn(session, backend,
                                                  line[len("mol:"):].strip())
                    click.echo(description)
                else:
                    result = generate_turn(session, backend, line, k=k)
                    for i, cand in enumerate(result.candidates, start=1):
                        parts = [f"{i}. {cand.smiles}",
                                 f"valid={'yes' if cand.valid else 'no'}"]
                        if cand.sim_to_prev is not None:
                            parts.append(f"sim={cand.sim_to_prev:.3f}")
                        if cand.padded:
                            parts.append("padded")
                        click.echo(" ".join(parts))
            except SmilesError as exc:
                click.echo(f"error: {exc.kind.value} at {exc.position}")
            except (BackendError, ValueError) as exc:
                click.echo(f"error: {exc}")
    finally:
        if log_path:
            with open(log_path, "w", encoding="utf-8") as handle:
                handle.write(session_to_jsonl(session))


@main.command("serve")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.pass_obj
def serve(config, host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(config)
    uvicorn.run(app, host=host or config.host, port=port or config.port)


if __name__ == "__main__":
    main()
