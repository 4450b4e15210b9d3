"""Pre-training task record generators.

Each generator emits TaskRecord rows for one task family: span-corruption
fill-in records over text or SMILES tokens, experimental property
prediction, spatial structure questions about marked atoms, and the
name/text/SMILES mapping tasks.  Prefix strings are part of the data
contract and must not drift; see PREFIXES.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .canon import canonical
from .graph import BondOrder, MolecularGraph, SmilesError
from .parser import parse

PROPERTY_TYPES = (
    "Solubility",
    "Color/Form",
    "Boiling Point",
    "Flash Point",
    "Density",
    "Vapor Density",
    "Decomposition",
    "Corrosivity",
    "Melting Point",
    "LogP",
    "Vapor Pressure",
    "Stability/Shelf Life",
    "Odor",
    "Taste",
    "pH",
)

MLM_PREFIX = "Fill:"
SPATIAL_PREFIX = "Spatial:"
NAME2SMILES_PREFIX = "Name to SMILES:"
SMILES2NAME_PREFIX = "SMILES to name:"
TEXT2SMILES_PREFIX = "Text to SMILES:"

PREFIXES = {
    "mlm_text": MLM_PREFIX,
    "mlm_smiles": MLM_PREFIX,
    "spatial": SPATIAL_PREFIX,
    "map_name2smiles": NAME2SMILES_PREFIX,
    "map_smiles2name": SMILES2NAME_PREFIX,
    "map_text2smiles": TEXT2SMILES_PREFIX,
}

DEFAULT_CORRUPT_RATIO = 0.15
DEFAULT_MEAN_SPAN = 3.0
DEFAULT_MARK_RATIO = 0.15

_BOND_WORD = {
    BondOrder.SINGLE: "single",
    BondOrder.DOUBLE: "double",
    BondOrder.TRIPLE: "triple",
    BondOrder.AROMATIC: "aromatic",
}


@dataclass
class TaskRecord:
    task: str
    prefix: str
    input: str
    target: str
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"task": self.task, "prefix": self.prefix, "input": self.input,
                "target": self.target, "meta": self.meta}

    @classmethod
    def from_dict(cls, data: dict) -> "TaskRecord":
        return cls(task=data["task"], prefix=data["prefix"], input=data["input"],
                   target=data["target"], meta=data.get("meta") or {})


def record_prefix(task: str, property_name: str | None = None) -> str:
    if task == "property":
        if property_name not in PROPERTY_TYPES:
            raise ValueError(f"unknown property type: {property_name!r}")
        return f"Predict {property_name}:"
    try:
        return PREFIXES[task]
    except KeyError:
        raise ValueError(f"unknown task: {task!r}") from None


def sentinel(i: int) -> str:
    return f"<{i}>"


def tokenize_smiles(smiles: str) -> list[str]:
    """Character tokens, except Cl/Br and whole bracket atoms stay together."""
    tokens: list[str] = []
    i = 0
    while i < len(smiles):
        ch = smiles[i]
        if ch == "[":
            end = smiles.find("]", i)
            if end < 0:
                tokens.append(smiles[i:])
                break
            tokens.append(smiles[i : end + 1])
            i = end + 1
        elif smiles[i : i + 2] in ("Cl", "Br"):
            tokens.append(smiles[i : i + 2])
            i += 2
        else:
            tokens.append(ch)
            i += 1
    return tokens


def span_corrupt(
    tokens: list[str],
    rng: random.Random,
    corrupt_ratio: float = DEFAULT_CORRUPT_RATIO,
    mean_span: float = DEFAULT_MEAN_SPAN,
) -> tuple[list[str], list[str]]:
    """Mask non-overlapping spans with sentinels; target lists the spans.

    Roughly corrupt_ratio of the tokens end up masked, in spans whose
    lengths are geometric with the given mean.  Substituting each target
    span back for its sentinel reconstructs the original token list.
    """
    if len(tokens) < 2:
        raise ValueError("need at least 2 tokens")
    if not 0 <= corrupt_ratio < 1:
        raise ValueError("corrupt_ratio must be in [0, 1)")
    total = len(tokens)
    budget = round(corrupt_ratio * total)
    if budget == 0:
        return list(tokens), []

    lengths: list[int] = []
    remaining = budget
    p = 1.0 / max(mean_span, 1.0)
    while remaining > 0:
        length = 1
        while length < remaining and rng.random() > p:
            length += 1
        lengths.append(length)
        remaining -= length

    # Place spans among the free tokens: choose which of the
    # (free + n_spans) slots are spans, scanning left to right.
    free = total - budget
    n_spans = len(lengths)
    span_slots = set(rng.sample(range(free + n_spans), n_spans))
    input_tokens: list[str] = []
    target_tokens: list[str] = []
    pos = 0
    span_idx = 0
    for slot in range(free + n_spans):
        if slot in span_slots:
            mark = sentinel(span_idx)
            length = lengths[span_idx]
            input_tokens.append(mark)
            target_tokens.append(mark)
            target_tokens.extend(tokens[pos : pos + length])
            pos += length
            span_idx += 1
        else:
            input_tokens.append(tokens[pos])
            pos += 1
    return input_tokens, target_tokens


def make_mlm_record(text: str, rng: random.Random, task: str,
                    corrupt_ratio: float = DEFAULT_CORRUPT_RATIO,
                    mean_span: float = DEFAULT_MEAN_SPAN) -> TaskRecord | None:
    """One fill-in record; None when the source is too short to corrupt."""
    if task == "mlm_smiles":
        tokens = tokenize_smiles(text)
        joiner = ""
    elif task == "mlm_text":
        tokens = text.split()
        joiner = " "
    else:
        raise ValueError(f"not an mlm task: {task}")
    if len(tokens) < 2:
        return None
    corrupted, target = span_corrupt(tokens, rng, corrupt_ratio, mean_span)
    return TaskRecord(task=task, prefix=MLM_PREFIX,
                      input=joiner.join(corrupted), target=joiner.join(target),
                      meta={"source_len": len(tokens)})


def make_property_records(smiles: str, items: list[tuple[str, str]]) -> list[TaskRecord]:
    """One record per (property_name, value_text) item.

    Raises SmilesError for an invalid molecule and ValueError for a
    property name outside the fixed 15-type list.
    """
    parse(smiles)
    records = []
    for property_name, value_text in items:
        records.append(TaskRecord(
            task="property",
            prefix=record_prefix("property", property_name),
            input=smiles,
            target=value_text,
            meta={"property": property_name},
        ))
    return records


def spatial_target(g: MolecularGraph, atom_index: int) -> str:
    """Neighbor/aromaticity/ring summary for one atom, fixed format."""
    atom = g.atoms[atom_index]
    neighbors = sorted(
        f"{g.atoms[bond.other(atom_index)].element}({_BOND_WORD[bond.order]})"
        for bond in g.bonds_of(atom_index)
    )
    neighbor_text = ", ".join(neighbors) if neighbors else "none"
    aromatic_text = "yes" if atom.aromatic else "no"
    sizes = sorted(len(ring) for ring in g.rings_of(atom_index))
    ring_text = "yes(" + ",".join(str(s) for s in sizes) + ")" if sizes else "no"
    return f"neighbors: {neighbor_text}; aromatic: {aromatic_text}; ring: {ring_text}"


def make_spatial_records(g: MolecularGraph, rng: random.Random,
                         mark_ratio: float = DEFAULT_MARK_RATIO) -> list[TaskRecord]:
    """Mark ceil(mark_ratio * atom count) atoms; one record per marked atom."""
    smiles = g.source
    if smiles is None:
        raise ValueError("graph has no source SMILES")
    n_marks = math.ceil(mark_ratio * len(g.atoms))
    marked = sorted(rng.sample(range(len(g.atoms)), n_marks))
    records = []
    for index in marked:
        records.append(TaskRecord(
            task="spatial",
            prefix=SPATIAL_PREFIX,
            input=f"{smiles} | atom {index}",
            target=spatial_target(g, index),
            meta={"atom": index},
        ))
    return records


def make_mapping_records(text: str, entities: list[tuple[str, str, str]]) -> list[TaskRecord]:
    """Text-to-SMILES plus per-entity SMILES-to-name records.

    Entities are (mention, smiles, name) in left-to-right mention order;
    repeated mentions repeat their SMILES in the target.  No entities, no
    records.
    """
    if not entities:
        return []
    records = [TaskRecord(
        task="map_text2smiles",
        prefix=TEXT2SMILES_PREFIX,
        input=text,
        target=" ".join(smiles for _, smiles, _ in entities),
        meta={"n_entities": len(entities)},
    )]
    for mention, smiles, name in entities:
        records.append(TaskRecord(
            task="map_smiles2name",
            prefix=SMILES2NAME_PREFIX,
            input=smiles,
            target=name,
            meta={"mention": mention},
        ))
    return records


def make_name_records(name: str, smiles: str) -> list[TaskRecord]:
    """Both directions of the name/SMILES correspondence."""
    return [
        TaskRecord(task="map_name2smiles", prefix=NAME2SMILES_PREFIX,
                   input=name, target=smiles, meta={}),
        TaskRecord(task="map_smiles2name", prefix=SMILES2NAME_PREFIX,
                   input=smiles, target=name, meta={}),
    ]


def make_prompt(text: str, entities: list[tuple[str, str, str]],
                answer_smiles: list[str]) -> str:
    """Append an entity list to the text, leaking no answer molecule.

    Any entity whose canonical SMILES equals a canonical answer SMILES is
    removed; with no survivors the text is returned unchanged.
    """
    answers = set()
    for smiles in answer_smiles:
        try:
            answers.add(canonical(parse(smiles)))
        except SmilesError:
            continue
    kept = []
    for mention, smiles, _name in entities:
        try:
            if canonical(parse(smiles)) in answers:
                continue
        except SmilesError:
            pass
        kept.append(f"{mention}={smiles}")
    if not kept:
        return text
    return f"{text}\nEntities: " + "; ".join(kept)


class AugmentationOverlapError(ValueError):
    def __init__(self, overlaps: list[str]):
        super().__init__(
            "augmentation pool overlaps evaluation references: "
            + ", ".join(overlaps)
        )
        self.overlaps = overlaps


def dual_augment(molecule_pool: list[str], understanding_fn,
                 eval_references: list[str] | None = None) -> tuple[list[dict], int]:
    """Synthesize description pairs for pool molecules via a backend.

    Descriptions come from understanding_fn(smiles), never from held-out
    reference text; the build aborts if any pool molecule canonically
    matches an evaluation reference.  Returns (pairs, skipped count).
    """
    if eval_references:
        ref_canon = {canonical(parse(r)) for r in eval_references}
        overlaps = []
        for smiles in molecule_pool:
            try:
                if canonical(parse(smiles)) in ref_canon:
                    overlaps.append(smiles)
            except SmilesError:
                continue
        if overlaps:
            raise AugmentationOverlapError(overlaps)
    pairs = []
    skipped = 0
    for i, smiles in enumerate(molecule_pool):
        try:
            description = understanding_fn(smiles)
        except Exception:
            skipped += 1
            continue
        pairs.append({
            "id": f"aug{i:05d}",
            "smiles": smiles,
            "description": description,
            "names": [],
            "meta": {"source": "augmented"},
        })
    return pairs, skipped
