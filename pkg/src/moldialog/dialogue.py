"""Multi-turn dialogue dataset construction from molecule-description pairs.

A pair's description is split into sentences, the sentence order reversed,
and cumulative texts built so each turn adds one sentence of detail.  Every
turn except the last gets an intermediate molecule proposed by a candidate
provider and gated by path-fingerprint similarity to the final answer:
eligible candidates sit in [0.5, 1.0), the open upper bound keeping the true
molecule from leaking into early turns.  Items reduced to a single turn and
items whose text contains '-' are dropped (dashes usually mean systematic
names that would reveal the answer outright).
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Protocol

from .fingerprints import fnv1a, path_fp, tanimoto
from .graph import SmilesError
from .parser import parse

GATE_LOW = 0.5
GATE_HIGH = 1.0
DEFAULT_RETAIN_PROB = 0.05
CANDIDATES_PER_TURN = 5

REFERENTIAL_PHRASE = "the molecule"

_ABBREVIATIONS = ("e.g.", "i.e.", "approx.")


class CandidateProvider(Protocol):
    id: str

    def propose(self, text: str, k: int) -> list[str]: ...


def split_sentences(text: str) -> list[str]:
    """Split text into sentences, original order.

    A boundary is '.', '!' or '?' followed by whitespace and an uppercase
    letter or digit.  Decimal points are never followed by whitespace, so
    "78.4" stays intact; a short abbreviation list (e.g., i.e., approx.) is
    exempted.  Joining the result with single spaces preserves every
    non-whitespace character of the input.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in ".!?":
            j = i + 1
            if j < n and text[j].isspace():
                k = j
                while k < n and text[k].isspace():
                    k += 1
                nxt = text[k] if k < n else ""
                exempt = ch == "." and text[: i + 1].lower().endswith(_ABBREVIATIONS)
                if nxt and (nxt.isupper() or nxt.isdigit()) and not exempt:
                    piece = text[start : i + 1].strip()
                    if piece:
                        sentences.append(piece)
                    start = k
                    i = k
                    continue
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def build_turns(sentences: list[str]) -> list[str]:
    """Cumulative turn texts: sentence order reversed, then prefix-joined.

    ["A.", "B.", "C."] becomes ["C.", "C. B.", "C. B. A."].
    """
    rev = list(reversed(sentences))
    return [" ".join(rev[: k + 1]) for k in range(len(rev))]


def replace_synonyms(text: str, names: list[str]) -> str:
    """Replace case-insensitive word-boundary hits of any name, longest first."""
    for name in sorted((n for n in names if n and n.strip()), key=len, reverse=True):
        pattern = re.compile(r"(?<!\w)" + re.escape(name) + r"(?!\w)", re.IGNORECASE)
        text = pattern.sub(REFERENTIAL_PHRASE, text)
    return text


def select_intermediate(
    candidates: list[str],
    final: str,
    rng: random.Random,
    retain_prob: float = DEFAULT_RETAIN_PROB,
) -> tuple[str, float, bool] | None:
    """Pick one candidate whose similarity to the final molecule is gated.

    Valid candidates with path-fingerprint Tanimoto in [0.5, 1.0) against
    the final molecule are eligible; one is chosen uniformly.  Similarity
    1.0 is excluded outright so the answer never appears early.  When no
    candidate is eligible, with probability retain_prob the best candidate
    below 0.5 is kept and flagged; otherwise None, which drops the turn.
    """
    final_fp = path_fp(parse(final))
    scored: list[tuple[str, float]] = []
    for smiles in candidates:
        try:
            graph = parse(smiles)
        except SmilesError:
            continue
        scored.append((smiles, tanimoto(path_fp(graph), final_fp)))
    eligible = [(s, sim) for s, sim in scored if GATE_LOW <= sim < GATE_HIGH]
    if eligible:
        chosen, sim = eligible[rng.randrange(len(eligible))]
        return chosen, sim, False
    below = [(s, sim) for s, sim in scored if sim < GATE_LOW]
    if below and rng.random() < retain_prob:
        chosen, sim = max(below, key=lambda pair: pair[1])
        return chosen, sim, True
    return None


@dataclass
class DialogueTurn:
    k: int
    text: str
    expected_molecule: str
    sim_to_final: float
    low_sim_retained: bool = False

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "text": self.text,
            "expected_molecule": self.expected_molecule,
            "sim_to_final": self.sim_to_final,
            "low_sim_retained": self.low_sim_retained,
        }


@dataclass
class Dialogue:
    id: str
    turns: list[DialogueTurn]
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "turns": [t.to_dict() for t in self.turns],
            "provenance": self.provenance,
        }


@dataclass
class BuildStats:
    pairs_in: int = 0
    emitted: int = 0
    invalid_pairs: int = 0
    provider_failed: int = 0
    filtered_single_turn: int = 0
    filtered_dash: int = 0
    turn_histogram: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pairs_in": self.pairs_in,
            "emitted": self.emitted,
            "invalid_pairs": self.invalid_pairs,
            "provider_failed": self.provider_failed,
            "filtered_single_turn": self.filtered_single_turn,
            "filtered_dash": self.filtered_dash,
            "turn_histogram": {str(k): v for k, v in sorted(self.turn_histogram.items())},
        }

    def accounted(self) -> int:
        return (self.emitted + self.invalid_pairs + self.provider_failed
                + self.filtered_single_turn + self.filtered_dash)


def apply_filters(dialogue: Dialogue) -> Dialogue | None:
    """Drop dialogues below two turns or with '-' anywhere in a turn text."""
    if len(dialogue.turns) < 2:
        return None
    if any("-" in turn.text for turn in dialogue.turns):
        return None
    return dialogue


def pair_rng(global_seed: int, pair_id: str) -> random.Random:
    # Stable across processes, unlike hash()
    return random.Random(fnv1a(f"{global_seed}|{pair_id}".encode("utf-8")))


def _construct_dialogue(
    pair: dict,
    provider: CandidateProvider,
    rng: random.Random,
    retain_prob: float,
    candidates_per_turn: int,
    seed: int | None,
) -> Dialogue:
    final = pair["smiles"]
    description = replace_synonyms(pair["description"], pair.get("names") or [])
    texts = build_turns(split_sentences(description))
    turns: list[DialogueTurn] = []
    for idx, text in enumerate(texts):
        if idx == len(texts) - 1:
            turns.append(DialogueTurn(k=0, text=text, expected_molecule=final,
                                      sim_to_final=1.0))
            continue
        proposed = provider.propose(text, candidates_per_turn)
        selected = select_intermediate(proposed, final, rng, retain_prob)
        if selected is None:
            continue
        smiles, sim, retained = selected
        turns.append(DialogueTurn(k=0, text=text, expected_molecule=smiles,
                                  sim_to_final=sim, low_sim_retained=retained))
    for k, turn in enumerate(turns, start=1):
        turn.k = k
    dialogue = Dialogue(
        id=pair["id"],
        turns=turns,
        provenance={
            "seed": seed,
            "provider": getattr(provider, "id", provider.__class__.__name__),
            "fingerprints": {
                str(t.k): path_fp(parse(t.expected_molecule)).to_hex() for t in turns
            },
        },
    )
    return dialogue


def _validate_pair(pair: dict) -> None:
    if not isinstance(pair, dict) or "id" not in pair or "smiles" not in pair:
        raise ValueError("pair needs id and smiles fields")
    parse(pair["smiles"])
    if not (pair.get("description") or "").strip():
        raise ValueError(f"pair {pair.get('id')!r}: empty description")


def build_dialogue(
    pair: dict,
    provider: CandidateProvider,
    rng: random.Random,
    retain_prob: float = DEFAULT_RETAIN_PROB,
    candidates_per_turn: int = CANDIDATES_PER_TURN,
    seed: int | None = None,
) -> Dialogue | None:
    """Build one dialogue from a pair dict; None when filters drop it.

    Raises SmilesError for an unparseable final molecule and ValueError for
    a malformed pair; provider exceptions propagate.
    """
    _validate_pair(pair)
    dialogue = _construct_dialogue(pair, provider, rng, retain_prob,
                                   candidates_per_turn, seed)
    return apply_filters(dialogue)


def build_dataset(
    pairs: list[dict],
    provider: CandidateProvider,
    seed: int,
    retain_prob: float = DEFAULT_RETAIN_PROB,
    candidates_per_turn: int = CANDIDATES_PER_TURN,
) -> tuple[list[Dialogue], BuildStats]:
    """Build dialogues for every pair; deterministic given (pairs, provider, seed).

    Output is sorted by pair id so parallel and serial builds agree.  The
    stats satisfy pairs_in == emitted + invalid + provider_failed + filtered.
    """
    stats = BuildStats()
    emitted: list[Dialogue] = []
    for pair in pairs:
        stats.pairs_in += 1
        try:
            _validate_pair(pair)
        except (SmilesError, ValueError):
            stats.invalid_pairs += 1
            continue
        rng = pair_rng(seed, str(pair["id"]))
        try:
            dialogue = _construct_dialogue(pair, provider, rng, retain_prob,
                                           candidates_per_turn, seed)
        except Exception:
            # The pair itself already validated; only the provider can fail here
            stats.provider_failed += 1
            continue
        kept = apply_filters(dialogue)
        if kept is None:
            if len(dialogue.turns) < 2:
                stats.filtered_single_turn += 1
            else:
                stats.filtered_dash += 1
            continue
        emitted.append(kept)
        key = len(kept.turns)
        stats.turn_histogram[key] = stats.turn_histogram.get(key, 0) + 1
    emitted.sort(key=lambda d: d.id)
    stats.emitted = len(emitted)
    return emitted, stats


class ReplayProvider:
    """Candidate provider that replays a recorded text -> candidates map."""

    id = "replay"

    def __init__(self, records: list[dict]):
        self._by_text = {r["text"]: list(r["candidates"]) for r in records}

    def propose(self, text: str, k: int) -> list[str]:
        return self._by_text[text][:k]


class BackendProvider:
    """Adapts any generate(query, k) backend to the provider interface."""

    def __init__(self, backend, id: str | None = None):
        self._backend = backend
        self.id = id or getattr(backend, "id", backend.__class__.__name__)

    def propose(self, text: str, k: int) -> list[str]:
        return self._backend.generate(text, k)
