"""Dictionary-based chemical entity recognition.

The lexicon loads name -> SMILES rows from a JSONL knowledge base and
recognizes mentions by longest match at word boundaries.  Matching is
token-level: names and text are both broken into alphanumeric runs, so
"Ethanolamine" never matches "ethanol" and inner punctuation ("2-propanol")
does not block a match.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .canon import canonical
from .graph import SmilesError
from .parser import parse

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+")

_END = object()


def normalize_name(name: str) -> str:
    return " ".join(name.lower().split())


def _name_tokens(name: str) -> tuple[str, ...]:
    return tuple(m.group(0) for m in _TOKEN_RE.finditer(name.lower()))


@dataclass(frozen=True)
class LexiconEntry:
    name: str
    smiles: str
    preferred_name: str


@dataclass(frozen=True)
class EntityMention:
    start: int
    end: int
    surface: str
    smiles: str
    preferred_name: str


@dataclass
class LoadReport:
    loaded: int = 0
    rejected: list = None

    def __post_init__(self):
        if self.rejected is None:
            self.rejected = []

    def to_dict(self) -> dict:
        return {"loaded": self.loaded, "rejected": self.rejected}


class Lexicon:
    def __init__(self):
        self.entries: dict[str, LexiconEntry] = {}
        self._trie: dict = {}

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, name: str, smiles: str, preferred_name: str | None = None) -> None:
        """Add one entry; raises on unparseable SMILES or duplicate name."""
        key = normalize_name(name)
        tokens = _name_tokens(name)
        if not key or not tokens:
            raise ValueError("empty name")
        if key in self.entries:
            raise ValueError(f"duplicate name: {key!r}")
        smiles_canonical = canonical(parse(smiles))
        entry = LexiconEntry(name=key, smiles=smiles_canonical,
                             preferred_name=preferred_name or name)
        self.entries[key] = entry
        node = self._trie
        for token in tokens:
            node = node.setdefault(token, {})
        node[_END] = entry

    def recognize(self, text: str) -> list[EntityMention]:
        """Left-to-right longest-match scan; mentions never overlap."""
        tokens = [(m.group(0).lower(), m.start(), m.end())
                  for m in _TOKEN_RE.finditer(text)]
        mentions: list[EntityMention] = []
        i = 0
        while i < len(tokens):
            node = self._trie
            best: tuple[int, LexiconEntry] | None = None
            j = i
            while j < len(tokens) and tokens[j][0] in node:
                node = node[tokens[j][0]]
                if _END in node:
                    best = (j, node[_END])
                j += 1
            if best is None:
                i += 1
                continue
            last, entry = best
            start = tokens[i][1]
            end = tokens[last][2]
            mentions.append(EntityMention(
                start=start, end=end, surface=text[start:end],
                smiles=entry.smiles, preferred_name=entry.preferred_name,
            ))
            i = last + 1
        return mentions


def load_kb(path: str) -> tuple[Lexicon, LoadReport]:
    """Load a JSONL knowledge base of {"name", "smiles", "preferred_name"?}.

    Rows with unparseable SMILES or duplicate names are rejected and listed
    in the report (first row wins on duplicates); malformed JSON or missing
    fields raise, since that means the file itself is broken.
    """
    lexicon = Lexicon()
    report = LoadReport()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON") from exc
            if not isinstance(row, dict) or "name" not in row or "smiles" not in row:
                raise ValueError(f"{path}:{line_no}: row needs name and smiles")
            try:
                lexicon.add(row["name"], row["smiles"], row.get("preferred_name"))
                report.loaded += 1
            except SmilesError as exc:
                report.rejected.append(
                    {"line": line_no, "name": row["name"],
                     "reason": f"invalid smiles: {exc.kind.value}"})
            except ValueError as exc:
                report.rejected.append(
                    {"line": line_no, "name": row["name"], "reason": str(exc)})
    return lexicon, report
