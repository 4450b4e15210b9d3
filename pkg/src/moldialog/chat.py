"""Conversation engine: sessions, turns, and the backend contract.

A session is an append-only event log.  Generation turns accumulate user
text; the composed backend query is every user text so far, plus an
"It looks like <SMILES>." sentence naming the molecule under refinement.
Backends implement understand(smiles) and generate(query, k); the bundled
retrieval backend answers from a fixed corpus with TF-IDF cosine for text
and fingerprint nearest-neighbor for molecules, so the whole stack runs
without any trained model.
"""
from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone

import requests

from .canon import canonical
from .fingerprints import path_fp, tanimoto
from .graph import SmilesError
from .metrics import tokenize_text
from .parser import parse

DEFAULT_K = 3

STOP_WORDS = frozenset((
    "a", "about", "above", "after", "again", "all", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "but", "by", "can",
    "could", "do", "for", "from", "had", "has", "have", "if", "in",
    "into", "is", "it", "its", "of", "on", "or", "so", "such", "that",
    "the", "their", "then", "there", "these", "they", "this", "to",
    "was", "were", "which", "will", "with",
))


class BackendError(RuntimeError):
    """A backend call failed; the turn that triggered it is not committed."""


@dataclass
class SessionEvent:
    seq: int
    role: str
    kind: str
    content: str
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"seq": self.seq, "role": self.role, "kind": self.kind,
                "content": self.content, "meta": self.meta}


@dataclass
class Candidate:
    smiles: str
    valid: bool
    sim_to_prev: float | None = None
    padded: bool = False

    def to_dict(self) -> dict:
        return {"smiles": self.smiles, "valid": self.valid,
                "sim_to_prev": self.sim_to_prev, "padded": self.padded}


@dataclass
class CandidateSet:
    candidates: list[Candidate]
    chosen: int | None = None

    def to_dict(self) -> dict:
        return {"candidates": [c.to_dict() for c in self.candidates],
                "chosen": self.chosen}


class ChatSession:
    def __init__(self, session_id: str, backend_id: str, created_at: str | None = None):
        self.id = session_id
        self.backend_id = backend_id
        self.created_at = created_at or datetime.now(timezone.utc).isoformat(
            timespec="seconds")
        self.events: list[SessionEvent] = []

    def append(self, role: str, kind: str, content: str, meta: dict | None = None) -> SessionEvent:
        event = SessionEvent(seq=len(self.events) + 1, role=role, kind=kind,
                             content=content, meta=meta or {})
        self.events.append(event)
        return event

    def last_molecule_event(self) -> SessionEvent | None:
        for event in reversed(self.events):
            if event.role == "system" and event.kind == "molecule":
                return event
        return None

    def last_candidates(self) -> list[dict] | None:
        event = self.last_molecule_event()
        if event is None:
            return None
        return event.meta.get("candidates")


def compose_generation_query(events: list[SessionEvent]) -> str:
    """All user texts in order, then "It looks like <M>." for the last molecule.

    Replaying a session log through this function reproduces every backend
    query byte for byte, which is what makes the logs audit-ready.
    """
    texts = [e.content for e in events if e.role == "user" and e.kind == "text"]
    if not texts:
        raise ValueError("no user text in history")
    query = " ".join(texts)
    for event in reversed(events):
        if event.role == "system" and event.kind == "molecule":
            query += f" It looks like {event.content}."
            break
    return query


def _parse_or_none(smiles: str):
    try:
        return parse(smiles)
    except SmilesError:
        return None


def generate_turn(session: ChatSession, backend, text: str, k: int = DEFAULT_K,
                  refine_from: int | None = None) -> CandidateSet:
    """Run one generation turn; the session changes only on success.

    refine_from names a candidate index from the previous turn's set; the
    choice is materialized as its own system molecule event so the composed
    query and the log stay in agreement.  The rank-1 candidate is committed
    to history even when invalid, mirroring how a user sees (and may react
    to) a bad suggestion.
    """
    if not text or not text.strip():
        raise ValueError("empty turn text")
    staged: list[SessionEvent] = []
    if refine_from is not None:
        previous = session.last_candidates()
        if previous is None:
            raise ValueError("refine_from given but no candidate set exists")
        if not 0 <= refine_from < len(previous):
            raise ValueError(f"refine_from out of range: {refine_from}")
        choice = previous[refine_from]
        staged.append(SessionEvent(
            seq=0, role="system", kind="molecule", content=choice["smiles"],
            meta={"reason": "user_choice", "rank": refine_from,
                  "valid": choice["valid"]}))
    staged.append(SessionEvent(seq=0, role="user", kind="text", content=text))

    query = compose_generation_query(session.events + staged)
    raw = backend.generate(query, k)
    if not raw:
        raise BackendError("backend returned no candidates")
    raw = list(raw[:k])
    padded_from = len(raw)
    while len(raw) < k:
        raw.append(raw[0])

    prev_event = None
    for event in reversed(session.events + staged):
        if event.role == "system" and event.kind == "molecule":
            prev_event = event
            break
    prev_graph = _parse_or_none(prev_event.content) if prev_event else None
    prev_fp = path_fp(prev_graph) if prev_graph is not None else None

    candidates = []
    for i, smiles in enumerate(raw):
        graph = _parse_or_none(smiles)
        sim = None
        if prev_fp is not None and graph is not None:
            sim = tanimoto(path_fp(graph), prev_fp)
        candidates.append(Candidate(smiles=smiles, valid=graph is not None,
                                    sim_to_prev=sim, padded=i >= padded_from))

    result = CandidateSet(candidates=candidates)
    for event in staged:
        session.append(event.role, event.kind, event.content, event.meta)
    session.append("system", "molecule", candidates[0].smiles,
                   {"valid": candidates[0].valid,
                    "candidates": [c.to_dict() for c in candidates]})
    return result


def understand_turn(session: ChatSession, backend, smiles: str) -> str:
    """Describe a molecule; rejects invalid SMILES before touching the backend."""
    parse(smiles)
    description = backend.understand(smiles)
    session.append("user", "molecule", smiles, {"valid": True})
    session.append("system", "text", description)
    return description


def _terms(text: str) -> list[str]:
    tokens = [t for t in tokenize_text(text) if t not in STOP_WORDS]
    bigrams = [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    return tokens + bigrams


class RetrievalBackend:
    """Answers from a fixed corpus of {"id", "smiles", "description"} pairs.

    Generation ranks corpus molecules by TF-IDF cosine between the query
    and stored descriptions (log-scaled tf, smoothed idf, unigrams plus
    bigrams after stop-word removal).  Understanding returns the stored
    description of the exact molecule, or of the nearest neighbor by path
    fingerprint.
    """

    id = "retrieval"

    def __init__(self, corpus: list[dict]):
        # rows whose SMILES fail to parse are dropped, not fatal
        self.corpus = []
        self._graphs = []
        self._canonical: dict[str, int] = {}
        for pair in corpus:
            try:
                graph = parse(pair["smiles"])
            except SmilesError:
                continue
            self._canonical.setdefault(canonical(graph), len(self.corpus))
            self.corpus.append(pair)
            self._graphs.append(graph)
        if not self.corpus:
            raise ValueError("empty corpus")
        self._fps = [path_fp(g) for g in self._graphs]

        df: Counter = Counter()
        doc_terms = []
        for pair in self.corpus:
            counts = Counter(_terms(pair.get("description") or ""))
            doc_terms.append(counts)
            df.update(counts.keys())
        n_docs = len(self.corpus)
        self._idf = {term: math.log((1 + n_docs) / (1 + count)) + 1.0
                     for term, count in df.items()}
        self._vectors = [self._vectorize(counts) for counts in doc_terms]

    def _vectorize(self, counts: Counter) -> dict[str, float]:
        vec = {}
        for term, count in counts.items():
            idf = self._idf.get(term)
            if idf is None:
                continue
            vec[term] = (1.0 + math.log(count)) * idf
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm > 0:
            vec = {t: w / norm for t, w in vec.items()}
        return vec

    def generate(self, query: str, k: int) -> list[str]:
        qvec = self._vectorize(Counter(_terms(query)))
        scores = []
        for i, dvec in enumerate(self._vectors):
            small, large = (qvec, dvec) if len(qvec) <= len(dvec) else (dvec, qvec)
            score = sum(w * large.get(t, 0.0) for t, w in small.items())
            scores.append((-score, i))
        scores.sort()
        return [self.corpus[i]["smiles"] for _, i in scores[:k]]

    def understand(self, smiles: str) -> str:
        graph = parse(smiles)
        exact = self._canonical.get(canonical(graph))
        if exact is not None:
            return self.corpus[exact].get("description") or ""
        fp = path_fp(graph)
        best = max(range(len(self.corpus)),
                   key=lambda i: (tanimoto(fp, self._fps[i]), -i))
        return self.corpus[best].get("description") or ""


class RemoteBackend:
    """Backend over HTTP: POST /generate and POST /understand on a base URL."""

    id = "remote"

    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def _post(self, route: str, payload: dict) -> dict:
        try:
            response = requests.post(f"{self.base_url}{route}", json=payload,
                                     timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendError(f"remote backend failed on {route}: {exc}") from exc
        if not isinstance(data, dict):
            raise BackendError(f"remote backend returned non-object on {route}")
        return data

    def generate(self, query: str, k: int) -> list[str]:
        data = self._post("/generate", {"query": query, "k": k})
        candidates = data.get("candidates")
        if (not isinstance(candidates, list)
                or not all(isinstance(c, str) for c in candidates)):
            raise BackendError("remote backend: malformed candidates")
        return candidates[:k]

    def understand(self, smiles: str) -> str:
        data = self._post("/understand", {"smiles": smiles})
        description = data.get("description")
        if not isinstance(description, str):
            raise BackendError("remote backend: malformed description")
        return description


def session_to_jsonl(session: ChatSession) -> str:
    """Serialize a session: one header line, then one line per event.

    This exact text is what the chat command writes, the HTTP service
    returns, and the UI exports; byte equality across the three is a
    tested contract.
    """
    lines = [json.dumps({"type": "header", "id": session.id,
                         "backend": session.backend_id,
                         "created_at": session.created_at}, sort_keys=True)]
    for event in session.events:
        record = {"type": "event", **event.to_dict()}
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines) + "\n"


class SessionStore:
    """In-memory session registry with sequential ids and per-session locks."""

    def __init__(self):
        self._sessions: dict[str, ChatSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._counter = 0

    def create(self, backend_id: str) -> ChatSession:
        with self._registry_lock:
            self._counter += 1
            session_id = f"s{self._counter:04d}"
            session = ChatSession(session_id, backend_id)
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            return session

    def get(self, session_id: str) -> ChatSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(session_id)
        return session

    def lock(self, session_id: str) -> threading.Lock:
        lock = self._locks.get(session_id)
        if lock is None:
            raise KeyError(session_id)
        return lock

    def all(self) -> list[ChatSession]:
        return list(self._sessions.values())
