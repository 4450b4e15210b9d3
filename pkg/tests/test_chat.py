"""Conversation engine: query composition, turns, backends, session logs."""

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from moldialog import generate_turn, session_to_jsonl, understand_turn
from moldialog.canon import canonical
from moldialog.chat import (BackendError, ChatSession, RemoteBackend,
                            RetrievalBackend, SessionStore,
                            compose_generation_query)
from moldialog.fingerprints import path_fp, tanimoto
from moldialog.graph import SmilesError
from moldialog.parser import parse


class ScriptedBackend:
    """Returns a fixed candidate list and description, recording queries."""

    id = "scripted"

    def __init__(self, answers=None, description="a molecule"):
        self.answers = list(answers or [])
        self.description = description
        self.queries: list[str] = []
        self.understood: list[str] = []

    def generate(self, query, k):
        self.queries.append(query)
        return list(self.answers)

    def understand(self, smiles):
        self.understood.append(smiles)
        return self.description


class FailingBackend:
    id = "failing"

    def generate(self, query, k):
        raise BackendError("down")

    def understand(self, smiles):
        raise BackendError("down")


def make_session():
    return ChatSession("s0001", "scripted", created_at="2024-01-01T00:00:00+00:00")


# ---------------------------------------------------------------- composition

def test_compose_single_text_is_verbatim():
    session = make_session()
    session.append("user", "text", "a water-soluble dye")
    assert compose_generation_query(session.events) == "a water-soluble dye"


def test_compose_appends_molecule_sentence():
    session = make_session()
    session.append("user", "text", "a small alcohol")
    session.append("system", "molecule", "CCO")
    session.append("user", "text", "make it longer")
    assert compose_generation_query(session.events) == (
        "a small alcohol make it longer It looks like CCO.")


def test_compose_uses_only_last_molecule():
    session = make_session()
    session.append("user", "text", "first")
    session.append("system", "molecule", "CCO")
    session.append("user", "text", "second")
    session.append("system", "molecule", "CCC")
    session.append("user", "text", "third")
    assert compose_generation_query(session.events) == (
        "first second third It looks like CCC.")


def test_compose_requires_user_text():
    session = make_session()
    session.append("system", "molecule", "CCO")
    with pytest.raises(ValueError):
        compose_generation_query(session.events)


# ------------------------------------------------------------- generate_turn

def test_generate_turn_commits_text_and_molecule():
    session = make_session()
    backend = ScriptedBackend(["CCO", "CCC", "CCN"])
    result = generate_turn(session, backend, "a small alcohol")
    assert [c.smiles for c in result.candidates] == ["CCO", "CCC", "CCN"]
    assert all(c.valid for c in result.candidates)
    assert not any(c.padded for c in result.candidates)

    kinds = [(e.role, e.kind) for e in session.events]
    assert kinds == [("user", "text"), ("system", "molecule")]
    molecule = session.events[-1]
    assert molecule.content == "CCO"
    assert molecule.meta["valid"] is True
    assert molecule.meta["candidates"] == [c.to_dict() for c in result.candidates]
    assert backend.queries == ["a small alcohol"]


def test_generate_turn_pads_short_answers():
    session = make_session()
    backend = ScriptedBackend(["CCO"])
    result = generate_turn(session, backend, "anything", k=3)
    assert [c.smiles for c in result.candidates] == ["CCO", "CCO", "CCO"]
    assert [c.padded for c in result.candidates] == [False, True, True]


def test_generate_turn_truncates_long_answers():
    session = make_session()
    backend = ScriptedBackend(["CCO", "CCC", "CCN", "CCCl", "CCBr"])
    result = generate_turn(session, backend, "anything", k=2)
    assert [c.smiles for c in result.candidates] == ["CCO", "CCC"]


def test_invalid_rank1_is_committed_as_invalid():
    session = make_session()
    backend = ScriptedBackend(["C(", "CCO", "CCC"])
    result = generate_turn(session, backend, "anything")
    assert result.candidates[0].valid is False
    molecule = session.events[-1]
    assert molecule.content == "C("
    assert molecule.meta["valid"] is False


def test_backend_failure_leaves_session_untouched():
    session = make_session()
    with pytest.raises(BackendError):
        generate_turn(session, FailingBackend(), "anything")
    assert session.events == []

    with pytest.raises(BackendError, match="no candidates"):
        generate_turn(session, ScriptedBackend([]), "anything")
    assert session.events == []


def test_backend_failure_discards_staged_choice():
    session = make_session()
    generate_turn(session, ScriptedBackend(["CCO", "CCC", "CCN"]), "start")
    before = len(session.events)
    with pytest.raises(BackendError):
        generate_turn(session, FailingBackend(), "more", refine_from=1)
    assert len(session.events) == before


def test_empty_text_rejected():
    session = make_session()
    with pytest.raises(ValueError):
        generate_turn(session, ScriptedBackend(["C"]), "   ")
    assert session.events == []


def test_sim_to_prev_absent_on_first_turn_present_after():
    session = make_session()
    backend = ScriptedBackend(["CCO", "CCC", "CCN"])
    first = generate_turn(session, backend, "start")
    assert all(c.sim_to_prev is None for c in first.candidates)

    second = generate_turn(session, backend, "again")
    expected = tanimoto(path_fp(parse("CCO")), path_fp(parse("CCO")))
    assert second.candidates[0].sim_to_prev == pytest.approx(expected)
    assert second.candidates[0].sim_to_prev == pytest.approx(1.0)
    for candidate in second.candidates:
        ref = tanimoto(path_fp(parse(candidate.smiles)), path_fp(parse("CCO")))
        assert candidate.sim_to_prev == pytest.approx(ref)


def test_sim_to_prev_none_for_invalid_candidates():
    session = make_session()
    generate_turn(session, ScriptedBackend(["CCO", "CCC", "CCN"]), "start")
    result = generate_turn(session, ScriptedBackend(["CC(", "CCC", "CCN"]), "more")
    assert result.candidates[0].sim_to_prev is None
    assert result.candidates[1].sim_to_prev is not None


def test_refine_from_rewrites_the_molecule_under_refinement():
    session = make_session()
    backend = ScriptedBackend(["CCO", "CCC", "CCN"])
    generate_turn(session, backend, "start")
    generate_turn(session, backend, "use the amine", refine_from=2)

    assert backend.queries[-1] == "start use the amine It looks like CCN."
    choice = [e for e in session.events if e.meta.get("reason") == "user_choice"]
    assert len(choice) == 1
    assert choice[0].content == "CCN"
    assert choice[0].meta["rank"] == 2


def test_refine_from_validation():
    session = make_session()
    backend = ScriptedBackend(["CCO", "CCC", "CCN"])
    with pytest.raises(ValueError, match="no candidate set"):
        generate_turn(session, backend, "start", refine_from=0)
    assert session.events == []

    generate_turn(session, backend, "start")
    before = len(session.events)
    with pytest.raises(ValueError, match="out of range"):
        generate_turn(session, backend, "more", refine_from=3)
    with pytest.raises(ValueError, match="out of range"):
        generate_turn(session, backend, "more", refine_from=-1)
    assert len(session.events) == before


# ----------------------------------------------------------- understand_turn

def test_understand_turn_commits_both_events():
    session = make_session()
    backend = ScriptedBackend(description="colorless liquid")
    description = understand_turn(session, backend, "CCO")
    assert description == "colorless liquid"
    kinds = [(e.role, e.kind) for e in session.events]
    assert kinds == [("user", "molecule"), ("system", "text")]
    assert session.events[0].content == "CCO"
    assert session.events[1].content == "colorless liquid"


def test_understand_rejects_invalid_before_backend():
    session = make_session()
    backend = ScriptedBackend(description="never seen")
    with pytest.raises(SmilesError):
        understand_turn(session, backend, "C1CC")
    assert session.events == []
    assert backend.understood == []


# --------------------------------------------------------- retrieval backend

def test_retrieval_self_query_ranks_own_row_first(toy_pairs):
    backend = RetrievalBackend(toy_pairs)
    for pair in backend.corpus[:8]:
        top = backend.generate(pair["description"], 3)[0]
        assert canonical(parse(top)) == canonical(parse(pair["smiles"]))


def test_retrieval_cosine_order_is_hand_checkable():
    corpus = [
        {"id": "a", "smiles": "C", "description": "bitter almond oil"},
        {"id": "b", "smiles": "CC", "description": "sweet almond oil"},
        {"id": "c", "smiles": "CCC", "description": "mineral oil"},
    ]
    backend = RetrievalBackend(corpus)
    # query shares {bitter, almond, "bitter almond"} with a, {almond} with b,
    # nothing with c
    assert backend.generate("bitter almond", 3) == ["C", "CC", "CCC"]


def test_retrieval_drops_unparseable_rows(toy_pairs):
    backend = RetrievalBackend(toy_pairs)
    raw_count = len(toy_pairs)
    assert len(backend.corpus) == raw_count - 1  # one row is deliberately broken
    assert all("-" != pair["smiles"] for pair in backend.corpus)

    with pytest.raises(ValueError, match="empty corpus"):
        RetrievalBackend([{"id": "x", "smiles": "C(", "description": "bad"}])


def test_retrieval_understand_exact_match(toy_pairs):
    backend = RetrievalBackend(toy_pairs)
    row = next(p for p in backend.corpus if p["smiles"] == "CCO")
    assert backend.understand("CCO") == row["description"]
    # a different writing of the same molecule still hits the exact branch
    assert backend.understand("OCC") == row["description"]


def test_retrieval_understand_nearest_neighbor_matches_scan(toy_pairs):
    backend = RetrievalBackend(toy_pairs)
    query = "CCCCCCCCO"  # octanol, absent from the corpus
    fp = path_fp(parse(query))
    sims = [tanimoto(fp, path_fp(parse(p["smiles"]))) for p in backend.corpus]
    best = max(range(len(sims)), key=lambda i: (sims[i], -i))
    assert backend.understand(query) == backend.corpus[best]["description"]


def test_understand_turn_round_trip_through_retrieval(toy_pairs):
    session = make_session()
    backend = RetrievalBackend(toy_pairs)
    row = next(p for p in backend.corpus if p["smiles"] == "CC(=O)O")
    assert understand_turn(session, backend, "CC(=O)O") == row["description"]


# ------------------------------------------------------------- serialization

def test_session_log_shape():
    session = make_session()
    generate_turn(session, ScriptedBackend(["CCO", "CCC", "CCN"]), "start")
    text = session_to_jsonl(session)
    assert text.endswith("\n")
    lines = text.splitlines()
    assert len(lines) == 3

    header = json.loads(lines[0])
    assert header == {"type": "header", "id": "s0001", "backend": "scripted",
                      "created_at": "2024-01-01T00:00:00+00:00"}
    for line in lines[1:]:
        event = json.loads(line)
        assert event["type"] == "event"
        assert set(event) == {"type", "seq", "role", "kind", "content", "meta"}
        assert "created_at" not in event
        # keys serialized in sorted order
        assert line == json.dumps(event, sort_keys=True)
    assert [json.loads(l)["seq"] for l in lines[1:]] == [1, 2]


# --------------------------------------------------------------- SessionStore

def test_session_store_sequential_ids():
    store = SessionStore()
    first = store.create("retrieval")
    second = store.create("retrieval")
    assert (first.id, second.id) == ("s0001", "s0002")
    assert store.get("s0001") is first
    assert store.lock("s0002") is not None
    assert {s.id for s in store.all()} == {"s0001", "s0002"}


def test_session_store_unknown_id():
    store = SessionStore()
    with pytest.raises(KeyError):
        store.get("s9999")
    with pytest.raises(KeyError):
        store.lock("s9999")


# -------------------------------------------------------------- RemoteBackend

class _StubHandler(BaseHTTPRequestHandler):
    routes = {}

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        body = json.loads(self.rfile.read(length) or b"{}")
        status, payload = self.routes[self.path](body)
        data = payload if isinstance(payload, bytes) else json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@contextmanager
def stub_server(routes):
    handler = type("Handler", (_StubHandler,), {"routes": routes})
    server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()


def test_remote_backend_round_trip():
    seen = {}

    def on_generate(body):
        seen["generate"] = body
        return 200, {"candidates": ["CCO", "CCC", "CCN", "CCCl"]}

    def on_understand(body):
        seen["understand"] = body
        return 200, {"description": "a colorless liquid"}

    with stub_server({"/generate": on_generate, "/understand": on_understand}) as url:
        backend = RemoteBackend(url)
        assert backend.generate("an alcohol", 3) == ["CCO", "CCC", "CCN"]
        assert seen["generate"] == {"query": "an alcohol", "k": 3}
        assert backend.understand("CCO") == "a colorless liquid"
        assert seen["understand"] == {"smiles": "CCO"}


def test_remote_backend_short_answer_padded_by_engine():
    with stub_server({"/generate": lambda body: (200, {"candidates": ["CCO"]})}) as url:
        session = make_session()
        result = generate_turn(session, RemoteBackend(url), "anything", k=3)
    assert [c.padded for c in result.candidates] == [False, True, True]


def test_remote_backend_error_paths():
    routes = {
        "/generate": lambda body: (200, b"this is not json"),
        "/understand": lambda body: (500, {"error": "boom"}),
    }
    with stub_server(routes) as url:
        backend = RemoteBackend(url)
        with pytest.raises(BackendError):
            backend.generate("q", 3)
        with pytest.raises(BackendError):
            backend.understand("CCO")

    with stub_server({"/generate": lambda body: (200, {"candidates": "CCO"})}) as url:
        with pytest.raises(BackendError, match="malformed"):
            RemoteBackend(url).generate("q", 3)

    with stub_server({"/understand": lambda body: (200, ["nope"])}) as url:
        with pytest.raises(BackendError):
            RemoteBackend(url).understand("CCO")

    # connection refused: no server at all on a closed port
    backend = RemoteBackend("http://127.0.0.1:9", timeout=0.5)
    with pytest.raises(BackendError):
        backend.generate("q", 3)
