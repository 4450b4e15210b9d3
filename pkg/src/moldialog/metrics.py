"""Evaluation metrics for molecule generation and description tasks.

Text metrics are plain reimplementations of their textbook forms: BLEU with
brevity penalty and add-epsilon smoothing, ROUGE-1/2/L as F1, Levenshtein as
the classic dynamic program.  Molecule records are compared by canonical
SMILES equality and by fingerprint Tanimoto.  METEOR is intentionally not
computed; reports carry an explicit null so downstream tables keep the
column.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .canon import canonical
from .fingerprints import morgan, path_fp, structural_keys, tanimoto
from .graph import MolecularGraph, SmilesError
from .parser import parse

EPSILON = 1e-9

_WORD_RE = re.compile(r"[a-z0-9]+")


def tokenize_text(text: str) -> list[str]:
    """Lowercased alphanumeric word tokens."""
    return _WORD_RE.findall(text.lower())


def tokenize_chars(text: str) -> list[str]:
    return list(text)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _bleu_from_stats(matches: list[int], hyp_counts: list[int], ref_counts: list[int],
                     hyp_len: int, ref_len: int) -> float:
    if hyp_len == 0:
        return 0.0
    log_sum = 0.0
    used = 0
    for m, h, r in zip(matches, hyp_counts, ref_counts):
        if h == 0 and r == 0:
            continue
        used += 1
        if h == 0:
            p = EPSILON
        else:
            p = m / h if m > 0 else EPSILON
        log_sum += math.log(p)
    if used == 0:
        return 0.0
    geo = math.exp(log_sum / used)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * geo


def bleu(reference: list[str], hypothesis: list[str], max_n: int = 4) -> float:
    """Sentence BLEU with brevity penalty; zero counts smooth to epsilon.

    Orders longer than both sequences are skipped, so bleu(x, x) is exactly
    1.0 for any non-empty x.
    """
    matches, hyp_counts, ref_counts = [], [], []
    for n in range(1, max_n + 1):
        hyp_ngrams = _ngrams(hypothesis, n)
        ref_ngrams = _ngrams(reference, n)
        overlap = sum(min(c, ref_ngrams[gram]) for gram, c in hyp_ngrams.items())
        matches.append(overlap)
        hyp_counts.append(sum(hyp_ngrams.values()))
        ref_counts.append(sum(ref_ngrams.values()))
    return _bleu_from_stats(matches, hyp_counts, ref_counts, len(hypothesis), len(reference))


def corpus_bleu(references: list[list[str]], hypotheses: list[list[str]], max_n: int = 4) -> float:
    """Corpus BLEU: n-gram statistics pooled before the geometric mean."""
    if len(references) != len(hypotheses):
        raise ValueError("reference/hypothesis count mismatch")
    matches = [0] * max_n
    hyp_counts = [0] * max_n
    ref_counts = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for ref, hyp in zip(references, hypotheses):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, max_n + 1):
            hyp_ngrams = _ngrams(hyp, n)
            ref_ngrams = _ngrams(ref, n)
            matches[n - 1] += sum(min(c, ref_ngrams[gram]) for gram, c in hyp_ngrams.items())
            hyp_counts[n - 1] += sum(hyp_ngrams.values())
            ref_counts[n - 1] += sum(ref_ngrams.values())
    return _bleu_from_stats(matches, hyp_counts, ref_counts, hyp_len, ref_len)


def _prf(overlap: float, hyp_total: int, ref_total: int) -> tuple[float, float, float]:
    p = overlap / hyp_total if hyp_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def rouge_n(reference: list[str], hypothesis: list[str], n: int) -> tuple[float, float, float]:
    """(precision, recall, F1) on n-gram overlap."""
    ref_ngrams = _ngrams(reference, n)
    hyp_ngrams = _ngrams(hypothesis, n)
    overlap = sum(min(c, ref_ngrams[gram]) for gram, c in hyp_ngrams.items())
    return _prf(overlap, sum(hyp_ngrams.values()), sum(ref_ngrams.values()))


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def rouge_l(reference: list[str], hypothesis: list[str]) -> tuple[float, float, float]:
    """(precision, recall, F1) from the longest common subsequence."""
    lcs = _lcs_length(reference, hypothesis)
    return _prf(lcs, len(hypothesis), len(reference))


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit insert/delete/substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def _try_canonical(smiles: str) -> str | None:
    try:
        return canonical(parse(smiles))
    except SmilesError:
        return None


def exact_match(prediction: str, reference: str) -> bool:
    """Canonical-form equality; an unparseable prediction is a miss.

    Raises:
        SmilesError: when the reference itself does not parse.
    """
    ref = canonical(parse(reference))
    pred = _try_canonical(prediction)
    return pred is not None and pred == ref


def hit_at_k(candidates: Iterable[str], reference: str, k: int) -> bool:
    """True when any of the first k candidates canonically equals reference."""
    ref = canonical(parse(reference))
    for i, cand in enumerate(candidates):
        if i >= k:
            break
        if _try_canonical(cand) == ref:
            return True
    return False


@dataclass
class EvalReport:
    task: str
    n: int
    reference_invalid: int = 0
    gen_metrics: dict | None = None
    text_metrics: dict | None = None
    per_turn: dict | None = None
    meteor: None = None

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "n": self.n,
            "reference_invalid": self.reference_invalid,
            "meteor": None,
            "gen_metrics": self.gen_metrics,
            "text_metrics": self.text_metrics,
            "per_turn": self.per_turn,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _record_key(record: dict) -> tuple:
    return (record["id"], record.get("turn"))


def _check_alignment(predictions: list[dict], references: list[dict]) -> None:
    pred_keys = [_record_key(r) for r in predictions]
    ref_keys = [_record_key(r) for r in references]
    if len(set(pred_keys)) != len(pred_keys):
        dupes = sorted({k for k in pred_keys if pred_keys.count(k) > 1})
        raise ValueError(f"duplicate prediction ids: {dupes}")
    if len(set(ref_keys)) != len(ref_keys):
        dupes = sorted({k for k in ref_keys if ref_keys.count(k) > 1})
        raise ValueError(f"duplicate reference ids: {dupes}")
    if set(pred_keys) != set(ref_keys):
        missing = sorted(set(ref_keys) ^ set(pred_keys))
        raise ValueError(f"prediction/reference ids do not align: {missing}")


def _gen_metrics_for(pairs: list[tuple[dict, dict]]) -> tuple[dict, int]:
    """Aggregate generation metrics over aligned (prediction, reference) pairs.

    Returns (metrics dict, reference_invalid count); pairs whose reference
    does not parse are excluded from every denominator.
    """
    em_hits = 0
    hit3_hits = 0
    leven_total = 0
    valid = 0
    fts = {"rdk": 0.0, "maccs": 0.0, "morgan": 0.0}
    char_refs: list[list[str]] = []
    char_hyps: list[list[str]] = []
    reference_invalid = 0
    n_eval = 0

    for pred, ref in pairs:
        candidates = pred.get("candidates") or []
        if not candidates:
            raise ValueError(f"prediction {pred.get('id')!r} has no candidates")
        ref_candidates = ref.get("candidates") or []
        if not ref_candidates:
            raise ValueError(f"reference {ref.get('id')!r} has no molecule")
        ref_smiles = ref_candidates[0]
        try:
            ref_graph = parse(ref_smiles)
        except SmilesError:
            reference_invalid += 1
            continue
        ref_canon = canonical(ref_graph)
        n_eval += 1
        rank1 = candidates[0]
        char_refs.append(tokenize_chars(ref_smiles))
        char_hyps.append(tokenize_chars(rank1))
        leven_total += levenshtein(rank1, ref_smiles)

        rank1_canon = _try_canonical(rank1)
        if rank1_canon is not None:
            valid += 1
            if rank1_canon == ref_canon:
                em_hits += 1
            pred_graph = parse(rank1)
            fts["rdk"] += tanimoto(path_fp(pred_graph), path_fp(ref_graph))
            fts["maccs"] += tanimoto(structural_keys(pred_graph), structural_keys(ref_graph))
            fts["morgan"] += tanimoto(morgan(pred_graph), morgan(ref_graph))
        canon_candidates = [_try_canonical(c) for c in candidates[:3]]
        if ref_canon in [c for c in canon_candidates if c is not None]:
            hit3_hits += 1

    if n_eval == 0:
        metrics = {
            "em": 0.0, "hit3": 0.0, "bleu_char": 0.0, "levenshtein_mean": 0.0,
            "fts_rdk": 0.0, "fts_maccs": 0.0, "fts_morgan": 0.0,
            "validity": 0.0, "n": 0, "n_valid": 0,
        }
        return metrics, reference_invalid

    metrics = {
        "em": em_hits / n_eval,
        "hit3": hit3_hits / n_eval,
        "bleu_char": corpus_bleu(char_refs, char_hyps, max_n=4),
        "levenshtein_mean": leven_total / n_eval,
        "fts_rdk": fts["rdk"] / n_eval,
        "fts_maccs": fts["maccs"] / n_eval,
        "fts_morgan": fts["morgan"] / n_eval,
        "validity": valid / n_eval,
        "n": n_eval,
        "n_valid": valid,
    }
    return metrics, reference_invalid


def evaluate_generation(predictions: list[dict], references: list[dict]) -> EvalReport:
    """Score molecule generation records against references.

    Records carry {"id", "turn"?, "candidates": [smiles, ...]}; references
    hold the target molecule as their single candidate.  When any record
    carries a turn, a per-turn breakdown accompanies the overall block.
    """
    _check_alignment(predictions, references)
    ref_by_key = {_record_key(r): r for r in references}
    pairs = [(p, ref_by_key[_record_key(p)]) for p in predictions]

    overall, reference_invalid = _gen_metrics_for(pairs)
    per_turn = None
    turns = sorted({p.get("turn") for p, _ in pairs if p.get("turn") is not None})
    if turns:
        per_turn = {}
        for turn in turns:
            subset = [(p, r) for p, r in pairs if p.get("turn") == turn]
            per_turn[str(turn)], _ = _gen_metrics_for(subset)

    return EvalReport(
        task="generation",
        n=len(pairs),
        reference_invalid=reference_invalid,
        gen_metrics=overall,
        per_turn=per_turn,
    )


def evaluate_understanding(predictions: list[dict], references: list[dict]) -> EvalReport:
    """Score molecule description records: corpus BLEU-2/4 and mean ROUGE F1."""
    _check_alignment(predictions, references)
    ref_by_key = {_record_key(r): r for r in references}
    refs_tok: list[list[str]] = []
    hyps_tok: list[list[str]] = []
    rouge1_sum = rouge2_sum = rougel_sum = 0.0
    for pred in predictions:
        ref = ref_by_key[_record_key(pred)]
        hyp_tokens = tokenize_text(pred.get("text") or "")
        ref_tokens = tokenize_text(ref.get("text") or "")
        refs_tok.append(ref_tokens)
        hyps_tok.append(hyp_tokens)
        rouge1_sum += rouge_n(ref_tokens, hyp_tokens, 1)[2]
        rouge2_sum += rouge_n(ref_tokens, hyp_tokens, 2)[2]
        rougel_sum += rouge_l(ref_tokens, hyp_tokens)[2]
    n = len(predictions)
    text_metrics = {
        "bleu2": corpus_bleu(refs_tok, hyps_tok, max_n=2) if n else 0.0,
        "bleu4": corpus_bleu(refs_tok, hyps_tok, max_n=4) if n else 0.0,
        "rouge1": rouge1_sum / n if n else 0.0,
        "rouge2": rouge2_sum / n if n else 0.0,
        "rougeL": rougel_sum / n if n else 0.0,
        "n": n,
    }
    return EvalReport(task="understanding", n=n, text_metrics=text_metrics)


def read_records(path: str) -> list[dict]:
    """Read JSON-lines evaluation records."""
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: invalid JSON record") from exc
    return records


def write_records(path: str, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
