"""Conversational molecular design toolkit.

Parsing and canonicalization of a SMILES subset, molecular fingerprints,
generation/understanding evaluation metrics, multi-turn dialogue dataset
construction, pre-training task records, a dictionary entity recognizer,
and a chat engine with retrieval and remote backends.
"""
from .canon import canonical, write_smiles
from .chat import (BackendError, Candidate, CandidateSet, ChatSession,
                   RemoteBackend, RetrievalBackend, SessionStore,
                   compose_generation_query, generate_turn, session_to_jsonl,
                   understand_turn)
from .config import Config, load_config, make_backend
from .dialogue import (Dialogue, DialogueTurn, BuildStats, build_dataset,
                       build_dialogue, build_turns, replace_synonyms,
                       select_intermediate, split_sentences)
from .fingerprints import (Fingerprint, morgan, path_fp, structural_keys,
                           tanimoto)
from .graph import Atom, Bond, BondOrder, ErrorKind, MolecularGraph, SmilesError
from .knowledge import (PROPERTY_TYPES, TaskRecord, dual_augment,
                        make_mapping_records, make_name_records, make_prompt,
                        make_property_records, make_spatial_records,
                        span_corrupt, tokenize_smiles)
from .lexicon import EntityMention, Lexicon, load_kb
from .metrics import (EvalReport, bleu, corpus_bleu, evaluate_generation,
                      evaluate_understanding, exact_match, hit_at_k,
                      levenshtein, read_records, rouge_l, rouge_n,
                      write_records)
from .parser import is_valid, parse

__version__ = "0.1.0"

__all__ = [
    "Atom", "BackendError", "Bond", "BondOrder", "BuildStats", "Candidate",
    "CandidateSet", "ChatSession", "Config", "Dialogue", "DialogueTurn",
    "EntityMention", "ErrorKind", "EvalReport", "Fingerprint", "Lexicon",
    "MolecularGraph", "PROPERTY_TYPES", "RemoteBackend", "RetrievalBackend",
    "SessionStore", "SmilesError", "TaskRecord", "bleu", "build_dataset",
    "build_dialogue", "build_turns", "canonical", "compose_generation_query",
    "corpus_bleu", "dual_augment", "evaluate_generation",
    "evaluate_understanding", "exact_match", "generate_turn", "hit_at_k",
    "is_valid", "levenshtein", "load_config", "load_kb", "make_backend",
    "make_mapping_records", "make_name_records", "make_prompt",
    "make_property_records", "make_spatial_records", "morgan", "parse",
    "path_fp", "read_records", "replace_synonyms", "rouge_l", "rouge_n",
    "select_intermediate", "session_to_jsonl", "span_corrupt",
    "write_records",
    "split_sentences", "structural_keys", "tanimoto", "tokenize_smiles",
    "understand_turn", "write_smiles",
]
