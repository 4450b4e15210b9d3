"""Runtime configuration: defaults, JSON file overlay, backend wiring."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field


@dataclass
class Config:
    seed: int = 0
    # fingerprint params feed morgan/path_fp defaults; kept here so a config
    # file can pin them for a whole run
    morgan_radius: int = 2
    fingerprint_width: int = 2048
    path_max_len: int = 7
    retain_prob: float = 0.05
    candidates_per_turn: int = 5
    backend_kind: str = "retrieval"
    corpus_path: str | None = None
    remote_url: str | None = None
    remote_timeout: float = 10.0
    host: str = "127.0.0.1"
    port: int = 8765
    log_dir: str | None = None
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f for f in cls.__dataclass_fields__ if f != "extras"}
        kwargs = {k: v for k, v in data.items() if k in known}
        extras = {k: v for k, v in data.items() if k not in known}
        return cls(**kwargs, extras=extras)

    def to_dict(self) -> dict:
        data = {k: getattr(self, k) for k in self.__dataclass_fields__
                if k != "extras"}
        data.update(self.extras)
        return data


def load_config(path: str | None = None, seed: int | None = None) -> Config:
    """Defaults, overlaid with a JSON file, overlaid with an explicit seed."""
    if path is None:
        config = Config()
    else:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        config = Config.from_dict(data)
        for key in ("corpus_path", "log_dir"):
            value = getattr(config, key)
            if value is not None and not os.path.exists(value):
                raise FileNotFoundError(f"config {key} does not exist: {value}")
    if seed is not None:
        config.seed = seed
    return config


def make_backend(config: Config, corpus: list[dict] | None = None):
    """Instantiate the configured backend; corpus overrides the config path."""
    from .chat import RemoteBackend, RetrievalBackend
    from .metrics import read_records

    if config.backend_kind == "remote":
        if not config.remote_url:
            raise ValueError("remote backend needs remote_url")
        return RemoteBackend(config.remote_url, timeout=config.remote_timeout)
    if config.backend_kind == "retrieval":
        if corpus is None:
            if not config.corpus_path:
                raise ValueError("retrieval backend needs corpus_path")
            corpus = read_records(config.corpus_path)
        return RetrievalBackend(corpus)
    raise ValueError(f"unknown backend kind: {config.backend_kind!r}")
