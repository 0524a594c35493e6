"""Runtime configuration with precedence flag > environment > file > default.

Environment variables use the TUG_ prefix (TUG_PORT, TUG_ALPHA, ...); the
optional config file is a flat JSON object with the same field names.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from importlib import resources

ENV_PREFIX = "TUG_"


def default_lexicon_path() -> str:
    return str(resources.files("tug.data").joinpath("lexicon.tsv"))


@dataclass
class Config:
    lexicon: str = ""                 # empty -> packaged seed lexicon
    embeddings: str = ""
    log_dir: str = "logs"
    params: str = ""
    host: str = "127.0.0.1"
    port: int = 8765
    selection_timeout: float = 120.0
    share_timeout: float = 60.0
    queue_timeout: float = 600.0
    drain_timeout: float = 30.0
    max_difficulty: int = 3
    scorer: str = "oracle"
    seed: int = 0
    alpha: float = 0.1
    lr: float = 1e-3
    batch_size: int = 32
    patience: int = 10
    max_epochs: int = 200
    llm_endpoint: str = ""
    llm_model: str = ""
    llm_api_key: str = ""

    def lexicon_path(self) -> str:
        return self.lexicon or default_lexicon_path()


def _coerce(raw: str, kind):
    if kind is bool:
        return raw.lower() in ("1", "true", "yes", "on")
    return kind(raw)


def load_config(flags: dict | None = None, config_file: str | None = None,
                env: dict | None = None) -> Config:
    """Merge the precedence chain into one Config."""
    env = os.environ if env is None else env
    values: dict = {}
    if config_file:
        with open(config_file, encoding="utf-8") as fh:
            file_values = json.load(fh)
        if not isinstance(file_values, dict):
            raise ValueError(f"{config_file}: config file must hold a JSON object")
        values.update(file_values)
    for f in fields(Config):
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            values[f.name] = _coerce(raw, f.type if isinstance(f.type, type) else type(getattr(Config, f.name)))
    if flags:
        values.update({k: v for k, v in flags.items() if v is not None})
    known = {f.name for f in fields(Config)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return Config(**values)
