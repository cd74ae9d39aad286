"""Flat key=value experiment configuration.

One ``key = value`` pair per line, ``#`` comments allowed. Relative paths
are taken relative to the working directory. Unknown keys are rejected so
typos fail loudly.
"""

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

NEURAL_SYSTEMS = ("encoder_decoder", "context_qg", "context_qg_copy")
RETRIEVAL_SYSTEMS = ("select", "r_transe", "r_transe_copy", "ir", "ir_copy")
ALL_SYSTEMS = RETRIEVAL_SYSTEMS + NEURAL_SYSTEMS


def _bool(text):
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class ExperimentConfig:
    # input files
    questions: str = None
    triples: str = None
    labels: str = None
    types: str = None
    sentences: str = None
    first_sentences: str = None
    dep_paths: str = None
    word_vectors: str = None
    # artifacts
    dataset: str = "dataset.jsonl"
    out_dir: str = "out"
    # global
    seed: int = 0
    systems: str = "context_qg_copy,encoder_decoder"
    # folds
    key_kind: str = "predicate"
    n_folds: int = 10
    min_group: int = 50
    ratio_train: float = 0.7
    ratio_valid: float = 0.1
    ratio_test: float = 0.2
    # KB embeddings
    kb_dim: int = 200
    transe_epochs: int = 100
    transe_margin: float = 1.0
    transe_lr: float = 0.01
    # model sizes
    word_dim: int = 100
    ctx_dim: int = 200
    dec_dim: int = 500
    vocab_size: int = 30000
    max_decode_len: int = 30
    beam: int = 1
    # training
    epochs: int = 20
    batch_size: int = 200
    learning_rate: float = 0.001
    lr_decay: float = 0.99
    min_learning_rate: float = 1e-5
    grad_clip: float = 0.1
    # human eval
    human_eval_n: int = 100

    _PATH_FIELDS = ("questions", "triples", "labels", "types", "sentences",
                    "first_sentences", "dep_paths", "word_vectors", "dataset", "out_dir")

    def system_list(self):
        names = [s.strip() for s in self.systems.split(",") if s.strip()]
        unknown = [s for s in names if s not in ALL_SYSTEMS]
        if unknown:
            raise ConfigError(
                f"unknown systems {unknown}; known: {', '.join(ALL_SYSTEMS)}")
        if not names:
            raise ConfigError("no systems requested")
        return names

    def ratios(self):
        return (self.ratio_train, self.ratio_valid, self.ratio_test)

    def require(self, *names):
        """Fail with the missing path named, before any work starts."""
        for name in names:
            value = getattr(self, name)
            if value is None:
                raise ConfigError(f"config is missing required key {name!r}")
            if name in self._PATH_FIELDS and name != "out_dir" and not Path(value).exists():
                raise ConfigError(f"config key {name!r}: no such file: {value}")
        return self

    def to_jsonable(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_PARSERS = {str: str, int: int, float: float, bool: _bool,
            "str": str, "int": int, "float": float, "bool": _bool}


def parse_config(path, overrides=None):
    """Parse a config file; ``overrides`` wins over file values."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"no such config file: {path}")
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _PARSERS[_FIELD_TYPES[key]](raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
