"""Experiment configuration: a flat key-value file wiring data, model, optimizer.

Format: one ``section.key = value`` per line, ``#`` comments and blank lines
allowed.  Unknown keys are rejected so typos fail loudly.  Relative paths are
resolved against the config file's directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import BadConfigError, IoFailureError
from .models import ModelConfig
from .models.config import KINDS
from .optim import MINIMIZERS, OptConfig

_BOOL = {"true": True, "false": False}


def _fractions(raw: str) -> tuple[float, float, float]:
    parts = raw.split()
    if len(parts) != 3:
        raise ValueError("need three fractions")
    return tuple(float(p) for p in parts)  # type: ignore[return-value]


# key -> (parser, default); None default means the key is required.
SCHEMA = {
    "model.kind": (str, None),
    "model.cell": (str, "gru"),
    "model.hidden": (int, 256),
    "model.embed_dim": (int, 300),
    "model.heads": (int, 10),
    "model.enc_blocks": (int, 8),
    "model.dec_blocks": (int, 8),
    "model.ffn_depth": (int, 6),
    "model.ffn_width": (int, 0),
    "model.coverage_weight": (float, 1.0),
    "model.dropout": (float, 0.0),
    "optimizer.algorithm": (str, None),
    "optimizer.population": (int, 20),
    "optimizer.iterations": (int, 200),
    "optimizer.lo": (float, -1.0),
    "optimizer.hi": (float, 1.0),
    "optimizer.workers": (int, 1),
    "optimizer.inertia": (float, 0.729),
    "optimizer.cognitive": (float, 1.49445),
    "optimizer.social": (float, 1.49445),
    "optimizer.spiral_b": (float, 1.0),
    "optimizer.archive_size": (int, 10),
    "optimizer.locality": (float, 0.1),
    "optimizer.deviation": (float, 0.85),
    "data.stories": (str, None),
    "data.fractions": (_fractions, (0.92, 0.04, 0.04)),
    "data.split_seed": (int, 0),
    "data.min_count": (int, 2),
    "data.src_maxlen": (int, 64),
    "data.tgt_maxlen": (int, 16),
    "data.batch_size": (int, 8),
    "data.gazetteer": (str, ""),
    "data.embeddings": (str, ""),
    "data.embed_scale": (float, 0.5),
    "out.dir": (str, "run"),
    "out.params": (str, ""),
    "out.trace": (str, ""),
    "out.report": (str, ""),
    "out.vocab": (str, ""),
}


@dataclass
class ExperimentConfig:
    values: dict
    base_dir: Path

    def __getitem__(self, key: str):
        return self.values[key]

    def path(self, key: str) -> Path | None:
        raw = self.values[key]
        if not raw:
            return None
        return (self.base_dir / raw).resolve() if not Path(raw).is_absolute() else Path(raw)

    def out_path(self, key: str, default_name: str) -> Path:
        explicit = self.path(f"out.{key}")
        if explicit is not None:
            return explicit
        return self.path("out.dir") / default_name

    def model_config(self, vocab_size: int) -> ModelConfig:
        v = self.values
        return ModelConfig(
            kind=v["model.kind"], vocab_size=vocab_size, cell=v["model.cell"],
            hidden=v["model.hidden"], embed_dim=v["model.embed_dim"], heads=v["model.heads"],
            enc_blocks=v["model.enc_blocks"], dec_blocks=v["model.dec_blocks"],
            ffn_depth=v["model.ffn_depth"], ffn_width=v["model.ffn_width"],
            src_maxlen=v["data.src_maxlen"], tgt_maxlen=v["data.tgt_maxlen"],
            coverage_weight=v["model.coverage_weight"], dropout=v["model.dropout"],
        )

    def opt_config(self, seed: int) -> OptConfig:
        v = self.values
        return OptConfig(
            population=v["optimizer.population"], iterations=v["optimizer.iterations"],
            bounds=(v["optimizer.lo"], v["optimizer.hi"]), seed=seed,
            workers=v["optimizer.workers"], inertia=v["optimizer.inertia"],
            cognitive=v["optimizer.cognitive"], social=v["optimizer.social"],
            spiral_b=v["optimizer.spiral_b"], archive_size=v["optimizer.archive_size"],
            locality=v["optimizer.locality"], deviation=v["optimizer.deviation"],
        )


def parse_experiment(text: str, base_dir: Path) -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, eq, value = stripped.partition("=")
        if not eq:
            raise BadConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key not in SCHEMA:
            raise BadConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise BadConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()

    values: dict = {}
    for key, (parser, default) in SCHEMA.items():
        if key in raw:
            try:
                values[key] = parser(raw[key])
            except ValueError as exc:
                raise BadConfigError(f"bad value for {key}: {raw[key]!r} ({exc})") from exc
        elif default is None:
            raise BadConfigError(f"missing required key {key!r}")
        else:
            values[key] = default

    if values["model.kind"] not in KINDS:
        raise BadConfigError(f"model.kind must be one of {KINDS}")
    if values["optimizer.algorithm"] not in MINIMIZERS:
        raise BadConfigError(
            f"optimizer.algorithm must be one of {tuple(MINIMIZERS)} "
            f"(gradient methods are unsupported)")
    return ExperimentConfig(values=values, base_dir=base_dir)


def load_experiment(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise IoFailureError(f"no config file: {path}")
    exp = parse_experiment(path.read_text(encoding="utf-8"), path.parent.resolve())
    stories = exp.path("data.stories")
    if stories is None or not stories.exists():
        raise BadConfigError(f"data.stories path does not exist: {stories}")
    for key in ("data.gazetteer", "data.embeddings"):
        p = exp.path(key)
        if p is not None and not p.exists():
            raise BadConfigError(f"{key} path does not exist: {p}")
    return exp
