"""Run manifests: flat ``key = value`` text files with ``#`` comments.

Every key corresponds to a :class:`RunManifest` field. Relative data paths
are resolved against the manifest's directory. A copy with absolute paths is
stored in every run directory, which is enough to reproduce that run.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields

from lhcn.citation import CITED_FIRST, CITING_FIRST, SplitSpec
from lhcn.errors import DataFileError, ParseError, ValidationError
from lhcn.gcn import TrainConfig

PATH_KEYS = ("content", "cites", "incidence", "output_dir")
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass
class RunManifest:
    content: str = ""
    cites: str = ""
    incidence: str = ""
    cites_order: str = CITED_FIRST
    dedup: bool = True
    singleton_completion: bool = True
    train_fraction: float = 0.8
    split_seed: int = 0
    hidden1: int = 32
    hidden2: int = 16
    epochs: int = 200
    lr: float = 0.01
    lr_halving_period: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    leaky_slope: float = 0.01
    init_seed: int = 0
    head: bool = True
    loss: str = "sum"
    dropout: float = 0.0
    weight_decay: float = 0.0
    dtype: str = "float64"
    output_dir: str = "runs"
    name: str = "run"

    def train_config(self) -> TrainConfig:
        return TrainConfig.from_dict(asdict(self))

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.split_seed)

    def validate(self, check_files: bool = True) -> RunManifest:
        self.train_config()
        self.split_spec()
        if self.cites_order not in (CITED_FIRST, CITING_FIRST):
            raise ValidationError(f"cites_order must be {CITED_FIRST} or {CITING_FIRST}")
        if not self.content:
            raise ValidationError("manifest needs a 'content' path")
        if bool(self.cites) == bool(self.incidence):
            raise ValidationError("manifest needs exactly one of 'cites' or 'incidence'")
        if check_files:
            for key in ("content", "cites", "incidence"):
                path = getattr(self, key)
                if path and not os.path.isfile(path):
                    raise DataFileError(path)
        return self

    def to_text(self) -> str:
        lines = ["# lhcn run manifest"]
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def replace(self, **changes) -> RunManifest:
        d = asdict(self)
        d.update(changes)
        return RunManifest(**d)


_FIELD_TYPES = {f.name: f.type for f in fields(RunManifest)}


def coerce(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ValidationError(f"unknown manifest key {key!r}")
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if kind in ("bool", bool):
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
    except ValueError:
        raise ValidationError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def parse_manifest_text(text: str, source: str = "<manifest>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError("expected 'key = value'", source, lineno)
        key = key.strip()
        try:
            values[key] = coerce(key, value)
        except ValidationError as exc:
            raise ParseError(str(exc), source, lineno) from None
    return values


def load_manifest(path, overrides: dict | None = None) -> RunManifest:
    """Read ``path`` and apply ``overrides`` (already typed) on top."""
    if not os.path.isfile(path):
        raise DataFileError(path)
    with open(path, encoding="utf-8") as fh:
        values = parse_manifest_text(fh.read(), str(path))
    base = os.path.dirname(os.path.abspath(path))
    for key in PATH_KEYS:
        if values.get(key):
            values[key] = os.path.normpath(os.path.join(base, values[key]))
    values.update(overrides or {})
    return RunManifest(**values)


def write_manifest(manifest: RunManifest, path) -> None:
    resolved = manifest.replace(
        **{k: os.path.abspath(getattr(manifest, k)) for k in PATH_KEYS if getattr(manifest, k)}
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(resolved.to_text())
