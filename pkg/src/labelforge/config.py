"""Run configuration: defaults, optional config file, CLI overrides.

Precedence, lowest to highest: built-in defaults, then a TOML or JSON file
given via --config, then explicit command-line flags. Worker count can also
come from the LABELFORGE_WORKERS environment variable (a flag still wins).
Every command that writes an output directory echoes its effective
configuration there as config.json, so a run can be reproduced from its
outputs alone.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .errors import MissingArtifact, ParseError
from .proposals import DRIVABLE_CLASS
from .storage import atomic_write_json

__all__ = [
    "PipelineConfig",
    "load_config_file",
    "build_config",
    "resolve_workers",
    "write_effective_config",
]

WORKERS_ENV = "LABELFORGE_WORKERS"


@dataclass
class PipelineConfig:
    """Knobs and paths shared by the pipeline commands.

    Path fields stay None until a command that needs them resolves them;
    require_paths() is the startup validation.
    """

    top_k: int = 10
    drivable_class: str = DRIVABLE_CLASS
    apply_topk_at_inference: bool = True
    seed: int = 0
    workers: int = 1
    manifest: Optional[str] = None
    proposals_root: Optional[str] = None
    classifications_root: Optional[str] = None
    gt_root: Optional[str] = None
    out_root: Optional[str] = None

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ParseError(f"top_k must be >= 1, got {self.top_k}")
        if self.workers < 1:
            raise ParseError(f"workers must be >= 1, got {self.workers}")
        if not self.drivable_class:
            raise ParseError("drivable_class must be non-empty")

    def require_paths(self, *names: str) -> "PipelineConfig":
        """Fail fast when a command is missing paths; inputs must exist."""
        for name in names:
            value = getattr(self, name)
            if not value:
                raise ParseError(f"missing required path: {name.replace('_', '-')}")
            if name != "out_root" and not os.path.exists(value):
                raise MissingArtifact(f"{name.replace('_', '-')} does not exist: {value}")
        return self


def load_config_file(path: str) -> dict:
    """Read a .toml or .json config into a plain dict of known keys."""
    known = {f.name for f in fields(PipelineConfig)}
    try:
        if path.endswith(".toml"):
            import tomli

            with open(path, "rb") as fh:
                raw = tomli.load(fh)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ParseError(f"config file not found: {path}") from exc
    except Exception as exc:
        raise ParseError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config root must be a table/object")
    unknown = set(raw) - known
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    return raw


def resolve_workers(flag_value: int | None) -> Optional[int]:
    """Worker count override: explicit flag beats LABELFORGE_WORKERS.

    Returns None when neither is set, so a config-file value (or the
    default of 1) stays in effect.
    """
    if flag_value is not None:
        return flag_value
    env = os.environ.get(WORKERS_ENV)
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ParseError(f"{WORKERS_ENV} must be an integer, got {env!r}") from exc
        if n < 1:
            raise ParseError(f"{WORKERS_ENV} must be >= 1, got {n}")
        return n
    return None


def build_config(file_path: str | None = None, **overrides) -> PipelineConfig:
    """Merge defaults, optional config file, and non-None overrides."""
    merged: dict = {}
    if file_path:
        merged.update(load_config_file(file_path))
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    try:
        return PipelineConfig(**merged)
    except TypeError as exc:
        raise ParseError(f"bad config: {exc}") from exc


def write_effective_config(config: PipelineConfig, out_dir: str, extra: dict | None = None) -> None:
    obj = dict(sorted(asdict(config).items()))
    if extra:
        obj.update(sorted(extra.items()))
    atomic_write_json(os.path.join(out_dir, "config.json"), obj)
