"""Layered configuration: defaults < config file < environment < request.

The config file is JSON with one object per section; environment variables
are prefixed MODCOACH_, e.g. MODCOACH_MINING_MIN_SUPPORT_RATIO=0.1 or
MODCOACH_THRESHOLDS_PITCH_RATIO=1.4. Per-request overrides are applied by
the service handlers on top of this.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Mapping, Optional

from .errors import ValidationError
from .labeling import ThresholdConfig
from .mining import MiningConfig
from .semsearch import (
    DEFAULT_DIM,
    DEFAULT_K,
    DEFAULT_LEAF_CAPACITY,
    DEFAULT_NUM_TREES,
    DEFAULT_SEED,
)

ENV_PREFIX = "MODCOACH_"


@dataclass(frozen=True)
class RetrievalConfig:
    dim: int = DEFAULT_DIM
    num_trees: int = DEFAULT_NUM_TREES
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY
    seed: int = DEFAULT_SEED
    k: int = DEFAULT_K
    k_table: int = 20
    search_budget: Optional[int] = None


@dataclass(frozen=True)
class AlignScoreConfig:
    match: int = 2
    mismatch: int = -1
    gap: int = -1


@dataclass(frozen=True)
class ServiceConfig:
    corpus_path: Optional[str] = None
    index_path: Optional[str] = None
    max_upload_bytes: int = 50 * 1024 * 1024
    session_ttl_seconds: int = 3600
    admin_token: Optional[str] = None


@dataclass(frozen=True)
class AppConfig:
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    mining: MiningConfig = field(default_factory=MiningConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    align: AlignScoreConfig = field(default_factory=AlignScoreConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)


_SECTIONS = {
    "thresholds": ThresholdConfig,
    "mining": MiningConfig,
    "retrieval": RetrievalConfig,
    "align": AlignScoreConfig,
    "service": ServiceConfig,
}


def load_config(path: Optional[str | Path] = None,
                env: Optional[Mapping[str, str]] = None) -> AppConfig:
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path}: {exc}") from exc
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ValidationError(f"unknown config sections: {sorted(unknown)}")

    sections = {}
    for name, cls in _SECTIONS.items():
        values = dict(data.get(name, {}))
        values.update(_env_overrides(env, name, cls))
        try:
            sections[name] = cls(**values)
        except TypeError as exc:
            raise ValidationError(f"config section {name}: {exc}") from exc
    return AppConfig(**sections)


def _env_overrides(env: Mapping[str, str], section: str, cls) -> dict:
    out = {}
    for f in fields(cls):
        key = f"{ENV_PREFIX}{section.upper()}_{f.name.upper()}"
        if key not in env:
            continue
        raw = env[key]
        if f.type in ("int", "Optional[int]", int):
            out[f.name] = int(raw)
        elif f.type in ("float", float):
            out[f.name] = float(raw)
        else:
            out[f.name] = raw
    return out


def with_request_overrides(cfg: AppConfig, *,
                           thresholds: Optional[dict] = None,
                           min_support: Optional[float] = None,
                           max_n: Optional[int] = None,
                           k: Optional[int] = None,
                           k_table: Optional[int] = None,
                           search_budget: Optional[int] = None) -> AppConfig:
    """Apply per-request knobs on top of the loaded config."""
    out = cfg
    if thresholds:
        merged = {**cfg.thresholds.to_dict(), **thresholds}
        out = replace(out, thresholds=ThresholdConfig.from_dict(merged))
    if min_support is not None or max_n is not None:
        out = replace(out, mining=MiningConfig(
            min_support_ratio=(min_support if min_support is not None
                               else cfg.mining.min_support_ratio),
            max_n=max_n if max_n is not None else cfg.mining.max_n))
    retrieval_changes = {}
    if k is not None:
        retrieval_changes["k"] = k
    if k_table is not None:
        retrieval_changes["k_table"] = k_table
    if search_budget is not None:
        retrieval_changes["search_budget"] = search_budget
    if retrieval_changes:
        out = replace(out, retrieval=replace(cfg.retrieval, **retrieval_changes))
    return out
