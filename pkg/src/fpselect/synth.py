"""Deterministic synthetic fingerprint datasets.

The generator exists so the selection machinery can be exercised at desk
scale: attribute value frequencies follow a Zipf-like rank law, values
drift between observations with a configurable probability, and an
attribute may be declared a deterministic copy of another to reproduce
fully correlated pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import AttributeCatalog, AttributeSpec
from .dataset import Dataset, Observation
from .errors import ConfigError, SchemaError


@dataclass(frozen=True)
class SynthAttribute:
    """Generator parameters for one attribute.

    ``copy_of`` turns the attribute into a deterministic function of the
    named source attribute: its value pool is indexed by the source's
    current value, so its conditional entropy given the source is zero.
    For copies, ``cardinality``, ``zipf_skew``, and ``change_prob`` are
    inherited from the source.
    """

    name: str
    cardinality: int = 2
    zipf_skew: float = 1.0
    change_prob: float = 0.0
    mean_collect_ms: float = 0.0
    value_bytes: int = 4
    kind: str = "category"
    is_async: bool = False
    copy_of: str | None = None

    def __post_init__(self) -> None:
        if self.copy_of is None and self.cardinality < 1:
            raise ConfigError(f"attribute {self.name!r}: cardinality must be >= 1")
        if self.zipf_skew < 0:
            raise ConfigError(f"attribute {self.name!r}: zipf_skew must be >= 0")
        if not 0.0 <= self.change_prob <= 1.0:
            raise ConfigError(f"attribute {self.name!r}: change_prob outside [0, 1]")
        if self.mean_collect_ms < 0:
            raise ConfigError(f"attribute {self.name!r}: negative collection time")
        if self.value_bytes < 1:
            raise ConfigError(f"attribute {self.name!r}: value_bytes must be >= 1")


@dataclass(frozen=True)
class SynthConfig:
    browsers: int
    observations_per_browser: int
    attributes: tuple[SynthAttribute, ...]

    def __post_init__(self) -> None:
        if self.browsers < 1:
            raise ConfigError("browsers must be >= 1")
        if self.observations_per_browser < 1:
            raise ConfigError("observations_per_browser must be >= 1")
        if not self.attributes:
            raise ConfigError("at least one attribute is required")
        names = {a.name for a in self.attributes}
        if len(names) != len(self.attributes):
            raise ConfigError("duplicate attribute names in generator config")
        for a in self.attributes:
            if a.copy_of is None:
                continue
            source = next(
                (s for s in self.attributes if s.name == a.copy_of), None
            )
            if source is None:
                raise ConfigError(
                    f"attribute {a.name!r} copies unknown attribute {a.copy_of!r}"
                )
            if source.copy_of is not None:
                raise ConfigError(
                    f"attribute {a.name!r} must copy a non-copy attribute"
                )


def load_synth_config(path: str | Path) -> SynthConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: generator config must be a JSON object")
    try:
        attributes = tuple(
            SynthAttribute(**entry) for entry in raw.get("attributes", [])
        )
        return SynthConfig(
            browsers=int(raw["browsers"]),
            observations_per_browser=int(raw["observations_per_browser"]),
            attributes=attributes,
        )
    except KeyError as exc:
        raise SchemaError(f"{path}: missing field {exc.args[0]!r}") from exc
    except TypeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def synth_catalog(config: SynthConfig) -> AttributeCatalog:
    """The catalog describing a generated dataset (exact matching)."""
    return AttributeCatalog(
        tuple(
            AttributeSpec(
                name=a.name,
                kind=a.kind,
                is_async=a.is_async,
                match_threshold=0.0,
            )
            for a in config.attributes
        )
    )


def _value_pool(attr: SynthAttribute, cardinality: int) -> list[str]:
    # Zero-padded decimal values: fixed byte width, lexicographic order
    # agrees with rank order (rank 0 is the most probable value).
    width = max(attr.value_bytes, len(str(max(cardinality - 1, 0))))
    return [str(i).zfill(width) for i in range(cardinality)]


def _rank_weights(cardinality: int, skew: float) -> np.ndarray:
    ranks = np.arange(1, cardinality + 1, dtype=float)
    weights = ranks ** -skew
    return weights / weights.sum()


def synthesize(config: SynthConfig, seed: int) -> Dataset:
    """Generate a dataset; identical (config, seed) pairs yield identical data."""
    rng = np.random.default_rng(seed)
    sources = [a for a in config.attributes if a.copy_of is None]
    copies = [a for a in config.attributes if a.copy_of is not None]
    by_name = {a.name: a for a in config.attributes}

    pools = {a.name: _value_pool(a, a.cardinality) for a in sources}
    for c in copies:
        pools[c.name] = _value_pool(c, by_name[c.copy_of].cardinality)
    weights = {a.name: _rank_weights(a.cardinality, a.zipf_skew) for a in sources}

    observations: list[Observation] = []
    for b in range(config.browsers):
        browser_id = f"b{b:05d}"
        state = {
            a.name: int(rng.choice(a.cardinality, p=weights[a.name]))
            for a in sources
        }
        for t in range(config.observations_per_browser):
            if t > 0:
                for a in sources:
                    if a.cardinality < 2 or a.change_prob == 0.0:
                        continue
                    if rng.random() < a.change_prob:
                        state[a.name] = _draw_different(
                            rng, weights[a.name], state[a.name]
                        )
            values: dict[str, str] = {}
            collect: dict[str, float] = {}
            for attr in config.attributes:
                idx = state[attr.copy_of] if attr.copy_of else state[attr.name]
                values[attr.name] = pools[attr.name][idx]
                if attr.mean_collect_ms > 0:
                    collect[attr.name] = float(
                        rng.uniform(0.5, 1.5) * attr.mean_collect_ms
                    )
                else:
                    collect[attr.name] = 0.0
            observations.append(
                Observation(
                    browser_id=browser_id, seq=t, values=values, collect_ms=collect
                )
            )
    return Dataset(synth_catalog(config), tuple(observations))


def _draw_different(rng: np.random.Generator, weights: np.ndarray, current: int) -> int:
    adjusted = weights.copy()
    adjusted[current] = 0.0
    adjusted /= adjusted.sum()
    return int(rng.choice(len(weights), p=adjusted))
