"""Usability cost of an attribute set: storage, collection time, instability.

The three dimensions are averaged over a fingerprint dataset and combined
with a strictly positive weight vector into a single point score. Memory
and instability are additive per attribute; collection time accounts for
asynchronous attributes running concurrently with the sequential chain.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dataset import Dataset
from .errors import ConfigError


@dataclass(frozen=True)
class CostWeights:
    """Points per byte, per millisecond, and per changing attribute."""

    memory_per_byte: float = 1.0
    time_per_ms: float = 10.0
    instability_per_change: float = 10_000.0

    def __post_init__(self) -> None:
        for label, value in (
            ("memory_per_byte", self.memory_per_byte),
            ("time_per_ms", self.time_per_ms),
            ("instability_per_change", self.instability_per_change),
        ):
            if not value > 0:
                raise ConfigError(f"cost weight {label} must be strictly positive")

    def combine(self, memory_bytes: float, time_ms: float, instability: float) -> float:
        return (
            self.memory_per_byte * memory_bytes
            + self.time_per_ms * time_ms
            + self.instability_per_change * instability
        )

    @classmethod
    def parse(cls, text: str) -> "CostWeights":
        """Parse the CLI form ``"1,10,10000"``."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ConfigError("weights must be three comma-separated numbers")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"weights {text!r} are not numeric") from None
        return cls(*values)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.memory_per_byte, self.time_per_ms, self.instability_per_change)


@dataclass(frozen=True)
class CostBreakdown:
    memory_bytes: float
    time_ms: float
    instability_changes: float
    total_points: float

    def to_dict(self) -> dict[str, float]:
        return {
            "memory_bytes": self.memory_bytes,
            "time_ms": self.time_ms,
            "instability_changes": self.instability_changes,
            "total_points": self.total_points,
        }


def mem_cost(attrs: Iterable[str], dataset: Dataset) -> float:
    """Average fingerprint size in UTF-8 bytes over the dataset."""
    canon = dataset.catalog.canonical(attrs)
    totals = dataset.attribute_byte_totals
    return sum(totals[a] for a in canon) / len(dataset.observations)


def time_cost(attrs: Iterable[str], dataset: Dataset) -> float:
    """Average collection time in ms; asynchronous attributes overlap.

    Per observation the cost is the maximum of each asynchronous
    attribute's time and the sum of the sequential ones.
    """
    canon = dataset.catalog.canonical(attrs)
    if not canon:
        return 0.0
    times = dataset.attribute_times
    per_obs = np.zeros(len(dataset.observations))
    for a in canon:
        if not dataset.catalog.spec(a).is_async:
            per_obs += times[a]
    for a in canon:
        if dataset.catalog.spec(a).is_async:
            np.maximum(per_obs, times[a], out=per_obs)
    return float(per_obs.mean())


def ins_cost(attrs: Iterable[str], dataset: Dataset) -> float:
    """Average number of attributes changing between consecutive observations."""
    canon = dataset.catalog.canonical(attrs)
    pairs = dataset.consecutive_pair_count
    if pairs == 0:
        raise ConfigError(
            "instability needs at least one pair of consecutive observations"
        )
    changes = dataset.attribute_change_counts
    return sum(changes[a] for a in canon) / pairs


def total_cost(
    attrs: Iterable[str], dataset: Dataset, weights: CostWeights
) -> CostBreakdown:
    canon = dataset.catalog.canonical(attrs)
    memory = mem_cost(canon, dataset)
    time_ms = time_cost(canon, dataset)
    instability = ins_cost(canon, dataset)
    return CostBreakdown(
        memory_bytes=memory,
        time_ms=time_ms,
        instability_changes=instability,
        total_points=weights.combine(memory, time_ms, instability),
    )


@dataclass(frozen=True)
class AttributeCostStats:
    """Singleton costs per attribute plus dimension-wise aggregates."""

    per_attribute: dict[str, CostBreakdown]
    candidate_set: CostBreakdown
    minimum: CostBreakdown
    average: CostBreakdown
    maximum: CostBreakdown

    def to_json(self) -> dict:
        return {
            "per_attribute": {
                name: self.per_attribute[name].to_dict()
                for name in sorted(self.per_attribute)
            },
            "candidate_set": self.candidate_set.to_dict(),
            "minimum": self.minimum.to_dict(),
            "average": self.average.to_dict(),
            "maximum": self.maximum.to_dict(),
        }

    def save_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def save_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["attribute", "memory_bytes", "time_ms",
                 "instability_changes", "total_points"]
            )
            for name in sorted(self.per_attribute):
                b = self.per_attribute[name]
                writer.writerow(
                    [name, b.memory_bytes, b.time_ms,
                     b.instability_changes, b.total_points]
                )
            for label, b in (
                ("<candidate set>", self.candidate_set),
                ("<minimum>", self.minimum),
                ("<average>", self.average),
                ("<maximum>", self.maximum),
            ):
                writer.writerow(
                    [label, b.memory_bytes, b.time_ms,
                     b.instability_changes, b.total_points]
                )


def _dimension_wise(
    breakdowns: Sequence[CostBreakdown], reducer
) -> CostBreakdown:
    return CostBreakdown(
        memory_bytes=reducer(b.memory_bytes for b in breakdowns),
        time_ms=reducer(b.time_ms for b in breakdowns),
        instability_changes=reducer(b.instability_changes for b in breakdowns),
        total_points=reducer(b.total_points for b in breakdowns),
    )


def attribute_cost_stats(dataset: Dataset, weights: CostWeights) -> AttributeCostStats:
    """Singleton cost of every catalog attribute, with min/avg/max aggregates."""
    per_attribute = {
        name: total_cost((name,), dataset, weights) for name in dataset.catalog.names
    }
    singles = list(per_attribute.values())
    count = len(singles)
    return AttributeCostStats(
        per_attribute=per_attribute,
        candidate_set=total_cost(dataset.catalog.names, dataset, weights),
        minimum=_dimension_wise(singles, min),
        average=_dimension_wise(singles, lambda xs: sum(xs) / count),
        maximum=_dimension_wise(singles, max),
    )
