"""Per-attribute distances, fingerprint matching, and threshold calibration.

Each value kind maps to one distance: edit distance for text, Jaccard
distance for sets, absolute difference for numbers, and the complement of
the Kronecker delta for categories and dynamic values. A fingerprint
matches when every attribute's distance stays within its threshold;
dynamic attributes must be identical.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
import statistics
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .catalog import AttributeCatalog, AttributeSpec
from .dataset import Dataset
from .errors import ConfigError


class DistanceKind(enum.Enum):
    EDIT_DISTANCE = "edit"
    JACCARD_ON_SETS = "jaccard"
    ABSOLUTE_DIFFERENCE = "absolute"
    KRONECKER_COMPLEMENT = "kronecker"


_KIND_DISTANCE = {
    "text": DistanceKind.EDIT_DISTANCE,
    "set": DistanceKind.JACCARD_ON_SETS,
    "number": DistanceKind.ABSOLUTE_DIFFERENCE,
    "category": DistanceKind.KRONECKER_COMPLEMENT,
    "dynamic": DistanceKind.KRONECKER_COMPLEMENT,
}


def distance_kind_for(spec: AttributeSpec) -> DistanceKind:
    return _KIND_DISTANCE[spec.kind]


def edit_distance(x: str, y: str) -> int:
    """Levenshtein distance (insertions, deletions, substitutions)."""
    if x == y:
        return 0
    if len(x) < len(y):
        x, y = y, x
    previous = list(range(len(y) + 1))
    for i, cx in enumerate(x, start=1):
        current = [i]
        for j, cy in enumerate(y, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (cx != cy),
                )
            )
        previous = current
    return previous[-1]


def _tokens(value: str, separator: str) -> frozenset[str]:
    return frozenset(t for t in value.split(separator) if t)


def jaccard_distance(x: str, y: str, separator: str = ";") -> float:
    """1 minus the Jaccard index of the two token sets; empty sets match."""
    xs, ys = _tokens(x, separator), _tokens(y, separator)
    if not xs and not ys:
        return 0.0
    return 1.0 - len(xs & ys) / len(xs | ys)


def _parse_number(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"value {value!r} is not numeric") from None


def distance(kind: DistanceKind, x: str, y: str, separator: str = ";") -> float:
    if kind is DistanceKind.EDIT_DISTANCE:
        return float(edit_distance(x, y))
    if kind is DistanceKind.JACCARD_ON_SETS:
        return jaccard_distance(x, y, separator)
    if kind is DistanceKind.ABSOLUTE_DIFFERENCE:
        return abs(_parse_number(x) - _parse_number(y))
    return 0.0 if x == y else 1.0


def attr_match(spec: AttributeSpec, stored: str, submitted: str) -> bool:
    """Whether the submitted value is accepted as an evolution of the stored one."""
    if spec.kind == "dynamic":
        return stored == submitted
    try:
        d = distance(distance_kind_for(spec), stored, submitted, spec.set_separator)
    except ValueError:
        # A malformed numeric submission must not crash a verifier.
        return False
    return d <= spec.match_threshold


def fp_match(
    attrs: Sequence[str],
    catalog: AttributeCatalog,
    stored: Sequence[str],
    submitted: Sequence[str],
) -> bool:
    """Conjunction of per-attribute matches; vacuously true on no attributes."""
    if len(stored) != len(attrs) or len(submitted) != len(attrs):
        raise ValueError("value tuples do not cover the attribute set")
    return all(
        attr_match(catalog.spec(a), f, g)
        for a, f, g in zip(attrs, stored, submitted)
    )


# ---------------------------------------------------------------------------
# Threshold calibration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationReport:
    """Per-attribute distance thresholds learned from a dataset.

    ``window_thresholds`` holds one max-margin threshold per window;
    ``thresholds`` averages them per attribute.
    """

    windows: int
    window_thresholds: dict[str, tuple[float, ...]]
    thresholds: dict[str, float]

    def to_json(self) -> dict:
        return {
            "windows": self.windows,
            "attributes": {
                name: {
                    "window_thresholds": list(self.window_thresholds[name]),
                    "threshold": self.thresholds[name],
                }
                for name in sorted(self.thresholds)
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def apply(self, catalog: AttributeCatalog) -> AttributeCatalog:
        """Copy of the catalog with the averaged thresholds written in.

        Category and dynamic attributes only support exact matching, so
        their thresholds are clamped below 1 (a learned threshold of 1
        would mean "accept anything", which the catalog cannot express).
        """
        clamped = {}
        for name, value in self.thresholds.items():
            if catalog.spec(name).kind in ("category", "dynamic"):
                value = min(value, 0.5)
            clamped[name] = value
        return catalog.with_thresholds(clamped)


def max_margin_threshold(
    positives: Sequence[float], negatives: Sequence[float]
) -> float:
    """1D separator: accept distances <= t, reject above.

    Picks the threshold minimizing misclassifications, then maximizing the
    margin, then the smaller threshold. The positive class should match
    (distance within t), the negative class should not.
    """
    if not positives or not negatives:
        raise ConfigError("both distance classes must be non-empty")
    pos = sorted(positives)
    neg = sorted(negatives)
    values = sorted(set(pos) | set(neg))

    best: tuple[float, float, float] | None = None  # (errors, -margin, t)
    for i in range(len(values) + 1):
        if i == 0:
            if values[0] <= 0:
                continue  # thresholds are non-negative
            t = values[0] / 2.0
            margin = t
        elif i == len(values):
            t = values[-1]
            margin = 0.0
        else:
            lo, hi = values[i - 1], values[i]
            t = (lo + hi) / 2.0
            margin = (hi - lo) / 2.0
        errors = (len(pos) - bisect_right(pos, t)) + bisect_right(neg, t)
        key = (float(errors), -margin, t)
        if best is None or key < best:
            best = key
    assert best is not None
    return best[2]


def _window_split(dataset: Dataset, windows: int) -> list[list[str]]:
    groups: list[list[str]] = [[] for _ in range(windows)]
    for i, browser in enumerate(dataset.browser_ids):
        groups[i % windows].append(browser)
    return groups


def _derived_rng(seed: int, window: int, attribute: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{window}:{attribute}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def calibrate_thresholds(
    dataset: Dataset,
    windows: int,
    *,
    seed: int = 0,
    negative_cap: int = 1000,
) -> CalibrationReport:
    """Learn per-attribute thresholds from evolution vs. cross-browser distances.

    Browsers are split round-robin into ``windows`` samples. Within each
    window the positive class holds distances between consecutive
    fingerprints of the same browser, the negative class distances between
    randomly paired observations of different browsers (seeded, capped at
    ``negative_cap`` per window). Per-window thresholds are max-margin
    separators; the final threshold is their mean.
    """
    if windows < 1:
        raise ConfigError("windows must be >= 1")
    catalog = dataset.catalog
    groups = _window_split(dataset, windows)

    window_thresholds: dict[str, list[float]] = {a: [] for a in catalog.names}
    for w, browsers in enumerate(groups):
        pairs = [
            (earlier, later)
            for b in browsers
            for earlier, later in _browser_pairs(dataset, b)
        ]
        if not pairs:
            raise ConfigError(
                f"window {w}: no consecutive same-browser fingerprints"
            )
        if len(browsers) < 2:
            raise ConfigError(f"window {w}: needs at least two browsers")
        for attr in catalog.attributes:
            kind = distance_kind_for(attr)
            positives = [
                distance(kind, earlier.values[attr.name], later.values[attr.name],
                         attr.set_separator)
                for earlier, later in pairs
            ]
            rng = _derived_rng(seed, w, attr.name)
            negatives = _negative_distances(
                dataset, browsers, attr, min(len(positives), negative_cap), rng
            )
            if not negatives:
                raise ConfigError(
                    f"window {w}: no cross-browser pairs for {attr.name!r}"
                )
            window_thresholds[attr.name].append(
                max_margin_threshold(positives, negatives)
            )

    averages = {
        name: statistics.fmean(values)
        for name, values in window_thresholds.items()
    }
    return CalibrationReport(
        windows=windows,
        window_thresholds={
            name: tuple(values) for name, values in window_thresholds.items()
        },
        thresholds=averages,
    )


def _browser_pairs(dataset: Dataset, browser_id: str):
    obs = dataset.browser_observations(browser_id)
    return zip(obs, obs[1:])


def _negative_distances(
    dataset: Dataset,
    browsers: list[str],
    attr: AttributeSpec,
    count: int,
    rng: random.Random,
) -> list[float]:
    kind = distance_kind_for(attr)
    out: list[float] = []
    for _ in range(count):
        first, second = rng.sample(browsers, 2)
        x = rng.choice(dataset.browser_observations(first)).values[attr.name]
        y = rng.choice(dataset.browser_observations(second)).values[attr.name]
        out.append(distance(kind, x, y, attr.set_separator))
    return out
