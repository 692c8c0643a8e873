"""Dictionary-attacker model and the impersonated-user measure.

An attacker is a probability mass function over full fingerprints plus a
submission budget. Against an attribute set the attacker submits the
budgeted number of most probable projected fingerprints; a user is
impersonated when any submission matches their stored fingerprint under
the per-attribute matching functions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .catalog import AttributeCatalog
from .dataset import Dataset, Pmf, ValueTuple, pmf, project
from .errors import ConfigError, SchemaError
from .matching import fp_match

UserMapping = Mapping[str, ValueTuple]


@dataclass(frozen=True)
class AttackerInstance:
    """Attacker knowledge (a PMF over full fingerprints) and a budget."""

    pmf: Pmf
    beta: int
    knowledge: str = "population"

    def __post_init__(self) -> None:
        if self.beta < 1:
            raise ConfigError("submission budget beta must be >= 1")


@dataclass(frozen=True)
class Dictionary:
    """The attacker's submissions for one attribute set, most probable first.

    Ties at equal probability break lexicographically on the value tuple,
    so dictionaries are reproducible and budget prefixes are stable.
    """

    attrs: tuple[str, ...]
    entries: tuple[ValueTuple, ...]
    probabilities: tuple[float, ...]


def population_attacker(dataset: Dataset, beta: int) -> AttackerInstance:
    """The strongest modeled attacker: knows the defended population's PMF."""
    return AttackerInstance(
        pmf=pmf(dataset, dataset.catalog.names), beta=beta, knowledge="population"
    )


def uniform_attacker(
    dataset: Dataset, beta: int, *, max_support: int = 200_000
) -> AttackerInstance:
    """The weakest attacker: uniform over the observed value domains.

    The support is the Cartesian product of each attribute's observed
    values, which grows multiplicatively; ``max_support`` guards against
    accidental blow-ups.
    """
    names = dataset.catalog.names
    domains: list[list[str]] = []
    size = 1
    for index in range(len(names)):
        seen = sorted({fp[index] for fp in dataset.user_mapping.values()})
        domains.append(seen)
        size *= len(seen)
        if size > max_support:
            raise ConfigError(
                f"uniform attacker support exceeds {max_support} fingerprints"
            )
    weight = 1.0 / size
    entries = tuple(
        (combo, weight) for combo in itertools.product(*domains)
    )
    return AttackerInstance(
        pmf=Pmf(names, entries), beta=beta, knowledge="uniform"
    )


def attacker_from_file(
    path: str | Path, catalog: AttributeCatalog, beta: int
) -> AttackerInstance:
    """Load attacker knowledge from a PMF JSON file.

    Schema: ``{"attributes": [...], "entries": [{"values": [...], "p": x}]}``
    with attributes exactly matching the catalog in canonical order.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "entries" not in raw:
        raise SchemaError(f"{path}: expected an object with an 'entries' array")
    attrs = tuple(raw.get("attributes", ()))
    if attrs != catalog.names:
        raise SchemaError(
            f"{path}: PMF attributes {list(attrs)} do not match the catalog"
        )
    entries = []
    for i, entry in enumerate(raw["entries"]):
        if not isinstance(entry, dict) or "values" not in entry or "p" not in entry:
            raise SchemaError(f"{path}: entry {i} needs 'values' and 'p'")
        values = tuple(str(v) for v in entry["values"])
        entries.append((values, float(entry["p"])))
    return AttackerInstance(
        pmf=Pmf(attrs, tuple(entries)), beta=beta, knowledge="file"
    )


def build_dictionary(attacker: AttackerInstance, attrs: Iterable[str]) -> Dictionary:
    """Project the attacker's PMF and keep the budgeted most probable tuples."""
    target = tuple(attrs)
    missing = set(target) - set(attacker.pmf.attrs)
    if missing:
        raise ConfigError(
            f"attribute {sorted(missing)[0]!r} is outside the attacker's knowledge"
        )
    collapsed: dict[ValueTuple, float] = {}
    for values, prob in attacker.pmf.entries:
        key = project(values, attacker.pmf.attrs, target)
        collapsed[key] = collapsed.get(key, 0.0) + prob
    ranked = sorted(collapsed.items(), key=lambda item: (-item[1], item[0]))
    top = ranked[: attacker.beta]
    return Dictionary(
        attrs=target,
        entries=tuple(values for values, _ in top),
        probabilities=tuple(prob for _, prob in top),
    )


def _exact_matching_only(attrs: Iterable[str], catalog: AttributeCatalog) -> bool:
    return all(catalog.spec(a).matches_exactly for a in attrs)


def impersonated_users(
    attrs: Iterable[str],
    attacker: AttackerInstance,
    mapping: UserMapping,
    catalog: AttributeCatalog,
) -> set[str]:
    """Users whose stored fingerprint matches some dictionary submission."""
    if not mapping:
        raise ConfigError("empty user population")
    canon = catalog.canonical(attrs)
    dictionary = build_dictionary(attacker, canon)
    names = catalog.names

    if _exact_matching_only(canon, catalog):
        submitted = set(dictionary.entries)
        return {
            user
            for user, stored in mapping.items()
            if project(stored, names, canon) in submitted
        }

    reached: set[str] = set()
    for user, stored in mapping.items():
        projected = project(stored, names, canon)
        if any(
            fp_match(canon, catalog, projected, guess)
            for guess in dictionary.entries
        ):
            reached.add(user)
    return reached


def sensitivity(
    attrs: Iterable[str],
    attacker: AttackerInstance,
    mapping: UserMapping,
    catalog: AttributeCatalog,
) -> float:
    """Fraction of users the attacker impersonates within the budget."""
    reached = impersonated_users(attrs, attacker, mapping, catalog)
    return len(reached) / len(mapping)
