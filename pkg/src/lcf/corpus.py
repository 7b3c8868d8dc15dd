"""Implicit-feedback interaction data: ingestion, interning and set accessors.

An :class:`InteractionDataset` stores, for every item, the sorted ordinals of
the users who acted on it (the *liked* sets) and, for every user, the sorted
ordinals of the items they acted on (the *histories*).  Both views are built
once and never mutated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence, TextIO

import numpy as np
import scipy.sparse as sp

from .errors import (
    DuplicateInteractionError,
    EmptyDatasetError,
    ExposureError,
    ItemLookupError,
    MalformedRowError,
)

__all__ = [
    "InteractionRecord",
    "IngestConfig",
    "InteractionDataset",
    "DatasetStats",
    "FullExposure",
    "ExplicitExposure",
    "read_records",
    "ingest_interactions",
    "load_interactions",
    "dataset_stats",
    "liked_set",
    "exposure_set",
]

N_COLUMNS = 5


@dataclass(frozen=True)
class InteractionRecord:
    user_key: str
    item_key: str
    behavior: str
    magnitude: float
    line: int = 0


@dataclass(frozen=True)
class IngestConfig:
    """Which rows count as positive feedback.

    ``dedup=False`` makes a repeated (user, item, behavior) row an error
    instead of silently collapsing it.
    """

    behavior: str = "purchase"
    dedup: bool = True


def read_records(stream: TextIO) -> Iterator[InteractionRecord]:
    """Parse ``user_id,game_title,behavior,value,flag`` rows from `stream`."""
    reader = csv.reader(stream)
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != N_COLUMNS:
            raise MalformedRowError(line, f"expected {N_COLUMNS} fields, got {len(row)}")
        user, item, behavior, value = (f.strip() for f in row[:4])
        if not user or not item:
            raise MalformedRowError(line, "empty user or item key")
        try:
            magnitude = float(value)
        except ValueError:
            raise MalformedRowError(line, f"unparsable magnitude {value!r}") from None
        if not math.isfinite(magnitude) or magnitude < 0:
            raise MalformedRowError(line, f"magnitude must be finite and nonnegative, got {value!r}")
        yield InteractionRecord(user, item, behavior, magnitude, line)


def _frozen(a):
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def _group(keys, values, n):
    """Split `values` into `n` groups by `keys`; both already sorted by (key, value)."""
    bounds = np.searchsorted(keys, np.arange(n + 1))
    return tuple(_frozen(values[bounds[g]:bounds[g + 1]]) for g in range(n))


class InteractionDataset:
    """Interned, deduplicated user-item interactions.

    Parameters
    ----------
    users, items : sequence of str
        Raw keys; position is the dense ordinal.
    pairs : array_like of shape (m, 2)
        Distinct ``(user_ordinal, item_ordinal)`` pairs.
    """

    def __init__(self, users: Sequence[str], items: Sequence[str], pairs):
        self.users = tuple(users)
        self.items = tuple(items)
        self.user_index = {k: i for i, k in enumerate(self.users)}
        self.item_index = {k: i for i, k in enumerate(self.items)}
        if len(self.user_index) != len(self.users) or len(self.item_index) != len(self.items):
            raise ValueError("user and item keys must be unique")

        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if len(pairs):
            if pairs.min() < 0 or pairs[:, 0].max() >= self.n_users or pairs[:, 1].max() >= self.n_items:
                raise ValueError("pair ordinal out of range")
        by_user = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        if len(by_user) > 1 and np.any(np.all(by_user[1:] == by_user[:-1], axis=1)):
            raise ValueError("duplicate (user, item) pairs")
        by_item = pairs[np.lexsort((pairs[:, 0], pairs[:, 1]))]
        self.history = _group(by_user[:, 0], by_user[:, 1], self.n_users)
        self.liked = _group(by_item[:, 1], by_item[:, 0], self.n_items)
        self._pairs = _frozen(by_user)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_items(self) -> int:
        return len(self.items)

    @property
    def n_interactions(self) -> int:
        return len(self._pairs)

    @property
    def pairs(self) -> np.ndarray:
        """All ``(user, item)`` pairs sorted by user then item."""
        return self._pairs

    @cached_property
    def item_counts(self) -> np.ndarray:
        """``|L(i)|`` for every item."""
        return np.array([len(s) for s in self.liked], dtype=np.int64)

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Binary user x item matrix in CSR form."""
        m = sp.csr_matrix(
            (np.ones(self.n_interactions, dtype=np.int64), (self._pairs[:, 0], self._pairs[:, 1])),
            shape=(self.n_users, self.n_items),
        )
        m.sort_indices()
        return m

    def __repr__(self):
        return (f"InteractionDataset(n_users={self.n_users}, n_items={self.n_items}, "
                f"n_interactions={self.n_interactions})")

    def __eq__(self, other):
        if not isinstance(other, InteractionDataset):
            return NotImplemented
        return (self.users == other.users and self.items == other.items
                and np.array_equal(self._pairs, other._pairs))

    __hash__ = None

    def restrict(self, keep) -> "InteractionDataset":
        """Dataset over the same user/item tables holding only ``pairs[keep]``.

        Ordinals are preserved, so users or items may end up with empty sets.
        """
        return InteractionDataset(self.users, self.items, self._pairs[np.asarray(keep)])

    def find_item(self, title: str) -> int:
        """Ordinal of `title`: exact match first, then a unique prefix match."""
        key = title.strip()
        if key in self.item_index:
            return self.item_index[key]
        matches = [k for k in self.items if k.startswith(key)]
        if len(matches) == 1:
            return self.item_index[matches[0]]
        if not matches:
            raise ItemLookupError(f"no item matches {title!r}")
        raise ItemLookupError(f"ambiguous item {title!r}; candidates: " + "; ".join(sorted(matches)))

    # -- persistence ---------------------------------------------------------

    def to_json(self) -> str:
        """Canonical snapshot; identical datasets give identical strings."""
        stats = dataset_stats(self) if self.n_interactions else None
        doc = {
            "format": "lcf-dataset/1",
            "users": list(self.users),
            "items": list(self.items),
            "liked": [s.tolist() for s in self.liked],
            "stats": None if stats is None else stats.as_dict(),
        }
        return json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "InteractionDataset":
        doc = json.loads(text)
        if doc.get("format") != "lcf-dataset/1":
            raise ValueError("not an lcf dataset snapshot")
        pairs = [(u, i) for i, users in enumerate(doc["liked"]) for u in users]
        return cls(doc["users"], doc["items"], np.array(pairs, dtype=np.int64).reshape(-1, 2))


def ingest_interactions(source: TextIO | Iterable[InteractionRecord],
                        config: IngestConfig = IngestConfig()) -> InteractionDataset:
    """Build a dataset from raw rows, keeping only ``config.behavior`` records.

    Users and items get ordinals in order of first appearance among the kept
    rows, so the same input always produces the same tables.
    """
    records = source if not hasattr(source, "read") else read_records(source)
    users: dict[str, int] = {}
    items: dict[str, int] = {}
    seen: set[tuple[int, int]] = set()
    pairs: list[tuple[int, int]] = []
    for rec in records:
        if rec.behavior != config.behavior:
            continue
        u = users.setdefault(rec.user_key, len(users))
        i = items.setdefault(rec.item_key, len(items))
        if (u, i) in seen:
            if not config.dedup:
                raise DuplicateInteractionError(rec.line, rec.user_key, rec.item_key)
            continue
        seen.add((u, i))
        pairs.append((u, i))
    if not pairs:
        raise EmptyDatasetError("no interactions")
    return InteractionDataset(list(users), list(items), np.array(pairs, dtype=np.int64))


def load_interactions(path, behavior: str = "purchase", dedup: bool = True) -> InteractionDataset:
    """Read a CSV interaction log or a JSON snapshot written by :meth:`InteractionDataset.to_json`."""
    path = Path(path)
    if path.suffix == ".json":
        return InteractionDataset.from_json(path.read_text(encoding="utf-8"))
    with open(path, encoding="utf-8", newline="") as fh:
        return ingest_interactions(fh, IngestConfig(behavior=behavior, dedup=dedup))


def ingest_text(text: str, behavior: str = "purchase", dedup: bool = True) -> InteractionDataset:
    return ingest_interactions(io.StringIO(text), IngestConfig(behavior=behavior, dedup=dedup))


@dataclass(frozen=True)
class DatasetStats:
    n_users: int
    n_items: int
    n_interactions: int
    sparsity: float

    def as_dict(self):
        return {"n_users": self.n_users, "n_items": self.n_items,
                "n_interactions": self.n_interactions, "sparsity": self.sparsity}

    def summary(self) -> str:
        return (f"users={self.n_users} items={self.n_items} "
                f"interactions={self.n_interactions} sparsity={100 * self.sparsity:.2f}%")


def dataset_stats(ds: InteractionDataset) -> DatasetStats:
    if ds.n_interactions == 0:
        raise EmptyDatasetError("no interactions")
    return DatasetStats(ds.n_users, ds.n_items, ds.n_interactions,
                        1.0 - ds.n_interactions / (ds.n_users * ds.n_items))


def _check_item(ds, item):
    if not 0 <= item < ds.n_items:
        raise IndexError(f"item ordinal {item} out of range [0, {ds.n_items})")


def liked_set(ds: InteractionDataset, item: int) -> np.ndarray:
    """Sorted ordinals of the users who acted on `item` (read-only view)."""
    _check_item(ds, item)
    return ds.liked[item]


# -- exposure ----------------------------------------------------------------

class FullExposure:
    """Every user is exposed to every item; missing data is negative feedback."""

    explicit = False

    def __repr__(self):
        return "FullExposure()"

    def __eq__(self, other):
        return isinstance(other, FullExposure)

    def __hash__(self):
        return hash(FullExposure)

    def exposed(self, ds: InteractionDataset, item: int):
        _check_item(ds, item)
        return range(ds.n_users)

    def exposure_counts(self, ds: InteractionDataset) -> np.ndarray:
        return np.full(ds.n_items, ds.n_users, dtype=np.int64)


class ExplicitExposure:
    """Stored per-item exposure sets ``E(j)``.

    Construction checks that every liker of an item is also exposed to it.
    Items absent from `sets` are unknown to the model and raise on access.
    """

    explicit = True

    def __init__(self, ds: InteractionDataset, sets: Mapping[int, Iterable[int]]):
        self.n_users = ds.n_users
        self.sets: dict[int, np.ndarray] = {}
        for item, users in sets.items():
            item = int(item)
            _check_item(ds, item)
            e = np.unique(np.asarray(list(users), dtype=np.int64))
            if len(e) and (e[0] < 0 or e[-1] >= ds.n_users):
                raise ExposureError(f"exposure set of item {item} has out-of-range user ordinals")
            if not np.isin(ds.liked[item], e, assume_unique=True).all():
                raise ExposureError(f"item {item}: some users who acted on it are not exposed to it")
            self.sets[item] = _frozen(e)

    def __repr__(self):
        return f"ExplicitExposure({len(self.sets)} items)"

    def exposed(self, ds: InteractionDataset, item: int) -> np.ndarray:
        _check_item(ds, item)
        try:
            return self.sets[item]
        except KeyError:
            raise ExposureError(f"no exposure set for item {item}") from None

    def exposure_counts(self, ds: InteractionDataset) -> np.ndarray:
        return np.array([len(self.exposed(ds, j)) for j in range(ds.n_items)], dtype=np.int64)

    def matrix(self, ds: InteractionDataset) -> sp.csr_matrix:
        """Binary user x item exposure matrix."""
        rows = np.concatenate([self.exposed(ds, j) for j in range(ds.n_items)] or [np.empty(0, np.int64)])
        cols = np.repeat(np.arange(ds.n_items), [len(self.sets[j]) for j in range(ds.n_items)])
        m = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(ds.n_users, ds.n_items))
        m.sort_indices()
        return m


def exposure_set(exp, ds: InteractionDataset, item: int):
    """``E(item)``: a ``range`` over all users under full exposure, else the stored set."""
    return exp.exposed(ds, item)
