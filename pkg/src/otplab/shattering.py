"""DS shattering on finite behavior tables via i-neighbor pruning."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .hypotheses import FiniteClass


@dataclass(frozen=True)
class BehaviorTable:
    points: tuple[int, ...]
    rows: frozenset

    def __post_init__(self):
        k = len(self.points)
        if any(len(r) != k for r in self.rows):
            raise ValueError(f"every row must have length {k}")


def restrict(c: FiniteClass, points: Sequence[int]) -> BehaviorTable:
    points = tuple(points)
    if len(set(points)) != len(points):
        raise ValueError(f"points must be distinct: {points}")
    return BehaviorTable(points, frozenset(tuple(h(p) for p in points) for h in c))


def has_i_neighbor(f: tuple, i: int, rows: Iterable[tuple] | BehaviorTable) -> bool:
    """Some other row agrees with ``f`` off coordinate ``i`` (1-based) and differs at it."""
    if isinstance(rows, BehaviorTable):
        rows = rows.rows
    j = i - 1
    for g in rows:
        if g[j] != f[j] and g[:j] == f[:j] and g[j + 1:] == f[j + 1:]:
            return True
    return False


def prune(rows: Iterable[tuple], k: int, order: Sequence[tuple] | None = None) -> frozenset:
    """Greatest subset in which every row has an i-neighbor for every i.

    ``order`` fixes which violating row is deleted first; the fixed point
    does not depend on it.
    """
    alive = set(rows)
    if k == 0:
        return frozenset(alive)
    # bucket rows by their projection away from each coordinate
    buckets: list[dict] = [{} for _ in range(k)]
    for f in alive:
        for j in range(k):
            buckets[j].setdefault(f[:j] + f[j + 1:], set()).add(f)

    def violates(f):
        return any(len(buckets[j][f[:j] + f[j + 1:]]) < 2 for j in range(k))

    queue = list(order) if order is not None else sorted(alive, key=repr)
    pending = [f for f in queue if f in alive and violates(f)]
    while pending:
        f = pending.pop(0)
        if f not in alive or not violates(f):
            continue
        alive.discard(f)
        for j in range(k):
            bucket = buckets[j][f[:j] + f[j + 1:]]
            bucket.discard(f)
            pending.extend(g for g in bucket if violates(g))
    return frozenset(alive)


def is_ds_shattered(t: BehaviorTable | Iterable[tuple], k: int | None = None) -> bool:
    if isinstance(t, BehaviorTable):
        k, rows = len(t.points), t.rows
    else:
        rows = list(t)
        if k is None:
            k = len(rows[0]) if rows else 0
    return bool(prune(rows, k))


@dataclass(frozen=True)
class DSResult:
    k: int
    witness_points: tuple[int, ...]

    def to_json(self) -> dict:
        return {"k": self.k, "witness_points": list(self.witness_points)}


def ds_search(c: FiniteClass, candidate_points: Iterable[int], kmax: int) -> DSResult:
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    pts = sorted(set(candidate_points))
    best = DSResult(0, ())
    for k in range(1, min(kmax, len(pts)) + 1):
        witness = next((s for s in combinations(pts, k) if is_ds_shattered(restrict(c, s))), None)
        if witness is None:
            # a shattered k-set has shattered (k-1)-subsets, so nothing larger can appear
            break
        best = DSResult(k, witness)
    return best


def ds_dimension_upto(c: FiniteClass, candidate_points: Iterable[int], kmax: int) -> int:
    return ds_search(c, candidate_points, kmax).k
