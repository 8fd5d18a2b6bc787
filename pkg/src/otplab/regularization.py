"""Local regularizers over finite classes and the learners they induce.

A regularizer is stored as an integer rank table, one row per hypothesis id
and one column per point. Only the order within a column matters to the
induced learner, so real-valued scores are never needed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np

from .hypotheses import FiniteClass, Label, OtpHypothesis, enumerate_class
from .strings import position_mask
from .transduction import LabeledSample, UnrealizableSampleError

FAMILIES = ("random", "hash", "prefer-tag0", "prefer-tag1", "constant")


class NotLocallyInjectiveError(ValueError):
    pass


class RegularizerFileError(ValueError):
    pass


@dataclass(eq=False)
class RegularizerTable:
    cls: FiniteClass
    points: int
    ranks: np.ndarray
    name: str = ""
    _columns: dict = field(default_factory=dict, init=False, repr=False)
    _argmin: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.int64)
        if ranks.shape != (len(self.cls), self.points):
            raise ValueError(f"rank table shape {ranks.shape} != ({len(self.cls)}, {self.points})")
        if ranks.size and ranks.min() < 0:
            raise ValueError("ranks must be non-negative")
        ranks.setflags(write=False)
        self.ranks = ranks

    @property
    def is_locally_injective(self) -> bool:
        n = len(self.cls)
        return all(len(np.unique(self.ranks[:, x])) == n for x in range(self.points))

    def rank(self, hid: int, x: int) -> int:
        return int(self.ranks[hid, x])

    def column(self, x: int) -> list[int]:
        col = self._columns.get(x)
        if col is None:
            col = self._columns[x] = self.ranks[:, x].tolist()
        return col

    def column_argmin(self, x: int) -> int:
        if x not in self._argmin:
            self._argmin[x] = int(np.argmin(self.ranks[:, x]))
        return self._argmin[x]

    def order_at(self, x: int) -> tuple[int, ...]:
        """Hypothesis ids sorted by rank at x (ties by id)."""
        return tuple(np.lexsort((np.arange(len(self.cls)), self.ranks[:, x])).tolist())


def version_space(c: FiniteClass, s: LabeledSample) -> tuple[int, ...]:
    """Ids of the hypotheses with zero empirical risk on ``s``."""
    if not s:
        return tuple(range(len(c)))
    groups: dict[Hashable, list[int]] = {}
    for x, y in s:
        groups.setdefault(y, []).append(x)
    lists = [c.by_label.get(y, ()) for y in groups]
    if not all(lists):
        return ()
    lists.sort(key=len)
    cands = lists[0]
    if len(lists) > 1:
        others = [set(ids) for ids in lists[1:]]
        cands = [i for i in cands if all(i in o for o in others)]

    need_zero = need_one = 0
    fast = all(isinstance(y, Label) for y in groups)
    if fast:
        for y, xs in groups.items():
            d = y.payload.length
            if d == 0:
                fast = False
                break
            mask = 0
            for x in xs:
                mask |= position_mask(d, x % d)
            if y.tag:
                need_one |= mask
            else:
                need_zero |= mask
    out = []
    for i in cands:
        w = c.words[i]
        if fast and w is not None:
            if w & need_zero == 0 and w & need_one == need_one:
                out.append(i)
        else:
            h = c[i]
            if all(h(x) == y for x, y in s):
                out.append(i)
    return tuple(out)


class InducedLearner:
    """The unique learner induced by a locally injective regularizer."""

    def __init__(self, psi: RegularizerTable):
        if not psi.is_locally_injective:
            raise NotLocallyInjectiveError(
                f"regularizer {psi.name or ''} is not locally injective; complete it first"
            )
        self.psi = psi

    def choose(self, sample: LabeledSample, x: int) -> int:
        if not 0 <= x < self.psi.points:
            raise ValueError(f"point {x} outside the regularizer's domain 0..{self.psi.points - 1}")
        if not sample:
            return self.psi.column_argmin(x)
        vs = version_space(self.psi.cls, sample)
        if not vs:
            raise UnrealizableSampleError("no hypothesis in the class fits the sample")
        return min(vs, key=self.psi.column(x).__getitem__)

    def __call__(self, sample: LabeledSample, x: int) -> Hashable:
        return self.psi.cls[self.choose(sample, x)](x)


def induced_learner(psi: RegularizerTable) -> InducedLearner:
    return InducedLearner(psi)


def injective_completion(psi: RegularizerTable, tie_break: Sequence[int] | None = None) -> RegularizerTable:
    """Refine every column to a strict order, breaking ties by ``tie_break`` position."""
    n = len(psi.cls)
    if tie_break is None:
        tie_pos = np.arange(n)
    else:
        tie_break = list(tie_break)
        if sorted(tie_break) != list(range(n)):
            raise ValueError("tie_break must be a permutation of the hypothesis ids")
        tie_pos = np.empty(n, dtype=np.int64)
        tie_pos[tie_break] = np.arange(n)
    ranks = np.empty((n, psi.points), dtype=np.int64)
    for x in range(psi.points):
        order = np.lexsort((tie_pos, psi.ranks[:, x]))
        ranks[order, x] = np.arange(n)
    return RegularizerTable(psi.cls, psi.points, ranks, name=f"{psi.name}+completed" if psi.name else "completed")


_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _ranks_from_keys(primary: np.ndarray, ids: np.ndarray) -> np.ndarray:
    ranks = np.empty(len(ids), dtype=np.int64)
    ranks[np.lexsort((ids, primary))] = np.arange(len(ids))
    return ranks


def _tags_at(c: FiniteClass, x: int) -> np.ndarray:
    tags = np.empty(len(c), dtype=np.int64)
    for i, h in enumerate(c):
        if c.words[i] is not None:
            tags[i] = (c.words[i] >> (h.d - 1 - x % h.d)) & 1
        else:
            y = h(x)
            if not isinstance(y, Label):
                raise ValueError(f"hypothesis {h} emits untagged labels")
            tags[i] = y.tag
    return tags


def builtin_family(name: str, c: FiniteClass, points: int, seed: int = 0) -> RegularizerTable:
    """Deterministic test-subject regularizers addressed as ``name:seed``.

    ``prefer-tag0``/``prefer-tag1`` ignore the seed. ``constant`` is all zeros
    and must be completed before it induces a learner.
    """
    n = len(c)
    ids = np.arange(n)
    ranks = np.zeros((n, points), dtype=np.int64)
    if name == "random":
        rng = np.random.default_rng(seed)
        for x in range(points):
            ranks[:, x] = rng.permutation(n)
    elif name == "hash":
        with np.errstate(over="ignore"):
            salt = _splitmix(np.array([seed], dtype=np.uint64) & _M64)[0]
            for x in range(points):
                keys = _splitmix(ids.astype(np.uint64) ^ _splitmix(np.array([x], dtype=np.uint64) ^ salt))
                ranks[:, x] = _ranks_from_keys(keys, ids)
    elif name in ("prefer-tag0", "prefer-tag1"):
        preferred = int(name[-1])
        for x in range(points):
            ranks[:, x] = _ranks_from_keys((_tags_at(c, x) != preferred).astype(np.int64), ids)
    elif name == "constant":
        pass
    else:
        raise ValueError(f"unknown regularizer family {name!r}; expected one of {', '.join(FAMILIES)}")
    return RegularizerTable(c, points, ranks, name=f"{name}:{seed}")


def table_to_json(psi: RegularizerTable) -> dict:
    ds = {h.d for h in psi.cls if isinstance(h, OtpHypothesis)}
    if len(ds) != 1 or not all(isinstance(h, OtpHypothesis) for h in psi.cls):
        raise ValueError("only single-length one-time-pad classes serialize to the file format")
    return {
        "d": ds.pop(),
        "points": psi.points,
        "injective": psi.is_locally_injective,
        "ranks": {
            str(h): {str(x): int(psi.ranks[i, x]) for x in range(psi.points)}
            for i, h in enumerate(psi.cls)
        },
    }


def save_regularizer(psi: RegularizerTable, path: str | Path) -> None:
    Path(path).write_text(json.dumps(table_to_json(psi), indent=1) + "\n")


def table_from_json(obj: dict, name: str = "") -> RegularizerTable:
    try:
        d = int(obj["d"])
        points = int(obj["points"])
        declared = bool(obj.get("injective", False))
        entries = obj["ranks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise RegularizerFileError(f"malformed regularizer file: {exc}") from None
    if points < 1 or not isinstance(entries, dict):
        raise RegularizerFileError("malformed regularizer file: need points >= 1 and a ranks object")
    try:
        c = enumerate_class(d)
    except ValueError as exc:
        raise RegularizerFileError(str(exc)) from None
    ranks = np.full((len(c), points), -1, dtype=np.int64)
    for key, row in entries.items():
        try:
            hid = c.id_of(OtpHypothesis.parse(key))
        except (KeyError, ValueError) as exc:
            raise RegularizerFileError(f"bad hypothesis key {key!r}: {exc}") from None
        if not isinstance(row, dict):
            raise RegularizerFileError(f"ranks for {key} must be an object")
        for xs, r in row.items():
            try:
                x = int(xs)
            except ValueError:
                raise RegularizerFileError(f"bad point {xs!r} for {key}") from None
            if not 0 <= x < points:
                raise RegularizerFileError(f"point {x} for {key} outside 0..{points - 1}")
            if not isinstance(r, int) or isinstance(r, bool) or r < 0:
                raise RegularizerFileError(f"rank for ({key}, {x}) must be a non-negative integer")
            ranks[hid, x] = r
    missing = np.argwhere(ranks < 0)
    if len(missing):
        hid, x = missing[0]
        raise RegularizerFileError(
            f"{len(missing)} missing entries, first is ({c[int(hid)]}, {int(x)})"
        )
    psi = RegularizerTable(c, points, ranks, name=name)
    if declared and not psi.is_locally_injective:
        for x in range(points):
            vals, counts = np.unique(ranks[:, x], return_counts=True)
            if (counts > 1).any():
                raise RegularizerFileError(
                    f"declared injective but rank {int(vals[counts > 1][0])} repeats at point {x}"
                )
    return psi


def load_regularizer(path: str | Path) -> RegularizerTable:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise RegularizerFileError(f"cannot read {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise RegularizerFileError("malformed regularizer file: top level must be an object")
    return table_from_json(obj, name=str(path))


def resolve_regularizer(spec: str, c: FiniteClass, points: int) -> RegularizerTable:
    """Build a table from ``name:seed`` or load it from a file path."""
    name, sep, seed = spec.partition(":")
    if sep and name in FAMILIES:
        try:
            return builtin_family(name, c, points, int(seed))
        except ValueError as exc:
            raise ValueError(f"bad regularizer spec {spec!r}: {exc}") from None
    path = Path(spec)
    if not path.exists():
        raise ValueError(f"{spec!r} is neither a built-in family (name:seed) nor an existing file")
    psi = load_regularizer(path)
    if psi.points != points or [str(h) for h in psi.cls] != [str(h) for h in c]:
        raise ValueError(f"regularizer file {spec} does not cover the required class and points")
    return psi
