"""The one-time-pad hypothesis class, finite slices of it, and GBDLS checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Hashable, Iterable, NamedTuple, Sequence

from .strings import BitString, enumerate_balanced, is_balanced, position_mask, xor


class Label(NamedTuple):
    tag: int
    payload: BitString

    def __str__(self) -> str:
        return f"{self.tag}:{self.payload}"

    @classmethod
    def parse(cls, text: str) -> "Label":
        tag, sep, payload = text.partition(":")
        if not sep or tag not in ("0", "1"):
            raise ValueError(f"malformed label {text!r}")
        return cls(int(tag), BitString.parse(payload))


@dataclass(frozen=True)
class OtpHypothesis:
    """h_{A,B}: emits (0, A) where A xor B is 0 and (1, B) where it is 1."""

    a: BitString
    b: BitString
    word: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.a.length != self.b.length:
            raise ValueError(f"share lengths differ: {self.a} vs {self.b}")
        d = self.a.length
        if d < 2 or d % 2:
            raise ValueError(f"string length must be even and >= 2, got {d}")
        c = xor(self.a, self.b)
        if not is_balanced(c):
            raise ValueError(f"{self.a} xor {self.b} = {c} is not balanced")
        object.__setattr__(self, "word", c.value)

    @classmethod
    def parse(cls, text: str) -> "OtpHypothesis":
        a, sep, b = text.partition("|")
        if not sep:
            raise ValueError(f"malformed hypothesis {text!r}")
        return cls(BitString.parse(a), BitString.parse(b))

    @property
    def d(self) -> int:
        return self.a.length

    @property
    def secret(self) -> BitString:
        return BitString(self.word, self.d)

    def __call__(self, x: int) -> Label:
        d = self.a.length
        if self.word & position_mask(d, x % d):
            return Label(1, self.b)
        return Label(0, self.a)

    def image(self) -> frozenset:
        return frozenset((Label(0, self.a), Label(1, self.b)))

    def __str__(self) -> str:
        return f"{self.a}|{self.b}"


@dataclass(frozen=True)
class PeriodicHypothesis:
    """Arbitrary hypothesis given by one period of labels; x maps to labels[x mod period]."""

    labels: tuple

    def __call__(self, x: int) -> Hashable:
        return self.labels[x % len(self.labels)]

    def image(self) -> frozenset:
        return frozenset(self.labels)


@dataclass(frozen=True)
class RelabeledHypothesis:
    base: OtpHypothesis
    mapping: tuple  # ((old, new), ...) kept as a tuple so the object stays hashable

    def __call__(self, x: int) -> Hashable:
        y = self.base(x)
        return dict(self.mapping).get(y, y)

    def image(self) -> frozenset:
        m = dict(self.mapping)
        return frozenset(m.get(y, y) for y in self.base.image())


def evaluate(h, x: int):
    return h(x)


def image(h) -> frozenset:
    return h.image()


class FiniteClass:
    """An ordered, duplicate-free list of hypotheses with stable integer ids.

    Keeps a label -> ids index so that version spaces can be found without
    scanning the whole class.
    """

    def __init__(self, hypotheses: Iterable):
        self.hypotheses = tuple(hypotheses)
        self._ids = {}
        for i, h in enumerate(self.hypotheses):
            if h in self._ids:
                raise ValueError(f"duplicate hypothesis {h}")
            self._ids[h] = i
        self.by_label: dict = {}
        for i, h in enumerate(self.hypotheses):
            for y in h.image():
                self.by_label.setdefault(y, []).append(i)
        # packed xor words for the fast consistency check; None for other hypothesis kinds
        self.words = [h.word if isinstance(h, OtpHypothesis) else None for h in self.hypotheses]

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __iter__(self):
        return iter(self.hypotheses)

    def __getitem__(self, i: int):
        return self.hypotheses[i]

    def __contains__(self, h) -> bool:
        return h in self._ids

    def id_of(self, h) -> int:
        try:
            return self._ids[h]
        except KeyError:
            raise KeyError(f"hypothesis {h} is not in the class") from None

    def __add__(self, other: "FiniteClass") -> "FiniteClass":
        return FiniteClass(self.hypotheses + other.hypotheses)

    def __repr__(self) -> str:
        return f"FiniteClass({len(self)} hypotheses)"


def _check_d(d: int) -> None:
    if d < 2 or d % 2:
        raise ValueError(f"d must be even and >= 2, got {d}")


def enumerate_class(d: int) -> FiniteClass:
    """Every h_{A,B} with |A| = |B| = d, ordered by (A, B) lexicographically."""
    _check_d(d)
    secrets = [c.value for c in enumerate_balanced(d)]
    hyps = []
    for a in range(1 << d):
        for b in sorted(a ^ c for c in secrets):
            hyps.append(OtpHypothesis(BitString(a, d), BitString(b, d)))
    return FiniteClass(hyps)


def is_generalized_binary(c: FiniteClass, probe_points: Sequence[int] = ()) -> bool:
    # probe_points is accepted for interface symmetry; images are exact, not sampled
    return all(len(h.image()) <= 2 for h in c)


def has_distinct_label_sets(c: FiniteClass) -> bool:
    seen = set()
    for h in c:
        im = h.image()
        if im in seen:
            return False
        seen.add(im)
    return True


def is_gbdls(c: FiniteClass) -> bool:
    return is_generalized_binary(c) and has_distinct_label_sets(c)


def cantor_class(d: int) -> FiniteClass:
    """The slice {h_{A, 1^d}} that reproduces one level of the first Cantor class."""
    _check_d(d)
    ones = BitString.ones(d)
    return FiniteClass(OtpHypothesis(a, ones) for a in enumerate_balanced(d))


def cantor_relabel(h: OtpHypothesis) -> RelabeledHypothesis:
    """Relabel (1, 1^d) as '*' and (0, A) as A."""
    ones = BitString.ones(h.d)
    if h.b != ones:
        raise ValueError(f"{h} is not of the form h_(A, 1^d)")
    return RelabeledHypothesis(h, ((Label(1, ones), "*"), (Label(0, h.a), h.a)))


def all_pairs(d: int) -> Iterable[tuple[BitString, BitString]]:
    """All (A, B) in {0,1}^d x {0,1}^d, balanced or not."""
    for a, b in product(range(1 << d), repeat=2):
        yield BitString(a, d), BitString(b, d)
