"""The transductive game: instances, empirical risk, leave-one-out error."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Hashable, Sequence

from .hypotheses import Label, OtpHypothesis, enumerate_class
from .strings import BitString

Example = tuple[int, Hashable]
LabeledSample = tuple[Example, ...]
Learner = Callable[[LabeledSample, int], Hashable]


class UnrealizableSampleError(ValueError):
    """No hypothesis in the class is consistent with the training sample."""


@dataclass(frozen=True)
class TransductiveInstance:
    points: tuple[int, ...]
    truth: OtpHypothesis

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise ValueError("an instance needs at least one point")
        if any(p < 0 for p in self.points):
            raise ValueError("points are natural numbers")

    def to_json(self) -> dict:
        return {"points": list(self.points), "A": str(self.truth.a), "B": str(self.truth.b)}

    @classmethod
    def from_json(cls, obj: dict) -> "TransductiveInstance":
        truth = OtpHypothesis(BitString.parse(obj["A"]), BitString.parse(obj["B"]))
        return cls(tuple(int(p) for p in obj["points"]), truth)


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def empirical_risk(h: Callable[[int], Hashable], s: Sequence[Example]) -> Fraction:
    if not s:
        raise ValueError("empirical risk of an empty sample is undefined")
    return Fraction(sum(h(x) != y for x, y in s), len(s))


def label_instance(inst: TransductiveInstance) -> LabeledSample:
    return tuple((x, inst.truth(x)) for x in inst.points)


def transductive_error(learner: Learner, inst: TransductiveInstance) -> Fraction:
    """Exact leave-one-out error: hold out each index in turn, train on the rest."""
    labeled = label_instance(inst)
    mistakes = 0
    for i, (x, y) in enumerate(labeled):
        rest = labeled[:i] + labeled[i + 1:]
        mistakes += learner(rest, x) != y
    return Fraction(mistakes, len(labeled))


def oracle_learner(truth: Callable[[int], Hashable]) -> Learner:
    """Replays the ground truth; a zero-error control."""
    return lambda sample, x: truth(x)


EMPTY_DEFAULT = Label(0, BitString(0, 0))


def baseline_learner() -> Learner:
    """Learner that exploits distinct label sets.

    Two distinct labels (0, A) and (1, B) pin down h_{A,B}; a single label is
    repeated; an empty sample yields (0, "").
    """

    def learn(sample: LabeledSample, x: int) -> Label:
        seen: dict[int, Hashable] = {}
        labels = set()
        for p, y in sample:
            if seen.setdefault(p, y) != y:
                raise UnrealizableSampleError(f"point {p} carries two labels")
            labels.add(y)
        if not labels:
            return EMPTY_DEFAULT
        if len(labels) == 1:
            return next(iter(labels))
        if len(labels) > 2:
            raise UnrealizableSampleError(f"{len(labels)} distinct labels; hypotheses emit at most 2")
        y0, y1 = sorted(labels, key=lambda y: y.tag)
        if (y0.tag, y1.tag) != (0, 1):
            raise UnrealizableSampleError(f"labels {y0} and {y1} cannot come from one hypothesis")
        try:
            h = OtpHypothesis(y0.payload, y1.payload)
        except ValueError as exc:
            raise UnrealizableSampleError(str(exc)) from None
        if any(h(p) != y for p, y in sample):
            raise UnrealizableSampleError(f"sample is inconsistent with {h}")
        return h(x)

    return learn


@dataclass
class BaselineSweep:
    d: int
    instances: int
    max_scaled_error: int  # max over instances of n * error
    worst: TransductiveInstance
    violations: int  # instances with n * error > 1
    first_violation: TransductiveInstance | None
    equality_witness: TransductiveInstance | None  # n * error == 1 with n >= 2

    def to_json(self) -> dict:
        def enc(inst):
            return None if inst is None else inst.to_json()

        return {"d": self.d, "instances": self.instances, "max_scaled_error": self.max_scaled_error,
                "worst": enc(self.worst), "violations": self.violations,
                "first_violation": enc(self.first_violation),
                "equality_witness": enc(self.equality_witness)}


def sweep_baseline(d: int) -> BaselineSweep:
    """Baseline error on every duplicate-free instance with points in 0..d-1, all h in the d-slice."""
    learner = baseline_learner()
    count = violations = 0
    best = -1
    worst = first_violation = witness = None
    for h in enumerate_class(d):
        for n in range(1, d + 1):
            for pts in combinations(range(d), n):
                inst = TransductiveInstance(pts, h)
                scaled = transductive_error(learner, inst) * n
                count += 1
                if scaled > best:
                    best, worst = scaled, inst
                if scaled > 1:
                    violations += 1
                    first_violation = first_violation or inst
                elif scaled == 1 and n >= 2 and witness is None:
                    witness = inst
    return BaselineSweep(d, count, int(best), worst, violations, first_violation, witness)
