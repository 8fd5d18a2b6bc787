"""Four-instance coupling against local regularizers.

A draw (C, A, m0, m1) fixes a test point x_test (the m0-th zero of C) and a
fooling point x_fool (the m1-th one of C). Flipping both positions in C and
in A yields four instances whose ground truths pairwise agree on each other's
training data but disagree at x_test, so any strict per-point order over
hypotheses must misclassify x_test in at least one of them.
"""

from __future__ import annotations

import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .hypotheses import OtpHypothesis
from .regularization import RegularizerTable, induced_learner
from .strings import BitString, enumerate_balanced, flip_at, is_balanced, sigma, xor
from .transduction import TransductiveInstance, empirical_risk, format_fraction


class ConfigurationError(ValueError):
    pass


class AdversaryInvariantError(AssertionError):
    """A coupled construction broke one of its own invariants (an implementation bug)."""


@dataclass(frozen=True)
class AdversaryDraw:
    c: BitString
    a: BitString
    m0: int
    m1: int
    x_test: int
    x_fool: int

    @classmethod
    def make(cls, c: BitString, a: BitString, m0: int, m1: int) -> "AdversaryDraw":
        if not is_balanced(c) or c.length == 0:
            raise ValueError(f"C = {c} must be a non-empty balanced string")
        if a.length != c.length:
            raise ValueError("C and A must have the same length")
        d = c.length // 2
        if not (1 <= m0 <= d and 1 <= m1 <= d):
            raise ValueError(f"m0, m1 must lie in 1..{d}")
        return cls(c, a, m0, m1, sigma(c, 0)[m0 - 1], sigma(c, 1)[m1 - 1])

    @property
    def d(self) -> int:
        return self.c.length // 2

    def to_json(self) -> dict:
        return {"C": str(self.c), "A": str(self.a), "m0": self.m0, "m1": self.m1,
                "x_test": self.x_test, "x_fool": self.x_fool}


@dataclass(frozen=True)
class CoupledInstances:
    draw: AdversaryDraw
    instances: tuple[TransductiveInstance, ...]
    c_bar: BitString
    a_bar: BitString

    @property
    def truths(self) -> tuple[OtpHypothesis, ...]:
        return tuple(inst.truth for inst in self.instances)

    def training_sample(self, i: int) -> tuple:
        """S_i minus x_test, labeled by h*_i (i is 1-based)."""
        inst = self.instances[i - 1]
        x_test = self.draw.x_test
        return tuple((p, inst.truth(p)) for p in inst.points if p != x_test)


@lru_cache(maxsize=None)
def _balanced(length: int) -> tuple[BitString, ...]:
    return tuple(enumerate_balanced(length))


def draw(d: int, rng: random.Random) -> AdversaryDraw:
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    c = rng.choice(_balanced(2 * d))
    a = BitString(rng.getrandbits(2 * d), 2 * d)
    m0 = rng.randint(1, d)
    m1 = rng.randint(1, d)
    return AdversaryDraw.make(c, a, m0, m1)


def draw_count(d: int) -> int:
    return comb(2 * d, d) * 4 ** d * d * d


def enumerate_draws(d: int) -> Iterator[AdversaryDraw]:
    """Every (C, A, m0, m1) once; C outermost, then A, m0, m1."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    n = 2 * d
    for c in _balanced(n):
        zeros, ones = sigma(c, 0), sigma(c, 1)
        for a in range(1 << n):
            a_s = BitString(a, n)
            for m0 in range(1, d + 1):
                for m1 in range(1, d + 1):
                    yield AdversaryDraw(c, a_s, m0, m1, zeros[m0 - 1], ones[m1 - 1])


def draw_at(d: int, index: int) -> AdversaryDraw:
    """The draw at position ``index`` of :func:`enumerate_draws`."""
    n = 2 * d
    index, m1 = divmod(index, d)
    index, m0 = divmod(index, d)
    ci, a = divmod(index, 1 << n)
    return AdversaryDraw.make(_balanced(n)[ci], BitString(a, n), m0 + 1, m1 + 1)


def _assemble(dr: AdversaryDraw, c_bar: BitString, a_bar: BitString,
              s_even: tuple[int, ...]) -> CoupledInstances:
    c, a = dr.c, dr.a
    s_odd = sigma(dr.c, 0)
    truths = (
        OtpHypothesis(a, xor(c, a)),
        OtpHypothesis(a, xor(c_bar, a)),
        OtpHypothesis(a_bar, xor(c, a_bar)),
        OtpHypothesis(a_bar, xor(c_bar, a_bar)),
    )
    points = (s_odd, s_even, s_odd, s_even)
    return CoupledInstances(
        dr, tuple(TransductiveInstance(p, h) for p, h in zip(points, truths)), c_bar, a_bar
    )


def check_structure(ci: CoupledInstances) -> list[str]:
    """Invariant violations of a coupled construction (empty when sound)."""
    dr = ci.draw
    c, a, c_bar, a_bar = dr.c, dr.a, ci.c_bar, ci.a_bar
    d = dr.d
    problems = []
    if c[dr.x_test] != 0 or c[dr.x_fool] != 1:
        problems.append("x_test must index a 0 of C and x_fool a 1 of C")
    elif (dr.x_test, dr.x_fool) != (sigma(c, 0)[dr.m0 - 1], sigma(c, 1)[dr.m1 - 1]):
        problems.append("x_test/x_fool disagree with m0/m1")
    if c_bar != flip_at(c, (dr.x_test, dr.x_fool)):
        problems.append("C_bar is not C with x_test and x_fool flipped")
    if a_bar != flip_at(a, (dr.x_test, dr.x_fool)):
        problems.append("A_bar is not A with x_test and x_fool flipped")
    if not is_balanced(c_bar):
        problems.append("C_bar is not balanced")
    if xor(c_bar, a) != xor(c, a_bar) or xor(c, a) != xor(c_bar, a_bar):
        problems.append("XOR identities between C, C_bar, A, A_bar fail")
    s_odd, s_even = sigma(c, 0), sigma(c_bar, 1)
    expected = (s_odd, s_even, s_odd, s_even)
    for i, (inst, pts) in enumerate(zip(ci.instances, expected), 1):
        if inst.points != pts:
            problems.append(f"S_{i} = {inst.points}, expected {pts}")
        if len(inst.points) != d:
            problems.append(f"|S_{i}| = {len(inst.points)}, expected {d}")
        if dr.x_test not in inst.points:
            problems.append(f"x_test not in S_{i}")
        if max(inst.points) >= 2 * d:
            problems.append(f"S_{i} leaves 0..{2 * d - 1}")
    return problems


def build_instances(dr: AdversaryDraw, validate: bool = True) -> CoupledInstances:
    flips = (dr.x_test, dr.x_fool)
    c_bar = flip_at(dr.c, flips)
    a_bar = flip_at(dr.a, flips)
    ci = _assemble(dr, c_bar, a_bar, sigma(c_bar, 1))
    if validate:
        problems = check_structure(ci)
        if problems:
            raise AdversaryInvariantError("; ".join(problems))
    return ci


def _require_covered(ci: CoupledInstances, psi: RegularizerTable) -> None:
    for i, h in enumerate(ci.truths, 1):
        if h not in psi.cls:
            raise ConfigurationError(f"h*_{i} = {h} is not in the regularizer's class")
    top = max(max(inst.points) for inst in ci.instances)
    if psi.points <= top:
        raise ConfigurationError(f"regularizer covers points 0..{psi.points - 1}, instances reach {top}")


def indicators(ci: CoupledInstances, psi: RegularizerTable, learner: Callable | None = None) -> tuple[int, ...]:
    """T_i = 1 iff the learner misclassifies x_test on instance i."""
    _require_covered(ci, psi)
    if learner is None:
        learner = induced_learner(psi)
    x = ci.draw.x_test
    return tuple(int(learner(ci.training_sample(i), x) != h(x)) for i, h in enumerate(ci.truths, 1))


@dataclass(frozen=True)
class CycleWitness:
    ranks: tuple[int, ...]
    comparisons: tuple[tuple[int, int, bool], ...]  # (i, next i, psi(h*_i) < psi(h*_next))
    failed: tuple[int, ...]
    t: tuple[int, ...]

    def to_json(self) -> dict:
        return {"ranks": list(self.ranks), "failed": list(self.failed), "T": list(self.t),
                "comparisons": [{"i": i, "j": j, "holds": ok} for i, j, ok in self.comparisons]}


def cycle_witness(ci: CoupledInstances, psi: RegularizerTable) -> CycleWitness:
    """Report which of the four required strict inequalities at x_test break."""
    _require_covered(ci, psi)
    x = ci.draw.x_test
    ranks = tuple(psi.rank(psi.cls.id_of(h), x) for h in ci.truths)
    comparisons = tuple((i + 1, (i + 1) % 4 + 1, ranks[i] < ranks[(i + 1) % 4]) for i in range(4))
    failed = tuple(i for i, _, ok in comparisons if not ok)
    return CycleWitness(ranks, comparisons, failed, indicators(ci, psi))


def ladder_failures(ci: CoupledInstances) -> list[str]:
    """Check that each next ground truth fits the current training data yet disagrees at x_test."""
    x = ci.draw.x_test
    out = []
    truths = ci.truths
    for i in range(4):
        h, nxt = truths[i], truths[(i + 1) % 4]
        sample = ci.training_sample(i + 1)
        if sample and empirical_risk(nxt, sample) != 0:
            out.append(f"h*_{(i + 1) % 4 + 1} errs on the training data of instance {i + 1}")
        if h(x) == nxt(x):
            out.append(f"h*_{i + 1} and h*_{(i + 1) % 4 + 1} agree at x_test")
    return out


# --- experiment engine -------------------------------------------------------

@dataclass
class ExperimentReport:
    d: int
    mode: str
    regularizer: str
    draws: int
    mean: Fraction
    family_means: list[Fraction]
    cycle_failures: int
    worst_draw: dict
    config: dict = field(default_factory=dict)

    @property
    def bound_holds(self) -> bool:
        return self.mean >= Fraction(1, 4)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "mode": self.mode,
            "regularizer": self.regularizer,
            "draws": self.draws,
            "instance_size": self.d,
            "mean": format_fraction(self.mean),
            "bound_holds": self.bound_holds,
            "family_means": [format_fraction(q) for q in self.family_means],
            "cycle_failures": self.cycle_failures,
            "worst_draw": self.worst_draw,
            "config": self.config,
        }


def _query(ci: CoupledInstances, i: int):
    inst = ci.instances[i - 1]
    x = ci.draw.x_test
    label = inst.truth(x)
    # every point of S_i carries the same label as x_test, so the sample is (label, points)
    return (label, tuple(p for p in inst.points if p != x), x), label


@dataclass
class _Plan:
    queries: list
    qidx: np.ndarray
    truth: np.ndarray
    codes: dict


@lru_cache(maxsize=2)
def exhaustive_plan(d: int) -> _Plan:
    """Deduplicated learner queries for every enumerated draw (independent of psi)."""
    codes: dict = {}
    qcodes: dict = {}
    n = draw_count(d)
    qidx = np.empty((n, 4), dtype=np.int64)
    truth = np.empty((n, 4), dtype=np.int64)
    for k, dr in enumerate(enumerate_draws(d)):
        ci = build_instances(dr)
        for i in range(4):
            q, label = _query(ci, i + 1)
            qidx[k, i] = qcodes.setdefault(q, len(qcodes))
            truth[k, i] = codes.setdefault(label, len(codes))
    return _Plan(list(qcodes), qidx, truth, codes)


def _predict(psi: RegularizerTable, queries: Sequence) -> list:
    learner = induced_learner(psi)
    return [learner(tuple((p, label) for p in pts), x) for label, pts, x in queries]


def _predict_chunk(args):
    psi, queries = args
    return _predict(psi, queries)


def _predict_all(psi: RegularizerTable, queries: list, workers: int) -> list:
    if workers <= 1 or len(queries) < 1000:
        return _predict(psi, queries)
    size = -(-len(queries) // workers)
    chunks = [(psi, queries[i:i + size]) for i in range(0, len(queries), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_predict_chunk, chunks))
    return [y for part in parts for y in part]


def exhaustive_indicators(d: int, psi: RegularizerTable, workers: int = 1) -> np.ndarray:
    """(draws, 4) array of T_i in enumeration order."""
    first = build_instances(draw_at(d, 0))
    _require_covered(first, psi)
    induced_learner(psi)  # rejects non-injective tables before the plan is built
    plan = exhaustive_plan(d)
    codes = dict(plan.codes)
    preds = np.array([codes.setdefault(y, len(codes)) for y in _predict_all(psi, plan.queries, workers)],
                     dtype=np.int64)
    return (preds[plan.qidx] != plan.truth).astype(np.int8)


def sampled_indicators(draws: Iterable[AdversaryDraw], psi: RegularizerTable) -> tuple[list, np.ndarray]:
    learner = induced_learner(psi)
    memo: dict = {}
    kept, rows = [], []
    for dr in draws:
        ci = build_instances(dr)
        _require_covered(ci, psi)
        row = []
        for i in range(4):
            q, label = _query(ci, i + 1)
            if q not in memo:
                memo[q] = learner(tuple((p, q[0]) for p in q[1]), q[2])
            row.append(int(memo[q] != label))
        kept.append(dr)
        rows.append(row)
    return kept, np.array(rows, dtype=np.int8).reshape(-1, 4)


def _summarize(d, mode, psi, t: np.ndarray, draw_lookup, config) -> ExperimentReport:
    n = len(t)
    if n == 0:
        raise ConfigurationError("no draws to evaluate")
    per_draw = t.sum(axis=1)
    worst = int(np.argmax(per_draw))
    worst_draw = draw_lookup(worst).to_json()
    worst_draw["T"] = t[worst].tolist()
    return ExperimentReport(
        d=d,
        mode=mode,
        regularizer=psi.name,
        draws=n,
        mean=Fraction(int(per_draw.sum()), 4 * n),
        family_means=[Fraction(int(t[:, i].sum()), n) for i in range(4)],
        cycle_failures=int((per_draw > 1).sum()),
        worst_draw=worst_draw,
        config=dict(config or {}),
    )


def run_experiment(d: int, psi: RegularizerTable, mode: str = "exhaustive", trials: int = 0,
                   rng: random.Random | None = None, workers: int = 1,
                   draws: Iterable[AdversaryDraw] | None = None, config: dict | None = None) -> ExperimentReport:
    """Average (T1+T2+T3+T4)/4 over draws.

    Exhaustive mode is exact over every draw. Monte Carlo samples ``trials``
    draws from ``rng``, or consumes ``draws`` when given.
    """
    if mode == "exhaustive":
        t = exhaustive_indicators(d, psi, workers)
        return _summarize(d, mode, psi, t, lambda k: draw_at(d, k), config)
    if mode == "monte-carlo":
        if draws is None:
            if trials < 1:
                raise ConfigurationError("monte-carlo mode needs trials >= 1")
            rng = rng or random.Random(0)
            draws = (draw(d, rng) for _ in range(trials))
        kept, t = sampled_indicators(draws, psi)
        return _summarize(d, mode, psi, t, kept.__getitem__, config)
    raise ConfigurationError(f"unknown mode {mode!r}")


# --- conditional uniformity --------------------------------------------------

@dataclass
class UniformityReport:
    d: int
    family: int
    groups: dict  # (points, truth text) -> Counter of x_test
    uniform: bool
    stray: int  # draws whose x_test fell outside S_i

    def to_json(self) -> dict:
        profiles = Counter(
            tuple(counts[p] for p in pts) for (pts, _), counts in self.groups.items()
        )
        return {
            "d": self.d,
            "family": self.family,
            "groups": len(self.groups),
            "uniform": self.uniform,
            "stray": self.stray,
            "count_profiles": {",".join(map(str, k)): v for k, v in sorted(profiles.items())},
        }


def verify_uniformity(d: int, family: int, builder: Callable = build_instances) -> UniformityReport:
    """Exact count of x_test positions within each realized (S_i, h*_i)."""
    if family not in (1, 2, 3, 4):
        raise ValueError(f"family must be 1..4, got {family}")
    groups: dict = {}
    stray = 0
    for dr in enumerate_draws(d):
        inst = builder(dr).instances[family - 1]
        key = (inst.points, str(inst.truth))
        groups.setdefault(key, Counter())[dr.x_test] += 1
        stray += dr.x_test not in inst.points
    uniform = stray == 0 and all(
        len({counts[p] for p in pts}) == 1 for (pts, _), counts in groups.items()
    )
    return UniformityReport(d, family, groups, uniform, stray)


def verify_ladder(d: int, builder: Callable = build_instances) -> list[str]:
    """All ladder and structure failures over every draw at ``d`` (first 20 kept)."""
    out = []
    for dr in enumerate_draws(d):
        ci = builder(dr)
        for msg in check_structure(ci) + ladder_failures(ci):
            out.append(f"{dr.to_json()}: {msg}")
            if len(out) >= 20:
                return out
    return out
