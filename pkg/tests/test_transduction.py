import json
import random
from fractions import Fraction
from itertools import combinations, permutations

import pytest

from otplab.hypotheses import Label, OtpHypothesis, enumerate_class
from otplab.strings import BitString
from otplab.transduction import (
    TransductiveInstance,
    UnrealizableSampleError,
    baseline_learner,
    empirical_risk,
    format_fraction,
    label_instance,
    oracle_learner,
    parse_fraction,
    sweep_baseline,
    transductive_error,
)

B = BitString.parse
L = lambda t, s: Label(t, B(s))  # noqa: E731


def h(a, b):
    return OtpHypothesis(B(a), B(b))


def test_empirical_risk():
    g = h("0011", "0101")
    sample = label_instance(TransductiveInstance((0, 1, 2, 3), g))
    assert empirical_risk(g, sample) == 0
    wrong_once = lambda x: g(x) if x else L(1, "1111")  # noqa: E731
    assert empirical_risk(wrong_once, sample) == Fraction(1, 4)
    assert empirical_risk(lambda x: "nope", sample) == 1
    with pytest.raises(ValueError):
        empirical_risk(g, ())


def test_label_instance():
    inst = TransductiveInstance((0, 1), h("00", "01"))
    assert label_instance(inst) == ((0, L(0, "00")), (1, L(1, "01")))
    assert label_instance(TransductiveInstance((7,), h("00", "01"))) == ((7, L(1, "01")),)
    assert label_instance(inst) == label_instance(inst)


def test_error_controls():
    inst = TransductiveInstance((0, 1, 2, 3), h("0011", "0101"))
    assert transductive_error(oracle_learner(inst.truth), inst) == 0
    assert transductive_error(lambda s, x: L(0, "1"), inst) == 1


def test_baseline_single_minority_point():
    # C = 0110; sigma0 = {0, 3} plus the single one-position 1
    g = h("0000", "0110")
    inst = TransductiveInstance((0, 3, 1), g)
    assert transductive_error(baseline_learner(), inst) == Fraction(1, 3)
    g6 = h("000000", "000111")  # sigma0 = {0, 1, 2}
    inst4 = TransductiveInstance((0, 1, 2, 4), g6)
    assert transductive_error(baseline_learner(), inst4) == Fraction(1, 4)


def test_baseline_rules():
    learn = baseline_learner()
    assert learn(((0, L(0, "00")), (1, L(1, "01"))), 3) == L(1, "01")
    assert learn(((0, L(0, "0011")), (5, L(0, "0011"))), 2) == L(0, "0011")
    assert learn((), 4) == Label(0, B(""))


@pytest.mark.parametrize("sample", [
    ((0, L(0, "00")), (0, L(1, "01"))),
    ((0, L(0, "00")), (1, L(1, "01")), (2, L(1, "10"))),
    ((0, L(0, "00")), (1, L(0, "11"))),
    ((0, L(0, "00")), (1, L(1, "00"))),  # xor not balanced
    ((1, L(0, "00")), (0, L(1, "01"))),  # h_{00,01} labels 0 with tag 0
])
def test_baseline_rejects_unrealizable(sample):
    with pytest.raises(UnrealizableSampleError):
        baseline_learner()(sample, 0)


def test_permutation_invariance():
    learn = baseline_learner()
    rng = random.Random(3)
    c = enumerate_class(4)
    for _ in range(30):
        g = rng.choice(c.hypotheses)
        pts = rng.sample(range(8), rng.randint(1, 4))
        ref = transductive_error(learn, TransductiveInstance(tuple(pts), g))
        for perm in permutations(pts):
            assert transductive_error(learn, TransductiveInstance(perm, g)) == ref


def test_duplicates_remove_one_occurrence():
    g = h("0011", "0101")
    inst = TransductiveInstance((1, 1), g)
    # each round still sees the other copy of point 1
    assert transductive_error(baseline_learner(), inst) == 0


@pytest.mark.parametrize("d", [2, 4])
def test_baseline_guarantee_from_three_points(d):
    """n * error <= 1 whenever n >= 3; the only excess comes from 2-point split instances."""
    learn = baseline_learner()
    for g in enumerate_class(d):
        for n in range(1, d + 1):
            for pts in combinations(range(d), n):
                inst = TransductiveInstance(pts, g)
                scaled = transductive_error(learn, inst) * n
                split = len({g(p) for p in pts}) == 2
                if n == 2 and split:
                    assert scaled == 2
                else:
                    assert scaled <= 1


def test_sweep_baseline_summary():
    res = sweep_baseline(4)
    assert res.instances == 96 * 15
    assert res.max_scaled_error == 2
    assert len(res.first_violation.points) == 2
    assert res.equality_witness is not None
    json.dumps(res.to_json())


def test_instance_json_roundtrip():
    inst = TransductiveInstance((0, 3, 5), h("0011", "0101"))
    obj = inst.to_json()
    assert obj == {"points": [0, 3, 5], "A": "0011", "B": "0101"}
    assert TransductiveInstance.from_json(json.loads(json.dumps(obj))) == inst
    assert format_fraction(Fraction(2, 8)) == "1/4"
    assert parse_fraction("3/12") == Fraction(1, 4)
    with pytest.raises(ValueError):
        TransductiveInstance((), inst.truth)
