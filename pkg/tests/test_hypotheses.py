from itertools import product
from math import comb

import pytest

from otplab.hypotheses import (
    FiniteClass,
    Label,
    OtpHypothesis,
    PeriodicHypothesis,
    cantor_class,
    cantor_relabel,
    enumerate_class,
    has_distinct_label_sets,
    is_generalized_binary,
)
from otplab.strings import BitString

B = BitString.parse


def h(a, b):
    return OtpHypothesis(B(a), B(b))


def test_evaluate_examples():
    assert h("00", "01")(0) == Label(0, B("00"))
    assert h("00", "01")(5) == Label(1, B("01"))
    g = h("0011", "0101")
    assert g(3) == g(3 + 4)


def test_membership_is_enforced():
    with pytest.raises(ValueError, match="balanced"):
        h("00", "00")
    with pytest.raises(ValueError):
        h("0", "1")
    with pytest.raises(ValueError):
        h("00", "011")


def test_labels_are_distinct_by_payload_length():
    assert Label(0, B("01")) != Label(0, B("0101"))
    assert str(Label(1, B("0011"))) == "1:0011"
    assert Label.parse("0:0101") == Label(0, B("0101"))


def test_text_encoding():
    g = h("0011", "0101")
    assert str(g) == "0011|0101"
    assert OtpHypothesis.parse("0011|0101") == g


def test_image_examples():
    assert h("00", "01").image() == {Label(0, B("00")), Label(1, B("01"))}
    assert h("0011", "0101").image() == {Label(0, B("0011")), Label(1, B("0101"))}
    assert h("00", "01").image() != h("01", "00").image()


def _brute_class_size(d):
    count = 0
    for a, b in product(product("01", repeat=d), repeat=2):
        c = [x != y for x, y in zip(a, b)]
        count += sum(c) * 2 == d
    return count


@pytest.mark.parametrize("d", [2, 4])
def test_enumerate_class_counts(d):
    c = enumerate_class(d)
    assert len(c) == _brute_class_size(d) == 2 ** d * comb(d, d // 2)
    assert {2: 8, 4: 96}[d] == len(c)
    assert all(len(g.image()) == 2 for g in c)
    assert [c.id_of(g) for g in c] == list(range(len(c)))


@pytest.mark.parametrize("d", [0, 3, -2])
def test_enumerate_class_rejects_bad_d(d):
    with pytest.raises(ValueError):
        enumerate_class(d)


@pytest.mark.parametrize("d", [2, 4, 6])
def test_slices_are_gbdls(d):
    c = enumerate_class(d)
    assert is_generalized_binary(c)
    assert has_distinct_label_sets(c)


def test_gbdls_negative_controls():
    three = PeriodicHypothesis(("a", "b", "c"))
    assert not is_generalized_binary(FiniteClass([h("00", "01"), three]))
    assert is_generalized_binary(FiniteClass([]))
    assert has_distinct_label_sets(FiniteClass([h("00", "01")]))
    # same image, different functions
    twin = PeriodicHypothesis((Label(1, B("01")), Label(0, B("00"))))
    assert not has_distinct_label_sets(FiniteClass([h("00", "01"), twin]))


def test_duplicate_hypotheses_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        FiniteClass([h("00", "01"), h("00", "01")])


@pytest.mark.parametrize("d", [2, 4, 6])
def test_evaluation_stays_in_image_and_is_periodic(d):
    for g in enumerate_class(d):
        im = g.image()
        for x in range(3 * d):
            assert g(x) in im
            assert g(x) == g(x % d)


@pytest.mark.parametrize("d", [2, 4])
def test_two_labels_recover_the_hypothesis(d):
    c = enumerate_class(d)
    by_image = {}
    for g in c:
        by_image.setdefault(g.image(), []).append(g)
    assert all(len(v) == 1 for v in by_image.values())


def test_cantor_class():
    two = cantor_class(2)
    assert sorted(str(g.a) for g in two) == ["01", "10"]
    assert len(cantor_class(4)) == 6 == comb(4, 2)
    for d in (2, 4, 6):
        ones = BitString.ones(d)
        for g in cantor_class(d):
            assert Label(1, ones) in g.image()
            relabeled = cantor_relabel(g)
            # first Cantor class: h_A(x) = A for x in A, '*' otherwise
            for x in range(d):
                assert relabeled(x) == (g.a if g.a[x] else "*")
            assert relabeled.image() == {g.a, "*"}
    with pytest.raises(ValueError):
        cantor_relabel(h("00", "01"))
