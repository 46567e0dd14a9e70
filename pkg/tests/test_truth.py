import itertools

from ltc.truth import (
    FALSE, TRUE, UNKNOWN, from_bool, precision_le, truth_le, tv_all, tv_and,
    tv_any, tv_or,
)

VALUES = [TRUE, FALSE, UNKNOWN]


def test_inverse_involution():
    assert TRUE.inverse() is FALSE
    assert FALSE.inverse() is TRUE
    assert UNKNOWN.inverse() is UNKNOWN
    for v in VALUES:
        assert v.inverse().inverse() is v


def test_truth_order_total():
    assert truth_le(FALSE, UNKNOWN) and truth_le(UNKNOWN, TRUE) and truth_le(FALSE, TRUE)
    for a, b in itertools.product(VALUES, VALUES):
        assert truth_le(a, b) or truth_le(b, a)


def test_precision_order():
    assert precision_le(UNKNOWN, TRUE) and precision_le(UNKNOWN, FALSE)
    assert not precision_le(TRUE, FALSE) and not precision_le(FALSE, TRUE)
    for v in VALUES:
        assert precision_le(v, v)


def test_and_or_lattice():
    for a, b in itertools.product(VALUES, VALUES):
        assert tv_and(a, b) is (a if a.rank <= b.rank else b)
        assert tv_or(a, b) is (a if a.rank >= b.rank else b)
    assert tv_all([]) is TRUE
    assert tv_any([]) is FALSE
    assert tv_all([TRUE, UNKNOWN]) is UNKNOWN
    assert tv_any([FALSE, UNKNOWN]) is UNKNOWN


def test_from_bool():
    assert from_bool(True) is TRUE and from_bool(False) is FALSE
