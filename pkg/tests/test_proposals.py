import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from labelforge.errors import NoProposals
from labelforge.mask import MaskRaster, rle_encode
from labelforge.proposals import (
    DRIVABLE_CLASS,
    Proposal,
    REASON_FALLBACK,
    REASON_LABELED,
    rank_by_area,
    select_drivable,
)


def square(side, width=16, height=16):
    """A side x side block in the top-left corner, encoded."""
    arr = np.zeros((height, width), dtype=bool)
    arr[:side, :side] = True
    return rle_encode(MaskRaster(arr))


def prop(pid, mask, label="", scores=None, image="img0"):
    return Proposal(
        id=pid, mask=mask, source_image=image, class_label=label, class_scores=scores
    )


def test_proposal_label_must_match_argmax():
    with pytest.raises(ValueError):
        prop("p", square(2), label="sky", scores={"sky": 0.2, "road": 0.8})
    # ties break to the lexicographically smallest label
    p = prop("p", square(2), label="road", scores={"sky": 0.5, "road": 0.5})
    assert p.class_label == "road"
    with pytest.raises(ValueError):
        prop("p", square(2), label="sky", scores={"sky": 0.5, "road": 0.5})


def test_proposal_scores_range_checked():
    with pytest.raises(ValueError):
        prop("p", square(2), label="sky", scores={"sky": 1.2})


def blob(n_pixels, width=4, height=4):
    """First n_pixels in row-major order set, encoded."""
    arr = np.zeros((height, width), dtype=bool)
    arr.flat[:n_pixels] = True
    return rle_encode(MaskRaster(arr))


def test_rank_by_area_basic():
    # areas [5, 9, 2], k=2 -> areas [9, 5]
    props = [
        prop("p1", blob(5)),
        prop("p2", blob(9)),
        prop("p3", blob(2)),
    ]
    ranked = rank_by_area(props, top_k=2)
    assert [p.area for p in ranked] == [9, 5]
    assert [p.id for p in ranked] == ["p2", "p1"]


def test_rank_fewer_than_k():
    p = prop("only", square(2))
    assert rank_by_area([p], top_k=10) == [p]


def test_rank_tie_breaks_by_ascending_id():
    a = prop("a", square(2))
    b = prop("b", square(2))
    assert [p.id for p in rank_by_area([b, a], top_k=1)] == ["a"]


def test_rank_drops_zero_area():
    empty = prop("z", rle_encode(MaskRaster.zeros(4, 4)))
    keep = prop("k", square(1, 4, 4))
    ranked = rank_by_area([empty, keep], top_k=10)
    assert [p.id for p in ranked] == ["k"]


def test_rank_requires_positive_k():
    with pytest.raises(ValueError):
        rank_by_area([], top_k=0)


def test_select_single_labeled_drivable():
    p = prop("p", square(2), label=DRIVABLE_CLASS, scores={DRIVABLE_CLASS: 0.9})
    r = select_drivable([p])
    assert r.chosen == "p"
    assert r.reason == REASON_LABELED
    assert r.drivable_score == 0.9


def test_select_two_labeled_takes_higher_score():
    a = prop("a", square(2), label=DRIVABLE_CLASS, scores={DRIVABLE_CLASS: 0.7})
    b = prop("b", square(3), label=DRIVABLE_CLASS, scores={DRIVABLE_CLASS: 0.9})
    assert select_drivable([a, b]).chosen == "b"


def test_select_fallback_best_score():
    scores = [0.2, 0.4, 0.1]
    props = [
        prop(f"p{i}", square(2), label="sky", scores={"sky": 0.9, DRIVABLE_CLASS: s})
        for i, s in enumerate(scores)
    ]
    r = select_drivable(props)
    assert r.chosen == "p1"
    assert r.reason == REASON_FALLBACK
    assert r.drivable_score == 0.4


def test_select_no_scores_takes_largest_area():
    a = prop("a", square(2))
    b = prop("b", square(3))
    r = select_drivable([a, b])
    assert r.chosen == "b"
    assert r.reason == REASON_FALLBACK
    assert r.drivable_score is None


def test_select_tie_chain_score_then_area_then_id():
    # same drivable score: larger area wins
    a = prop("a", square(2), label=DRIVABLE_CLASS, scores={DRIVABLE_CLASS: 0.8})
    b = prop("b", square(3), label=DRIVABLE_CLASS, scores={DRIVABLE_CLASS: 0.8})
    assert select_drivable([a, b]).chosen == "b"
    # same score and area: ascending id wins
    c = prop("c", square(3), label=DRIVABLE_CLASS, scores={DRIVABLE_CLASS: 0.8})
    assert select_drivable([c, b]).chosen == "b"


def test_select_empty_rejected():
    with pytest.raises(NoProposals):
        select_drivable([])


@given(st.permutations(list(range(6))))
@settings(max_examples=60, deadline=None)
def test_select_order_independent(order):
    rng = np.random.default_rng(99)
    base = []
    for i in range(6):
        side = int(rng.integers(1, 6))
        s = float(np.round(rng.random() * 0.5, 3))
        label = DRIVABLE_CLASS if i % 2 == 0 else "sky"
        if label == DRIVABLE_CLASS:
            scores = {DRIVABLE_CLASS: max(s, 0.51), "sky": 0.5}
        else:
            scores = {DRIVABLE_CLASS: s, "sky": max(0.52, s + 0.01)}
        base.append(prop(f"p{i}", square(side), label=label, scores=scores))
    reference = select_drivable(base)
    shuffled = [base[i] for i in order]
    assert select_drivable(shuffled) == reference


@given(st.permutations(list(range(5))), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_rank_order_independent(order, k):
    props = [prop(f"p{i}", square(i + 1, 8, 8)) for i in range(5)]
    expected = [p.id for p in rank_by_area(props, top_k=k)]
    shuffled = [props[i] for i in order]
    assert [p.id for p in rank_by_area(shuffled, top_k=k)] == expected
