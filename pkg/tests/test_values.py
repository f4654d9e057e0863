"""Value expression and list machinery tests."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giml.values import (DRAW_NO_RETURNS, DRAW_WITH_RETURNS, SEQUENTIALLY,
                         ListBank, ListRef, Literal, MaterializeContext,
                         Percent, RandomChoice, RandomRange, ValueExprError,
                         materialize, parse_value_expr)


@dataclass
class FakeList:
    name: str
    values: tuple
    draw_mode: str = DRAW_NO_RETURNS
    group: Optional[str] = None


def ctx(seed=1, x=1024.0, y=768.0, lists=None):
    bank = lists or {}
    return MaterializeContext(rng=random.Random(seed), extent_x=x,
                              extent_y=y,
                              list_value=lambda name: bank.get(name))


# ---------------------------------------------------------------------------
# parsing


def test_plain_text_is_literal():
    assert parse_value_expr("hello") == Literal("hello")
    assert parse_value_expr("300", numeric=True) == Literal("300")


def test_list_reference():
    assert parse_value_expr("@imgs") == ListRef("imgs")
    with pytest.raises(ValueExprError):
        parse_value_expr("@  ")


def test_rand_prefix_is_case_insensitive():
    assert parse_value_expr("RAND:a:b") == RandomChoice(("a", "b"))
    assert parse_value_expr("Rand:200:400", numeric=True, integer=True) == \
        RandomRange(200, 400, integer=True)


def test_numeric_rand_with_two_bounds_is_a_range():
    expr = parse_value_expr("rand:200:400", numeric=True, integer=True)
    assert expr == RandomRange(200, 400, integer=True)
    # reversed bounds are accepted and put in order
    assert parse_value_expr("rand:400:200", numeric=True, integer=True) == \
        RandomRange(200, 400, integer=True)


def test_numeric_rand_with_more_alternatives_is_a_choice():
    expr = parse_value_expr("rand:10:20:30", numeric=True, integer=True)
    assert expr == RandomChoice(("10", "20", "30"))


def test_rand_choice_of_colors():
    expr = parse_value_expr("rand:Red:Orange:Yellow")
    assert expr == RandomChoice(("Red", "Orange", "Yellow"))


def test_rand_needs_two_alternatives():
    with pytest.raises(ValueExprError):
        parse_value_expr("rand:only")
    with pytest.raises(ValueExprError):
        parse_value_expr("rand:")
    with pytest.raises(ValueExprError):
        parse_value_expr("rand:a::b")


def test_percent_needs_a_numeric_attribute():
    assert parse_value_expr("30%", numeric=True, axis="x") == \
        Percent(30.0, "x")
    with pytest.raises(ValueExprError):
        parse_value_expr("30%")


def test_percent_with_text_stays_literal():
    # "100%" as a text value is text, not an expression error
    assert parse_value_expr("loud 100 percent") == Literal("loud 100 percent")


# ---------------------------------------------------------------------------
# evaluation


def test_literal_materializes_to_its_text():
    assert materialize(Literal("img1"), ctx()) == "img1"


def test_percent_scales_against_the_named_axis():
    assert materialize(Percent(30.0, "x"), ctx()) == pytest.approx(307.2)
    assert materialize(Percent(20.0, "y"), ctx()) == pytest.approx(153.6)
    assert materialize(Percent(50.0, "scalar"), ctx()) == pytest.approx(0.5)


def test_random_range_is_stable_per_site():
    context = ctx(seed=7)
    expr = RandomRange(200, 400, integer=True)
    first = materialize(expr, context, site="region1.x")
    for _ in range(10):
        assert materialize(expr, context, site="region1.x") == first


def test_random_sites_are_independent():
    context = ctx(seed=7)
    expr = RandomRange(0, 10 ** 9, integer=True)
    a = materialize(expr, context, site="a")
    b = materialize(expr, context, site="b")
    assert a != b  # astronomically unlikely to collide


@given(st.integers(-1000, 1000), st.integers(0, 500), st.integers())
def test_integer_range_bounds_are_inclusive(low, span, seed):
    high = low + span
    value = materialize(RandomRange(low, high, integer=True), ctx(seed),
                        site="s")
    assert low <= value <= high
    assert isinstance(value, int)


@given(st.floats(-1e6, 1e6), st.floats(0.001, 1e6), st.integers())
def test_real_range_half_open(low, span, seed):
    high = low + span
    value = materialize(RandomRange(low, high, integer=False), ctx(seed),
                        site="s")
    assert low <= value < high


def test_choice_draws_from_options():
    expr = RandomChoice(("Red", "Orange", "Yellow"))
    seen = {materialize(expr, ctx(seed), site="s") for seed in range(40)}
    assert seen == {"Red", "Orange", "Yellow"}


def test_list_reference_reads_through_context():
    context = ctx(lists={"imgs": "img2"})
    assert materialize(ListRef("imgs"), context) == "img2"
    assert materialize(ListRef("other"), context) is None


# ---------------------------------------------------------------------------
# lists and groups


def bank(*lists, seed=1):
    return ListBank(lists, random.Random(seed))


def test_sequential_list_walks_in_order():
    b = bank(FakeList("colors", ("Red", "Orange", "Yellow"), SEQUENTIALLY))
    drawn = []
    for _ in range(3):
        b.switch_over(["colors"])
        drawn.append(b.value("colors"))
    assert drawn == ["Red", "Orange", "Yellow"]


def test_no_returns_draws_a_permutation_then_exhausts():
    b = bank(FakeList("imgs", ("img1", "img2", "img3")), seed=3)
    drawn = [b.switch_over(["imgs"])[0].value for _ in range(3)]
    assert sorted(drawn) == ["img1", "img2", "img3"]
    events = b.switch_over(["imgs"])
    assert [e.kind for e in events] == ["exhausted"]
    assert b.is_exhausted("imgs")
    # the current value stays at the last drawn one
    assert b.value("imgs") == drawn[-1]
    # exhaustion is only reported once
    assert b.switch_over(["imgs"]) == []


@given(st.integers(0, 10 ** 6))
@settings(max_examples=60)
def test_no_returns_permutes_for_every_seed(seed):
    b = bank(FakeList("imgs", ("img1", "img2", "img3")), seed=seed)
    drawn = [b.switch_over(["imgs"])[0].value for _ in range(3)]
    assert sorted(drawn) == ["img1", "img2", "img3"]


def test_with_returns_never_exhausts():
    b = bank(FakeList("l", ("a", "b"), DRAW_WITH_RETURNS), seed=5)
    for _ in range(50):
        events = b.switch_over(["l"])
        assert [e.kind for e in events] == ["switched"]
    assert not b.is_exhausted("l")


def test_group_members_share_the_drawn_index():
    imgs = FakeList("imgs", ("img1", "img2", "img3"), group="1")
    caps = FakeList("captions", ("cap1", "cap2", "cap3"), group="1")
    b = bank(imgs, caps, seed=11)
    for _ in range(3):
        b.switch_over(["imgs", "captions"])
        assert b.value("imgs")[3:] == b.value("captions")[3:]


@given(st.integers(0, 10 ** 6))
@settings(max_examples=60)
def test_group_synchrony_for_every_seed(seed):
    imgs = FakeList("imgs", ("i0", "i1", "i2"), group="g")
    caps = FakeList("caps", ("c0", "c1", "c2"), group="g")
    b = bank(imgs, caps, seed=seed)
    while True:
        events = b.switch_over(["imgs", "caps"])
        if events and events[0].kind == "exhausted":
            break
        assert b.value("imgs")[1] == b.value("caps")[1]


def test_group_advances_once_per_call():
    imgs = FakeList("imgs", ("i0", "i1", "i2"), group="g",
                    draw_mode=SEQUENTIALLY)
    caps = FakeList("caps", ("c0", "c1", "c2"), group="g")
    b = bank(imgs, caps)
    b.switch_over(["imgs", "caps"])  # one advance, not two
    assert (b.value("imgs"), b.value("caps")) == ("i0", "c0")


def test_group_mode_conflict_recorded():
    imgs = FakeList("imgs", ("a",), group="g", draw_mode=SEQUENTIALLY)
    caps = FakeList("caps", ("b",), group="g", draw_mode=DRAW_WITH_RETURNS)
    b = bank(imgs, caps)
    assert len(b.warnings) == 1
    assert "caps" in b.warnings[0]


def test_first_read_draws_implicitly():
    b = bank(FakeList("imgs", ("img1", "img2")))
    value, events = b.ensure_value("imgs")
    assert value in ("img1", "img2")
    assert [e.kind for e in events] == ["switched"]
    again, events = b.ensure_value("imgs")
    assert again == value
    assert events == []


def test_unknown_list_reports_missing():
    b = bank(FakeList("imgs", ("img1",)))
    value, events = b.ensure_value("ghost")
    assert value is None
    assert [e.kind for e in events] == ["missing"]
    assert [e.kind for e in b.switch_over(["ghost"])] == ["missing"]


def test_exhausted_group_reports_each_member_once():
    imgs = FakeList("imgs", ("i0",), group="g")
    caps = FakeList("caps", ("c0",), group="g")
    b = bank(imgs, caps)
    b.switch_over(["imgs"])
    events = b.switch_over(["imgs", "caps"])
    assert [(e.kind, e.list_name) for e in events] == \
        [("exhausted", "imgs"), ("exhausted", "caps")]
    assert b.switch_over(["imgs", "caps"]) == []


def test_list_names_fold_case():
    b = bank(FakeList("Imgs", ("img1",)))
    assert b.has_list("IMGS")
    b.switch_over(["imgs"])
    assert b.value("imgs") == "img1"
