"""Attribute value expressions and list machinery.

GIML attribute values are more than literals: ``rand:`` draws a random
value or range once per run, a trailing ``%`` scales against the design
screen size, and ``@name`` pulls the current element of a declared list.
This module parses those forms into small expression records and
evaluates them, and it hosts the runtime state of lists and list groups.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

RAND_PREFIX = "rand:"


class ValueExprError(ValueError):
    """A value uses expression syntax but is malformed."""


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class RandomRange:
    low: float
    high: float
    integer: bool


@dataclass(frozen=True)
class RandomChoice:
    options: tuple[str, ...]


@dataclass(frozen=True)
class Percent:
    value: float
    axis: str  # "x", "y" or "scalar"


@dataclass(frozen=True)
class ListRef:
    list_name: str


ValueExpr = Union[Literal, RandomRange, RandomChoice, Percent, ListRef]


def parse_number(text: str) -> Optional[float]:
    try:
        return float(text.strip())
    except ValueError:
        return None


def parse_value_expr(raw: str, numeric: bool = False, integer: bool = False,
                     axis: str = "scalar") -> ValueExpr:
    """Parse one attribute value into an expression record.

    ``numeric``/``integer`` describe the attribute the value belongs to:
    a ``rand:`` with exactly two numeric tails on a numeric attribute is
    a range draw, any other ``rand:`` is a choice between the listed
    alternatives.  ``axis`` is the screen axis a percent value resolves
    against.  Raises ValueExprError for expression syntax that cannot
    mean anything (a lone ``rand:`` tail, percents on non numeric
    attributes and so on).
    """
    text = raw.strip()
    if text.startswith("@"):
        name = text[1:].strip()
        if not name:
            raise ValueExprError("list reference with empty name")
        return ListRef(name)
    if text[:len(RAND_PREFIX)].casefold() == RAND_PREFIX:
        tails = text[len(RAND_PREFIX):].split(":")
        if any(not tail.strip() for tail in tails) or len(tails) < 2:
            raise ValueExprError(
                "rand needs at least two alternatives: %r" % raw)
        tails = tuple(tail.strip() for tail in tails)
        if numeric and len(tails) == 2:
            low, high = parse_number(tails[0]), parse_number(tails[1])
            if low is not None and high is not None:
                if low > high:
                    low, high = high, low
                return RandomRange(low, high, integer)
        return RandomChoice(tails)
    if text.endswith("%"):
        number = parse_number(text[:-1])
        if number is not None:
            if not numeric:
                raise ValueExprError(
                    "percent value on a non numeric attribute: %r" % raw)
            return Percent(number, axis)
    return Literal(raw)


@dataclass
class MaterializeContext:
    """Everything a value expression may need when evaluated."""

    rng: random.Random
    extent_x: float
    extent_y: float
    list_value: Callable[[str], Optional[str]] = lambda name: None
    cache: dict[str, object] = field(default_factory=dict)


def materialize(expr: ValueExpr, ctx: MaterializeContext,
                site: str = "") -> object:
    """Evaluate an expression to a concrete value.

    Random draws are keyed by ``site`` in the context cache so a site
    yields the same value for the whole run no matter how often it is
    read.  Percent values resolve against the design screen extent of
    their axis; scalar percents stay fractions for the consumer to scale
    (animation amplitudes are relative to the region size).  List
    references go through the context and change when their list is
    switched over.
    """
    if isinstance(expr, Literal):
        return expr.text
    if isinstance(expr, RandomRange):
        if site in ctx.cache:
            return ctx.cache[site]
        if expr.integer:
            value: object = ctx.rng.randint(int(expr.low), int(expr.high))
        else:
            value = expr.low + ctx.rng.random() * (expr.high - expr.low)
        ctx.cache[site] = value
        return value
    if isinstance(expr, RandomChoice):
        if site in ctx.cache:
            return ctx.cache[site]
        value = expr.options[ctx.rng.randrange(len(expr.options))]
        ctx.cache[site] = value
        return value
    if isinstance(expr, Percent):
        if expr.axis == "x":
            return expr.value * ctx.extent_x / 100.0
        if expr.axis == "y":
            return expr.value * ctx.extent_y / 100.0
        return expr.value / 100.0
    if isinstance(expr, ListRef):
        return ctx.list_value(expr.list_name)
    raise TypeError("not a value expression: %r" % (expr,))


# ---------------------------------------------------------------------------
# lists and groups

DRAW_NO_RETURNS = "draw_no_returns"
DRAW_WITH_RETURNS = "draw_with_returns"
SEQUENTIALLY = "sequentially"


@dataclass(frozen=True)
class ListEvent:
    """Outcome of a switch-over, in emission order."""

    kind: str  # "switched", "exhausted" or "missing"
    list_name: str
    value: Optional[str] = None


@dataclass
class _ListState:
    name: str
    values: tuple[str, ...]
    current: Optional[str] = None
    drawn: int = 0
    exhausted: bool = False


@dataclass
class _GroupState:
    members: list[_ListState]
    mode: str
    pool: list[int]
    next_index: int = 0
    done: bool = False

    def advance(self, rng: random.Random) -> Optional[int]:
        """Pick the next shared index, or None when nothing is left."""
        length = min(len(m.values) for m in self.members)
        if self.mode == DRAW_WITH_RETURNS:
            return rng.randrange(length)
        if self.mode == SEQUENTIALLY:
            if self.next_index >= length:
                self.done = True
                return None
            index = self.next_index
            self.next_index += 1
            return index
        if not self.pool:
            self.done = True
            return None
        return self.pool.pop(rng.randrange(len(self.pool)))


class ListBank:
    """Runtime state of every declared list, grouped where requested.

    Lists sharing a ``group`` label advance together: one switch-over
    draws a single index (under the first member's draw mode) and every
    member takes the value at that index.  Ungrouped lists behave as
    groups of one.
    """

    def __init__(self, lists, rng: random.Random):
        # ``lists`` is any iterable of objects with name, values,
        # draw_mode and group attributes (the parsed list declarations).
        self.rng = rng
        self.warnings: list[str] = []
        self._states: dict[str, _ListState] = {}
        self._group_of: dict[str, _GroupState] = {}
        order: list[tuple[Optional[str], list] ] = []
        grouped: dict[str, list] = {}
        for decl in lists:
            if decl.group is None:
                order.append((None, [decl]))
            elif decl.group in grouped:
                grouped[decl.group].append(decl)
            else:
                grouped[decl.group] = [decl]
                order.append((decl.group, grouped[decl.group]))
        for label, decls in order:
            mode = decls[0].draw_mode
            for decl in decls[1:]:
                if decl.draw_mode != mode:
                    self.warnings.append(
                        "list %s: draw mode %s overridden by group %s mode %s"
                        % (decl.name, decl.draw_mode, label, mode))
            members = []
            for decl in decls:
                state = _ListState(decl.name, tuple(decl.values))
                self._states[_fold(decl.name)] = state
                members.append(state)
            length = min((len(m.values) for m in members), default=0)
            group = _GroupState(members, mode, pool=list(range(length)))
            for member in members:
                self._group_of[_fold(member.name)] = group

    def value(self, name: str) -> Optional[str]:
        state = self._states.get(_fold(name))
        return state.current if state else None

    def is_exhausted(self, name: str) -> bool:
        state = self._states.get(_fold(name))
        return bool(state and state.exhausted)

    def has_list(self, name: str) -> bool:
        return _fold(name) in self._states

    def ensure_value(self, name: str) -> tuple[Optional[str], list[ListEvent]]:
        """Current value, drawing a first one if none was drawn yet."""
        state = self._states.get(_fold(name))
        if state is None:
            return None, [ListEvent("missing", name)]
        if state.current is None and not state.exhausted:
            events = self.switch_over([name])
            return state.current, events
        return state.current, []

    def switch_over(self, names) -> list[ListEvent]:
        """Advance the named lists (and their group partners) once each.

        A group advances at most once per call even when several members
        are named.  Returns the emitted events in order: one "switched"
        per member that took a new value, one "exhausted" per member the
        first time its group runs dry.
        """
        events: list[ListEvent] = []
        advanced: list[_GroupState] = []
        for name in names:
            state = self._states.get(_fold(name))
            if state is None:
                events.append(ListEvent("missing", name))
                continue
            group = self._group_of[_fold(state.name)]
            if any(group is g for g in advanced):
                continue
            advanced.append(group)
            index = group.advance(self.rng)
            if index is None:
                for member in group.members:
                    if not member.exhausted:
                        member.exhausted = True
                        events.append(ListEvent("exhausted", member.name))
                continue
            for member in group.members:
                member.current = member.values[index]
                member.drawn += 1
                events.append(ListEvent("switched", member.name,
                                        member.current))
        return events


def _fold(name: str) -> str:
    return name.strip().casefold()
