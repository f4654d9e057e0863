"""Deterministic runtime for parsed documents.

The engine advances in fixed ticks.  Every tick consumes one input
sample (a gaze position plus any key presses), updates the state machine
of each region of the active scene, and leaves behind a render frame and
a list of events.  All randomness comes from one seeded generator and
all timing from the input samples, so the same document, seed and input
sequence produce bit-identical logs and frames.

Region states follow the three step cycle: a region is ``normal`` until
the gaze enters it, ``activated`` while the gaze rests on it, and
``reacting`` once the gaze has stayed for the dwell time.  A reaction
ends only after the gaze has left the region and the completion
condition of the region holds.
"""

from __future__ import annotations

import math
import os
import random
import wave
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .analyzer import validate
from .colors import ColorValue, parse_color
from .diagnostics import has_errors
from .model import (OVERLAY_EXPR_FIELDS, REGION_EXPR_FIELDS, GimlDocument,
                    RegionDecl, SceneDecl, StateOverlay, asset_file_path,
                    fold_name)
from .values import (ListBank, MaterializeContext, Percent, RandomChoice,
                     RandomRange, materialize)

SCENE_ENTERED = "SceneEntered"
SCENE_LEFT = "SceneLeft"
REGION_ACTIVATED = "RegionActivated"
REACTION_STARTED = "ReactionStarted"
REACTION_FINISHED = "ReactionFinished"
RETURNED_TO_NORMAL = "ReturnedToNormal"
REGION_ENABLED = "RegionEnabled"
REGION_DISABLED = "RegionDisabled"
TAG_EMITTED = "TagEmitted"
DELAYED_TAG_EMITTED = "DelayedTagEmitted"
LIST_SWITCHED_OVER = "ListSwitchedOver"
LIST_EXHAUSTED = "ListExhausted"
CALLBACK_INVOKED = "CallbackInvoked"
BLACKOUT_ON = "BlackoutOn"
BLACKOUT_OFF = "BlackoutOff"
MOVE_COMPLETED = "MoveCompleted"
ENGINE_STOPPED = "EngineStopped"
WARNING = "Warning"

NORMAL = "normal"
ACTIVATED = "activated"
REACTING = "reacting"

_DEFAULT_SCREEN_X = 1024
_DEFAULT_SCREEN_Y = 768
_DEFAULT_BORDER_WIDTH = 20.0
_DEFAULT_FONT_SIZE = 10.0
_DEFAULT_SPOTLIGHT_RADIUS = 200.0
_BLACK = "#FF000000"


class EngineError(RuntimeError):
    """Raised for unusable documents and broken stepping contracts."""


@dataclass(frozen=True)
class EngineEvent:
    """One entry of the interaction log."""

    t_ms: int
    kind: str
    scene: str = ""
    region: str = ""
    payload: str = ""


@dataclass(frozen=True)
class InputTick:
    """Input sample for one tick, gaze in design pixels.

    ``x``/``y`` may be left out and ``valid`` cleared to model tracking
    loss; an invalid sample counts as a gaze outside every region.
    """

    t_ms: int
    x: Optional[float] = None
    y: Optional[float] = None
    valid: bool = True
    keys: tuple[str, ...] = ()

    def gaze(self) -> Optional[tuple[float, float]]:
        if not self.valid or self.x is None or self.y is None:
            return None
        return (float(self.x), float(self.y))


@dataclass
class EngineConfig:
    dwell_ms: int = 1000
    tick_ms: int = 10
    seed: int = 0
    strict: bool = False
    asset_root: Optional[str] = None
    # known play lengths by sound name, for sounds that cannot be probed
    sound_durations_ms: dict[str, int] = field(default_factory=dict)
    default_sound_ms: int = 2000


# ---------------------------------------------------------------------------
# render snapshots

@dataclass(frozen=True)
class RegionRender:
    """Draw instructions for one enabled region, design coordinates."""

    name: str
    state: str
    shape: str
    x: float
    y: float
    size_x: float
    size_y: float
    image: Optional[str] = None
    image_missing: bool = False
    image_x: float = 0.0
    image_y: float = 0.0
    image_size_x: Optional[float] = None
    image_size_y: Optional[float] = None
    image_animated: bool = True
    text: Optional[str] = None
    text_x: float = 0.0
    text_y: float = 0.0
    font: Optional[str] = None
    font_size: float = _DEFAULT_FONT_SIZE
    font_style: Optional[str] = None
    font_color: str = _BLACK
    border_width: float = 0.0
    border_color: Optional[str] = None
    activation_progress: float = 0.0
    bar_x: float = 0.0
    bar_y: float = 0.0
    scale: float = 1.0
    rotation_deg: float = 0.0
    anim_dx: float = 0.0
    anim_dy: float = 0.0


@dataclass(frozen=True)
class RenderFrame:
    """Scene snapshot; frame_seq changes only when the content does."""

    frame_seq: int
    t_ms: int
    scene: str
    background_color: Optional[str]
    background_image: Optional[str]
    regions: tuple[RegionRender, ...]
    blackout_on: bool = False
    blackout_degree: int = 0
    blackout_color: str = _BLACK
    spotlight_on: bool = False
    spotlight_radius: float = _DEFAULT_SPOTLIGHT_RADIUS
    spotlight_x: Optional[float] = None
    spotlight_y: Optional[float] = None


# ---------------------------------------------------------------------------
# pure geometry helpers

def hit_test(shape: str, cx: float, cy: float, sx: float, sy: float,
             px: float, py: float) -> bool:
    """Boundary inclusive membership test in design coordinates.

    Circles use the smaller of the two sizes as their diameter, so a
    circle declared inside a non square box stays inscribed in it.
    """
    if sx <= 0 or sy <= 0:
        return False
    dx = px - cx
    dy = py - cy
    if shape == "rectangle":
        return abs(dx) <= sx / 2.0 and abs(dy) <= sy / 2.0
    if shape == "circle":
        sx = sy = min(sx, sy)
    return (2.0 * dx / sx) ** 2 + (2.0 * dy / sy) ** 2 <= 1.0


def animation_transform(kind: str, amplitude: float, fraction: bool,
                        period_ms: float, phase_ms: float,
                        size_x: float, size_y: float
                        ) -> tuple[float, float, float, float]:
    """Visual transform (scale, angle, dx, dy) at one phase of a cycle.

    Amplitudes are pixels when given plain and a fraction of the region
    size when given as a percentage (``fraction`` set).  Rotations run a
    full turn per period and ignore the amplitude; the phase is the time
    since the region entered its current state, so every cycle starts
    from the untransformed look.
    """
    identity = (1.0, 0.0, 0.0, 0.0)
    if not kind or kind == "none" or period_ms <= 0:
        return identity
    if kind in ("rotation_cw", "rotation_ccw"):
        angle = 360.0 * (phase_ms / period_ms)
        if kind == "rotation_ccw":
            angle = -angle
        return (1.0, math.fmod(angle, 360.0), 0.0, 0.0)
    swing = math.sin(2.0 * math.pi * phase_ms / period_ms)
    if kind == "size_changing":
        if fraction:
            relative = amplitude
        else:
            base = min(size_x, size_y)
            relative = amplitude / base if base > 0 else 0.0
        return (1.0 + relative * swing, 0.0, 0.0, 0.0)
    if kind == "swinging_horizontal":
        reach = amplitude * size_x if fraction else amplitude
        return (1.0, 0.0, reach * swing, 0.0)
    if kind == "swinging_vertical":
        reach = amplitude * size_y if fraction else amplitude
        return (1.0, 0.0, 0.0, reach * swing)
    return identity


def _wav_duration_ms(path: str) -> Optional[int]:
    try:
        with wave.open(path, "rb") as handle:
            rate = handle.getframerate()
            frames = handle.getnframes()
    except (OSError, wave.Error, EOFError):
        return None
    if rate <= 0:
        return None
    return int(round(frames * 1000.0 / rate))


# ---------------------------------------------------------------------------
# per run state

@dataclass
class _MoveState:
    segments: tuple[tuple[float, float], ...]
    speed: float
    started_at: int
    base_x: float
    base_y: float

    def offset_at(self, t_ms: int) -> tuple[float, float, bool]:
        """Offset along the waypoint path after travelling at speed."""
        distance = self.speed * (t_ms - self.started_at) / 1000.0
        x = y = 0.0
        for dx, dy in self.segments:
            length = math.hypot(dx, dy)
            if length <= 0:
                continue
            if distance >= length:
                x += dx
                y += dy
                distance -= length
            else:
                part = distance / length
                return (x + dx * part, y + dy * part, False)
        return (x, y, True)


@dataclass
class RegionRuntime:
    """Mutable interaction state of one region of one scene."""

    decl: RegionDecl
    index: int
    fsm_state: str = NORMAL
    enabled: bool = True
    dwell_ms: int = 1000
    dwell_accum: float = 0.0
    state_entered_at: int = 0
    reaction_started_at: int = -1
    latched_leave: bool = False
    sound_until: int = -1
    pending_enable_at: int = -1
    pending_disable_at: int = -1
    auto_after_ms: int = -1
    auto_deadline: int = -1
    auto_fired: bool = False
    held_target: Optional[str] = None
    offset_x: float = 0.0
    offset_y: float = 0.0
    move: Optional[_MoveState] = None

    @property
    def activation_progress(self) -> float:
        if self.fsm_state == ACTIVATED:
            if self.dwell_ms <= 0:
                return 1.0
            return min(1.0, self.dwell_accum / self.dwell_ms)
        return 1.0 if self.fsm_state == REACTING else 0.0


@dataclass
class SceneRuntime:
    decl: SceneDecl
    regions: list[RegionRuntime]
    entered_at: int = -1
    blackout_initiator: Optional[str] = None
    # virtual background playbacks as (sound name, start, duration)
    playbacks: list[tuple[str, int, int]] = field(default_factory=list)

    def region(self, name: str) -> Optional[RegionRuntime]:
        folded = fold_name(name)
        for runtime in self.regions:
            if fold_name(runtime.decl.name) == folded:
                return runtime
        return None


class Engine:
    """Executes one document from its default scene.

    Events accumulate in ``events``; ``step`` returns the slice produced
    by that call.  Inactive scenes keep their region states frozen until
    the run returns to them.
    """

    def __init__(self, document: GimlDocument,
                 config: Optional[EngineConfig] = None,
                 callbacks: Optional[dict[str, Callable[[EngineEvent], None]]]
                 = None):
        self.doc = document
        self.config = config or EngineConfig()
        self.callbacks = dict(callbacks or {})
        if self.config.strict:
            findings = validate(document, self.config.asset_root)
            if has_errors(findings):
                bad = [d for d in findings if d.severity == "error"]
                raise EngineError(
                    "document does not validate: %s" % "; ".join(
                        d.message for d in bad[:5]))

        info = document.scenes_info
        self.extent_x = float(info.screen_x if info.screen_x > 0
                              else _DEFAULT_SCREEN_X)
        self.extent_y = float(info.screen_y if info.screen_y > 0
                              else _DEFAULT_SCREEN_Y)
        self.rng = random.Random(self.config.seed)
        self.ctx = MaterializeContext(self.rng, self.extent_x, self.extent_y,
                                      list_value=self._list_value)
        self.bank = ListBank(document.lists, self.rng)
        self._pending_list_events = []  # type: list
        self._durations = {fold_name(name): int(ms) for name, ms
                           in self.config.sound_durations_ms.items()}
        self._sound_cache: dict[str, int] = {}
        self._asset_missing: dict[str, bool] = {}
        self._warned: set[str] = set()

        self.scenes: dict[str, SceneRuntime] = {}
        for scene in document.scenes:
            eff = document.effective_scene(scene.name) or scene
            regions = [RegionRuntime(decl, i, enabled=decl.enabled)
                       for i, decl in enumerate(eff.regions)]
            self.scenes[fold_name(scene.name)] = SceneRuntime(eff, regions)

        self.t = -1
        self.events: list[EngineEvent] = []
        self.stopped = False
        self._delayed: list[tuple[int, int, str, str, str]] = []
        self._delay_seq = 0
        self._requests: list[tuple[int, int, str, str]] = []
        self._request_seq = 0
        self._last_gaze: Optional[tuple[float, float]] = None
        self._frame: Optional[RenderFrame] = None
        self._frame_body: Optional[RenderFrame] = None

        start = self.scenes.get(fold_name(info.default_scene or ""))
        if start is None:
            raise EngineError("default scene %r is not declared"
                              % (info.default_scene,))
        self.active = start
        self._materialize_sites()

        events: list[EngineEvent] = []
        for message in self.bank.warnings:
            events.append(EngineEvent(0, WARNING, payload=message))
        self._enter_scene(start, 0, events)
        self._drain_list_events(0, events)
        self._rebuild_frame(0, events)
        self.events.extend(events)

    # -- public surface ------------------------------------------------------

    def step(self, tick: InputTick) -> list[EngineEvent]:
        """Advance by one input sample and return the events it caused."""
        if self.stopped:
            raise EngineError("engine is stopped")
        t = int(tick.t_ms)
        if t <= self.t:
            raise EngineError("tick %d is not after tick %d" % (t, self.t))
        elapsed = float(t - self.t) if self.t >= 0 else float(
            self.config.tick_ms)
        self.t = t

        events: list[EngineEvent] = []
        gaze = tick.gaze()
        if gaze is not None:
            self._last_gaze = gaze
        self._run_timers(t, events)
        self._run_delayed_tags(t, events)
        self._run_keys(tick, gaze, t, events)
        self._run_auto(gaze, t, events)
        self._advance_moves(t, events)
        self._sweep(gaze, elapsed, t, events)
        self._run_transitions(t, events)
        self._drain_list_events(t, events)
        self._rebuild_frame(t, events)
        self.events.extend(events)
        return events

    def stop(self, t_ms: Optional[int] = None) -> list[EngineEvent]:
        """Mark the run as over; open reactions end with the run."""
        if self.stopped:
            return []
        t = int(t_ms) if t_ms is not None else max(self.t, 0)
        self.stopped = True
        events = [self._event(t, ENGINE_STOPPED)]
        self.events.extend(events)
        return events

    def current_frame(self) -> RenderFrame:
        """Latest render snapshot; repeated calls return the same frame."""
        frame = self._frame
        if frame is None:
            raise EngineError("engine has no frame yet")
        return frame

    @property
    def active_scene_name(self) -> str:
        return self.active.decl.name

    def hit_regions(self, point: tuple[float, float]) -> list[str]:
        """Enabled regions of the active scene containing a point.

        Meant for observers; gaze handling inside the engine also skips
        regions that ignore the gaze, this does not.
        """
        return [rt.decl.name for rt in self.active.regions
                if rt.enabled and self._hit(rt, point)]

    # -- value resolution ----------------------------------------------------

    @staticmethod
    def _site(scene: str, region: str, label: Optional[str],
              field_name: str) -> str:
        if label:
            return "%s/%s/%s.%s" % (fold_name(scene), fold_name(region),
                                    label, field_name)
        return "%s/%s/%s" % (fold_name(scene), fold_name(region), field_name)

    def _region_expr(self, scene: SceneRuntime, rt: RegionRuntime,
                     field_name: str):
        expr = getattr(rt.decl, field_name)
        if expr is None:
            return None
        site = self._site(scene.decl.name, rt.decl.name, None, field_name)
        return materialize(expr, self.ctx, site)

    def _overlay_expr(self, scene: SceneRuntime, rt: RegionRuntime,
                      overlay: Optional[StateOverlay], label: str,
                      field_name: str):
        if overlay is None:
            return None
        expr = getattr(overlay, field_name)
        if expr is None:
            return None
        site = self._site(scene.decl.name, rt.decl.name, label, field_name)
        return materialize(expr, self.ctx, site)

    @staticmethod
    def _number(value, default: float) -> float:
        """Loose numeric coercion; validation reports bad values already."""
        if value is None or isinstance(value, bool):
            return float(default)
        if isinstance(value, (int, float)):
            return float(value)
        try:
            return float(str(value).strip())
        except ValueError:
            return float(default)

    @staticmethod
    def _color(value, default: str) -> str:
        if isinstance(value, ColorValue):
            return value.hex_argb()
        if value:
            parsed = parse_color(str(value))
            if parsed is not None:
                return parsed.hex_argb()
        return default

    def _materialize_sites(self) -> None:
        # One pass in document order fixes every random draw at start of
        # run, no matter when (or whether) a site is read later.
        overlays = ("base", "activation", "reaction")
        for scene in self.doc.scenes:
            runtime = self.scenes[fold_name(scene.name)]
            for rt in runtime.regions:
                for field_name in REGION_EXPR_FIELDS:
                    expr = getattr(rt.decl, field_name)
                    if isinstance(expr, (RandomRange, RandomChoice)):
                        site = self._site(runtime.decl.name, rt.decl.name,
                                          None, field_name)
                        materialize(expr, self.ctx, site)
                for label in overlays:
                    overlay = getattr(rt.decl, label)
                    if overlay is None:
                        continue
                    for field_name in OVERLAY_EXPR_FIELDS:
                        expr = getattr(overlay, field_name)
                        if isinstance(expr, (RandomRange, RandomChoice)):
                            site = self._site(runtime.decl.name,
                                              rt.decl.name, label, field_name)
                            materialize(expr, self.ctx, site)
                rt.dwell_ms = int(self._number(
                    self._region_expr(runtime, rt, "dwell_time"),
                    self.config.dwell_ms))
                rt.auto_after_ms = int(self._number(
                    self._region_expr(runtime, rt,
                                      "automatic_reaction_after_time"), -1))

    def _list_value(self, name: str) -> Optional[str]:
        value, produced = self.bank.ensure_value(name)
        if produced:
            self._pending_list_events.extend(produced)
        return value

    # -- events and callbacks ------------------------------------------------

    def _event(self, t: int, kind: str, region: str = "",
               payload: str = "") -> EngineEvent:
        return EngineEvent(t, kind, scene=self.active.decl.name,
                           region=region, payload=payload)

    def _warn_once(self, key: str, message: str, t: int,
                   events: list[EngineEvent]) -> None:
        if key in self._warned:
            return
        self._warned.add(key)
        events.append(self._event(t, WARNING, payload=message))

    def _callback(self, name: Optional[str], t: int, region: str,
                  events: list[EngineEvent]) -> None:
        if not name:
            return
        event = self._event(t, CALLBACK_INVOKED, region=region, payload=name)
        events.append(event)
        handler = self.callbacks.get(name)
        if handler is not None:
            handler(event)

    def _drain_list_events(self, t: int, events: list[EngineEvent]) -> None:
        if not self._pending_list_events:
            return
        produced, self._pending_list_events = self._pending_list_events, []
        self._apply_list_events(produced, t, events)

    def _apply_list_events(self, produced, t: int,
                           events: list[EngineEvent]) -> None:
        for item in produced:
            if item.kind == "switched":
                value = item.value if item.value is not None else ""
                events.append(self._event(
                    t, LIST_SWITCHED_OVER,
                    payload="%s=%s" % (item.list_name, value)))
            elif item.kind == "exhausted":
                events.append(self._event(t, LIST_EXHAUSTED,
                                          payload=item.list_name))
                target = self.active.decl.region_enabled_after_list_finished
                if target:
                    rt = self.active.region(target)
                    if rt is not None:
                        self._request_enable(rt, t, events)
                    else:
                        self._warn_once(
                            "region:%s" % fold_name(target),
                            "no region named %r" % target, t, events)
            else:
                self._warn_once("list:%s" % fold_name(item.list_name),
                                "no list named %r" % item.list_name,
                                t, events)

    # -- enabling and disabling ----------------------------------------------

    def _request_enable(self, rt: RegionRuntime, t: int,
                        events: list[EngineEvent]) -> None:
        if rt.enabled or rt.pending_enable_at >= 0:
            return
        delay = self._number(
            self._region_expr(self.active, rt, "enabling_delay"), 0)
        if delay <= 0:
            self._do_enable(rt, t, events)
        else:
            rt.pending_enable_at = t + int(delay)

    def _do_enable(self, rt: RegionRuntime, t: int,
                   events: list[EngineEvent]) -> None:
        rt.pending_enable_at = -1
        if rt.enabled:
            return
        rt.enabled = True
        if rt.decl.reset_after_enabled:
            self._restore_decl_state(rt, t)
            rt.enabled = True  # the explicit enable wins over the declaration
        events.append(self._event(t, REGION_ENABLED, region=rt.decl.name))

    def _request_disable(self, rt: RegionRuntime, t: int,
                         events: list[EngineEvent]) -> None:
        if not rt.enabled or rt.pending_disable_at >= 0:
            return
        delay = self._number(
            self._region_expr(self.active, rt, "disabling_delay"), 0)
        if delay <= 0:
            self._do_disable(rt, t, events)
        else:
            rt.pending_disable_at = t + int(delay)

    def _do_disable(self, rt: RegionRuntime, t: int,
                    events: list[EngineEvent]) -> None:
        rt.pending_disable_at = -1
        if not rt.enabled:
            return
        self._force_normal(rt, t, events)
        rt.enabled = False
        events.append(self._event(t, REGION_DISABLED, region=rt.decl.name))
        scene = self.active
        fallback = scene.decl.region_enabled_after_all_disabled
        if fallback and not any(r.enabled for r in scene.regions):
            other = scene.region(fallback)
            if other is not None:
                self._request_enable(other, t, events)
            else:
                self._warn_once("region:%s" % fold_name(fallback),
                                "no region named %r" % fallback, t, events)

    def _bind_enable(self, name: str, t: int,
                     events: list[EngineEvent]) -> None:
        rt = self.active.region(name)
        if rt is None:
            self._warn_once("region:%s" % fold_name(name),
                            "no region named %r" % name, t, events)
            return
        self._request_enable(rt, t, events)

    def _bind_disable(self, name: str, t: int,
                      events: list[EngineEvent]) -> None:
        rt = self.active.region(name)
        if rt is None:
            self._warn_once("region:%s" % fold_name(name),
                            "no region named %r" % name, t, events)
            return
        self._request_disable(rt, t, events)

    # -- state machine transitions -------------------------------------------

    def _force_normal(self, rt: RegionRuntime, t: int,
                      events: list[EngineEvent]) -> None:
        """Administrative return to normal: pairing events, no side effects."""
        if rt.fsm_state == REACTING:
            events.append(self._event(t, REACTION_FINISHED,
                                      region=rt.decl.name))
            self._callback(rt.decl.on_reaction_finished, t, rt.decl.name,
                           events)
            self._release_blackout(rt, t, events)
            rt.held_target = None
        if rt.fsm_state != NORMAL:
            rt.fsm_state = NORMAL
            rt.dwell_accum = 0.0
            rt.state_entered_at = t
            events.append(self._event(t, RETURNED_TO_NORMAL,
                                      region=rt.decl.name))
            self._callback(rt.decl.on_normal_state_return, t, rt.decl.name,
                           events)
            self._callback(rt.decl.on_state_changed, t, rt.decl.name, events)

    def _restore_decl_state(self, rt: RegionRuntime, t: int) -> None:
        rt.fsm_state = NORMAL
        rt.enabled = rt.decl.enabled
        rt.dwell_accum = 0.0
        rt.state_entered_at = t
        rt.reaction_started_at = -1
        rt.latched_leave = False
        rt.sound_until = -1
        rt.pending_enable_at = -1
        rt.pending_disable_at = -1
        rt.held_target = None
        rt.offset_x = 0.0
        rt.offset_y = 0.0
        rt.move = None

    def _to_activated(self, rt: RegionRuntime, t: int,
                      events: list[EngineEvent]) -> None:
        if rt.fsm_state != NORMAL:
            return
        rt.fsm_state = ACTIVATED
        rt.dwell_accum = 0.0
        rt.state_entered_at = t
        events.append(self._event(t, REGION_ACTIVATED, region=rt.decl.name))
        self._apply_overlay_entry(rt, rt.decl.activation, "activation",
                                  t, events)
        self._callback(rt.decl.on_activation_completed, t, rt.decl.name,
                       events)
        self._callback(rt.decl.on_state_changed, t, rt.decl.name, events)

    def _to_normal(self, rt: RegionRuntime, t: int,
                   events: list[EngineEvent]) -> None:
        rt.fsm_state = NORMAL
        rt.dwell_accum = 0.0
        rt.state_entered_at = t
        events.append(self._event(t, RETURNED_TO_NORMAL,
                                  region=rt.decl.name))
        self._apply_overlay_entry(rt, rt.decl.base, "base", t, events)
        self._callback(rt.decl.on_normal_state_return, t, rt.decl.name,
                       events)
        self._callback(rt.decl.on_state_changed, t, rt.decl.name, events)

    def _to_reacting(self, rt: RegionRuntime, inside: bool, t: int,
                     events: list[EngineEvent]) -> None:
        if rt.fsm_state != ACTIVATED:
            return
        rt.fsm_state = REACTING
        rt.reaction_started_at = t
        rt.state_entered_at = t
        rt.dwell_accum = 0.0
        rt.latched_leave = not inside
        rt.sound_until = t
        events.append(self._event(t, REACTION_STARTED, region=rt.decl.name))
        if rt.decl.able_to_activate_blackout:
            self._engage_blackout(rt, t, events)
        self._apply_overlay_entry(rt, rt.decl.reaction, "reaction", t, events)
        self._callback(rt.decl.on_reaction_started, t, rt.decl.name, events)
        self._callback(rt.decl.on_state_changed, t, rt.decl.name, events)

    def _finish_reaction(self, rt: RegionRuntime, t: int,
                         events: list[EngineEvent]) -> None:
        overlay = rt.decl.reaction
        events.append(self._event(t, REACTION_FINISHED, region=rt.decl.name))
        self._callback(rt.decl.on_reaction_finished, t, rt.decl.name, events)
        self._release_blackout(rt, t, events)
        if rt.held_target:
            self._queue_transition(rt.held_target, rt)
            rt.held_target = None
        if overlay is not None:
            if overlay.name_of_region_enabled_when_finished:
                self._bind_enable(overlay.name_of_region_enabled_when_finished,
                                  t, events)
            if overlay.name_of_region_disabled_when_finished:
                self._bind_disable(
                    overlay.name_of_region_disabled_when_finished, t, events)
        self._to_normal(rt, t, events)
        if overlay is not None and overlay.turn_off_when_finished:
            self._request_disable(rt, t, events)

    def _force_reaction(self, rt: RegionRuntime,
                        gaze: Optional[tuple[float, float]], t: int,
                        events: list[EngineEvent]) -> None:
        """Reaction without the dwell: key presses and timed reactions."""
        if rt.fsm_state == NORMAL:
            self._to_activated(rt, t, events)
        if rt.fsm_state != ACTIVATED:
            return
        inside = (gaze is not None and not rt.decl.ignore_gaze
                  and self._hit(rt, gaze))
        self._leave_activation(rt, t, events)
        self._to_reacting(rt, inside, t, events)

    def _leave_activation(self, rt: RegionRuntime, t: int,
                          events: list[EngineEvent]) -> None:
        overlay = rt.decl.activation
        if overlay is None:
            return
        if overlay.name_of_region_enabled_when_finished:
            self._bind_enable(overlay.name_of_region_enabled_when_finished,
                              t, events)
        if overlay.name_of_region_disabled_when_finished:
            self._bind_disable(overlay.name_of_region_disabled_when_finished,
                               t, events)

    def _completion_met(self, rt: RegionRuntime, t: int) -> bool:
        condition = rt.decl.condition_of_reaction_completion
        if condition == "sound_ending":
            return t >= rt.sound_until
        if condition == "time_elapsed":
            duration = self._number(
                self._region_expr(self.active, rt, "reaction_duration"), 0)
            return t >= rt.reaction_started_at + duration
        return True

    # -- blackout ------------------------------------------------------------

    def _engage_blackout(self, rt: RegionRuntime, t: int,
                         events: list[EngineEvent]) -> None:
        scene = self.active
        if scene.blackout_initiator is not None:
            return
        scene.blackout_initiator = fold_name(rt.decl.name)
        events.append(self._event(t, BLACKOUT_ON, region=rt.decl.name))
        if scene.decl.blocking_regions_during_blackout:
            for other in scene.regions:
                if other is not rt and other.fsm_state != NORMAL:
                    self._force_normal(other, t, events)

    def _release_blackout(self, rt: RegionRuntime, t: int,
                          events: list[EngineEvent]) -> None:
        if self.active.blackout_initiator == fold_name(rt.decl.name):
            self.active.blackout_initiator = None
            events.append(self._event(t, BLACKOUT_OFF, region=rt.decl.name))

    def _blocked(self, rt: RegionRuntime) -> bool:
        scene = self.active
        return (scene.blackout_initiator is not None
                and scene.decl.blocking_regions_during_blackout
                and fold_name(rt.decl.name) != scene.blackout_initiator)

    # -- overlay side effects ------------------------------------------------

    def _apply_overlay_entry(self, rt: RegionRuntime,
                             overlay: Optional[StateOverlay], label: str,
                             t: int, events: list[EngineEvent]) -> None:
        if overlay is None:
            return
        scene = self.active
        if overlay.tag:
            events.append(self._event(t, TAG_EMITTED, region=rt.decl.name,
                                      payload=overlay.tag))
        if overlay.delayed_tag:
            delay = self._number(
                self._overlay_expr(scene, rt, overlay, label,
                                   "delay_of_delayed_tag"), 0)
            if delay <= 0:
                events.append(self._event(t, DELAYED_TAG_EMITTED,
                                          region=rt.decl.name,
                                          payload=overlay.delayed_tag))
            else:
                self._delayed.append((t + int(delay), self._delay_seq,
                                      scene.decl.name, rt.decl.name,
                                      overlay.delayed_tag))
                self._delay_seq += 1
        sound = self._overlay_expr(scene, rt, overlay, label, "name_of_sound")
        if sound:
            rt.sound_until = t + self._sound_duration_ms(str(sound), t, events)
        if overlay.name_of_region_enabled_when_started:
            self._bind_enable(overlay.name_of_region_enabled_when_started,
                              t, events)
        if overlay.name_of_region_disabled_when_started:
            self._bind_disable(overlay.name_of_region_disabled_when_started,
                               t, events)
        self._apply_action(rt, overlay, label, t, events)

    def _apply_action(self, rt: RegionRuntime, overlay: StateOverlay,
                      label: str, t: int, events: list[EngineEvent]) -> None:
        action = overlay.action_type
        if not action or action in ("none", "border"):
            return  # a border is drawn, not acted on
        if action == "transition_to_scene":
            target = overlay.name_of_target_scene
            if not target:
                self._warn_once(
                    "target:%s/%s" % (fold_name(self.active.decl.name),
                                      fold_name(rt.decl.name)),
                    "transition without a target scene", t, events)
                return
            if rt.decl.hold_scene_transition and label == "reaction":
                rt.held_target = target
            else:
                self._queue_transition(target, rt)
        elif action == "move":
            self._start_move(rt, overlay, label, t, events)
        elif action == "reset_region":
            self._reset_region(rt, t, events)
        elif action == "reset_scene":
            for other in list(self.active.regions):
                self._reset_region(other, t, events)

    def _start_move(self, rt: RegionRuntime, overlay: StateOverlay,
                    label: str, t: int, events: list[EngineEvent]) -> None:
        segments = overlay.move_path
        key = "%s/%s" % (fold_name(self.active.decl.name),
                         fold_name(rt.decl.name))
        if not segments:
            self._warn_once("movepath:" + key,
                            "move action without a path", t, events)
            return
        speed = self._number(
            self._overlay_expr(self.active, rt, overlay, label, "speed"), 0)
        if speed <= 0:
            self._warn_once("movespeed:" + key,
                            "move speed must be positive; jumping to the "
                            "end of the path", t, events)
            rt.offset_x += sum(dx for dx, _dy in segments)
            rt.offset_y += sum(dy for _dx, dy in segments)
            rt.move = None
            events.append(self._event(t, MOVE_COMPLETED, region=rt.decl.name))
            return
        rt.move = _MoveState(tuple(segments), float(speed), t,
                             rt.offset_x, rt.offset_y)

    def _reset_region(self, rt: RegionRuntime, t: int,
                      events: list[EngineEvent]) -> None:
        self._force_normal(rt, t, events)
        self._restore_decl_state(rt, t)

    # -- scene switching -----------------------------------------------------

    def _queue_transition(self, target: str,
                          rt: Optional[RegionRuntime]) -> None:
        priority = rt.index if rt is not None else -1
        initiator = rt.decl.name if rt is not None else ""
        self._requests.append((priority, self._request_seq, target, initiator))
        self._request_seq += 1

    def _run_transitions(self, t: int, events: list[EngineEvent]) -> None:
        if not self._requests:
            return
        pending, self._requests = self._requests, []
        pending.sort(key=lambda item: (item[0], item[1]))
        _priority, _seq, target, _initiator = pending[0]
        for _p, _s, lost, who in pending[1:]:
            events.append(self._event(
                t, WARNING, region=who,
                payload="transition to %r dropped; %r was requested first"
                % (lost, target)))
        nxt = self.scenes.get(fold_name(target))
        if nxt is None:
            events.append(self._event(t, WARNING,
                                      payload="no scene named %r" % target))
            return
        events.append(self._event(t, SCENE_LEFT))
        self._enter_scene(nxt, t, events)

    def _enter_scene(self, scene: SceneRuntime, t: int,
                     events: list[EngineEvent]) -> None:
        self.active = scene
        scene.entered_at = t
        events.append(self._event(t, SCENE_ENTERED))
        decl = scene.decl
        if decl.reset_after_enter:
            for rt in scene.regions:
                self._restore_decl_state(rt, t)
        for rt in scene.regions:
            rt.auto_fired = False
            rt.auto_deadline = (t + rt.auto_after_ms
                                if rt.auto_after_ms >= 0 else -1)
        for name in decl.regions_to_disable:
            rt = scene.region(name)
            if rt is None:
                self._warn_once("region:%s" % fold_name(name),
                                "no region named %r" % name, t, events)
            else:
                rt.pending_disable_at = -1
                self._do_disable(rt, t, events)
        if decl.lists_switched_over_after_enter:
            produced = self.bank.switch_over(
                decl.lists_switched_over_after_enter)
            self._apply_list_events(produced, t, events)
        if decl.background_sound:
            duration = self._sound_duration_ms(decl.background_sound,
                                               t, events)
            scene.playbacks.append((decl.background_sound, t, duration))
        self._callback(decl.on_scene_changed, t, "", events)

    # -- tick phases ---------------------------------------------------------

    def _run_timers(self, t: int, events: list[EngineEvent]) -> None:
        for rt in list(self.active.regions):
            if 0 <= rt.pending_disable_at <= t:
                self._do_disable(rt, t, events)
        for rt in list(self.active.regions):
            if 0 <= rt.pending_enable_at <= t:
                self._do_enable(rt, t, events)

    def _run_delayed_tags(self, t: int, events: list[EngineEvent]) -> None:
        if not self._delayed:
            return
        due = [item for item in self._delayed if item[0] <= t]
        if not due:
            return
        self._delayed = [item for item in self._delayed if item[0] > t]
        for _due, _seq, scene_name, region_name, tag in sorted(due):
            events.append(EngineEvent(t, DELAYED_TAG_EMITTED,
                                      scene=scene_name, region=region_name,
                                      payload=tag))

    def _run_keys(self, tick: InputTick,
                  gaze: Optional[tuple[float, float]], t: int,
                  events: list[EngineEvent]) -> None:
        if not tick.keys:
            return
        info = self.doc.scenes_info
        for key in tick.keys:
            folded = key.strip().casefold()
            if not folded:
                continue
            if info.pause_scene and folded == "pause":
                self._queue_transition(info.pause_scene, None)
                continue
            for rt in list(self.active.regions):
                wanted = rt.decl.reaction_key
                if not wanted or wanted.strip().casefold() != folded:
                    continue
                if (not rt.enabled or rt.fsm_state == REACTING
                        or self._blocked(rt)):
                    continue
                self._force_reaction(rt, gaze, t, events)

    def _run_auto(self, gaze: Optional[tuple[float, float]], t: int,
                  events: list[EngineEvent]) -> None:
        for rt in list(self.active.regions):
            if rt.auto_deadline < 0 or rt.auto_fired or t < rt.auto_deadline:
                continue
            rt.auto_fired = True
            if (not rt.enabled or rt.fsm_state == REACTING
                    or self._blocked(rt)):
                continue
            self._force_reaction(rt, gaze, t, events)

    def _advance_moves(self, t: int, events: list[EngineEvent]) -> None:
        for rt in list(self.active.regions):
            move = rt.move
            if move is None or move.started_at >= t:
                continue
            dx, dy, done = move.offset_at(t)
            rt.offset_x = move.base_x + dx
            rt.offset_y = move.base_y + dy
            if done:
                rt.move = None
                events.append(self._event(t, MOVE_COMPLETED,
                                          region=rt.decl.name))

    def _sweep(self, gaze: Optional[tuple[float, float]], elapsed: float,
               t: int, events: list[EngineEvent]) -> None:
        for rt in list(self.active.regions):
            if not rt.enabled:
                continue
            inside = (gaze is not None and not rt.decl.ignore_gaze
                      and not self._blocked(rt) and self._hit(rt, gaze))
            state = rt.fsm_state
            if state == NORMAL:
                if inside:
                    self._to_activated(rt, t, events)
            elif state == ACTIVATED:
                if not inside:
                    self._leave_activation(rt, t, events)
                    self._to_normal(rt, t, events)
                else:
                    rt.dwell_accum = min(rt.dwell_accum + elapsed,
                                         float(rt.dwell_ms))
                    if rt.dwell_accum >= rt.dwell_ms:
                        self._leave_activation(rt, t, events)
                        self._to_reacting(rt, True, t, events)
            elif state == REACTING:
                if not inside:
                    rt.latched_leave = True
                if rt.latched_leave and self._completion_met(rt, t):
                    self._finish_reaction(rt, t, events)

    # -- geometry and rendering ----------------------------------------------

    def _hit(self, rt: RegionRuntime, point: tuple[float, float]) -> bool:
        scene = self.active
        cx = self._number(self._region_expr(scene, rt, "location_x"), 0)
        cy = self._number(self._region_expr(scene, rt, "location_y"), 0)
        sx = self._number(self._region_expr(scene, rt, "size_x"), 0)
        sy = self._number(self._region_expr(scene, rt, "size_y"), 0)
        return hit_test(rt.decl.shape, cx + rt.offset_x, cy + rt.offset_y,
                        sx, sy, point[0], point[1])

    @staticmethod
    def _current_overlay(decl: RegionDecl,
                         state: str) -> tuple[StateOverlay, str]:
        # A state without its own element keeps the base look entirely;
        # a present state element replaces the base look wholesale.
        if state == ACTIVATED and decl.activation is not None:
            return decl.activation, "activation"
        if state == REACTING and decl.reaction is not None:
            return decl.reaction, "reaction"
        return decl.base, "base"

    def _image_missing(self, name: str, t: int,
                       events: list[EngineEvent]) -> bool:
        folded = fold_name(name)
        cached = self._asset_missing.get(folded)
        if cached is not None:
            return cached
        decl = self.doc.image(name) or self.doc.movie(name)
        missing = decl is None
        if not missing and self.config.asset_root:
            full = asset_file_path(self.doc, decl, self.config.asset_root)
            missing = not os.path.exists(full)
        if missing:
            self._warn_once("image:%s" % folded,
                            "image %r cannot be shown; drawing a placeholder"
                            % name, t, events)
        self._asset_missing[folded] = missing
        return missing

    def _sound_duration_ms(self, name: str, t: int,
                           events: list[EngineEvent]) -> int:
        folded = fold_name(name)
        if folded in self._sound_cache:
            return self._sound_cache[folded]
        decl = self.doc.sound(name) or self.doc.movie(name)
        duration: Optional[int] = None
        repetitions = 1
        if decl is not None:
            repetitions = max(1, decl.repetition_number)
            if self.config.asset_root:
                full = asset_file_path(self.doc, decl, self.config.asset_root)
                duration = _wav_duration_ms(full)
        if duration is None:
            duration = self._durations.get(folded)
        if duration is None:
            duration = self.config.default_sound_ms
            self._warn_once("sound:%s" % folded,
                            "duration of sound %r unknown; assuming %d ms"
                            % (name, duration), t, events)
        total = int(duration) * repetitions
        self._sound_cache[folded] = total
        return total

    def _render_region(self, rt: RegionRuntime, t: int,
                       events: list[EngineEvent]) -> RegionRender:
        scene = self.active
        decl = rt.decl
        overlay, label = self._current_overlay(decl, rt.fsm_state)
        cx = self._number(self._region_expr(scene, rt, "location_x"), 0) \
            + rt.offset_x
        cy = self._number(self._region_expr(scene, rt, "location_y"), 0) \
            + rt.offset_y
        sx = self._number(self._region_expr(scene, rt, "size_x"), 0)
        sy = self._number(self._region_expr(scene, rt, "size_y"), 0)

        image_value = self._overlay_expr(scene, rt, overlay, label,
                                         "name_of_image")
        image = str(image_value).strip() if image_value else None
        missing = bool(image) and self._image_missing(image, t, events)
        size_x_value = self._region_expr(scene, rt, "image_size_x")
        size_y_value = self._region_expr(scene, rt, "image_size_y")

        text_value = self._overlay_expr(scene, rt, overlay, label, "text")
        font_value = self._overlay_expr(scene, rt, overlay, label, "font")

        border_width = 0.0
        border_color: Optional[str] = None
        if overlay.action_type == "border":
            border_width = self._number(
                self._overlay_expr(scene, rt, overlay, label, "border_width"),
                _DEFAULT_BORDER_WIDTH)
            border_color = self._color(
                self._overlay_expr(scene, rt, overlay, label, "border_color"),
                _BLACK)

        scale, angle, anim_dx, anim_dy = 1.0, 0.0, 0.0, 0.0
        if (overlay.animation_type and overlay.animation_type != "none"
                and decl.region_animation_enabled):
            period = self._number(
                self._overlay_expr(scene, rt, overlay, label,
                                   "animation_period"), 0)
            if period <= 0:
                self._warn_once(
                    "anim:%s/%s" % (fold_name(scene.decl.name),
                                    fold_name(decl.name)),
                    "animation period must be positive", t, events)
            else:
                amp_expr = overlay.animation_amplitude
                fraction = (isinstance(amp_expr, Percent)
                            and amp_expr.axis not in ("x", "y"))
                amplitude = self._number(
                    self._overlay_expr(scene, rt, overlay, label,
                                       "animation_amplitude"), 0)
                scale, angle, anim_dx, anim_dy = animation_transform(
                    overlay.animation_type, amplitude, fraction, period,
                    float(t - rt.state_entered_at), sx, sy)

        return RegionRender(
            name=decl.name,
            state=rt.fsm_state,
            shape=decl.shape,
            x=cx, y=cy, size_x=sx, size_y=sy,
            image=image,
            image_missing=missing,
            image_x=cx + self._number(
                self._region_expr(scene, rt, "offset_of_image_x"), 0),
            image_y=cy + self._number(
                self._region_expr(scene, rt, "offset_of_image_y"), 0),
            image_size_x=(self._number(size_x_value, 0)
                          if size_x_value is not None else None),
            image_size_y=(self._number(size_y_value, 0)
                          if size_y_value is not None else None),
            image_animated=decl.image_animation_enabled,
            text=str(text_value) if text_value is not None else None,
            text_x=cx + self._number(
                self._region_expr(scene, rt, "offset_of_text_x"), 0),
            text_y=cy + self._number(
                self._region_expr(scene, rt, "offset_of_text_y"), 0),
            font=str(font_value) if font_value is not None else None,
            font_size=self._number(
                self._overlay_expr(scene, rt, overlay, label, "font_size"),
                _DEFAULT_FONT_SIZE),
            font_style=overlay.font_style,
            font_color=self._color(
                self._overlay_expr(scene, rt, overlay, label, "font_color"),
                _BLACK),
            border_width=border_width,
            border_color=border_color,
            activation_progress=rt.activation_progress,
            bar_x=cx + self._number(
                self._region_expr(scene, rt, "offset_of_bar_x"), 0),
            bar_y=cy + self._number(
                self._region_expr(scene, rt, "offset_of_bar_y"), 0),
            scale=scale,
            rotation_deg=angle,
            anim_dx=anim_dx,
            anim_dy=anim_dy,
        )

    def _rebuild_frame(self, t: int, events: list[EngineEvent]) -> None:
        scene = self.active
        decl = scene.decl
        info = self.doc.scenes_info
        regions = tuple(self._render_region(rt, t, events)
                        for rt in scene.regions if rt.enabled)
        spot_on = (decl.spotlight if decl.spotlight is not None
                   else bool(info.spotlight))
        radius = (decl.spotlight_radius
                  if decl.spotlight_radius is not None
                  else info.spotlight_radius)
        if radius is None:
            radius = _DEFAULT_SPOTLIGHT_RADIUS
        gaze = self._last_gaze
        blackout_on = scene.blackout_initiator is not None
        body = RenderFrame(
            frame_seq=0,
            t_ms=0,
            scene=decl.name,
            background_color=(decl.background_color.hex_argb()
                              if decl.background_color else None),
            background_image=decl.background_image,
            regions=regions,
            blackout_on=blackout_on,
            blackout_degree=decl.blackout_degree if blackout_on else 0,
            blackout_color=(decl.blackout_color.hex_argb()
                            if decl.blackout_color else _BLACK),
            spotlight_on=bool(spot_on),
            spotlight_radius=float(radius),
            spotlight_x=gaze[0] if (spot_on and gaze) else None,
            spotlight_y=gaze[1] if (spot_on and gaze) else None,
        )
        if body != self._frame_body:
            seq = self._frame.frame_seq + 1 if self._frame is not None else 0
            self._frame_body = body
            self._frame = replace(body, frame_seq=seq, t_ms=t)


def run(document: GimlDocument, ticks,
        config: Optional[EngineConfig] = None,
        callbacks=None) -> Engine:
    """Drive an engine over a whole input sequence, then stop it."""
    engine = Engine(document, config, callbacks)
    last = -1
    for tick in ticks:
        engine.step(tick)
        last = int(tick.t_ms)
    engine.stop(last if last >= 0 else 0)
    return engine
