"""Parsing GIML source into the canonical document model.

The parser resolves every keyword through the registry in the document
language, converts attribute values to their typed form (including
``rand:`` / ``%`` / ``@list`` expressions where the attribute admits
them) and collects diagnostics instead of raising: even a badly broken
source yields a document plus findings.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

from . import schema
from .colors import parse_color
from .diagnostics import ERROR, INFO, WARNING, Diagnostic
from .keywords import (ATTRIBUTE, ELEMENT, ENUM_VALUE, LANGUAGES,
                       KeywordRegistry, load_registry)
from .model import (GimlDocument, ListDecl, RegionDecl, ResourceDecl,
                    SceneDecl, ScenesInfo, SettingsInfo, StateOverlay,
                    fold_name, merge_template)
from .values import Literal, ValueExprError, parse_value_expr
from .xmlio import RawAttr, RawElement, XmlSyntaxError, parse_xml

# diagnostic codes emitted here
XML_SYNTAX = "XML_SYNTAX"
BAD_ROOT = "BAD_ROOT"
UNKNOWN_LANGUAGE = "UNKNOWN_LANGUAGE"
MISSING_SCENES = "MISSING_SCENES"
DUPLICATE_ELEMENT = "DUPLICATE_ELEMENT"
UNKNOWN_ELEMENT = "UNKNOWN_ELEMENT"
UNKNOWN_ATTRIBUTE = "UNKNOWN_ATTRIBUTE"
NOT_OVERRIDABLE = "NOT_OVERRIDABLE"
DUPLICATE_ATTRIBUTE = "DUPLICATE_ATTRIBUTE"
MISSING_ATTRIBUTE = "MISSING_ATTRIBUTE"
DUPLICATE_NAME = "DUPLICATE_NAME"
BAD_VALUE = "BAD_VALUE"
BAD_EXPRESSION = "BAD_EXPRESSION"
UNKNOWN_ENUM_VALUE = "UNKNOWN_ENUM_VALUE"
TEMPLATE_MISSING = "TEMPLATE_MISSING"
TEMPLATE_CYCLE = "TEMPLATE_CYCLE"


def parse(data, language_hint: Optional[str] = None,
          source_path: Optional[str] = None) -> GimlDocument:
    """Parse GIML source (bytes or text) into a canonical document.

    The document language comes from, in order: an explicit ``language``
    attribute on the root element, the ``language_hint`` argument, the
    spelling of the root element name, and finally English.
    """
    registry = load_registry()
    try:
        raw = parse_xml(data)
    except XmlSyntaxError as exc:
        doc = GimlDocument(source_language=language_hint or "en",
                           source_path=source_path)
        doc.diagnostics.append(Diagnostic(ERROR, XML_SYNTAX, str(exc),
                                          exc.line, exc.col))
        return doc

    parser = _Parser(registry)
    doc = parser.run(raw, language_hint)
    doc.source_path = source_path
    return doc


class _Parser:
    def __init__(self, registry: KeywordRegistry):
        self.registry = registry
        self.language = "en"
        self.diagnostics: list[Diagnostic] = []
        self._present: set[str] = set()

    # -- helpers ------------------------------------------------------------

    def report(self, severity: str, code: str, message: str,
               node, suggestion: str = "") -> None:
        self.diagnostics.append(Diagnostic(severity, code, message,
                                           node.line, node.col, suggestion))

    def lookup_element(self, name: str, owner: str) -> Optional[str]:
        return self.registry.lookup(name, self.language, ELEMENT, owner)

    def lookup_enum(self, token: str, family: str) -> Optional[str]:
        cid = self.registry.lookup(token, self.language, ENUM_VALUE, family)
        if cid is None:
            return None
        return schema.ENUM_CANONICAL[family][cid]

    def spell(self, canonical_id: str) -> str:
        return self.registry.render(canonical_id, self.language)

    # -- top level ----------------------------------------------------------

    def run(self, raw, language_hint: Optional[str]) -> GimlDocument:
        root = raw.root
        self.language = self._detect_language(root, language_hint)
        doc = GimlDocument(source_language=self.language, raw=raw)
        doc.settings.language = self.language
        doc.diagnostics = self.diagnostics

        if self.lookup_element(root.name, "ROOT") != "SETTINGS":
            self.report(ERROR, BAD_ROOT,
                        "root element %r is not the settings element (%r)"
                        % (root.name, self.spell("SETTINGS")), root)
            return doc

        attrs = self._attrs(root, ("SETTINGS",))
        doc.settings = SettingsInfo(
            folder=attrs.get("FOLDER"),
            language=self.language,
            library=attrs.get("LIBRARY"),
        )

        seen: dict[str, RawElement] = {}
        for child in root.children:
            cid = self.lookup_element(child.name, "SETTINGS")
            if cid is None:
                suggestion = self._suggest(child.name, ELEMENT, "SETTINGS")
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "unknown element %r%s" % (
                                child.name, self._hint(suggestion)),
                            child, suggestion)
                continue
            if cid in seen:
                self.report(WARNING, DUPLICATE_ELEMENT,
                            "duplicate %r element ignored" % child.name,
                            child)
                continue
            seen[cid] = child
            if cid == "IMAGES":
                doc.images = self._resources(child, "image", "IMAGES", "IMAGE")
            elif cid == "SOUNDS":
                doc.sounds = self._resources(child, "sound", "SOUNDS", "SOUND")
            elif cid == "MOVIES":
                doc.movies = self._resources(child, "movie", "MOVIES", "MOVIE")
            elif cid == "LISTS":
                doc.lists = self._lists(child)
            elif cid == "SCENES":
                self._scenes(child, doc)

        if "SCENES" not in seen:
            self.report(ERROR, MISSING_SCENES,
                        "document has no %r element" % self.spell("SCENES"),
                        root)
        self._check_duplicate_names(doc)
        self._resolve_templates(doc)
        return doc

    def _detect_language(self, root, hint: Optional[str]) -> str:
        declared = None
        for attr in root.attrs:
            for language in LANGUAGES:
                if self.registry.lookup(attr.name, language, ATTRIBUTE,
                                        "SETTINGS") == "LANGUAGE":
                    declared = attr
                    break
            if declared:
                break
        if declared is not None:
            code = declared.value.strip().casefold()
            if code in schema.LANGUAGE_CODES:
                return code
            self.diagnostics.append(Diagnostic(
                ERROR, UNKNOWN_LANGUAGE,
                "unknown language code %r" % declared.value,
                declared.line, declared.col))
        if hint:
            return hint
        for language in LANGUAGES:
            if self.registry.lookup(root.name, language, ELEMENT,
                                    "ROOT") == "SETTINGS":
                return language
        return "en"

    # -- attribute conversion -----------------------------------------------

    def _attrs(self, element, owners: tuple[str, ...],
               forbidden_owner: Optional[str] = None) -> dict[str, object]:
        """Map raw attributes to canonical id -> typed value.

        Attributes whose value fails to convert are left out of the
        result but still count as present for obligatory checks.
        """
        out: dict[str, object] = {}
        self._present: set[str] = set()
        for attr in element.attrs:
            cid = owner = None
            for candidate in owners:
                cid = self.registry.lookup(attr.name, self.language,
                                           ATTRIBUTE, candidate)
                if cid is not None:
                    owner = candidate
                    break
            if cid is None:
                if forbidden_owner and self.registry.lookup(
                        attr.name, self.language, ATTRIBUTE, forbidden_owner):
                    self.report(WARNING, NOT_OVERRIDABLE,
                                "attribute %r cannot be set per state"
                                % attr.name, attr)
                    continue
                suggestion = self._suggest(attr.name, ATTRIBUTE, *owners)
                self.report(WARNING, UNKNOWN_ATTRIBUTE,
                            "unknown attribute %r%s" % (
                                attr.name, self._hint(suggestion)),
                            attr, suggestion)
                continue
            if cid in self._present:
                self.report(WARNING, DUPLICATE_ATTRIBUTE,
                            "duplicate attribute %r ignored" % attr.name,
                            attr)
                continue
            self._present.add(cid)
            value = self._convert(attr, schema.attr_meta(owner, cid), cid)
            if value is not None:
                out[cid] = value
        return out

    def _suggest(self, token: str, kind: str, *owners: str) -> str:
        for owner in owners:
            suggestion = self.registry.suggest(token, self.language, kind,
                                               owner)
            if suggestion:
                return suggestion
        return ""

    @staticmethod
    def _hint(suggestion: str) -> str:
        return " (did you mean %r?)" % suggestion if suggestion else ""

    def _convert(self, attr: RawAttr, meta: schema.AttrMeta,
                 cid: str):
        raw = attr.value
        if meta.expr:
            try:
                expr = parse_value_expr(
                    raw, numeric=meta.kind in (schema.INT, schema.REAL),
                    integer=meta.kind == schema.INT, axis=meta.axis)
            except ValueExprError as exc:
                self.report(ERROR, BAD_EXPRESSION, str(exc), attr)
                return Literal(raw)
            if isinstance(expr, Literal):
                self._check_literal(attr, meta, raw)
            return expr
        if meta.kind in (schema.NAME, schema.PATH, schema.KEY,
                         schema.CALLBACK, schema.LABEL, schema.FONT):
            return raw.strip()
        if meta.kind in (schema.TEXT, schema.STYLE):
            return raw
        if meta.kind == schema.NAME_LIST:
            return tuple(part.strip() for part in raw.split(";")
                         if part.strip())
        if meta.kind == schema.INT:
            number = _parse_int(raw)
            if number is None:
                self.report(ERROR, BAD_VALUE,
                            "attribute %r needs an integer, got %r"
                            % (attr.name, raw), attr)
                return None
            return number
        if meta.kind == schema.REAL:
            try:
                return float(raw.strip())
            except ValueError:
                self.report(ERROR, BAD_VALUE,
                            "attribute %r needs a number, got %r"
                            % (attr.name, raw), attr)
                return None
        if meta.kind == schema.BOOL:
            cid_value = self.registry.lookup(raw, self.language, ENUM_VALUE,
                                             "BOOLEAN")
            if cid_value is None:
                self.report(ERROR, BAD_VALUE,
                            "attribute %r needs yes or no, got %r"
                            % (attr.name, raw), attr)
                return None
            return cid_value == "YES"
        if meta.kind == schema.COLOR:
            color = parse_color(raw)
            if color is None:
                self.report(ERROR, BAD_VALUE,
                            "attribute %r needs a color, got %r"
                            % (attr.name, raw), attr)
            return color
        if meta.kind == schema.ENUM:
            value = self.lookup_enum(raw, meta.family)
            if value is None:
                suggestion = self._suggest(raw, ENUM_VALUE, meta.family)
                self.report(ERROR, UNKNOWN_ENUM_VALUE,
                            "unknown value %r for attribute %r%s"
                            % (raw, attr.name, self._hint(suggestion)),
                            attr, suggestion)
            return value
        if meta.kind == schema.PAIRS:
            return self._parse_pairs(attr, raw)
        return raw

    def _check_literal(self, attr: RawAttr, meta: schema.AttrMeta,
                       raw: str) -> None:
        ok = True
        if meta.kind == schema.INT:
            ok = _parse_int(raw) is not None
        elif meta.kind == schema.REAL:
            ok = _parse_float(raw) is not None
        elif meta.kind == schema.COLOR:
            ok = parse_color(raw) is not None
        if not ok:
            self.report(ERROR, BAD_VALUE,
                        "attribute %r has unusable value %r"
                        % (attr.name, raw), attr)

    def _parse_pairs(self, attr: RawAttr, raw: str):
        pairs = []
        for chunk in raw.split(";"):
            if not chunk.strip():
                continue
            parts = chunk.split(",")
            x = _parse_float(parts[0]) if len(parts) == 2 else None
            y = _parse_float(parts[1]) if len(parts) == 2 else None
            if x is None or y is None:
                self.report(ERROR, BAD_VALUE,
                            "attribute %r needs x,y pairs separated by "
                            "semicolons, got %r" % (attr.name, raw), attr)
                return None
            pairs.append((x, y))
        return tuple(pairs)

    def _require(self, element, owner: str, attrs: dict[str, object],
                 canonical_ids) -> None:
        for cid in canonical_ids:
            if cid not in attrs and cid not in self._present:
                self.report(ERROR, MISSING_ATTRIBUTE,
                            "element %r is missing obligatory attribute %r"
                            % (element.name,
                               self.registry.render(cid, self.language,
                                                    ATTRIBUTE, owner)),
                            element)

    def _obligatory(self, owner: str):
        return [cid for (own, cid), meta in schema.ATTRS.items()
                if own == owner and meta.obligatory]

    # -- resources ----------------------------------------------------------

    def _resources(self, container, kind: str, container_owner: str,
                   owner: str) -> list[ResourceDecl]:
        folder = self._attrs(container, (container_owner,)).get("FOLDER")
        out = []
        for child in container.children:
            if self.lookup_element(child.name, container_owner) != owner:
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "unknown element %r inside %r"
                            % (child.name, container.name), child)
                continue
            attrs = self._attrs(child, (owner,))
            self._require(child, owner, attrs, self._obligatory(owner))
            if "NAME" not in attrs:
                continue
            out.append(ResourceDecl(
                kind=kind,
                name=attrs["NAME"],
                path=attrs.get("PATH", ""),
                container_folder=folder,
                transparency_key=attrs.get("TRANSPARENCY_KEY"),
                running_period=attrs.get("RUNNING_PERIOD", -1),
                run_from_frame=attrs.get("RUN_FROM_FRAME", 0),
                run_to_frame=attrs.get("RUN_TO_FRAME", -1),
                keep_in_memory=attrs.get("KEEP_IN_MEMORY", False),
                repetition_number=attrs.get("REPETITION_NUMBER", 1),
                in_background=attrs.get("IN_BACKGROUND", False),
                volume=attrs.get("VOLUME", 1.0),
                line=child.line,
            ))
        return out

    def _lists(self, container) -> list[ListDecl]:
        out = []
        for child in container.children:
            if self.lookup_element(child.name, "LISTS") != "LIST":
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "unknown element %r inside %r"
                            % (child.name, container.name), child)
                continue
            attrs = self._attrs(child, ("LIST",))
            self._require(child, "LIST", attrs, self._obligatory("LIST"))
            if "NAME" not in attrs:
                continue
            values = attrs.get("VALUES", "")
            out.append(ListDecl(
                name=attrs["NAME"],
                element_type=attrs.get("ELEMENT_TYPE", "strings"),
                values=tuple(values.split(";")) if values else (),
                draw_mode=attrs.get("DRAWING", "draw_no_returns"),
                group=attrs.get("GROUP"),
                line=child.line,
            ))
        return out

    # -- scenes -------------------------------------------------------------

    def _scenes(self, container, doc: GimlDocument) -> None:
        attrs = self._attrs(container, ("SCENES",))
        self._require(container, "SCENES", attrs, self._obligatory("SCENES"))
        doc.scenes_info = ScenesInfo(
            default_scene=attrs.get("NAME_OF_DEFAULT_SCENE", ""),
            screen_x=attrs.get("ORIGINAL_SCREEN_SIZE_X", 0),
            screen_y=attrs.get("ORIGINAL_SCREEN_SIZE_Y", 0),
            pause_scene=attrs.get("NAME_OF_PAUSE_SCENE"),
            spotlight=attrs.get("SPOTLIGHT"),
            spotlight_radius=attrs.get("SPOTLIGHT_RADIUS"),
        )
        for child in container.children:
            if self.lookup_element(child.name, "SCENES") != "SCENE":
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "unknown element %r inside %r"
                            % (child.name, container.name), child)
                continue
            doc.scenes.append(self._scene(child))

    def _scene(self, element) -> SceneDecl:
        attrs = self._attrs(element, ("SCENE",))
        self._require(element, "SCENE", attrs, self._obligatory("SCENE"))
        scene = SceneDecl(
            name=attrs.get("NAME", ""),
            background_color=attrs.get("BACKGROUND_COLOR"),
            background_image=attrs.get("NAME_OF_BACKGROUND_IMAGE"),
            background_sound=attrs.get("NAME_OF_BACKGROUND_SOUND"),
            blackout_degree=attrs.get("BLACKOUT_DEGREE", 0),
            blackout_color=attrs.get("BLACKOUT_COLOR"),
            blocking_regions_during_blackout=
                attrs.get("BLOCKING_REGIONS_DURING_BLACKOUT", False),
            regions_to_disable=attrs.get("LIST_OF_REGIONS_TO_DISABLE", ()),
            region_enabled_after_all_disabled=attrs.get(
                "NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED"),
            reset_after_enter=attrs.get("RESET_AFTER_ENTER", False),
            spotlight=attrs.get("SPOTLIGHT"),
            spotlight_radius=attrs.get("SPOTLIGHT_RADIUS"),
            lists_switched_over_after_enter=attrs.get(
                "NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER", ()),
            region_enabled_after_list_finished=attrs.get(
                "NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED"),
            on_scene_changed=attrs.get("ON_SCENE_CHANGED"),
            template_ref=attrs.get("TEMPLATE"),
            explicit=frozenset(attrs),
            line=element.line,
        )
        for child in element.children:
            if self.lookup_element(child.name, "SCENES") == "SCENE":
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "scene element nested inside a scene", child)
                continue
            cid = self.lookup_element(child.name, "SCENE")
            if cid != "REGION":
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "unknown element %r inside %r"
                            % (child.name, element.name), child)
                continue
            scene.regions.append(self._region(child))
        return scene

    def _region(self, element) -> RegionDecl:
        attrs = self._attrs(element, ("REGION", "REGION_STATE"))
        self._require(element, "REGION", attrs, self._obligatory("REGION"))
        region = RegionDecl(
            name=attrs.get("NAME", ""),
            shape=attrs.get("SHAPE") or "rectangle",
            location_x=attrs.get("LOCATION_OF_CENTER_X"),
            location_y=attrs.get("LOCATION_OF_CENTER_Y"),
            size_x=attrs.get("SIZE_X"),
            size_y=attrs.get("SIZE_Y"),
            enabled=attrs.get("ENABLED", True),
            offset_of_image_x=attrs.get("OFFSET_OF_IMAGE_CENTER_X"),
            offset_of_image_y=attrs.get("OFFSET_OF_IMAGE_CENTER_Y"),
            image_size_x=attrs.get("IMAGE_SIZE_X"),
            image_size_y=attrs.get("IMAGE_SIZE_Y"),
            offset_of_text_x=attrs.get("OFFSET_OF_TEXT_X"),
            offset_of_text_y=attrs.get("OFFSET_OF_TEXT_Y"),
            offset_of_bar_x=attrs.get("OFFSET_OF_ACTIVATION_BAR_X"),
            offset_of_bar_y=attrs.get("OFFSET_OF_ACTIVATION_BAR_Y"),
            region_animation_enabled=attrs.get("REGION_ANIMATION_ENABLED",
                                               True),
            image_animation_enabled=attrs.get("IMAGE_ANIMATION_ENABLED",
                                              True),
            condition_of_reaction_completion=
                attrs.get("CONDITION_OF_REACTION_COMPLETION") or
                "region_leave",
            reaction_duration=attrs.get("REACTION_DURATION"),
            hold_scene_transition=attrs.get("HOLD_SCENE_TRANSITION", False),
            automatic_reaction_after_time=attrs.get(
                "AUTOMATIC_REACTION_AFTER_TIME"),
            able_to_activate_blackout=attrs.get("ABLE_TO_ACTIVATE_BLACKOUT",
                                                False),
            reset_after_enabled=attrs.get("RESET_AFTER_ENABLED", False),
            ignore_gaze=attrs.get("IGNORE_GAZE", False),
            enabling_delay=attrs.get("ENABLING_DELAY"),
            disabling_delay=attrs.get("DISABLING_DELAY"),
            reaction_key=attrs.get("REACTION_KEY"),
            dwell_time=attrs.get("DWELL_TIME"),
            on_activation_completed=attrs.get("ON_ACTIVATION_COMPLETED"),
            on_reaction_started=attrs.get("ON_REACTION_STARTED"),
            on_reaction_finished=attrs.get("ON_REACTION_FINISHED"),
            on_normal_state_return=attrs.get("ON_NORMAL_STATE_RETURN"),
            on_state_changed=attrs.get("ON_STATE_CHANGED"),
            base=self._overlay(attrs, element.line),
            line=element.line,
        )
        for child in element.children:
            cid = self.lookup_element(child.name, "REGION")
            if cid not in ("ACTIVATION", "REACTION"):
                self.report(WARNING, UNKNOWN_ELEMENT,
                            "unknown element %r inside %r"
                            % (child.name, element.name), child)
                continue
            state_attrs = self._attrs(child, ("REGION_STATE",),
                                      forbidden_owner="REGION")
            overlay = self._overlay(state_attrs, child.line)
            if cid == "ACTIVATION":
                if region.activation is not None:
                    self.report(WARNING, DUPLICATE_ELEMENT,
                                "duplicate activation element ignored", child)
                    continue
                region.activation = overlay
            else:
                if region.reaction is not None:
                    self.report(WARNING, DUPLICATE_ELEMENT,
                                "duplicate reaction element ignored", child)
                    continue
                region.reaction = overlay
        return region

    def _overlay(self, attrs: dict[str, object], line: int) -> StateOverlay:
        return StateOverlay(
            action_type=attrs.get("ACTION_TYPE"),
            border_width=attrs.get("BORDER_WIDTH"),
            border_color=attrs.get("BORDER_COLOR"),
            name_of_target_scene=attrs.get("NAME_OF_TARGET_SCENE"),
            name_of_image=attrs.get("NAME_OF_IMAGE"),
            name_of_sound=attrs.get("NAME_OF_SOUND"),
            move_path=attrs.get("MOVE_PATH"),
            speed=attrs.get("SPEED"),
            animation_type=attrs.get("ANIMATION_TYPE"),
            animation_amplitude=attrs.get("ANIMATION_AMPLITUDE"),
            animation_period=attrs.get("ANIMATION_PERIOD"),
            tag=attrs.get("TAG"),
            delayed_tag=attrs.get("DELAYED_TAG"),
            delay_of_delayed_tag=attrs.get("DELAY_OF_DELAYED_TAG"),
            text=attrs.get("TEXT"),
            font=attrs.get("FONT"),
            font_size=attrs.get("FONT_SIZE"),
            font_style=attrs.get("FONT_STYLE"),
            font_color=attrs.get("FONT_COLOR"),
            turn_off_when_finished=attrs.get("TURN_OFF_WHEN_FINISHED"),
            name_of_region_enabled_when_started=attrs.get(
                "NAME_OF_REGION_ENABLED_WHEN_STARTED"),
            name_of_region_disabled_when_started=attrs.get(
                "NAME_OF_REGION_DISABLED_WHEN_STARTED"),
            name_of_region_enabled_when_finished=attrs.get(
                "NAME_OF_REGION_ENABLED_WHEN_FINISHED"),
            name_of_region_disabled_when_finished=attrs.get(
                "NAME_OF_REGION_DISABLED_WHEN_FINISHED"),
            line=line,
        )

    # -- cross element checks -----------------------------------------------

    def _check_duplicate_names(self, doc: GimlDocument) -> None:
        for label, items in (("image", doc.images), ("sound", doc.sounds),
                             ("movie", doc.movies), ("list", doc.lists),
                             ("scene", doc.scenes)):
            self._dupes(label, items)
        for scene in doc.scenes:
            self._dupes("region", scene.regions,
                        suffix=" in scene %r" % scene.name)

    def _dupes(self, label: str, items, suffix: str = "") -> None:
        seen: dict[str, object] = {}
        for item in items:
            folded = fold_name(item.name)
            if not folded:
                continue
            if folded in seen:
                self.diagnostics.append(Diagnostic(
                    ERROR, DUPLICATE_NAME,
                    "duplicate %s name %r%s" % (label, item.name, suffix),
                    item.line, 0))
            seen[folded] = item

    def _resolve_templates(self, doc: GimlDocument) -> None:
        resolved: dict[str, SceneDecl] = {}

        def resolve(scene: SceneDecl, trail: tuple[str, ...]) -> SceneDecl:
            key = fold_name(scene.name)
            if key in resolved:
                return resolved[key]
            if scene.template_ref is None:
                resolved[key] = scene
                return scene
            if key in trail:
                self.diagnostics.append(Diagnostic(
                    ERROR, TEMPLATE_CYCLE,
                    "template chain loops at scene %r" % scene.name,
                    scene.line, 0))
                resolved[key] = scene
                return scene
            template = doc.scene(scene.template_ref)
            if template is None:
                self.diagnostics.append(Diagnostic(
                    ERROR, TEMPLATE_MISSING,
                    "scene %r uses unknown template %r"
                    % (scene.name, scene.template_ref), scene.line, 0))
                resolved[key] = scene
                return scene
            merged = merge_template(scene, resolve(template, trail + (key,)))
            resolved[key] = merged
            return merged

        for scene in doc.scenes:
            resolve(scene, ())
        doc.effective = resolved


def _parse_int(text: str) -> Optional[int]:
    try:
        return int(text.strip())
    except ValueError:
        try:
            number = float(text.strip())
        except ValueError:
            return None
        return int(number) if number.is_integer() else None


def _parse_float(text: str) -> Optional[float]:
    try:
        return float(text.strip())
    except ValueError:
        return None
