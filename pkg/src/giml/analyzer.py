"""Whole-document checks and language translation.

``validate`` runs the cross reference checks that the parser cannot do
element by element: names pointing at scenes, regions, resources and
lists, group consistency, and optionally resource files on disk.  It is
pure; the same document always yields the same diagnostic list.

``translate`` rewrites every keyword of a document into another language
while leaving user content (names, paths, text, list values, colors,
numbers) untouched.
"""

from __future__ import annotations

import os
from typing import Optional, Union

from . import schema
from .colors import parse_color
from .diagnostics import ERROR, INFO, WARNING, Diagnostic, has_errors
from .keywords import (ATTRIBUTE, ELEMENT, ENUM_VALUE, KeywordRegistry,
                       load_registry)
from .model import (OVERLAY_EXPR_FIELDS, REGION_EXPR_FIELDS, GimlDocument,
                    RegionDecl, SceneDecl, StateOverlay, asset_file_path,
                    fold_name)
from .values import ListRef, Literal, RandomChoice

DANGLING_SCENE_REF = "DANGLING_SCENE_REF"
DANGLING_REGION_REF = "DANGLING_REGION_REF"
DANGLING_IMAGE_REF = "DANGLING_IMAGE_REF"
DANGLING_SOUND_REF = "DANGLING_SOUND_REF"
DANGLING_LIST_REF = "DANGLING_LIST_REF"
LIST_EMPTY = "LIST_EMPTY"
LIST_VALUE_BAD = "LIST_VALUE_BAD"
GROUP_LENGTH_MISMATCH = "GROUP_LENGTH_MISMATCH"
GROUP_MODE_CONFLICT = "GROUP_MODE_CONFLICT"
MISSING_REACTION_DURATION = "MISSING_REACTION_DURATION"
MOVE_WITHOUT_PATH = "MOVE_WITHOUT_PATH"
RESOURCE_FILE_MISSING = "RESOURCE_FILE_MISSING"
RESOURCES_UNCHECKED = "RESOURCES_UNCHECKED"


def validate(doc: GimlDocument,
             asset_root: Optional[str] = None) -> list[Diagnostic]:
    """Return the full diagnostic list for a parsed document.

    Parse findings come first, then reference and consistency findings in
    document order.  Resource files are only checked on disk when
    ``asset_root`` is given; otherwise a single info note is emitted.
    """
    checker = _Checker(doc)
    checker.run(asset_root)
    return list(doc.diagnostics) + checker.found


class _Checker:
    def __init__(self, doc: GimlDocument):
        self.doc = doc
        self.found: list[Diagnostic] = []
        self.scene_names = {fold_name(s.name) for s in doc.scenes}
        self.image_names = {fold_name(r.name) for r in doc.images}
        self.movie_names = {fold_name(r.name) for r in doc.movies}
        self.sound_names = {fold_name(r.name) for r in doc.sounds}
        self.list_names = {fold_name(l.name) for l in doc.lists}

    def report(self, severity: str, code: str, message: str,
               line: int = 0) -> None:
        self.found.append(Diagnostic(severity, code, message, line))

    def run(self, asset_root: Optional[str]) -> None:
        self._check_scene_pointers()
        self._check_lists()
        for scene in self.doc.scenes:
            effective = self.doc.effective_scene(scene.name) or scene
            self._check_scene(scene, effective)
        self._check_resource_files(asset_root)

    # -- document level ------------------------------------------------------

    def _check_scene_pointers(self) -> None:
        info = self.doc.scenes_info
        if info.default_scene and \
                fold_name(info.default_scene) not in self.scene_names:
            self.report(ERROR, DANGLING_SCENE_REF,
                        "default scene %r is not defined"
                        % info.default_scene)
        if info.pause_scene and \
                fold_name(info.pause_scene) not in self.scene_names:
            self.report(ERROR, DANGLING_SCENE_REF,
                        "pause scene %r is not defined" % info.pause_scene)

    def _check_lists(self) -> None:
        groups: dict[str, list] = {}
        for decl in self.doc.lists:
            if not decl.values:
                self.report(ERROR, LIST_EMPTY,
                            "list %r has no values" % decl.name, decl.line)
            if decl.group is not None:
                groups.setdefault(decl.group, []).append(decl)
        for label, members in groups.items():
            lengths = sorted({len(m.values) for m in members})
            if len(lengths) > 1:
                self.report(ERROR, GROUP_LENGTH_MISMATCH,
                            "lists in group %r differ in length (%s)"
                            % (label, ", ".join(
                                "%s: %d" % (m.name, len(m.values))
                                for m in members)),
                            members[0].line)
            modes = {m.draw_mode for m in members}
            if len(modes) > 1:
                self.report(WARNING, GROUP_MODE_CONFLICT,
                            "lists in group %r declare different drawing "
                            "modes; %r from list %r applies to the group"
                            % (label, members[0].draw_mode, members[0].name),
                            members[0].line)

    # -- scene level ---------------------------------------------------------

    def _check_scene(self, scene: SceneDecl, effective: SceneDecl) -> None:
        region_names = {fold_name(r.name) for r in effective.regions}
        where = "scene %r" % scene.name

        if scene.background_image is not None:
            self._image_ref(scene.background_image,
                            "background image of %s" % where, scene.line)
        if scene.background_sound is not None:
            self._sound_ref(scene.background_sound,
                            "background sound of %s" % where, scene.line)
        for name in scene.regions_to_disable:
            self._region_ref(name, region_names, where, scene.line)
        if scene.region_enabled_after_all_disabled is not None:
            self._region_ref(scene.region_enabled_after_all_disabled,
                             region_names, where, scene.line)
        if scene.region_enabled_after_list_finished is not None:
            self._region_ref(scene.region_enabled_after_list_finished,
                             region_names, where, scene.line)
        for name in scene.lists_switched_over_after_enter:
            if fold_name(name) not in self.list_names:
                self.report(ERROR, DANGLING_LIST_REF,
                            "%s switches over unknown list %r"
                            % (where, name), scene.line)

        for region in scene.regions:
            self._check_region(region, region_names, where)

    def _check_region(self, region: RegionDecl, region_names: set,
                      where: str) -> None:
        spot = "region %r of %s" % (region.name, where)
        for field, (owner, cid) in REGION_EXPR_FIELDS.items():
            self._check_expr(getattr(region, field),
                             schema.attr_meta(owner, cid), spot, region.line)
        for overlay, label in ((region.base, "normal state"),
                               (region.activation, "activation state"),
                               (region.reaction, "reaction state")):
            if overlay is not None:
                self._check_overlay(overlay, region_names,
                                    "%s of %s" % (label, spot))
        if region.condition_of_reaction_completion == "time_elapsed" and \
                region.reaction_duration is None:
            self.report(ERROR, MISSING_REACTION_DURATION,
                        "%s waits for elapsed time but sets no reaction "
                        "duration" % spot, region.line)

    def _check_overlay(self, overlay: StateOverlay, region_names: set,
                       spot: str) -> None:
        line = overlay.line
        if overlay.name_of_target_scene is not None and \
                fold_name(overlay.name_of_target_scene) \
                not in self.scene_names:
            self.report(ERROR, DANGLING_SCENE_REF,
                        "%s points at unknown scene %r"
                        % (spot, overlay.name_of_target_scene), line)
        if overlay.action_type == "move" and overlay.move_path is None:
            self.report(WARNING, MOVE_WITHOUT_PATH,
                        "%s asks for a move but gives no move path" % spot,
                        line)
        for attr in ("name_of_region_enabled_when_started",
                     "name_of_region_disabled_when_started",
                     "name_of_region_enabled_when_finished",
                     "name_of_region_disabled_when_finished"):
            name = getattr(overlay, attr)
            if name is not None:
                self._region_ref(name, region_names, spot, line)
        for field, (owner, cid) in OVERLAY_EXPR_FIELDS.items():
            self._check_expr(getattr(overlay, field),
                             schema.attr_meta(owner, cid), spot, line)

    # -- reference helpers ---------------------------------------------------

    def _region_ref(self, name: str, region_names: set, where: str,
                    line: int) -> None:
        if fold_name(name) not in region_names:
            self.report(ERROR, DANGLING_REGION_REF,
                        "%s references unknown region %r" % (where, name),
                        line)

    def _image_ref(self, name: str, where: str, line: int) -> None:
        folded = fold_name(name)
        if folded not in self.image_names and \
                folded not in self.movie_names:
            self.report(ERROR, DANGLING_IMAGE_REF,
                        "%s references unknown image %r" % (where, name),
                        line)

    def _sound_ref(self, name: str, where: str, line: int) -> None:
        if fold_name(name) not in self.sound_names:
            self.report(ERROR, DANGLING_SOUND_REF,
                        "%s references unknown sound %r" % (where, name),
                        line)

    def _check_expr(self, expr, meta: schema.AttrMeta, spot: str,
                    line: int) -> None:
        if expr is None:
            return
        if isinstance(expr, ListRef):
            if fold_name(expr.list_name) not in self.list_names:
                self.report(ERROR, DANGLING_LIST_REF,
                            "%s references unknown list %r"
                            % (spot, expr.list_name), line)
                return
            decl = self.doc.list_decl(expr.list_name)
            for value in decl.values:
                self._check_concrete(value, meta,
                                     "%s via list %r" % (spot, decl.name),
                                     line, from_list=True)
            return
        if isinstance(expr, RandomChoice):
            for option in expr.options:
                self._check_concrete(option, meta, spot, line)
            return
        if isinstance(expr, Literal):
            self._check_concrete(expr.text, meta, spot, line)

    def _check_concrete(self, value: str, meta: schema.AttrMeta, spot: str,
                        line: int, from_list: bool = False) -> None:
        code = LIST_VALUE_BAD if from_list else None
        if meta.kind == schema.NAME:
            if meta.family == "image":
                self._image_ref(value, spot, line)
            elif meta.family == "sound":
                self._sound_ref(value, spot, line)
        elif meta.kind == schema.COLOR:
            if parse_color(value) is None:
                self.report(ERROR, code or LIST_VALUE_BAD,
                            "%s holds %r, which is not a color"
                            % (spot, value), line)
        elif meta.kind in (schema.INT, schema.REAL) and from_list:
            try:
                float(value)
            except ValueError:
                self.report(ERROR, LIST_VALUE_BAD,
                            "%s holds %r, which is not a number"
                            % (spot, value), line)

    # -- resources on disk ---------------------------------------------------

    def _check_resource_files(self, asset_root: Optional[str]) -> None:
        resources = self.doc.images + self.doc.sounds + self.doc.movies
        if not resources:
            return
        if asset_root is None:
            self.report(INFO, RESOURCES_UNCHECKED,
                        "resource files not checked; no asset root given")
            return
        for decl in resources:
            full = asset_file_path(self.doc, decl, asset_root)
            if not os.path.exists(full):
                self.report(ERROR, RESOURCE_FILE_MISSING,
                            "%s %r resolves to missing file %s"
                            % (decl.kind, decl.name, full), decl.line)


# ---------------------------------------------------------------------------
# translation


class TranslationError(ValueError):
    """Raised when a document cannot be translated.

    Carries the parse diagnostics explaining why.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__("document does not parse; translation refused")
        self.diagnostics = diagnostics


def translate(source: Union[str, bytes, GimlDocument],
              target: str) -> str:
    """Rewrite a document's keywords into the target language.

    User content is preserved byte for byte: identifiers, paths, ``text``
    values, list values, colors and numbers.  Keyword spellings are
    normalized to their primary form, so translating a document into its
    own language acts as a spelling normalizer.
    """
    from .parser import parse
    from .xmlio import RawAttr, RawDocument, RawElement, serialize

    if isinstance(source, GimlDocument):
        doc = source
    else:
        doc = parse(source)
    if doc.raw is None or has_errors(doc.diagnostics):
        raise TranslationError(list(doc.diagnostics))
    if target not in schema.LANGUAGE_CODES:
        raise TranslationError([Diagnostic(
            ERROR, "UNKNOWN_LANGUAGE", "unknown language code %r" % target)])

    registry = load_registry()
    walker = _Translator(registry, doc.source_language, target,
                         RawAttr, RawElement)
    root = walker.element(doc.raw.root, "ROOT")
    return serialize(RawDocument(root, doc.raw.had_declaration))


class _Translator:
    # how to descend: canonical element id -> (attr owner chain,
    # owner used to look child element names up)
    _CONTEXT = {
        "SETTINGS": (("SETTINGS",), "SETTINGS"),
        "IMAGES": (("IMAGES",), "IMAGES"),
        "SOUNDS": (("SOUNDS",), "SOUNDS"),
        "MOVIES": (("MOVIES",), "MOVIES"),
        "IMAGE": (("IMAGE",), None),
        "SOUND": (("SOUND",), None),
        "MOVIE": (("MOVIE",), None),
        "LISTS": (("LISTS",), "LISTS"),
        "LIST": (("LIST",), None),
        "SCENES": (("SCENES",), "SCENES"),
        "SCENE": (("SCENE",), "SCENE"),
        "REGION": (("REGION", "REGION_STATE"), "REGION"),
        "ACTIVATION": (("REGION_STATE",), None),
        "REACTION": (("REGION_STATE",), None),
    }

    def __init__(self, registry: KeywordRegistry, source: str, target: str,
                 raw_attr, raw_element):
        self.registry = registry
        self.source = source
        self.target = target
        self.RawAttr = raw_attr
        self.RawElement = raw_element

    def element(self, el, parent_owner: Optional[str]):
        cid = None
        if parent_owner is not None:
            cid = self.registry.lookup(el.name, self.source, ELEMENT,
                                       parent_owner)
        if cid is None:
            # unknown element: keep the whole subtree untouched
            return el
        name = self.registry.render(cid, self.target, ELEMENT, parent_owner)
        attr_owners, child_owner = self._CONTEXT.get(cid, ((), None))
        attrs = [self._attr(attr, attr_owners) for attr in el.attrs]
        children = [self.element(child, child_owner) for child in el.children]
        return self.RawElement(name=name, attrs=attrs, children=children,
                               text=el.text, line=el.line, col=el.col)

    def _attr(self, attr, owners):
        cid = owner = None
        for candidate in owners:
            cid = self.registry.lookup(attr.name, self.source, ATTRIBUTE,
                                       candidate)
            if cid is not None:
                owner = candidate
                break
        if cid is None:
            return attr
        name = self.registry.render(cid, self.target, ATTRIBUTE, owner)
        meta = schema.attr_meta(owner, cid)
        value = attr.value
        if meta.kind == schema.LANGUAGE:
            value = self.target
        elif meta.kind == schema.BOOL:
            value = self._enum_value(value, "BOOLEAN")
        elif meta.kind == schema.ENUM:
            value = self._enum_value(value, meta.family)
        return self.RawAttr(name=name, value=value, line=attr.line,
                            col=attr.col)

    def _enum_value(self, token: str, family: str) -> str:
        cid = self.registry.lookup(token, self.source, ENUM_VALUE, family)
        if cid is None:
            return token
        return self.registry.render(cid, self.target, ENUM_VALUE, family)
