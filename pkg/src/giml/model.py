"""Canonical document model.

A parsed GIML document is language neutral: keywords are replaced by
canonical identifiers and enum values by canonical names, while user
supplied text (identifiers, captions, list values, paths) keeps its
original spelling.  Attribute values that admit expressions are stored
as parsed ValueExpr records, everything else as plain typed values.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Optional

from .colors import ColorValue
from .diagnostics import Diagnostic
from .values import ValueExpr
from .xmlio import RawDocument


def fold_name(name: str) -> str:
    """Identifiers match case insensitively, original spelling kept."""
    return name.strip().casefold()


@dataclass
class SettingsInfo:
    folder: Optional[str] = None
    language: str = "en"
    library: Optional[str] = None


@dataclass
class ResourceDecl:
    """One image, sound or movie declaration."""

    kind: str  # "image", "sound" or "movie"
    name: str
    path: str
    container_folder: Optional[str] = None
    transparency_key: Optional[ColorValue] = None
    running_period: int = -1
    run_from_frame: int = 0
    run_to_frame: int = -1
    keep_in_memory: bool = False
    repetition_number: int = 1
    in_background: bool = False
    volume: float = 1.0
    line: int = 0


@dataclass
class ListDecl:
    name: str
    element_type: str = "strings"  # "strings" or "colors"
    values: tuple[str, ...] = ()
    draw_mode: str = "draw_no_returns"
    group: Optional[str] = None
    line: int = 0


@dataclass
class StateOverlay:
    """Appearance and action of one region state.

    A state stands alone: attributes not set here fall back to their
    schema defaults when the state is entered, not to the values of the
    base state.
    """

    action_type: Optional[str] = None
    border_width: Optional[ValueExpr] = None
    border_color: Optional[ValueExpr] = None
    name_of_target_scene: Optional[str] = None
    name_of_image: Optional[ValueExpr] = None
    name_of_sound: Optional[ValueExpr] = None
    move_path: Optional[tuple[tuple[float, float], ...]] = None
    speed: Optional[ValueExpr] = None
    animation_type: Optional[str] = None
    animation_amplitude: Optional[ValueExpr] = None
    animation_period: Optional[ValueExpr] = None
    tag: Optional[str] = None
    delayed_tag: Optional[str] = None
    delay_of_delayed_tag: Optional[ValueExpr] = None
    text: Optional[ValueExpr] = None
    font: Optional[ValueExpr] = None
    font_size: Optional[ValueExpr] = None
    font_style: Optional[str] = None
    font_color: Optional[ValueExpr] = None
    turn_off_when_finished: Optional[bool] = None
    name_of_region_enabled_when_started: Optional[str] = None
    name_of_region_disabled_when_started: Optional[str] = None
    name_of_region_enabled_when_finished: Optional[str] = None
    name_of_region_disabled_when_finished: Optional[str] = None
    line: int = 0


@dataclass
class RegionDecl:
    name: str
    shape: str = "rectangle"  # "rectangle", "circle" or "ellipse"
    location_x: Optional[ValueExpr] = None
    location_y: Optional[ValueExpr] = None
    size_x: Optional[ValueExpr] = None
    size_y: Optional[ValueExpr] = None
    enabled: bool = True
    offset_of_image_x: Optional[ValueExpr] = None
    offset_of_image_y: Optional[ValueExpr] = None
    image_size_x: Optional[ValueExpr] = None
    image_size_y: Optional[ValueExpr] = None
    offset_of_text_x: Optional[ValueExpr] = None
    offset_of_text_y: Optional[ValueExpr] = None
    offset_of_bar_x: Optional[ValueExpr] = None
    offset_of_bar_y: Optional[ValueExpr] = None
    region_animation_enabled: bool = True
    image_animation_enabled: bool = True
    condition_of_reaction_completion: str = "region_leave"
    reaction_duration: Optional[ValueExpr] = None
    hold_scene_transition: bool = False
    automatic_reaction_after_time: Optional[ValueExpr] = None
    able_to_activate_blackout: bool = False
    reset_after_enabled: bool = False
    ignore_gaze: bool = False
    enabling_delay: Optional[ValueExpr] = None
    disabling_delay: Optional[ValueExpr] = None
    reaction_key: Optional[str] = None
    dwell_time: Optional[ValueExpr] = None
    on_activation_completed: Optional[str] = None
    on_reaction_started: Optional[str] = None
    on_reaction_finished: Optional[str] = None
    on_normal_state_return: Optional[str] = None
    on_state_changed: Optional[str] = None
    base: StateOverlay = field(default_factory=StateOverlay)
    activation: Optional[StateOverlay] = None
    reaction: Optional[StateOverlay] = None
    line: int = 0


@dataclass
class SceneDecl:
    name: str
    background_color: Optional[ColorValue] = None
    background_image: Optional[str] = None
    background_sound: Optional[str] = None
    blackout_degree: int = 0
    blackout_color: Optional[ColorValue] = None
    blocking_regions_during_blackout: bool = False
    regions_to_disable: tuple[str, ...] = ()
    region_enabled_after_all_disabled: Optional[str] = None
    reset_after_enter: bool = False
    spotlight: Optional[bool] = None
    spotlight_radius: Optional[int] = None
    lists_switched_over_after_enter: tuple[str, ...] = ()
    region_enabled_after_list_finished: Optional[str] = None
    on_scene_changed: Optional[str] = None
    template_ref: Optional[str] = None
    regions: list[RegionDecl] = field(default_factory=list)
    explicit: frozenset[str] = frozenset()  # canonical ids set in the source
    line: int = 0

    def region(self, name: str) -> Optional[RegionDecl]:
        folded = fold_name(name)
        for region in self.regions:
            if fold_name(region.name) == folded:
                return region
        return None


@dataclass
class ScenesInfo:
    default_scene: str = ""
    screen_x: int = 0
    screen_y: int = 0
    pause_scene: Optional[str] = None
    spotlight: Optional[bool] = None
    spotlight_radius: Optional[int] = None


@dataclass
class GimlDocument:
    source_language: str
    settings: SettingsInfo = field(default_factory=SettingsInfo)
    images: list[ResourceDecl] = field(default_factory=list)
    sounds: list[ResourceDecl] = field(default_factory=list)
    movies: list[ResourceDecl] = field(default_factory=list)
    lists: list[ListDecl] = field(default_factory=list)
    scenes_info: ScenesInfo = field(default_factory=ScenesInfo)
    scenes: list[SceneDecl] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list, repr=False)
    raw: Optional[RawDocument] = field(default=None, repr=False)
    source_path: Optional[str] = None
    effective: dict[str, SceneDecl] = field(default_factory=dict, repr=False)

    # -- name lookups (case insensitive) ------------------------------------

    def image(self, name: str) -> Optional[ResourceDecl]:
        return _find(self.images, name)

    def sound(self, name: str) -> Optional[ResourceDecl]:
        return _find(self.sounds, name)

    def movie(self, name: str) -> Optional[ResourceDecl]:
        return _find(self.movies, name)

    def list_decl(self, name: str) -> Optional[ListDecl]:
        return _find(self.lists, name)

    def scene(self, name: str) -> Optional[SceneDecl]:
        return _find(self.scenes, name)

    def effective_scene(self, name: str) -> Optional[SceneDecl]:
        """Scene with its template merged in, if it declares one."""
        return self.effective.get(fold_name(name)) or self.scene(name)

    def fingerprint(self) -> object:
        """Language independent canonical content.

        Two parses are the same document exactly when their fingerprints
        are equal; the source language and all source positions are left
        out.
        """
        body = {
            "settings": dataclasses.asdict(self.settings),
            "images": [dataclasses.asdict(r) for r in self.images],
            "sounds": [dataclasses.asdict(r) for r in self.sounds],
            "movies": [dataclasses.asdict(r) for r in self.movies],
            "lists": [dataclasses.asdict(l) for l in self.lists],
            "scenes_info": dataclasses.asdict(self.scenes_info),
            "scenes": [dataclasses.asdict(s) for s in self.scenes],
        }
        body["settings"].pop("language", None)
        return _strip_positions(body)


def _find(items, name: str):
    folded = fold_name(name)
    for item in items:
        if fold_name(item.name) == folded:
            return item
    return None


def _strip_positions(value):
    if isinstance(value, dict):
        return {k: _strip_positions(v) for k, v in value.items()
                if k not in ("line", "col")}
    if isinstance(value, (list, tuple)):
        return [_strip_positions(v) for v in value]
    if isinstance(value, frozenset):
        return sorted(value)
    return value


# ---------------------------------------------------------------------------
# resource paths

def _has_drive(path: str) -> bool:
    return len(path) >= 2 and path[1] == ":" and path[0].isalpha()


def is_absolute_path(path: str) -> bool:
    return path.startswith(("/", "\\")) or _has_drive(path)


def join_path(base: str, rel: str) -> str:
    """Join keeping the separator style of the base path."""
    windows = "\\" in base or _has_drive(base)
    sep = "\\" if windows else "/"
    rel = rel.replace("/" if windows else "\\", sep)
    return base.rstrip("/\\") + sep + rel


def resolve_resource_path(document: GimlDocument, decl: ResourceDecl) -> str:
    """Full path of a resource file.

    Relative paths are joined under the container folder first, then the
    settings folder; what is still relative after that is left working
    directory relative.  Separator style follows the folder attribute it
    is joined under, so Windows style declarations resolve to Windows
    style paths on any host.
    """
    path = decl.path
    if is_absolute_path(path):
        return path
    if decl.container_folder:
        path = join_path(decl.container_folder, path)
        if is_absolute_path(path):
            return path
    if document.settings.folder:
        path = join_path(document.settings.folder, path)
    return path


# ---------------------------------------------------------------------------
# scene templates

def asset_file_path(document: GimlDocument, decl: ResourceDecl,
                    asset_root: str) -> str:
    """Map a declared resource to a file below a local asset root.

    Documents written on other systems carry absolute paths and drive
    letters; those are stripped so the remaining folder structure can be
    mirrored under ``asset_root``.
    """
    path = resolve_resource_path(document, decl)
    local = path.replace("\\", "/")
    if _has_drive(local):
        local = local[2:]
    return os.path.join(asset_root, local.lstrip("/"))


def merge_template(scene: SceneDecl, template: SceneDecl) -> SceneDecl:
    """Combine a scene with the template it references.

    Scene attributes the inheriting scene sets explicitly win over the
    template's.  The merged region list holds the template's regions in
    order, with same-named regions replaced by the inheriting scene's
    version in place, followed by the scene's own additional regions.
    """
    merged = dataclasses.replace(template)
    merged.name = scene.name
    merged.template_ref = scene.template_ref
    merged.line = scene.line
    merged.explicit = scene.explicit | template.explicit
    for field_name, canonical in _SCENE_MERGE_FIELDS.items():
        if canonical in scene.explicit:
            setattr(merged, field_name, getattr(scene, field_name))
    regions: list[RegionDecl] = []
    used = set()
    for region in template.regions:
        override = scene.region(region.name)
        if override is not None:
            regions.append(override)
            used.add(fold_name(override.name))
        else:
            regions.append(region)
    for region in scene.regions:
        if fold_name(region.name) not in used:
            regions.append(region)
    merged.regions = regions
    return merged


_SCENE_MERGE_FIELDS = {
    "background_color": "BACKGROUND_COLOR",
    "background_image": "NAME_OF_BACKGROUND_IMAGE",
    "background_sound": "NAME_OF_BACKGROUND_SOUND",
    "blackout_degree": "BLACKOUT_DEGREE",
    "blackout_color": "BLACKOUT_COLOR",
    "blocking_regions_during_blackout": "BLOCKING_REGIONS_DURING_BLACKOUT",
    "regions_to_disable": "LIST_OF_REGIONS_TO_DISABLE",
    "region_enabled_after_all_disabled":
        "NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED",
    "reset_after_enter": "RESET_AFTER_ENTER",
    "spotlight": "SPOTLIGHT",
    "spotlight_radius": "SPOTLIGHT_RADIUS",
    "lists_switched_over_after_enter":
        "NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER",
    "region_enabled_after_list_finished":
        "NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED",
    "on_scene_changed": "ON_SCENE_CHANGED",
}


# Region and state fields that hold value expressions, with the attribute
# they come from.  The analyzer walks these for reference checking and the
# runtime uses the same tables to evaluate every site exactly once.
REGION_EXPR_FIELDS: dict[str, tuple[str, str]] = {
    "location_x": ("REGION", "LOCATION_OF_CENTER_X"),
    "location_y": ("REGION", "LOCATION_OF_CENTER_Y"),
    "size_x": ("REGION", "SIZE_X"),
    "size_y": ("REGION", "SIZE_Y"),
    "offset_of_image_x": ("REGION", "OFFSET_OF_IMAGE_CENTER_X"),
    "offset_of_image_y": ("REGION", "OFFSET_OF_IMAGE_CENTER_Y"),
    "image_size_x": ("REGION", "IMAGE_SIZE_X"),
    "image_size_y": ("REGION", "IMAGE_SIZE_Y"),
    "offset_of_text_x": ("REGION", "OFFSET_OF_TEXT_X"),
    "offset_of_text_y": ("REGION", "OFFSET_OF_TEXT_Y"),
    "offset_of_bar_x": ("REGION", "OFFSET_OF_ACTIVATION_BAR_X"),
    "offset_of_bar_y": ("REGION", "OFFSET_OF_ACTIVATION_BAR_Y"),
    "reaction_duration": ("REGION", "REACTION_DURATION"),
    "automatic_reaction_after_time":
        ("REGION", "AUTOMATIC_REACTION_AFTER_TIME"),
    "enabling_delay": ("REGION", "ENABLING_DELAY"),
    "disabling_delay": ("REGION", "DISABLING_DELAY"),
    "dwell_time": ("REGION", "DWELL_TIME"),
}

OVERLAY_EXPR_FIELDS: dict[str, tuple[str, str]] = {
    "border_width": ("REGION_STATE", "BORDER_WIDTH"),
    "border_color": ("REGION_STATE", "BORDER_COLOR"),
    "name_of_image": ("REGION_STATE", "NAME_OF_IMAGE"),
    "name_of_sound": ("REGION_STATE", "NAME_OF_SOUND"),
    "speed": ("REGION_STATE", "SPEED"),
    "animation_amplitude": ("REGION_STATE", "ANIMATION_AMPLITUDE"),
    "animation_period": ("REGION_STATE", "ANIMATION_PERIOD"),
    "delay_of_delayed_tag": ("REGION_STATE", "DELAY_OF_DELAYED_TAG"),
    "text": ("REGION_STATE", "TEXT"),
    "font": ("REGION_STATE", "FONT"),
    "font_size": ("REGION_STATE", "FONT_SIZE"),
    "font_color": ("REGION_STATE", "FONT_COLOR"),
}
