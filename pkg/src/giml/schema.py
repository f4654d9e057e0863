"""Typed attribute schema on top of the keyword registry.

The registry knows the spellings; this module knows what each attribute
holds: its value kind, whether it is obligatory, whether values may use
``rand:`` / ``%`` / ``@list`` expressions, which screen axis a percent
resolves against, and the canonical names of enumerated values.
"""

from __future__ import annotations

from dataclasses import dataclass

# value kinds
NAME = "name"            # single identifier
NAME_LIST = "name_list"  # identifiers separated by semicolons
TEXT = "text"            # free text, spelling preserved
PATH = "path"            # file path
INT = "int"
REAL = "real"
BOOL = "bool"
COLOR = "color"
ENUM = "enum"
PAIRS = "pairs"          # semicolon separated x,y integer pairs
KEY = "key"              # keyboard key name
CALLBACK = "callback"    # host callback name
LABEL = "label"          # opaque label (list group)
FONT = "font"
STYLE = "style"          # letters i b u s
LANGUAGE = "language"    # language code


@dataclass(frozen=True)
class AttrMeta:
    kind: str
    family: str = ""      # enum family, or reference target for NAME kinds
    axis: str = "scalar"  # percent axis for numeric attributes
    expr: bool = False    # value expressions allowed
    obligatory: bool = False


def _meta(kind, family="", axis="scalar", expr=False, obligatory=False):
    return AttrMeta(kind, family, axis, expr, obligatory)


# (owner, canonical id) -> metadata.  Region geometry is integer typed
# for random ranges but evaluates to real coordinates through percents.
ATTRS: dict[tuple[str, str], AttrMeta] = {
    ("SETTINGS", "FOLDER"): _meta(PATH),
    ("SETTINGS", "LANGUAGE"): _meta(LANGUAGE),
    ("SETTINGS", "LIBRARY"): _meta(PATH),
    ("IMAGES", "FOLDER"): _meta(PATH),
    ("SOUNDS", "FOLDER"): _meta(PATH),
    ("MOVIES", "FOLDER"): _meta(PATH),

    ("IMAGE", "NAME"): _meta(NAME, obligatory=True),
    ("IMAGE", "PATH"): _meta(PATH, obligatory=True),
    ("IMAGE", "TRANSPARENCY_KEY"): _meta(COLOR),
    ("IMAGE", "RUNNING_PERIOD"): _meta(INT),
    ("IMAGE", "RUN_FROM_FRAME"): _meta(INT),
    ("IMAGE", "RUN_TO_FRAME"): _meta(INT),
    ("IMAGE", "KEEP_IN_MEMORY"): _meta(BOOL),

    ("SOUND", "NAME"): _meta(NAME, obligatory=True),
    ("SOUND", "PATH"): _meta(PATH, obligatory=True),
    ("SOUND", "REPETITION_NUMBER"): _meta(INT),
    ("SOUND", "IN_BACKGROUND"): _meta(BOOL),
    ("SOUND", "VOLUME"): _meta(REAL),

    ("MOVIE", "NAME"): _meta(NAME, obligatory=True),
    ("MOVIE", "PATH"): _meta(PATH, obligatory=True),
    ("MOVIE", "TRANSPARENCY_KEY"): _meta(COLOR),
    ("MOVIE", "REPETITION_NUMBER"): _meta(INT),
    ("MOVIE", "IN_BACKGROUND"): _meta(BOOL),
    ("MOVIE", "VOLUME"): _meta(REAL),

    ("LIST", "NAME"): _meta(NAME, obligatory=True),
    ("LIST", "ELEMENT_TYPE"): _meta(ENUM, family="ELEMENT_TYPE"),
    ("LIST", "VALUES"): _meta(TEXT, obligatory=True),
    ("LIST", "DRAWING"): _meta(ENUM, family="DRAWING"),
    ("LIST", "GROUP"): _meta(LABEL),

    ("SCENES", "NAME_OF_DEFAULT_SCENE"): _meta(NAME, obligatory=True),
    ("SCENES", "ORIGINAL_SCREEN_SIZE_X"): _meta(INT, obligatory=True),
    ("SCENES", "ORIGINAL_SCREEN_SIZE_Y"): _meta(INT, obligatory=True),
    ("SCENES", "NAME_OF_PAUSE_SCENE"): _meta(NAME),
    ("SCENES", "SPOTLIGHT"): _meta(BOOL),
    ("SCENES", "SPOTLIGHT_RADIUS"): _meta(INT),

    ("SCENE", "NAME"): _meta(NAME, obligatory=True),
    ("SCENE", "BACKGROUND_COLOR"): _meta(COLOR),
    ("SCENE", "NAME_OF_BACKGROUND_IMAGE"): _meta(NAME, family="image"),
    ("SCENE", "NAME_OF_BACKGROUND_SOUND"): _meta(NAME, family="sound"),
    ("SCENE", "BLACKOUT_DEGREE"): _meta(INT),
    ("SCENE", "BLACKOUT_COLOR"): _meta(COLOR),
    ("SCENE", "BLOCKING_REGIONS_DURING_BLACKOUT"): _meta(BOOL),
    ("SCENE", "LIST_OF_REGIONS_TO_DISABLE"): _meta(NAME_LIST),
    ("SCENE", "NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED"):
        _meta(NAME),
    ("SCENE", "RESET_AFTER_ENTER"): _meta(BOOL),
    ("SCENE", "SPOTLIGHT"): _meta(BOOL),
    ("SCENE", "SPOTLIGHT_RADIUS"): _meta(INT),
    ("SCENE", "NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER"): _meta(NAME_LIST),
    ("SCENE", "NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED"): _meta(NAME),
    ("SCENE", "ON_SCENE_CHANGED"): _meta(CALLBACK),
    ("SCENE", "TEMPLATE"): _meta(NAME),

    ("REGION", "NAME"): _meta(NAME, obligatory=True),
    ("REGION", "ENABLED"): _meta(BOOL),
    ("REGION", "LOCATION_OF_CENTER_X"): _meta(INT, axis="x", expr=True,
                                              obligatory=True),
    ("REGION", "LOCATION_OF_CENTER_Y"): _meta(INT, axis="y", expr=True,
                                              obligatory=True),
    ("REGION", "SIZE_X"): _meta(INT, axis="x", expr=True, obligatory=True),
    ("REGION", "SIZE_Y"): _meta(INT, axis="y", expr=True, obligatory=True),
    ("REGION", "SHAPE"): _meta(ENUM, family="SHAPE", obligatory=True),
    ("REGION", "OFFSET_OF_IMAGE_CENTER_X"): _meta(INT, axis="x", expr=True),
    ("REGION", "OFFSET_OF_IMAGE_CENTER_Y"): _meta(INT, axis="y", expr=True),
    ("REGION", "IMAGE_SIZE_X"): _meta(INT, axis="x", expr=True),
    ("REGION", "IMAGE_SIZE_Y"): _meta(INT, axis="y", expr=True),
    ("REGION", "OFFSET_OF_TEXT_X"): _meta(INT, axis="x", expr=True),
    ("REGION", "OFFSET_OF_TEXT_Y"): _meta(INT, axis="y", expr=True),
    ("REGION", "OFFSET_OF_ACTIVATION_BAR_X"): _meta(INT, axis="x", expr=True),
    ("REGION", "OFFSET_OF_ACTIVATION_BAR_Y"): _meta(INT, axis="y", expr=True),
    ("REGION", "REGION_ANIMATION_ENABLED"): _meta(BOOL),
    ("REGION", "IMAGE_ANIMATION_ENABLED"): _meta(BOOL),
    ("REGION", "CONDITION_OF_REACTION_COMPLETION"):
        _meta(ENUM, family="COMPLETION"),
    ("REGION", "REACTION_DURATION"): _meta(INT, expr=True),
    ("REGION", "HOLD_SCENE_TRANSITION"): _meta(BOOL),
    ("REGION", "AUTOMATIC_REACTION_AFTER_TIME"): _meta(INT, expr=True),
    ("REGION", "ABLE_TO_ACTIVATE_BLACKOUT"): _meta(BOOL),
    ("REGION", "RESET_AFTER_ENABLED"): _meta(BOOL),
    ("REGION", "IGNORE_GAZE"): _meta(BOOL),
    ("REGION", "ENABLING_DELAY"): _meta(INT, expr=True),
    ("REGION", "DISABLING_DELAY"): _meta(INT, expr=True),
    ("REGION", "REACTION_KEY"): _meta(KEY),
    ("REGION", "ON_ACTIVATION_COMPLETED"): _meta(CALLBACK),
    ("REGION", "ON_REACTION_STARTED"): _meta(CALLBACK),
    ("REGION", "ON_REACTION_FINISHED"): _meta(CALLBACK),
    ("REGION", "ON_NORMAL_STATE_RETURN"): _meta(CALLBACK),
    ("REGION", "ON_STATE_CHANGED"): _meta(CALLBACK),
    ("REGION", "DWELL_TIME"): _meta(INT, expr=True),

    ("REGION_STATE", "ACTION_TYPE"): _meta(ENUM, family="ACTION_TYPE"),
    ("REGION_STATE", "BORDER_WIDTH"): _meta(INT, expr=True),
    ("REGION_STATE", "BORDER_COLOR"): _meta(COLOR, expr=True),
    ("REGION_STATE", "NAME_OF_TARGET_SCENE"): _meta(NAME, family="scene"),
    ("REGION_STATE", "NAME_OF_IMAGE"): _meta(NAME, family="image", expr=True),
    ("REGION_STATE", "NAME_OF_SOUND"): _meta(NAME, family="sound", expr=True),
    ("REGION_STATE", "MOVE_PATH"): _meta(PAIRS),
    ("REGION_STATE", "SPEED"): _meta(REAL, expr=True),
    ("REGION_STATE", "ANIMATION_TYPE"): _meta(ENUM, family="ANIMATION_TYPE"),
    ("REGION_STATE", "ANIMATION_AMPLITUDE"): _meta(REAL, expr=True),
    ("REGION_STATE", "ANIMATION_PERIOD"): _meta(INT, expr=True),
    ("REGION_STATE", "TAG"): _meta(TEXT),
    ("REGION_STATE", "DELAYED_TAG"): _meta(TEXT),
    ("REGION_STATE", "DELAY_OF_DELAYED_TAG"): _meta(INT, expr=True),
    ("REGION_STATE", "TEXT"): _meta(TEXT, expr=True),
    ("REGION_STATE", "FONT"): _meta(FONT, expr=True),
    ("REGION_STATE", "FONT_SIZE"): _meta(INT, expr=True),
    ("REGION_STATE", "FONT_STYLE"): _meta(STYLE),
    ("REGION_STATE", "FONT_COLOR"): _meta(COLOR, expr=True),
    ("REGION_STATE", "TURN_OFF_WHEN_FINISHED"): _meta(BOOL),
    ("REGION_STATE", "NAME_OF_REGION_ENABLED_WHEN_STARTED"): _meta(NAME),
    ("REGION_STATE", "NAME_OF_REGION_DISABLED_WHEN_STARTED"): _meta(NAME),
    ("REGION_STATE", "NAME_OF_REGION_ENABLED_WHEN_FINISHED"): _meta(NAME),
    ("REGION_STATE", "NAME_OF_REGION_DISABLED_WHEN_FINISHED"): _meta(NAME),
}

# registry enum value id -> canonical model value
ENUM_CANONICAL: dict[str, dict[str, str]] = {
    "ACTION_TYPE": {
        "ACTION_NONE": "none",
        "ACTION_BORDER": "border",
        "ACTION_TRANSITION_TO_SCENE": "transition_to_scene",
        "ACTION_MOVE": "move",
        "ACTION_RESET_REGION": "reset_region",
        "ACTION_RESET_SCENE": "reset_scene",
    },
    "ANIMATION_TYPE": {
        "ANIM_NONE": "none",
        "ANIM_SIZE_CHANGING": "size_changing",
        "ANIM_ROTATION_CCW": "rotation_ccw",
        "ANIM_ROTATION_CW": "rotation_cw",
        "ANIM_SWINGING_HORIZONTAL": "swinging_horizontal",
        "ANIM_SWINGING_VERTICAL": "swinging_vertical",
    },
    "COMPLETION": {
        "COMPLETION_REGION_LEAVE": "region_leave",
        "COMPLETION_SOUND_ENDING": "sound_ending",
        "COMPLETION_TIME_ELAPSED": "time_elapsed",
    },
    "SHAPE": {
        "SHAPE_RECTANGLE": "rectangle",
        "SHAPE_CIRCLE": "circle",
        "SHAPE_ELLIPSE": "ellipse",
    },
    "DRAWING": {
        "DRAW_NO_RETURNS": "draw_no_returns",
        "DRAW_WITH_RETURNS": "draw_with_returns",
        "DRAW_SEQUENTIALLY": "sequentially",
    },
    "ELEMENT_TYPE": {
        "TYPE_STRINGS": "strings",
        "TYPE_COLORS": "colors",
    },
}

# canonical model value -> registry enum value id, per family
ENUM_IDS: dict[str, dict[str, str]] = {
    family: {v: k for k, v in table.items()}
    for family, table in ENUM_CANONICAL.items()
}

LANGUAGE_CODES = ("en", "fr", "de", "pl")

# children allowed inside each container element
CHILDREN: dict[str, tuple[str, ...]] = {
    "ROOT": ("SETTINGS",),
    "SETTINGS": ("IMAGES", "SOUNDS", "MOVIES", "LISTS", "SCENES"),
    "IMAGES": ("IMAGE",),
    "SOUNDS": ("SOUND",),
    "MOVIES": ("MOVIE",),
    "LISTS": ("LIST",),
    "SCENES": ("SCENE",),
    "SCENE": ("REGION",),
    "REGION": ("ACTIVATION", "REACTION"),
}


def attr_meta(owner: str, canonical_id: str) -> AttrMeta:
    return ATTRS[(owner, canonical_id)]
