"""Parser tests: fixtures, language handling, diagnostics, templates."""

from __future__ import annotations

import pathlib

import pytest

from giml.model import resolve_resource_path
from giml.parser import parse
from giml.values import ListRef, Literal, Percent, RandomChoice, RandomRange

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

ALL_FIXTURES = sorted(p.name for p in FIXTURES.glob("*.xml"))


def load(name):
    return (FIXTURES / name).read_bytes()


def parse_fixture(name):
    return parse(load(name), source_path=str(FIXTURES / name))


def errors(doc):
    return [d for d in doc.diagnostics if d.severity == "error"]


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_fixture_parses_without_findings(name):
    doc = parse_fixture(name)
    assert doc.diagnostics == [], [d.format() for d in doc.diagnostics]


@pytest.mark.parametrize("name", ["two_scenes.fr.xml", "two_scenes.de.xml",
                                  "two_scenes.pl.xml"])
def test_translated_documents_share_canonical_form(name):
    """The same document written in another language parses identically."""
    reference = parse_fixture("two_scenes.xml").fingerprint()
    assert parse_fixture(name).fingerprint() == reference


def test_language_from_root_attribute():
    doc = parse_fixture("two_scenes.de.xml")
    assert doc.source_language == "de"
    assert doc.settings.language == "de"


def test_language_from_root_element_name():
    source = ("<einstellungen><szenen nameDerStandardszene='a' "
              "originaleBildschirmgrößeX='800' originaleBildschirmgrößeY='600'>"
              "<szene name='a'/></szenen></einstellungen>")
    doc = parse(source)
    assert doc.source_language == "de"
    assert errors(doc) == []


def test_language_hint_used_when_root_is_ambiguous():
    # "region" spells the same in English and German; the root decides,
    # and a hint only matters when the root name is not recognized.
    doc = parse("<unknown/>", language_hint="fr")
    assert doc.source_language == "fr"
    assert any(d.code == "BAD_ROOT" for d in errors(doc))


def test_explicit_language_beats_root_spelling():
    doc = parse('<settings language="pl"><sceny nazwaDomyślnejSceny="a" '
                'oryginalnyRozmiarEkranuX="1" oryginalnyRozmiarEkranuY="1">'
                "<scena nazwa='a'/></sceny></settings>")
    # the root element itself no longer matches, which is an error
    assert doc.source_language == "pl"
    assert any(d.code == "BAD_ROOT" for d in errors(doc))


def test_unknown_language_code_reported():
    doc = parse('<settings language="xx"/>')
    assert any(d.code == "UNKNOWN_LANGUAGE" for d in errors(doc))


def test_syntax_error_becomes_diagnostic():
    doc = parse("<settings><images></settings>")
    assert any(d.code == "XML_SYNTAX" for d in errors(doc))


def test_region_geometry_and_image():
    doc = parse_fixture("region_image.xml")
    region = doc.scenes[0].regions[0]
    assert region.name == "region1"
    assert region.shape == "rectangle"
    assert region.location_x == Literal("300")
    assert region.size_y == Literal("200")
    assert region.base.name_of_image == Literal("img1")


def test_percent_values_keep_their_axis():
    region = parse_fixture("region_percent.xml").scenes[0].regions[0]
    assert region.location_x == Percent(30.0, "x")
    assert region.location_y == Percent(20.0, "y")
    assert region.size_x == Percent(20.0, "x")
    assert region.size_y == Percent(20.0, "y")


def test_random_expressions():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s"><region name="r" shape="rectangle" '
                'locationOfCenterX="rand:200:400" locationOfCenterY="100" '
                'sizeX="200" sizeY="200" '
                'fontColor="rand:Red:Orange:Yellow"/></scene>'
                "</scenes></settings>")
    region = doc.scenes[0].regions[0]
    assert region.location_x == RandomRange(200, 400, integer=True)
    assert region.base.font_color == RandomChoice(("Red", "Orange", "Yellow"))
    assert errors(doc) == []


def test_list_references():
    doc = parse_fixture("lists_no_returns.xml")
    scene1 = doc.scenes[0]
    assert scene1.regions[0].base.name_of_image == ListRef("imgs")
    scene2 = doc.scenes[1]
    assert scene2.regions[0].base.font_color == ListRef("colors")
    assert scene1.lists_switched_over_after_enter == ("imgs", "colors")
    assert scene1.region_enabled_after_list_finished == "region2"


def test_list_values_stay_verbatim():
    doc = parse_fixture("lists_no_returns.xml")
    imgs = doc.list_decl("imgs")
    colors = doc.list_decl("colors")
    assert imgs.values == ("img1", "img2", "img3")
    assert imgs.draw_mode == "draw_no_returns"
    assert colors.values == ("Red", "Orange", "Yellow")
    assert colors.draw_mode == "sequentially"
    assert colors.element_type == "colors"


def test_group_labels():
    doc = parse_fixture("list_groups.xml")
    assert doc.list_decl("imgs").group == "1"
    assert doc.list_decl("captions").group == "1"
    assert doc.list_decl("colors").group is None


def test_text_values_stay_verbatim():
    region = parse_fixture("state_text.xml").scenes[0].regions[0]
    assert region.base.text == Literal("normal state")
    assert region.activation.text == Literal("activation state")
    assert region.reaction.text == Literal("reaction state")
    assert region.reaction.font_color == Literal("SandyBrown")


def test_state_overlays_populated():
    region = parse_fixture("state_images.xml").scenes[0].regions[0]
    assert region.base.name_of_image == Literal("img1")
    assert region.activation.name_of_image == Literal("img2")
    assert region.reaction.name_of_image == Literal("img3")
    assert region.activation.action_type is None


def test_action_attribute_alias():
    doc = parse_fixture("two_scenes.xml")
    first = doc.scenes[0].regions[0]
    second = doc.scenes[1].regions[0]
    assert first.reaction.action_type == "transition_to_scene"
    assert first.reaction.name_of_target_scene == "scene2"
    # scene2 spells the attribute "action" instead of "actionType"
    assert second.reaction.action_type == "transition_to_scene"


def test_completion_condition_enum():
    region = parse_fixture("timed_completion.xml").scenes[0].regions[0]
    assert region.condition_of_reaction_completion == "time_elapsed"
    assert region.reaction_duration == Literal("5000")


def test_resource_path_resolution_windows_style():
    doc = parse_fixture("resources.xml")
    decl = doc.image("img1")
    assert resolve_resource_path(doc, decl) == \
        "C:\\Users\\Jacek\\GIML\\Assets\\img\\img1.png"


def test_resource_path_resolution_without_container_folder():
    doc = parse_fixture("image_navigation.xml")
    decl = doc.image("green_disk")
    assert resolve_resource_path(doc, decl) == \
        "C:\\GIML\\UX_Study\\Assets\\imgs\\green.png"


def test_missing_obligatory_attribute():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s"><region name="r" shape="rectangle" '
                'locationOfCenterX="1" locationOfCenterY="2" sizeY="3"/>'
                "</scene></scenes></settings>")
    codes = [d.code for d in errors(doc)]
    assert codes == ["MISSING_ATTRIBUTE"]
    assert "sizeX" in errors(doc)[0].message


def test_invalid_value_is_not_reported_as_missing():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s"><region name="r" shape="blob" '
                'locationOfCenterX="1" locationOfCenterY="2" '
                'sizeX="3" sizeY="4"/></scene></scenes></settings>')
    codes = [d.code for d in errors(doc)]
    assert codes == ["UNKNOWN_ENUM_VALUE"]


def test_unknown_attribute_suggestion():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s"><region name="r" shape="rectangle" '
                'locationOfCenterX="1" locationOfCenterY="2" '
                'sizeX="3" sizeY="4" sizZ="5"/></scene></scenes></settings>')
    warnings = [d for d in doc.diagnostics if d.code == "UNKNOWN_ATTRIBUTE"]
    assert len(warnings) == 1
    assert "sizeZ" not in warnings[0].message  # no such attribute to suggest


def test_unknown_attribute_with_typo_suggestion():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s"><region name="r" shape="rectangle" '
                'locationOfCenterX="1" locationOfCenterY="2" '
                'sizeX="3" sizeY="4" nameOfImge="i"/></scene>'
                "</scenes></settings>")
    warnings = [d for d in doc.diagnostics if d.code == "UNKNOWN_ATTRIBUTE"]
    assert "nameOfImage" in warnings[0].message


def test_geometry_cannot_move_per_state():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s"><region name="r" shape="rectangle" '
                'locationOfCenterX="1" locationOfCenterY="2" '
                'sizeX="3" sizeY="4">'
                '<activation locationOfCenterX="500"/>'
                "</region></scene></scenes></settings>")
    assert any(d.code == "NOT_OVERRIDABLE" for d in doc.diagnostics)


def test_duplicate_region_name():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s">'
                '<region name="r" shape="rectangle" locationOfCenterX="1" '
                'locationOfCenterY="2" sizeX="3" sizeY="4"/>'
                '<region name="R" shape="rectangle" locationOfCenterX="1" '
                'locationOfCenterY="2" sizeX="3" sizeY="4"/>'
                "</scene></scenes></settings>")
    assert any(d.code == "DUPLICATE_NAME" for d in errors(doc))


def test_missing_scenes_container():
    doc = parse('<settings language="en"/>')
    assert any(d.code == "MISSING_SCENES" for d in errors(doc))


def _scene_with_template(extra=""):
    return parse(
        '<settings language="en"><scenes nameOfDefaultScene="child" '
        'originalScreenSizeX="1024" originalScreenSizeY="768">'
        '<scene name="base" backgroundColor="beige">'
        '<region name="r1" shape="rectangle" locationOfCenterX="100" '
        'locationOfCenterY="100" sizeX="50" sizeY="50"/>'
        '<region name="r2" shape="rectangle" locationOfCenterX="200" '
        'locationOfCenterY="100" sizeX="50" sizeY="50"/></scene>'
        '<scene name="child" template="base" backgroundColor="black">'
        '<region name="r2" shape="ellipse" locationOfCenterX="400" '
        'locationOfCenterY="100" sizeX="60" sizeY="60"/>'
        '<region name="r3" shape="rectangle" locationOfCenterX="300" '
        'locationOfCenterY="300" sizeX="50" sizeY="50"/></scene>'
        + extra + "</scenes></settings>")


def test_template_merge():
    doc = _scene_with_template()
    assert errors(doc) == []
    merged = doc.effective_scene("child")
    assert merged.background_color is not None
    assert merged.background_color.hex_rgb() == "#000000"
    names = [r.name for r in merged.regions]
    assert names == ["r1", "r2", "r3"]  # template order, extras appended
    assert merged.region("r2").shape == "ellipse"  # child replacement wins


def test_template_missing():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="s" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="s" template="ghost"/></scenes></settings>')
    assert any(d.code == "TEMPLATE_MISSING" for d in errors(doc))


def test_template_cycle():
    doc = parse('<settings language="en"><scenes nameOfDefaultScene="a" '
                'originalScreenSizeX="1024" originalScreenSizeY="768">'
                '<scene name="a" template="b"/>'
                '<scene name="b" template="a"/></scenes></settings>')
    assert any(d.code == "TEMPLATE_CYCLE" for d in errors(doc))


def test_keywords_are_case_insensitive():
    doc = parse('<SETTINGS LANGUAGE="en"><Scenes NAMEOFDEFAULTSCENE="s" '
                'OriginalScreenSizeX="1024" originalscreensizey="768">'
                '<SCENE NAME="s"/></Scenes></SETTINGS>')
    assert errors(doc) == []
    assert doc.scenes_info.default_scene == "s"
    assert doc.scenes_info.screen_x == 1024
