import base64
import io
import xml.etree.ElementTree as ET

import numpy as np
from PIL import Image

from motionvec.program.model import Keyframe
from motionvec.program.svg import SVG_CHANNELS, png_data_uri, program_to_svg, write_svg, z_segments

NS = {"svg": "http://www.w3.org/2000/svg"}
XLINK = "{http://www.w3.org/1999/xlink}href"


def _parse(tmp_path, program):
    return ET.parse(write_svg(program, tmp_path / "clip.svg")).getroot()


def test_document_header(tmp_path, program):
    """Canvas size and one embedded image per object."""
    root = _parse(tmp_path, program)
    assert root.tag == "{http://www.w3.org/2000/svg}svg"
    assert (root.get("width"), root.get("height")) == ("16", "12")
    assert root.get("viewBox") == "0 0 16 12"
    images = root.findall("svg:defs/svg:image", NS)
    assert [i.get("id") for i in images] == ["canonical-1", "canonical-2"]
    assert images[0].get(XLINK).startswith("data:image/png;base64,")
    assert "frames=4" in root.find("svg:desc", NS).text


def test_solid_background_rect(tmp_path, program):
    """A white background is a full-canvas rect."""
    rect = _parse(tmp_path, program).find("svg:rect", NS)
    assert rect.get("fill") == "#ffffff"


def test_channels_and_translate_values(tmp_path, program):
    """Five discrete additive channels; translate holds canvas positions."""
    root = _parse(tmp_path, program)
    group = root.find(".//svg:g[@id='object-1-segment-0']", NS)
    animations = group.findall("svg:animateTransform", NS)
    assert [a.get("type") for a in animations] == list(SVG_CHANNELS)
    assert all(a.get("calcMode") == "discrete" for a in animations)
    assert all(a.get("additive") == "sum" for a in animations)
    translate = animations[0]
    assert translate.get("values").split(";") == ["8 6", "9 6", "10 6", "11 6"]
    assert translate.get("keyTimes") == "0;0.25;0.5;0.75"
    assert translate.get("dur") == "0.5s"


def test_visibility_windows(tmp_path, program):
    """Objects are shown only during their visible frames."""
    root = _parse(tmp_path, program)
    group = root.find(".//svg:g[@id='object-2-segment-0']", NS)
    assert group.get("visibility") == "hidden"
    [show] = group.findall("svg:set", NS)
    assert (show.get("begin"), show.get("dur")) == ("0s", "0.25s")


def test_single_segment_when_order_is_stable(program):
    """A consistent stacking needs one segment."""
    assert z_segments(program) == [(0, 3, (1, 2))]


def test_segments_split_on_order_swap(tmp_path, program):
    """Swapping depth starts a new segment with its own display window."""
    program.set_keyframe(1, Keyframe(1, program.get(1).params_at(1), 1))
    program.set_keyframe(2, Keyframe(1, program.get(2).params_at(1), 0))
    assert z_segments(program) == [(0, 0, (1, 2)), (1, 3, (2, 1))]
    segments = _parse(tmp_path, program).findall("svg:g", NS)
    assert len(segments) == 2
    assert all(s.get("display") == "none" for s in segments)


def test_in_memory_tree(program):
    """The tree can be built without writing a file."""
    root = program_to_svg(program).getroot()
    assert root.get("xmlns") == "http://www.w3.org/2000/svg"
    assert len(root.findall("g")) == 1


def test_png_data_uri_decodes():
    """The data URI holds a PNG of the same size and mode."""
    img = np.zeros((3, 5, 4))
    img[..., 0] = 1.0
    img[..., 3] = 1.0
    uri = png_data_uri(img)
    decoded = Image.open(io.BytesIO(base64.b64decode(uri.split(",", 1)[1])))
    assert decoded.size == (5, 3)
    assert decoded.mode == "RGBA"
    assert decoded.getpixel((0, 0)) == (255, 0, 0, 255)
