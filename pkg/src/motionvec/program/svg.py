"""SVG + SMIL rendering of motion programs for display.

Each object is a group holding an embedded PNG of its canonical image and
five additive, discrete ``animateTransform`` channels (translate, rotate,
skewX, skewY, scale) sampled on the frame grid. SVG has no animatable
z-index, so the timeline is split into segments with a constant stacking
order; each segment is a group shown only during its frames.
"""
import base64
import io
import math
import xml.etree.ElementTree as ET
from collections.abc import Sequence
from pathlib import Path
from typing import Final

import networkx as nx
import numpy as np
from PIL import Image

from ..diffcomp.affine import AffineParams, image_center
from ..exceptions import FrameIOError
from .model import MotionProgram, ProgramObject

__all__ = ["SVG_CHANNELS", "program_to_svg", "write_svg", "z_segments",
           "png_data_uri"]

SVG_CHANNELS: Final[tuple[str, ...]] = ("translate", "rotate", "skewX", "skewY", "scale")

# Raster pixel centers sit on integer coordinates; SVG pixel i spans [i, i+1].
_PIXEL_OFFSET: Final[float] = 0.5


def _num(v: float) -> str:
    text = format(float(v), ".10g")
    return "0" if text == "-0" else text


def png_data_uri(image: np.ndarray) -> str:
    """Base64 PNG data URI of a [0, 1] RGB or RGBA image."""
    data = np.round(np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0) * 255.0)
    mode = "RGBA" if data.shape[2] == 4 else "RGB"
    buffer = io.BytesIO()
    Image.fromarray(data.astype(np.uint8), mode=mode).save(buffer, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buffer.getvalue()).decode("ascii")


def _hex(rgb: Sequence[float]) -> str:
    r, g, b = (int(round(float(np.clip(c, 0.0, 1.0)) * 255)) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


def _channel_values(params: AffineParams, canvas_anchor: np.ndarray) -> dict[str, str]:
    return {
        "translate": (f"{_num(canvas_anchor[0] + params.tx + _PIXEL_OFFSET)} "
                      f"{_num(canvas_anchor[1] + params.ty + _PIXEL_OFFSET)}"),
        "rotate": _num(math.degrees(params.theta)),
        "skewX": _num(math.degrees(math.atan(params.kx))),
        "skewY": _num(math.degrees(math.atan(params.ky))),
        "scale": f"{_num(params.sx)} {_num(params.sy)}",
    }


def _params_per_frame(obj: ProgramObject, num_frames: int) -> list[AffineParams]:
    """Keyframe params on every frame; gaps hold the nearest keyframe."""
    frames = obj.frames
    out = []
    for f in range(num_frames):
        nearest = min(frames, key=lambda k: (abs(k - f), k))
        out.append(obj.keyframes[nearest].params)
    return out


def _runs(frames: Sequence[int]) -> list[tuple[int, int]]:
    runs: list[tuple[int, int]] = []
    for f in frames:
        if runs and f == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], f)
        else:
            runs.append((f, f))
    return runs


def z_segments(program: MotionProgram) -> list[tuple[int, int, tuple[int, ...]]]:
    """Maximal frame runs whose stacking relations fit one order.

    Returns:
        (first, last, object ids back to front) per segment; the order
        lists every object visible somewhere in the segment.
    """
    segments: list[tuple[int, int, tuple[int, ...]]] = []
    graph = nx.DiGraph()
    first = 0
    for f in range(program.num_frames):
        present = sorted(program.visible_at(f), key=lambda o: (o.keyframes[f].z, o.object_id))
        ids = [o.object_id for o in present]
        candidate = graph.copy()
        candidate.add_nodes_from(ids)
        candidate.add_edges_from(zip(ids, ids[1:]))
        if f > 0 and not nx.is_directed_acyclic_graph(candidate):
            segments.append((first, f - 1, _stacking(graph)))
            first = f
            candidate = nx.DiGraph()
            candidate.add_nodes_from(ids)
            candidate.add_edges_from(zip(ids, ids[1:]))
        graph = candidate
    segments.append((first, program.num_frames - 1, _stacking(graph)))
    return segments


def _stacking(graph: nx.DiGraph) -> tuple[int, ...]:
    return tuple(nx.lexicographical_topological_sort(graph))


def _show_during(parent: ET.Element, runs: list[tuple[int, int]], fps: float,
                 attribute: str = "visibility", value: str = "visible") -> None:
    for first, last in runs:
        ET.SubElement(parent, "set", {
            "attributeName": attribute, "to": value,
            "begin": f"{_num(first / fps)}s",
            "dur": f"{_num((last - first + 1) / fps)}s"})


def program_to_svg(program: MotionProgram) -> ET.ElementTree:
    """Build the SVG document of a program."""
    width, height = program.canvas
    n, fps = program.num_frames, program.fps
    root = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "xmlns:xlink": "http://www.w3.org/1999/xlink",
        "version": "1.1",
        "width": str(width), "height": str(height),
        "viewBox": f"0 0 {width} {height}"})
    ET.SubElement(root, "desc").text = (f"motionvec-program/1 frames={n} fps={_num(fps)} "
                                        f"objects={len(program.objects)}")

    defs = ET.SubElement(root, "defs")
    for obj in program.objects:
        h, w = obj.canonical.shape[:2]
        ax, ay = image_center(obj.canonical.shape)
        ET.SubElement(defs, "image", {
            "id": f"canonical-{obj.object_id}", "width": str(w), "height": str(h),
            "transform": f"translate({_num(-ax - _PIXEL_OFFSET)} {_num(-ay - _PIXEL_OFFSET)})",
            "xlink:href": png_data_uri(obj.canonical)})

    bg = program.background
    if bg.kind == "solid-color":
        ET.SubElement(root, "rect", {"width": str(width), "height": str(height),
                                     "fill": _hex(bg.rgb)})
    else:
        ET.SubElement(root, "image", {"width": str(width), "height": str(height),
                                      "xlink:href": png_data_uri(bg.image)})

    key_times = ";".join(_num(f / n) for f in range(n))
    duration = f"{_num(n / fps)}s"
    anchor = np.array([(width - 1) / 2.0, (height - 1) / 2.0])
    by_id = {o.object_id: o for o in program.objects}
    segments = z_segments(program)
    for index, (first, last, order) in enumerate(segments):
        segment = ET.SubElement(root, "g", {"id": f"segment-{index}",
                                            "data-frames": f"{first}-{last}",
                                            "data-z-order": " ".join(map(str, order))})
        if len(segments) > 1:
            # display, unlike visibility, cannot be overridden by children
            segment.set("display", "none")
            _show_during(segment, [(first, last)], fps, "display", "inline")
        for object_id in order:
            obj = by_id[object_id]
            visible = [f for f in obj.visible_frames() if first <= f <= last]
            group = ET.SubElement(segment, "g", {
                "id": f"object-{object_id}-segment-{index}", "visibility": "hidden"})
            _show_during(group, _runs(visible), fps)
            per_frame = [_channel_values(p, anchor) for p in _params_per_frame(obj, n)]
            for channel in SVG_CHANNELS:
                ET.SubElement(group, "animateTransform", {
                    "attributeName": "transform", "attributeType": "XML",
                    "type": channel, "additive": "sum", "calcMode": "discrete",
                    "dur": duration, "fill": "freeze", "keyTimes": key_times,
                    "values": ";".join(v[channel] for v in per_frame)})
            ET.SubElement(group, "use", {"xlink:href": f"#canonical-{object_id}"})
    tree = ET.ElementTree(root)
    ET.indent(tree)
    return tree


def write_svg(program: MotionProgram, path: str | Path) -> Path:
    """Write the SVG document.

    Raises:
        FrameIOError: If the file cannot be written.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        program_to_svg(program).write(path, encoding="utf-8", xml_declaration=True)
    except OSError as e:
        raise FrameIOError(f"Cannot write SVG {path}: {e}") from e
    return path
