"""Rendering scene scripts into frames with exact ground truth."""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Final

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage
from skimage.draw import ellipse, polygon
from skimage.transform import downscale_local_mean

from ..diffcomp.affine import AffineParams
from ..diffcomp.render import VISIBILITY_THRESHOLD, render_placements
from ..imaging.raster import (FRAME_PATTERN, BinaryMask, RasterImage, write_frames,
                              write_label_png)
from ..program.io import write_program
from ..program.model import Keyframe, MotionProgram, ProgramObject
from ..program.render import placements_at, render_video
from ..segmentation.background import BackgroundModel
from ..tracking.mapping import MAPPING_TYPES, MappingType
from ..tracking.propagation import MappingRecord, write_decision_log
from .script import SceneScript, SpriteSpec, evaluate_track, save_script

__all__ = ["SyntheticScene", "sprite_image", "truth_program", "visible_masks",
           "truth_records", "generate_scene", "write_scene"]

logger = logging.getLogger(__name__)

_SUPERSAMPLE: Final[int] = 4
_PAD: Final[int] = 2


@dataclass(eq=False)
class SyntheticScene:
    """A rendered scene and everything known about it.

    Attributes:
        script: The script it came from.
        program: Ground-truth motion program (object id = sprite id).
        frames: Rendered RGB frames.
        labels: Per frame, sprite id -> visible pixels (disjoint).
        truth: Ground-truth mapping decisions for frames 1..n-1.
    """
    script: SceneScript
    program: MotionProgram
    frames: list[RasterImage]
    labels: list[dict[int, BinaryMask]] = field(default_factory=list)
    truth: list[MappingRecord] = field(default_factory=list)

    def label_image(self, t: int) -> NDArray[np.int64]:
        """Integer label image of frame t, 0 = background."""
        out = np.zeros(self.frames[t].shape[:2], dtype=np.int64)
        for sprite_id, mask in self.labels[t].items():
            out[mask] = sprite_id
        return out


def _shape_coverage(sprite: SpriteSpec, shape: tuple[int, int], seed: int) -> BinaryMask:
    """Supersampled coverage of the sprite centered in a padded canvas."""
    s = _SUPERSAMPLE
    rows, cols = shape[0] * s, shape[1] * s
    w, h = sprite.size
    cx, cy = shape[1] / 2.0, shape[0] / 2.0
    cover = np.zeros((rows, cols), dtype=bool)

    def fill(xs: np.ndarray, ys: np.ndarray) -> None:
        rr, cc = polygon(np.asarray(ys) * s - 0.5, np.asarray(xs) * s - 0.5, (rows, cols))
        cover[rr, cc] = True

    if sprite.shape == "rect":
        fill(np.array([cx - w / 2, cx + w / 2, cx + w / 2, cx - w / 2]),
             np.array([cy - h / 2, cy - h / 2, cy + h / 2, cy + h / 2]))
    elif sprite.shape == "disc":
        rr, cc = ellipse(cy * s - 0.5, cx * s - 0.5, h / 2 * s, w / 2 * s, (rows, cols))
        cover[rr, cc] = True
    elif sprite.shape == "polygon":
        rng = np.random.default_rng([seed, sprite.sprite_id])
        angles = 2.0 * np.pi * np.arange(sprite.sides) / sprite.sides - np.pi / 2.0
        radii = 1.0 + sprite.jitter * rng.uniform(-1.0, 1.0, sprite.sides)
        fill(cx + w / 2 * radii * np.cos(angles), cy + h / 2 * radii * np.sin(angles))
    else:
        stroke = max(1.0, min(w, h) / 3.0)
        x0, y0 = cx - w / 2, cy - h / 2
        fill(np.array([x0, x0 + stroke, x0 + stroke, x0]),
             np.array([y0, y0, y0 + h, y0 + h]))
        fill(np.array([x0, x0 + w, x0 + w, x0]),
             np.array([y0 + h - stroke, y0 + h - stroke, y0 + h, y0 + h]))
    return cover


def sprite_image(sprite: SpriteSpec, seed: int = 0) -> NDArray[np.float64]:
    """Anti-aliased RGBA canonical image of a sprite.

    Alpha is the fraction of each pixel the shape covers, estimated on a
    supersampled grid; color is the sprite color everywhere.
    """
    w, h = sprite.size
    shape = (math.ceil(h) + 2 * _PAD, math.ceil(w) + 2 * _PAD)
    cover = _shape_coverage(sprite, shape, seed)
    alpha = downscale_local_mean(cover.astype(np.float64), (_SUPERSAMPLE, _SUPERSAMPLE))
    image = np.empty(shape + (4,))
    image[..., :3] = sprite.color
    image[..., 3] = alpha
    return image


def _params_at(script: SceneScript, sprite: SpriteSpec, t: int) -> AffineParams:
    start, end = script.lifetime(sprite.sprite_id)
    values = {"x": (script.width - 1) / 2.0, "y": (script.height - 1) / 2.0,
              "theta": 0.0, "sx": 1.0, "sy": 1.0, "kx": 0.0}
    for name, track in sprite.track.items():
        values[name] = evaluate_track(track, t, start, end)
    return AffineParams(tx=values["x"] - (script.width - 1) / 2.0,
                        ty=values["y"] - (script.height - 1) / 2.0,
                        theta=math.radians(values["theta"]),
                        sx=values["sx"], sy=values["sy"], kx=values["kx"])


def truth_program(script: SceneScript) -> MotionProgram:
    """The script as a motion program; depth ranks follow (z, sprite id)."""
    background = BackgroundModel.solid_rgb(script.background)
    objects = []
    for sprite in script.sprites:
        start, end = script.lifetime(sprite.sprite_id)
        keyframes = [Keyframe(t, _params_at(script, sprite, t), sprite.z)
                     for t in range(start, end + 1)]
        objects.append(ProgramObject(sprite.sprite_id, sprite_image(sprite, script.seed),
                                     keyframes))
    program = MotionProgram(width=script.width, height=script.height,
                            num_frames=script.num_frames, fps=script.fps,
                            background=background, objects=objects)
    program.rerank_z()
    return program


def visible_masks(program: MotionProgram, t: int) -> dict[int, BinaryMask]:
    """Per object, the pixels it shows at frame t once objects above it are drawn."""
    ps = placements_at(program, t)
    if not ps.elements:
        return {}
    solid = render_placements(ps)[..., 3] > VISIBILITY_THRESHOLD
    out = {}
    above = np.zeros(solid.shape[1:], dtype=bool)
    for i in range(len(ps.elements) - 1, -1, -1):
        mask = solid[i] & ~above
        above |= solid[i]
        if np.any(mask):
            out[ps.elements[i].element_id] = mask
    return dict(sorted(out.items()))


def _event_records(script: SceneScript, t: int) -> tuple[list[MappingRecord], set[int]]:
    records, consumed = [], set()
    for event in script.events:
        if int(event["frame"]) != t:
            continue
        if event["kind"] == "merge":
            sources = tuple(sorted(int(s) for s in event["sprites"]))
            results = (int(event["into"]),)
            mtype = MappingType.MANY_TO_ONE_MERGE
        else:
            sources = (int(event["sprite"]),)
            results = tuple(sorted(int(s) for s in event["into"]))
            mtype = MappingType.ONE_TO_MANY_SPLIT
        records.append(MappingRecord(t=t, mtype=mtype, objects=sources, results=results))
        consumed |= set(sources) | set(results)
    return records, consumed


def truth_records(script: SceneScript, labels: list[dict[int, BinaryMask]]
                  ) -> list[MappingRecord]:
    """Ground-truth mapping decisions from visibility and the script's events.

    Objects visible in both frames map one-to-one, one-to-many (no split)
    when their visible pixels fall apart into several regions, and
    many-to-one (no merge) when they share a region of frame t. Scripted
    merges and splits are taken from the events; everything else that
    starts or stops being visible appears or disappears.
    """
    records = []
    for t in range(1, len(labels)):
        before, now = labels[t - 1], labels[t]
        found, consumed = _event_records(script, t)
        union = np.zeros((script.height, script.width), dtype=bool)
        for mask in now.values():
            union |= mask
        regions = ndimage.label(union)[0]

        by_region: dict[int, list[int]] = {}
        for o in sorted(set(before) & set(now) - consumed):
            touched = sorted(set(np.unique(regions[now[o]])) - {0})
            if len(touched) > 1:
                found.append(MappingRecord(t=t, mtype=MappingType.ONE_TO_MANY_NO_SPLIT,
                                           objects=(o,), results=(o,)))
            else:
                by_region.setdefault(int(touched[0]), []).append(o)
        for members in by_region.values():
            mtype = (MappingType.ONE_TO_ONE if len(members) == 1
                     else MappingType.MANY_TO_ONE_NO_MERGE)
            found.append(MappingRecord(t=t, mtype=mtype, objects=tuple(members),
                                       results=tuple(members)))
        for o in sorted(set(now) - set(before) - consumed):
            found.append(MappingRecord(t=t, mtype=MappingType.APPEAR, results=(o,)))
        for o in sorted(set(before) - set(now) - consumed):
            found.append(MappingRecord(t=t, mtype=MappingType.DISAPPEAR, objects=(o,)))
        records.extend(sorted(found, key=lambda r: (MAPPING_TYPES.index(r.mtype),
                                                    r.objects, r.results)))
    return records


def generate_scene(script: SceneScript) -> SyntheticScene:
    """Render a script and derive its ground truth.

    Raises:
        ScriptError: If the script is invalid.
    """
    program = truth_program(script)
    frames = render_video(program)
    labels = [visible_masks(program, t) for t in range(script.num_frames)]
    truth = truth_records(script, labels)
    logger.info("Generated scene: %d sprites, %d frames, %d truth decisions",
                len(script.sprites), script.num_frames, len(truth))
    return SyntheticScene(script, program, frames, labels, truth)


def write_scene(scene: SyntheticScene, directory: str | Path) -> dict[str, Path]:
    """Write frames, truth program, truth log, labels and the script.

    Layout: ``frames/frame_%05d.png``, ``labels/frame_%05d.png``,
    ``truth.svg`` with its ``truth.json`` sidecar, ``truth_log.tsv`` and
    ``script.json``.

    Raises:
        FrameIOError: If a file cannot be written.
    """
    directory = Path(directory)
    write_frames(directory / "frames", scene.frames)
    for t in range(len(scene.frames)):
        write_label_png(directory / "labels" / FRAME_PATTERN.format(t), scene.label_image(t))
    svg, sidecar = write_program(scene.program, directory / "truth.svg")
    log = directory / "truth_log.tsv"
    write_decision_log(log, scene.truth)
    script = save_script(scene.script, directory / "script.json")
    return {"frames": directory / "frames", "labels": directory / "labels", "svg": svg,
            "sidecar": sidecar, "truth_log": log, "script": script}
