"""Turn motion-graphics videos into editable motion programs.

motionvec segments a clip into foreground regions, tracks them as objects
with a mapping graph and differentiable compositing, refactors each
object's motion into one canonical image plus per-frame affine parameters,
and writes the result as an SVG animation with a JSON sidecar. Programs can
then be queried and edited like a scene graph and rendered back to frames.

Public API:
- PipelineConfig: All tunables, one section per pipeline stage.
- load_config: Read a JSON config file into a PipelineConfig.
- apply_overrides: Apply ``section.key=value`` overrides to a config.
- AffineParams: Translation, rotation, scale and shear of an object placement.
- read_frames: Read a ``frame_%05d.png`` directory as float RGB frames.
- write_frames: Write frames back as numbered PNGs.
- track_video: Segment, compute flow and track objects through a clip.
- TrackingResult: Tracked objects, per-frame labels and the decision log.
- build_program: Refactor, refine and layer tracked objects into a program.
- MotionProgram: The vectorized video, a background plus layered objects.
- ProgramObject: One object: canonical RGBA image and per-frame keyframes.
- Keyframe: Affine parameters, depth rank and visibility of an object at a frame.
- write_program: Write a program as SVG plus JSON sidecar.
- parse_program: Read a program back from its sidecar.
- render_frame: Rasterize one frame of a program.
- render_video: Rasterize every frame of a program.
- reconstruction_error: Per-frame and mean RMS RGB error against the original frames.
- prop_query: Per-frame motion or appearance properties of objects.
- event_query: Frame ranges where an object is held, collides or changes speed.
- retime: Remap an object's motion from one frame range onto another.
- apply_ops: Run a declarative ops file against a program.
- SceneScript: Declarative synthetic clip with known motion.
- generate_scene: Render a scene script with its ground truth.
- compare_tracking: Count tracking decisions that disagree with ground truth.
- MotionVecError: Base class of every error the package raises.
"""

from ._version_info import __version__
from .configuration import PipelineConfig, apply_overrides, load_config
from .diffcomp import AffineParams
from .exceptions import MotionVecError
from .imaging import read_frames, write_frames
from .program import (
    Keyframe,
    MotionProgram,
    ProgramObject,
    build_program,
    parse_program,
    reconstruction_error,
    render_frame,
    render_video,
    write_program,
)
from .synth import SceneScript, compare_tracking, generate_scene
from .tracking import TrackingResult, track_video
from .xform import apply_ops, event_query, prop_query, retime

__all__ = [
    '__version__',
    'PipelineConfig',
    'load_config',
    'apply_overrides',
    'AffineParams',
    'read_frames',
    'write_frames',
    'track_video',
    'TrackingResult',
    'build_program',
    'MotionProgram',
    'ProgramObject',
    'Keyframe',
    'write_program',
    'parse_program',
    'render_frame',
    'render_video',
    'reconstruction_error',
    'prop_query',
    'event_query',
    'retime',
    'apply_ops',
    'SceneScript',
    'generate_scene',
    'compare_tracking',
    'MotionVecError',
]
