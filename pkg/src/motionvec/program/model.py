"""Motion programs: canonical images plus per-frame transforms and depths."""
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..configuration.parameterizable_mixin import ParameterizableMixin
from ..configuration.single_writer_mixin import SingleWriterMixin
from ..diffcomp.affine import MIN_DETERMINANT, AffineParams
from ..exceptions import EmptyImageError, IdCollisionError, UnknownObjectError
from ..segmentation.background import BackgroundModel

__all__ = ["Keyframe", "ProgramObject", "MotionProgram", "as_canonical"]


def as_canonical(image: Any) -> NDArray[np.float64]:
    """Validate an RGBA canonical image.

    Raises:
        EmptyImageError: If the image is not RGBA or has no opaque pixel.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 4:
        raise EmptyImageError(f"Canonical image must be (h, w, 4), got {arr.shape}")
    if not np.any(arr[..., 3] > 0):
        raise EmptyImageError("Canonical image has no opaque pixels")
    return arr


class Keyframe(ParameterizableMixin):
    """Placement of an object in one frame.

    Args:
        frame: Frame index.
        params: Canonical-to-frame transform (canonical center to canvas center).
        z: Integer depth rank; higher is in front.
        visible: Whether the object is drawn in this frame.
    """

    def __init__(self, frame: int = 0, params: AffineParams | None = None,
                 z: int = 0, visible: bool = True):
        if isinstance(params, Mapping):
            params = AffineParams(**params)
        self.frame = int(frame)
        self.params = params or AffineParams()
        self.z = int(z)
        self.visible = bool(visible)

    def get_params(self) -> dict[str, Any]:
        return {"frame": self.frame, "params": self.params, "z": self.z,
                "visible": self.visible}


class ProgramObject(ParameterizableMixin):
    """One animated element of a program.

    Args:
        object_id: Identifier unique within the program.
        canonical: (h, w, 4) RGBA appearance.
        keyframes: Keyframes (or their plain dicts), at most one per frame.

    Raises:
        EmptyImageError: If the canonical image is not usable.
        ValueError: If two keyframes share a frame.
    """

    def __init__(self, object_id: int = 0, canonical: Any = None,
                 keyframes: Iterable[Keyframe | Mapping[str, Any]] = ()):
        self.object_id = int(object_id)
        self.canonical = as_canonical(canonical)
        self.keyframes: dict[int, Keyframe] = {}
        for k in keyframes:
            if isinstance(k, Mapping):
                k = Keyframe(**k)
            if k.frame in self.keyframes:
                raise ValueError(f"Object {self.object_id} has two keyframes "
                                 f"for frame {k.frame}")
            self.keyframes[k.frame] = k

    def get_params(self) -> dict[str, Any]:
        return {"object_id": self.object_id, "canonical": self.canonical,
                "keyframes": [self.keyframes[f] for f in sorted(self.keyframes)]}

    @property
    def frames(self) -> list[int]:
        return sorted(self.keyframes)

    def visible_frames(self) -> list[int]:
        return [f for f in sorted(self.keyframes) if self.keyframes[f].visible]

    def params_at(self, frame: int) -> AffineParams:
        return self.keyframes[frame].params


class MotionProgram(ParameterizableMixin, SingleWriterMixin):
    """A vectorized video: background plus layered, transformed objects.

    Mutating methods are restricted to the thread that first mutates the
    program; queries never check.

    Args:
        width, height: Canvas size in pixels.
        num_frames: Frame count (>= 1).
        fps: Playback rate.
        background: Background model (or its fields, or {"rgb": [r, g, b]});
            solid white by default.
        objects: Program objects (or their plain dicts).

    Raises:
        ValueError: If sizes or counts are invalid.
        IdCollisionError: If object ids repeat.
    """

    def __init__(self, width: int = 1, height: int = 1, num_frames: int = 1,
                 fps: float = 24.0, background: BackgroundModel | None = None,
                 objects: Iterable[ProgramObject | Mapping[str, Any]] = ()):
        if int(width) <= 0 or int(height) <= 0:
            raise ValueError(f"Canvas must be positive, got {width}x{height}")
        if int(num_frames) < 1:
            raise ValueError(f"num_frames must be >= 1, got {num_frames}")
        if not fps > 0:
            raise ValueError(f"fps must be > 0, got {fps}")
        if isinstance(background, Mapping):
            background = (BackgroundModel.solid_rgb(**background) if "rgb" in background
                          else BackgroundModel(**background))
        self.width = int(width)
        self.height = int(height)
        self.num_frames = int(num_frames)
        self.fps = float(fps)
        self.background = background or BackgroundModel.solid_rgb((1.0, 1.0, 1.0))
        self.objects: list[ProgramObject] = []
        for o in objects:
            self._append(ProgramObject(**o) if isinstance(o, Mapping) else o)

    def get_params(self) -> dict[str, Any]:
        return {"width": self.width, "height": self.height,
                "num_frames": self.num_frames, "fps": self.fps,
                "background": self.background, "objects": list(self.objects)}

    @property
    def canvas(self) -> tuple[int, int]:
        return self.width, self.height

    def _append(self, obj: ProgramObject) -> None:
        if any(o.object_id == obj.object_id for o in self.objects):
            raise IdCollisionError(f"Object id {obj.object_id} already exists")
        self.objects.append(obj)

    def object_ids(self) -> list[int]:
        return [o.object_id for o in self.objects]

    def get(self, object_id: int) -> ProgramObject:
        """Raises UnknownObjectError if no object has the id."""
        for o in self.objects:
            if o.object_id == object_id:
                return o
        raise UnknownObjectError(f"No object with id {object_id}")

    def next_id(self) -> int:
        return max(self.object_ids(), default=0) + 1

    def visible_at(self, frame: int) -> list[ProgramObject]:
        return [o for o in self.objects
                if frame in o.keyframes and o.keyframes[frame].visible]

    def add_object(self, obj: ProgramObject) -> None:
        self._restrict_to_owner_thread()
        self._append(obj)

    def remove_object(self, object_id: int) -> ProgramObject:
        self._restrict_to_owner_thread()
        obj = self.get(object_id)
        self.objects.remove(obj)
        return obj

    def set_num_frames(self, num_frames: int) -> None:
        self._restrict_to_owner_thread()
        if num_frames < 1:
            raise ValueError(f"num_frames must be >= 1, got {num_frames}")
        self.num_frames = int(num_frames)

    def set_keyframe(self, object_id: int, keyframe: Keyframe) -> None:
        self._restrict_to_owner_thread()
        self.get(object_id).keyframes[keyframe.frame] = keyframe

    def replace_keyframes(self, object_id: int, keyframes: Sequence[Keyframe]) -> None:
        self._restrict_to_owner_thread()
        self.get(object_id).keyframes = {k.frame: k for k in keyframes}

    def set_canonical(self, object_id: int, image: Any) -> None:
        self._restrict_to_owner_thread()
        self.get(object_id).canonical = as_canonical(image)

    def rerank_z(self, frames: Iterable[int] | None = None) -> None:
        """Renumber visible ranks to 0..n-1 per frame, keeping their order.

        Equal ranks are ordered by object id. All frames by default. Changed
        keyframes are replaced, never edited, so keyframes shared with a copy
        or held by a caller keep their rank.
        """
        self._restrict_to_owner_thread()
        for f in (range(self.num_frames) if frames is None else sorted(set(frames))):
            present = sorted(self.visible_at(f),
                             key=lambda o: (o.keyframes[f].z, o.object_id))
            for rank, o in enumerate(present):
                old = o.keyframes[f]
                if old.z != rank:
                    o.keyframes[f] = Keyframe(f, old.params, rank, old.visible)

    def frames_with_rank_ties(self) -> list[int]:
        """Frames where two visible objects share a z rank."""
        tied = []
        for f in range(self.num_frames):
            ranks = [o.keyframes[f].z for o in self.visible_at(f)]
            if len(set(ranks)) != len(ranks):
                tied.append(f)
        return tied

    def validate(self) -> None:
        """Check every program invariant.

        Raises:
            ValueError: On a keyframe outside [0, num_frames), duplicate
                visible z ranks within a frame, or a singular transform.
            IdCollisionError: If object ids repeat.
        """
        ids = self.object_ids()
        if len(set(ids)) != len(ids):
            raise IdCollisionError(f"Object ids repeat: {ids}")
        for o in self.objects:
            as_canonical(o.canonical)
            for f, k in o.keyframes.items():
                if not 0 <= f < self.num_frames:
                    raise ValueError(f"Object {o.object_id} has keyframe {f} outside "
                                     f"[0, {self.num_frames})")
                if k.frame != f:
                    raise ValueError(f"Object {o.object_id} keyframe {f} is "
                                     f"labeled {k.frame}")
                if abs(k.params.determinant()) < MIN_DETERMINANT:
                    raise ValueError(f"Object {o.object_id} frame {f} is singular")
        for f in range(self.num_frames):
            ranks = [o.keyframes[f].z for o in self.visible_at(f)]
            if len(set(ranks)) != len(ranks):
                raise ValueError(f"Frame {f} has repeated z ranks {sorted(ranks)}")

    def copy(self) -> "MotionProgram":
        """Deep copy owned by no thread yet."""
        from ..configuration.json_processor import dumpjs, loadjs
        return loadjs(dumpjs(self))
