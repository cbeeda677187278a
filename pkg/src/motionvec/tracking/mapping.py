"""Candidate mapping graphs between objects and regions, and greedy selection."""
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import StrEnum

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from ..diffcomp.placement import PlacementSet
from ..diffcomp.render import composite_hard
from ..exceptions import EmptyMaskError
from ..imaging.raster import BinaryMask, RasterImage

__all__ = [
    "Direction",
    "MappingType",
    "MAPPING_TYPES",
    "GraphEdge",
    "MappingGraph",
    "CandidateMapping",
    "coverage_weights",
    "keep_strongest_edges",
    "extract_candidates",
    "score_candidate",
    "select_mappings",
]


class Direction(StrEnum):
    FORWARD = "forward"
    BACKWARD = "backward"


class MappingType(StrEnum):
    ONE_TO_ONE = "one-to-one"
    ONE_TO_MANY_NO_SPLIT = "one-to-many-no-split"
    ONE_TO_MANY_SPLIT = "one-to-many-split"
    MANY_TO_ONE_NO_MERGE = "many-to-one-no-merge"
    MANY_TO_ONE_MERGE = "many-to-one-merge"
    MANY_TO_MANY = "many-to-many"
    APPEAR = "appear"
    DISAPPEAR = "disappear"


MAPPING_TYPES: tuple[MappingType, ...] = tuple(MappingType)
"""Bucket order of per-type error tuples."""


@dataclass(frozen=True)
class GraphEdge:
    object_id: int
    region_id: int
    w_src: float
    w_tgt: float


@dataclass(eq=False)
class MappingGraph:
    """Edges retained from one differentiable-compositing run.

    Attributes:
        direction: Forward (objects onto frame t) or backward (regions onto
            frame t-1).
        edges: Retained (object, region) edges with coverage weights.
        placements: Optimized placements; element ids are object ids
            (forward) or region ids (backward).
        motions: Frame-space motion matrix per source id.
        depths: Continuous optimized depth per source id.
        visibility: Visible pixels per source id in the target frame.
        supports: Alpha support (> 0.5) per source id in the target frame.
        target_masks: Masks of the targets (regions or objects) by id.
    """
    direction: Direction
    edges: list[GraphEdge] = field(default_factory=list)
    placements: PlacementSet | None = None
    motions: dict[int, NDArray[np.float64]] = field(default_factory=dict)
    depths: dict[int, float] = field(default_factory=dict)
    visibility: dict[int, BinaryMask] = field(default_factory=dict, repr=False)
    supports: dict[int, BinaryMask] = field(default_factory=dict, repr=False)
    target_masks: dict[int, BinaryMask] = field(default_factory=dict, repr=False)

    def source_ids(self, objects: Iterable[int], regions: Iterable[int]) -> list[int]:
        return sorted(objects if self.direction is Direction.FORWARD else regions)

    def target_ids(self, objects: Iterable[int], regions: Iterable[int]) -> list[int]:
        return sorted(regions if self.direction is Direction.FORWARD else objects)


@dataclass(eq=False)
class CandidateMapping:
    """A star or small component of a mapping graph.

    Attributes:
        direction: Graph the candidate came from.
        objects: Object ids of frame t-1, sorted.
        regions: Region ids of frame t, sorted.
        mtype: Mapping type implied by direction and cardinalities.
        score: Visibility loss; +inf when unusable.
    """
    direction: Direction
    objects: tuple[int, ...]
    regions: tuple[int, ...]
    mtype: MappingType
    score: float = math.inf

    def __post_init__(self):
        self.objects = tuple(sorted(int(i) for i in self.objects))
        self.regions = tuple(sorted(int(i) for i in self.regions))
        if len(self.objects) > 1 and len(self.regions) > 1:
            raise ValueError("A candidate cannot be many-to-many")

    @classmethod
    def of(cls, direction: Direction, objects: Iterable[int],
           regions: Iterable[int]) -> "CandidateMapping":
        """Candidate with the mapping type derived from its shape."""
        objects, regions = tuple(objects), tuple(regions)
        return cls(direction, objects, regions, _mapping_type(direction, objects, regions))

    def conflicts_with(self, other: "CandidateMapping") -> bool:
        return bool(set(self.objects) & set(other.objects)
                    or set(self.regions) & set(other.regions))

    def sort_key(self) -> tuple:
        return (self.score, self.direction is not Direction.FORWARD,
                self.objects, self.regions)


def _mapping_type(direction: Direction, objects: Sequence[int],
                  regions: Sequence[int]) -> MappingType:
    n_obj, n_reg = len(objects), len(regions)
    if n_obj == 0:
        return MappingType.APPEAR
    if n_reg == 0:
        return MappingType.DISAPPEAR
    if n_obj == 1 and n_reg == 1:
        return MappingType.ONE_TO_ONE
    forward = direction is Direction.FORWARD
    if n_obj == 1:
        return MappingType.ONE_TO_MANY_NO_SPLIT if forward else MappingType.ONE_TO_MANY_SPLIT
    if n_reg == 1:
        return MappingType.MANY_TO_ONE_NO_MERGE if forward else MappingType.MANY_TO_ONE_MERGE
    return MappingType.MANY_TO_MANY


def coverage_weights(src_vis: BinaryMask, tgt_vis: BinaryMask) -> tuple[float, float]:
    """(|src & tgt| / |src|, |src & tgt| / |tgt|), each 0 for an empty denominator."""
    src_vis = np.asarray(src_vis, dtype=bool)
    tgt_vis = np.asarray(tgt_vis, dtype=bool)
    overlap = float(np.count_nonzero(src_vis & tgt_vis))
    n_src = np.count_nonzero(src_vis)
    n_tgt = np.count_nonzero(tgt_vis)
    return (overlap / n_src if n_src else 0.0,
            overlap / n_tgt if n_tgt else 0.0)


def keep_strongest_edges(direction: Direction,
                         weights: Mapping[tuple[int, int], tuple[float, float]]
                         ) -> list[GraphEdge]:
    """Each source keeps its best nonzero w_src edge, each target its best w_tgt.

    Args:
        weights: (source id, target id) -> (w_src, w_tgt).
    """
    best_src: dict[int, tuple[float, int]] = {}
    best_tgt: dict[int, tuple[float, int]] = {}
    for (s, g), (w_src, w_tgt) in sorted(weights.items()):
        if w_src > 0 and (s not in best_src or w_src > best_src[s][0]):
            best_src[s] = (w_src, g)
        if w_tgt > 0 and (g not in best_tgt or w_tgt > best_tgt[g][0]):
            best_tgt[g] = (w_tgt, s)
    kept = {(s, g) for s, (_, g) in best_src.items()}
    kept |= {(s, g) for g, (_, s) in best_tgt.items()}
    edges = []
    for s, g in sorted(kept):
        w_src, w_tgt = weights[(s, g)]
        obj, region = (s, g) if direction is Direction.FORWARD else (g, s)
        edges.append(GraphEdge(obj, region, w_src, w_tgt))
    return edges


def extract_candidates(graph: MappingGraph) -> list[CandidateMapping]:
    """Split the graph into candidates.

    A connected component with a single object or a single region is one
    candidate; a many-to-many component yields the star of every node.
    """
    g = nx.Graph()
    for e in graph.edges:
        g.add_edge(("o", e.object_id), ("r", e.region_id))
    candidates = []
    for component in sorted(nx.connected_components(g), key=lambda c: sorted(c)):
        objects = sorted(i for kind, i in component if kind == "o")
        regions = sorted(i for kind, i in component if kind == "r")
        if len(objects) == 1 or len(regions) == 1:
            candidates.append(CandidateMapping.of(graph.direction, objects, regions))
            continue
        for node in sorted(component):
            kind, i = node
            neighbors = sorted(j for _, j in g.neighbors(node))
            if kind == "o":
                candidates.append(CandidateMapping.of(graph.direction, [i], neighbors))
            else:
                candidates.append(CandidateMapping.of(graph.direction, neighbors, [i]))
    return candidates


def score_candidate(c: CandidateMapping, graph: MappingGraph, target: RasterImage,
                    background: RasterImage) -> float:
    """RMS color error of the candidate's composited sources over M^all.

    M^all is the union of the sources' visibility masks and the targets'
    masks. Only the candidate's own sources are composited over the
    background.

    Raises:
        EmptyMaskError: If M^all is empty.
    """
    sources = graph.source_ids(c.objects, c.regions)
    targets = graph.target_ids(c.objects, c.regions)
    region = np.zeros(np.asarray(target).shape[:2], dtype=bool)
    for i in sources:
        region |= graph.visibility.get(i, False)
    for i in targets:
        region |= graph.target_masks.get(i, False)
    if not np.any(region):
        raise EmptyMaskError(f"Candidate {c.objects}->{c.regions} covers no pixels")
    ps = graph.placements
    subset = PlacementSet([ps.get(i) for i in sources], ps.canvas)
    rendered = composite_hard(subset, background)
    diff = rendered[region] - np.asarray(target, dtype=np.float64)[region][:, :3]
    return float(np.sqrt(np.mean(diff ** 2)))


def select_mappings(candidates: Sequence[CandidateMapping], epsilon: float = 0.1, *,
                    objects: Iterable[int] = (), regions: Iterable[int] = ()
                    ) -> list[CandidateMapping]:
    """Greedy conflict-free selection.

    Repeatedly accepts the lowest-score candidate (ties: forward first,
    then smaller object ids, then smaller region ids) while its score is at
    most epsilon, discarding every candidate sharing an object or region
    with it. Objects and regions left uncovered become disappear and appear
    mappings.
    """
    pool = sorted((c for c in candidates if math.isfinite(c.score)),
                  key=CandidateMapping.sort_key)
    accepted: list[CandidateMapping] = []
    while pool:
        best = pool[0]
        if best.score > epsilon:
            break
        accepted.append(best)
        pool = [c for c in pool[1:] if not c.conflicts_with(best)]
    used_objects = {o for c in accepted for o in c.objects}
    used_regions = {r for c in accepted for r in c.regions}
    for o in sorted(set(objects) - used_objects):
        accepted.append(CandidateMapping(Direction.FORWARD, (o,), (),
                                         MappingType.DISAPPEAR, 0.0))
    for r in sorted(set(regions) - used_regions):
        accepted.append(CandidateMapping(Direction.FORWARD, (), (r,),
                                         MappingType.APPEAR, 0.0))
    return accepted
