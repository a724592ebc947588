"""Stage covers, compactness certificates and the stream scheduler.

A compact stream certifies at stage s that every point lies strictly within
2^-s of one of the first l(s) points. The cover of stage s is the family of
balls of radius 2^-s (1 + 2^-2s) around those points; consecutive covers must
satisfy the strict-refinement law (every finer ball formally inside a coarser
one).

The scheduler builds streams from a tree of model pieces. It enumerates
points so that everything enumerated through stage u is a strict
2^-(u+2)-net of the whole model. With l(0) = 1 and l(s) the count through
stage s - 1, that single invariant gives both the certificate and the
refinement law, since r_s - r_{s+1} = 2^-(s+1) + (7/8) 2^-3s.
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from fractions import Fraction

from polishforge.errors import (
    CertificateError,
    RefinementError,
    StreamInvariantError,
    UncertifiedStreamError,
)
from polishforge.exactgeom import HCPoint, PointCloud
from polishforge.models import (
    Cover,
    PresentationStream,
    StreamKind,
    cover_radius,
    stage_mesh,
    stream_from_schedule,
)

logger = logging.getLogger(__name__)


def require_compact(stream: PresentationStream) -> None:
    """Raise UncertifiedStreamError for polish streams."""
    if not stream.is_compact:
        raise UncertifiedStreamError("this analysis needs a compact (certified) stream")


def _require_stage(stream: PresentationStream, s: int) -> None:
    if not 0 <= s < stream.num_stages:
        raise StreamInvariantError(f"stage not available (stream has {stream.num_stages})", s)


def check_certificate(stream: PresentationStream, s: int) -> None:
    """Raise CertificateError unless the stage-s net covers every point within 2^-s."""
    require_compact(stream)
    _require_stage(stream, s)
    cloud = stream.cloud
    bound = cloud.strict_bound(stage_mesh(s))
    mins = cloud.min_distances(list(range(len(cloud))), stream.net_rows(s))
    for row, value in enumerate(mins):
        if value >= bound:
            raise CertificateError(stream.ids[row], s)


def validate_certificate(stream: PresentationStream, s: int) -> bool:
    """True iff every enumerated point lies strictly within 2^-s of the stage-s net."""
    try:
        check_certificate(stream, s)
    except CertificateError as exc:
        logger.warning("Certificate fails: %s", exc)
        return False
    return True


def cover_at(stream: PresentationStream, s: int) -> Cover:
    """The stage-s cover without checking the refinement law."""
    require_compact(stream)
    _require_stage(stream, s)
    rows = stream.net_rows(s)
    return Cover(
        stage=s,
        radius=cover_radius(s),
        point_ids=tuple(stream.ids[r] for r in rows),
        centers=tuple(stream.points[r] for r in rows),
    )


def _check_refinement(stream: PresentationStream, coarse: int, fine: int) -> None:
    cloud = stream.cloud
    parents = stream.net_rows(coarse)
    children = stream.net_rows(fine)
    margin = cover_radius(coarse) - cover_radius(fine)
    contained = cloud.within(children, parents, margin, strict=False)
    for position, row in enumerate(children):
        if not contained[position].any():
            raise RefinementError(fine, stream.ids[row])


def refinement_sequence(stream: PresentationStream, s: int) -> Cover:
    """The stage-s cover, checked against the strict-refinement law.

    Checks that every stage-s ball has a formal parent at stage s - 1 and that
    every stage-(s+1) ball, when available, has one at stage s.
    """
    cover = cover_at(stream, s)
    if s >= 1:
        _check_refinement(stream, s - 1, s)
    if s + 1 < stream.num_stages:
        _check_refinement(stream, s, s + 1)
    return cover


def witnesses_through(stream: PresentationStream, s: int) -> list[HCPoint]:
    """Points enumerated at stages <= s."""
    return list(stream.points[: stream.count_through(s)])


@dataclass
class Piece:
    """A block of a concrete model.

    levels are nested approximation levels; each level lists only its new
    points and level j + 1 refines level j. A piece with an anchor (a level-0
    point of an ancestor piece) stays covered by it until its points leave the
    anchor's 2^-(u+2) neighbourhood. not_before delays the start, until drops
    levels that would be enumerated at or after that stage, and eager starts
    as soon as the anchor and not_before allow.
    """

    levels: list[list[HCPoint]] = field(default_factory=list)
    anchor: HCPoint | None = None
    children: list["Piece"] = field(default_factory=list)
    not_before: int = 0
    until: int | None = None
    eager: bool = False

    def own_points(self) -> list[HCPoint]:
        """Points of this piece's levels."""
        return [p for level in self.levels for p in level]

    def subtree_points(self) -> Iterator[HCPoint]:
        """Points of this piece and all descendants."""
        yield from self.own_points()
        for child in self.children:
            yield from child.subtree_points()


def _first_stage_below(distance: Fraction, budget: int) -> int:
    """Least u with distance >= 2^-(u+2), capped at budget."""
    if distance <= 0:
        return budget
    u = 0
    while u < budget and Fraction(1, 2 ** (u + 2)) > distance:
        u += 1
    return u


class _Scheduler:
    def __init__(self, budget: int) -> None:
        self.budget = budget
        self.stage_of: dict[HCPoint, int] = {}
        self.sequence: dict[HCPoint, int] = {}

    def _assign(self, point: HCPoint, stage: int) -> None:
        known = self.stage_of.get(point)
        if known is None:
            self.sequence[point] = len(self.sequence)
            self.stage_of[point] = stage
        elif stage < known:
            self.stage_of[point] = stage

    def _start(self, piece: Piece) -> int:
        if piece.anchor is None:
            return piece.not_before
        anchor_stage = self.stage_of.get(piece.anchor)
        if anchor_stage is None:
            raise StreamInvariantError("piece anchor is not an enumerated ancestor point", 0)
        subtree = list(piece.subtree_points())
        cloud = PointCloud([piece.anchor, *subtree])
        reach = cloud.max_distance(0, list(range(1, len(cloud))))
        own = _first_stage_below(reach, self.budget)
        if piece.eager and reach < Fraction(1, 2 ** (piece.not_before + 1)):
            return max(anchor_stage, piece.not_before)
        return max(own, anchor_stage, piece.not_before)

    def visit(self, piece: Piece) -> None:
        start = self._start(piece)
        level_stages = self._level_stages(piece, start)
        for level, stage in zip(piece.levels, level_stages, strict=False):
            if piece.until is not None and stage >= piece.until:
                stage = self.budget + 1
            for point in level:
                self._assign(point, stage)
        for level in piece.levels[len(level_stages) :]:
            for point in level:
                self._assign(point, self.budget + 1)
        for child in piece.children:
            self.visit(child)

    def _level_stages(self, piece: Piece, start: int) -> list[int]:
        if not piece.levels:
            return []
        stages = [start]
        if len(piece.levels) == 1 or start >= self.budget:
            return stages
        own = piece.own_points()
        cloud = PointCloud(own)
        rows = list(range(len(own)))
        offset = len(piece.levels[0])
        mins = cloud.min_distances(rows, list(range(offset)))
        for level in piece.levels[1:]:
            mesh = cloud.to_fraction(max(mins))
            stage = max(stages[-1], _first_stage_below(mesh, self.budget))
            if mesh == 0 or stage >= self.budget:
                break
            stages.append(stage)
            cols = list(range(offset, offset + len(level)))
            offset += len(level)
            fresh = cloud.min_distances(rows, cols)
            mins = [min(a, b) for a, b in zip(mins, fresh, strict=True)]
        return stages

    def schedule(self) -> list[tuple[int, HCPoint]]:
        ordered = sorted(self.stage_of, key=lambda p: (self.stage_of[p], self.sequence[p]))
        return [(self.stage_of[p], p) for p in ordered if self.stage_of[p] < self.budget]


def assemble_stream(root: Piece, budget: int) -> PresentationStream:
    """Schedule a piece tree into a compact stream with `budget` stages."""
    if budget < 1:
        raise StreamInvariantError("budget must be at least 1", 0)
    scheduler = _Scheduler(budget)
    scheduler.visit(root)
    scheduled = scheduler.schedule()
    logger.debug("Scheduled %d points over %d stages", len(scheduled), budget)
    return stream_from_schedule(scheduled, budget, StreamKind.COMPACT)


def polish_stream(events: list[tuple[int, HCPoint]], budget: int) -> PresentationStream:
    """Polish stream from (stage, point) events, dropping repeats."""
    seen: set[HCPoint] = set()
    ordered = []
    for _, (s, p) in sorted(enumerate(events), key=lambda item: (item[1][0], item[0])):
        if p in seen or s >= budget:
            continue
        seen.add(p)
        ordered.append((s, p))
    return stream_from_schedule(ordered, budget, StreamKind.POLISH)
