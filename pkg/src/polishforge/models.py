"""Presentation stream data model and type definitions."""

from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import cached_property

from polishforge.errors import StreamInvariantError, UncertifiedStreamError
from polishforge.exactgeom import FormalBall, HCPoint, PointCloud


class StreamKind(StrEnum):
    """Whether a stream carries compactness certificates."""

    POLISH = "polish"
    COMPACT = "compact"


def stage_mesh(s: int) -> Fraction:
    """Mesh 2^-s of stage s."""
    return Fraction(1, 2**s)


def cover_radius(s: int) -> Fraction:
    """Radius 2^-s (1 + 2^-2s) of the stage-s cover balls."""
    return stage_mesh(s) * (1 + Fraction(1, 4**s))


@dataclass(frozen=True)
class Stage:
    """Points enumerated at one stage, with the optional net size l(s)."""

    index: int
    new_points: tuple[tuple[int, HCPoint], ...]
    net_size: int | None = None


@dataclass(frozen=True)
class PresentationStream:
    """Stage-indexed stream of dense points, optionally certified compact."""

    kind: StreamKind
    stages: tuple[Stage, ...]

    def __post_init__(self) -> None:
        check_stream(self.kind, self.stages)

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    @property
    def is_compact(self) -> bool:
        return self.kind is StreamKind.COMPACT

    @cached_property
    def ids(self) -> tuple[int, ...]:
        """Point ids in enumeration order."""
        return tuple(pid for stage in self.stages for pid, _ in stage.new_points)

    @cached_property
    def points(self) -> tuple[HCPoint, ...]:
        """Points in enumeration order."""
        return tuple(point for stage in self.stages for _, point in stage.new_points)

    @cached_property
    def stage_of_row(self) -> tuple[int, ...]:
        """Enumeration stage of each row."""
        return tuple(stage.index for stage in self.stages for _ in stage.new_points)

    @cached_property
    def row_of(self) -> dict[int, int]:
        """Row index of each point id."""
        return {pid: row for row, pid in enumerate(self.ids)}

    @cached_property
    def cloud(self) -> PointCloud:
        """Integer distance kernel over all points of the stream."""
        return PointCloud(self.points)

    def count_through(self, s: int) -> int:
        """Number of points enumerated at stages <= s."""
        return sum(len(stage.new_points) for stage in self.stages[: s + 1])

    def net_size(self, s: int) -> int:
        """The certificate l(s); polish streams have none."""
        if not self.is_compact:
            raise UncertifiedStreamError("polish streams carry no compactness certificate")
        size = self.stages[s].net_size
        assert size is not None
        return size

    def net_rows(self, s: int) -> list[int]:
        """Rows of the first l(s) points."""
        return list(range(self.net_size(s)))

    def rows_through(self, s: int) -> list[int]:
        """Rows of the points enumerated at stages <= s."""
        return list(range(self.count_through(s)))


@dataclass(frozen=True)
class Cover:
    """Stage cover: equal-radius balls around the first l(s) points."""

    stage: int
    radius: Fraction
    point_ids: tuple[int, ...]
    centers: tuple[HCPoint, ...]

    def __post_init__(self) -> None:
        if not self.point_ids:
            raise StreamInvariantError("cover is empty", self.stage)
        if len(self.point_ids) != len(self.centers):
            raise StreamInvariantError("cover ids and centers differ in length", self.stage)

    @property
    def balls(self) -> tuple[tuple[int, Fraction], ...]:
        """(point_id, radius) pairs."""
        return tuple((pid, self.radius) for pid in self.point_ids)

    def formal_balls(self) -> list[FormalBall]:
        """The cover as formal balls, in id order."""
        return [FormalBall(center, self.radius) for center in self.centers]


def check_stream(kind: StreamKind, stages: tuple[Stage, ...]) -> None:
    """Raise StreamInvariantError on the first violated stream invariant."""
    last_id = -1
    total = 0
    for position, stage in enumerate(stages):
        if stage.index != position:
            raise StreamInvariantError(f"expected stage index {position}, got {stage.index}", position)
        for pid, _ in stage.new_points:
            if pid <= last_id:
                raise StreamInvariantError(f"point id {pid} does not increase", position)
            last_id = pid
        total += len(stage.new_points)
        if position == 0 and total == 0:
            raise StreamInvariantError("stage 0 enumerates no point", 0)
        if kind is StreamKind.POLISH and stage.net_size is not None:
            raise StreamInvariantError("polish stream carries a net size", position)
        if kind is StreamKind.COMPACT:
            if stage.net_size is None:
                raise StreamInvariantError("compact stream lacks a net size", position)
            if not 1 <= stage.net_size <= total:
                raise StreamInvariantError(
                    f"net size {stage.net_size} outside [1, {total}]", position
                )


def stream_from_schedule(
    scheduled: Iterable[tuple[int, HCPoint]],
    num_stages: int,
    kind: StreamKind,
) -> PresentationStream:
    """Build a stream from (stage, point) pairs listed in enumeration order.

    Ids are assigned sequentially. Compact streams get l(0) = 1 and
    l(s) = number of points enumerated through stage s - 1.
    """
    buckets: list[list[HCPoint]] = [[] for _ in range(num_stages)]
    for stage, point in scheduled:
        if 0 <= stage < num_stages:
            buckets[stage].append(point)
    stages = []
    next_id = 0
    for s, bucket in enumerate(buckets):
        net: int | None = None
        if kind is StreamKind.COMPACT:
            net = 1 if s == 0 else next_id
        new_points = tuple((next_id + i, point) for i, point in enumerate(bucket))
        next_id += len(bucket)
        stages.append(Stage(index=s, new_points=new_points, net_size=net))
    return PresentationStream(kind=kind, stages=tuple(stages))


def truncate(stream: PresentationStream, n: int) -> PresentationStream:
    """Keep the first n stages."""
    return PresentationStream(kind=stream.kind, stages=stream.stages[:n])


def restrict(stream: PresentationStream, ids: Iterable[int]) -> PresentationStream:
    """Polish stream of the given points, keeping ids and enumeration stages.

    Points enumerated before the first stage that keeps a point are moved to
    stage 0, so the result always starts with a nonempty stage.
    """
    keep = set(ids)
    if not keep:
        raise StreamInvariantError("restriction keeps no point", 0)
    first = min(stream.stage_of_row[stream.row_of[pid]] for pid in keep)
    stages = []
    for stage in stream.stages[first:]:
        new_points = tuple((pid, p) for pid, p in stage.new_points if pid in keep)
        stages.append(Stage(index=stage.index - first, new_points=new_points))
    return PresentationStream(kind=StreamKind.POLISH, stages=tuple(stages))
