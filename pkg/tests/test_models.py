"""Tests for models module."""

from fractions import Fraction

import pytest

from polishforge.errors import StreamInvariantError, UncertifiedStreamError
from polishforge.exactgeom import HCPoint
from polishforge.models import (
    Cover,
    PresentationStream,
    Stage,
    StreamKind,
    cover_radius,
    restrict,
    stage_mesh,
    stream_from_schedule,
    truncate,
)


def test_cover_radius_values() -> None:
    """Test the stage radii 2^-s (1 + 4^-s)."""
    assert stage_mesh(3) == Fraction(1, 8)
    assert cover_radius(0) == 2
    assert cover_radius(1) == Fraction(5, 8)
    assert cover_radius(2) == Fraction(17, 64)


def test_stream_from_schedule_net_sizes(two_point_stream: PresentationStream) -> None:
    """Test that compact schedules get l(0) = 1 and l(s) = count through s - 1."""
    stream = two_point_stream

    assert stream.is_compact
    assert stream.num_stages == 6
    assert stream.ids == (0, 1)
    assert [stream.net_size(s) for s in range(3)] == [1, 1, 2]
    assert stream.count_through(0) == 1
    assert stream.rows_through(5) == [0, 1]
    assert stream.stage_of_row == (0, 1)


def test_stream_rejects_empty_first_stage() -> None:
    """Test that stage 0 must enumerate a point."""
    with pytest.raises(StreamInvariantError, match="stage 0"):
        PresentationStream(kind=StreamKind.POLISH, stages=(Stage(index=0, new_points=()),))


def test_stream_rejects_decreasing_ids() -> None:
    """Test that point ids must increase."""
    p = HCPoint.of("1/2")
    stages = (
        Stage(index=0, new_points=((3, p),)),
        Stage(index=1, new_points=((2, HCPoint.of("1/4")),)),
    )

    with pytest.raises(StreamInvariantError, match="does not increase"):
        PresentationStream(kind=StreamKind.POLISH, stages=stages)


def test_stream_checks_net_sizes() -> None:
    """Test net-size rules for both stream kinds."""
    p = HCPoint.of("1/2")

    with pytest.raises(StreamInvariantError, match="carries a net size"):
        PresentationStream(
            kind=StreamKind.POLISH, stages=(Stage(index=0, new_points=((0, p),), net_size=1),)
        )
    with pytest.raises(StreamInvariantError, match="lacks a net size"):
        PresentationStream(kind=StreamKind.COMPACT, stages=(Stage(index=0, new_points=((0, p),)),))
    with pytest.raises(StreamInvariantError, match="outside"):
        PresentationStream(
            kind=StreamKind.COMPACT, stages=(Stage(index=0, new_points=((0, p),), net_size=2),)
        )


def test_polish_stream_has_no_certificate() -> None:
    """Test that asking a polish stream for l(s) raises."""
    stream = stream_from_schedule([(0, HCPoint.of("1/2"))], 2, StreamKind.POLISH)

    with pytest.raises(UncertifiedStreamError):
        stream.net_size(0)


def test_truncate_and_restrict(segment_stream: PresentationStream) -> None:
    """Test truncation and restriction keep ids and shift stages."""
    short = truncate(segment_stream, 3)
    late = segment_stream.ids[-2:]
    part = restrict(segment_stream, late)

    assert short.num_stages == 3
    assert short.ids == segment_stream.ids[: short.count_through(2)]
    assert part.kind is StreamKind.POLISH
    assert part.ids == late
    assert part.stages[0].new_points
    with pytest.raises(StreamInvariantError):
        restrict(segment_stream, [])


def test_cover_validation() -> None:
    """Test that covers must be nonempty and aligned."""
    with pytest.raises(StreamInvariantError, match="empty"):
        Cover(stage=1, radius=cover_radius(1), point_ids=(), centers=())

    cover = Cover(stage=1, radius=cover_radius(1), point_ids=(4,), centers=(HCPoint.of("1/2"),))

    assert cover.balls == ((4, cover_radius(1)),)
    assert cover.formal_balls()[0].radius == cover_radius(1)
