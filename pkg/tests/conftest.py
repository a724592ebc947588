"""Pytest fixtures for polishforge tests."""

from fractions import Fraction

import pytest

from polishforge.exactgeom import HCPoint
from polishforge.models import PresentationStream, StreamKind, stream_from_schedule


@pytest.fixture
def two_point_stream() -> PresentationStream:
    """Compact stream of two points on coordinate 1, enumerated at stages 0 and 1."""
    points = [HCPoint.of("1/4"), HCPoint.of("3/4")]
    schedule = [(0, points[0]), (1, points[1])]
    return stream_from_schedule(schedule, 6, StreamKind.COMPACT)


@pytest.fixture
def segment_stream() -> PresentationStream:
    """Compact stream of dyadic grids on the segment [1/4, 3/4] x {1/2}.

    Stage s adds the midpoints of the previous grid, so through stage s the
    points form a strict 2^-(s+2)-net of the segment.
    """
    schedule: list[tuple[int, HCPoint]] = []
    seen: set[Fraction] = set()
    for s in range(8):
        steps = 2 ** (s + 1)
        for i in range(steps + 1):
            x = Fraction(1, 4) + Fraction(i, 2 * steps)
            if x not in seen:
                seen.add(x)
                schedule.append((s, HCPoint.of(x)))
    return stream_from_schedule(schedule, 8, StreamKind.COMPACT)
