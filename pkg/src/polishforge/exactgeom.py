"""Exact rational geometry of the truncated Hilbert cube.

Points are finitely supported sequences of rationals in [0, 1] with the metric
d(x, y) = sum_i 2^-i |x_i - y_i| (first coordinate has weight 1/2), so the cube
has diameter 1. Balls carry the decidable formal relations every other module
relies on: strict inequality for intersection, non-strict for containment.

Bulk distance work goes through PointCloud, which rescales a point set onto a
common integer grid and evaluates the metric with numpy integer kernels.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import numpy.typing as npt

from polishforge.errors import PolishForgeError

Rational = Fraction

# Row block size for the pairwise distance kernels
CHUNK_ROWS = 512

_INT64_LIMIT = 2**62


def parse_rational(text: str) -> Fraction:
    """Parse a "p/q" (or "p") string into an exact rational."""
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    """Format a rational as a "p/q" string."""
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class HCPoint:
    """Finitely supported point of the Hilbert cube; missing coordinates are 0."""

    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        values = [Fraction(c) for c in self.coords]
        for index, value in enumerate(values, start=1):
            if value < 0 or value > 1:
                raise ValueError(f"coordinate {index} out of [0, 1]: {value}")
        while values and values[-1] == 0:
            values.pop()
        object.__setattr__(self, "coords", tuple(values))

    @classmethod
    def of(cls, *values: Fraction | int | str) -> "HCPoint":
        """Build a point from rationals, integers or "p/q" strings."""
        return cls(tuple(Fraction(v) for v in values))

    def coord(self, index: int) -> Fraction:
        """Coordinate with 1-based index; 0 beyond the support."""
        if index < 1:
            raise IndexError("coordinates are 1-based")
        if index > len(self.coords):
            return Fraction(0)
        return self.coords[index - 1]

    def padded(self, length: int) -> tuple[Fraction, ...]:
        """Coordinates 1..length, zero-padded."""
        return tuple(self.coord(i) for i in range(1, length + 1))


@dataclass(frozen=True)
class FormalBall:
    """Rational open ball B(center; radius)."""

    center: HCPoint
    radius: Fraction

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")


def hc_distance(x: HCPoint, y: HCPoint) -> Fraction:
    """Exact Hilbert-cube distance sum_i 2^-i |x_i - y_i|."""
    length = max(len(x.coords), len(y.coords))
    total = Fraction(0)
    for i in range(1, length + 1):
        total += abs(x.coord(i) - y.coord(i)) / 2**i
    return total


def balls_formally_intersect(b1: FormalBall, b2: FormalBall) -> bool:
    """True iff the center distance is strictly below the sum of radii."""
    return hc_distance(b1.center, b2.center) < b1.radius + b2.radius


def ball_formally_contains(outer: FormalBall, inner: FormalBall) -> bool:
    """True iff d(centers) + inner.radius <= outer.radius."""
    return hc_distance(outer.center, inner.center) + inner.radius <= outer.radius


def contraction_factor(points: Sequence[HCPoint], region: FormalBall) -> Fraction:
    """Scale of the affine map place_in_region uses for these points."""
    if region.radius > 1:
        raise PolishForgeError(f"region radius must be at most 1, got {region.radius}")
    length = max([len(region.center.coords), *(len(p.coords) for p in points)])
    factor = region.radius
    for i in range(1, length + 1):
        c = region.center.coord(i)
        factor = min(factor, c, 1 - c)
    return factor


def place_in_region(points: Sequence[HCPoint], region: FormalBall) -> list[HCPoint]:
    """Map points of the unit cube into region by y_i = c_i + f (x_i - 1/2).

    The factor f is at most the region radius and the room left around every
    active center coordinate, so images lie within radius/2 of the center,
    stay inside the open cube and all distances scale exactly by f.
    """
    factor = contraction_factor(points, region)
    if factor <= 0:
        raise PolishForgeError("contraction factor is not positive; region touches the cube boundary")
    length = max([len(region.center.coords), *(len(p.coords) for p in points)])
    half = Fraction(1, 2)
    placed = []
    for point in points:
        placed.append(
            HCPoint(
                tuple(
                    region.center.coord(i) + factor * (point.coord(i) - half)
                    for i in range(1, length + 1)
                )
            )
        )
    return placed


def shift(point: HCPoint, index: int, delta: Fraction) -> HCPoint:
    """Add delta to one coordinate."""
    length = max(len(point.coords), index)
    coords = list(point.padded(length))
    coords[index - 1] += delta
    return HCPoint(tuple(coords))


def translate(point: HCPoint, source: HCPoint, target: HCPoint) -> HCPoint:
    """Translate point by target - source."""
    length = max(len(point.coords), len(source.coords), len(target.coords))
    return HCPoint(
        tuple(point.coord(i) + target.coord(i) - source.coord(i) for i in range(1, length + 1))
    )


def reflect(point: HCPoint, index: int, about: Fraction) -> HCPoint:
    """Reflect one coordinate about a value."""
    length = max(len(point.coords), index)
    coords = list(point.padded(length))
    coords[index - 1] = 2 * about - coords[index - 1]
    return HCPoint(tuple(coords))


def in_open_cube(point: HCPoint, length: int) -> bool:
    """True iff coordinates 1..length lie strictly inside (0, 1)."""
    return all(0 < point.coord(i) < 1 for i in range(1, length + 1))


class PointCloud:
    """A point set rescaled onto a common integer grid.

    With L the lcm of all coordinate denominators and K the longest support,
    every distance times S = L * 2^K is the integer sum_j |X_j - Y_j| 2^(K-j)
    where X = L * x. Thresholds are converted once per query, so comparisons
    stay exact.
    """

    def __init__(self, points: Iterable[HCPoint]) -> None:
        self.points: tuple[HCPoint, ...] = tuple(points)
        self.dimension = max((len(p.coords) for p in self.points), default=0)
        lcm = 1
        for point in self.points:
            for value in point.coords:
                lcm = math.lcm(lcm, value.denominator)
        self.scale = lcm * 2**self.dimension
        wide = 4 * self.scale >= _INT64_LIMIT
        self._dtype: npt.DTypeLike = object if wide else np.int64
        rows = [
            [int(value * lcm) for value in point.padded(self.dimension)] for point in self.points
        ]
        self._grid = np.array(rows, dtype=self._dtype).reshape(len(self.points), self.dimension)
        self._weights = [2 ** (self.dimension - j) for j in range(1, self.dimension + 1)]

    def __len__(self) -> int:
        return len(self.points)

    def to_fraction(self, scaled: int) -> Fraction:
        """Convert a scaled integer distance back to an exact rational."""
        return Fraction(int(scaled), self.scale)

    def strict_bound(self, threshold: Fraction) -> int:
        """Integer c with d < threshold iff scaled distance < c."""
        return math.ceil(threshold * self.scale)

    def weak_bound(self, threshold: Fraction) -> int:
        """Integer c with d <= threshold iff scaled distance <= c."""
        return math.floor(threshold * self.scale)

    def distances(self, rows: Sequence[int], cols: Sequence[int]) -> npt.NDArray[np.generic]:
        """Scaled distance matrix between two index lists (single block)."""
        left = self._grid[np.asarray(rows, dtype=np.intp)]
        right = self._grid[np.asarray(cols, dtype=np.intp)]
        total = np.zeros((len(rows), len(cols)), dtype=self._dtype)
        for j, weight in enumerate(self._weights):
            diff = np.abs(left[:, j][:, None] - right[:, j][None, :])
            total += diff * weight
        return total

    def within(
        self,
        rows: Sequence[int],
        cols: Sequence[int],
        threshold: Fraction,
        *,
        strict: bool,
    ) -> npt.NDArray[np.bool_]:
        """Boolean matrix of d(row, col) < threshold (or <= when not strict)."""
        result = np.zeros((len(rows), len(cols)), dtype=bool)
        if not rows or not cols:
            return result
        if threshold < 0 or (strict and threshold == 0):
            return result
        bound = self.strict_bound(threshold) if strict else self.weak_bound(threshold)
        for start in range(0, len(rows), CHUNK_ROWS):
            block = self.distances(rows[start : start + CHUNK_ROWS], cols)
            result[start : start + len(block)] = (block < bound) if strict else (block <= bound)
        return result

    def min_distances(self, rows: Sequence[int], cols: Sequence[int]) -> list[int]:
        """Scaled distance from each row point to its nearest col point."""
        if not cols:
            raise ValueError("min_distances needs at least one column point")
        mins: list[int] = []
        for start in range(0, len(rows), CHUNK_ROWS):
            block = self.distances(rows[start : start + CHUNK_ROWS], cols)
            mins.extend(int(v) for v in block.min(axis=1))
        return mins

    def max_distance(self, origin: int, cols: Sequence[int]) -> Fraction:
        """Largest exact distance from one point to a set of points."""
        if not cols:
            return Fraction(0)
        best = 0
        for start in range(0, len(cols), CHUNK_ROWS * 8):
            block = self.distances([origin], cols[start : start + CHUNK_ROWS * 8])
            best = max(best, int(block.max()))
        return self.to_fraction(best)
