"""Nested sphere nets for one region of the limit encoder.

A region of index n lives on the weighted l1 sphere U of radius rho around its
center, spanned by coordinates 1 .. k+1 with k = 2n+2, so U is S^(2n+2). Its
equator E (coordinate k+1 at the center value) is S^(2n+1). Points are handled
through their offsets o from the center, scaled so that the cube distance of
two points is the l1 distance of their offsets.

Off the poles, a point o of U has a foot z = o_E rho / (rho - |h|) on E and a
height h = o_(k+1), with o = (1 - |h|/rho) z + h e_(k+1). A sheet is the graph
of a height function H over E, an embedded S^(2n+1) inside U.

Odd phases refine the current sheet. Even phases keep the sheet's net and add
points of U; when another odd phase follows, every added point gets a foot of
its own, so the next sheet is raised through all enumerated points by tents.
Nothing is left behind when the bit flips.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from polishforge.compiler import LATTICE_CAPS, canonical_vector, final_level, lattice_vectors
from polishforge.errors import StreamInvariantError
from polishforge.exactgeom import HCPoint
from polishforge.presentation import Piece, assemble_stream

logger = logging.getLogger(__name__)

Offset = tuple[Fraction, ...]
Foot = tuple[Fraction, ...]


def l1(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    """Plain l1 distance of two offsets of equal length."""
    return sum((abs(a - b) for a, b in zip(x, y, strict=True)), Fraction(0))


def slide(foot: Foot, amount: Fraction) -> Foot:
    """Move amount of l1 mass from the largest coordinate to the next one.

    The result stays on the same face of E while amount is below the largest
    absolute coordinate.
    """
    i = max(range(len(foot)), key=lambda a: (abs(foot[a]), -a))
    j = (i + 1) % len(foot)
    moved = list(foot)
    moved[i] -= amount if foot[i] > 0 else -amount
    moved[j] += -amount if foot[j] < 0 else amount
    return tuple(moved)


@dataclass(frozen=True)
class RegionSphere:
    """The sphere U of one region: center, gap radius and equator axes."""

    center: HCPoint
    rho: Fraction
    k: int

    def point(self, offset: Offset) -> HCPoint:
        length = max(len(self.center.coords), len(offset))
        coords = [self.center.coord(i) for i in range(1, length + 1)]
        for axis, value in enumerate(offset, start=1):
            coords[axis - 1] += value * 2**axis
        return HCPoint(tuple(coords))

    def offset(self, point: HCPoint) -> Offset:
        return tuple(
            (point.coord(axis) - self.center.coord(axis)) / 2**axis
            for axis in range(1, self.k + 2)
        )

    def lattice_foot(self, vector: tuple[int, ...], level: int) -> Foot:
        return tuple(self.rho * Fraction(v, level) for v in vector)

    def lift(self, foot: Foot, height: Fraction) -> Offset:
        scale = 1 - abs(height) / self.rho
        return (*(scale * z for z in foot), height)

    def foot(self, offset: Offset) -> Foot:
        """Foot of an offset off the poles."""
        scale = self.rho / (self.rho - abs(offset[-1]))
        return tuple(o * scale for o in offset[:-1])

    def is_pole(self, offset: Offset) -> bool:
        return abs(offset[-1]) == self.rho

    def pole(self, sign: int) -> Offset:
        return (*(Fraction(0) for _ in range(self.k)), sign * self.rho)


@dataclass(frozen=True)
class Tent:
    """Pulls the height function to height on the open l1 ball of radius around foot."""

    foot: Foot
    height: Fraction
    radius: Fraction

    def weight(self, foot: Foot) -> Fraction:
        distance = l1(foot, self.foot)
        return 1 - distance / self.radius if distance < self.radius else Fraction(0)


@dataclass(frozen=True)
class Sheet:
    """Graph of a height function over E, folded from tents in order."""

    tents: tuple[Tent, ...] = ()

    def height(self, foot: Foot) -> Fraction:
        value = Fraction(0)
        for tent in self.tents:
            w = tent.weight(foot)
            if w:
                value = (1 - w) * value + w * tent.height
        return value

    def raised(self, data: dict[Foot, Fraction]) -> tuple["Sheet", list[Foot]]:
        """Sheet through every (foot, height) of data, and the feet that needed a tent.

        A new tent reaches no other data foot, so earlier data keeps its height.
        """
        fresh = [foot for foot, height in data.items() if self.height(foot) != height]
        tents = []
        for foot in fresh:
            radius = min((l1(foot, other) for other in data if other != foot), default=Fraction(1))
            tents.append(Tent(foot, data[foot], radius))
        return Sheet(self.tents + tuple(tents)), fresh


def ring_amount(phase: int, index: int, level: int, k: int) -> Fraction:
    """Slide amount, as a multiple of rho, of the index-th height at a level.

    Amounts are not dyadic multiples of rho and stay below rho / (2 k level),
    so a slid foot never reaches another lattice foot of its level.
    """
    return Fraction(3 * index + 1, 6 * level) / (2 ** (phase + 1) * k * level)


def refine_path(
    at: Callable[[Fraction], Offset], left: Fraction, right: Fraction, mesh: Fraction
) -> list[Offset]:
    """Offsets at(a) for a from left to right, consecutive ones at most mesh apart."""
    done = [(left, at(left))]
    pending = [(right, at(right))]
    while pending:
        a, offset = pending[-1]
        last_a, last = done[-1]
        if l1(last, offset) <= mesh:
            done.append(pending.pop())
        else:
            middle = (last_a + a) / 2
            pending.append((middle, at(middle)))
    return [offset for _, offset in done]


class RegionNets:
    """Builds the phase pieces of one region, one phase after the other."""

    def __init__(self, geometry: RegionSphere, budget: int) -> None:
        self.geometry = geometry
        self.budget = budget
        self.odd_cap = LATTICE_CAPS.get(geometry.k - 1, 2)
        self.even_cap = LATTICE_CAPS.get(geometry.k, 2)
        self.first = (1, *([0] * (geometry.k - 1)))
        # slid feet -> (base foot, amount)
        self.lines: dict[Foot, tuple[Foot, Fraction]] = {}
        self.pole_feet: dict[int, Foot] = {}
        self.used: set[Foot] = set()

    def piece(self, phases: list[tuple[int, int, int]], anchor: HCPoint) -> Piece:
        """Region piece: the first E vertex, then one child per phase."""
        geometry = self.geometry
        start_point = geometry.point(geometry.lift(geometry.lattice_foot(self.first, 1), Fraction(0)))
        region = Piece(levels=[[start_point]], anchor=anchor)
        sheet = Sheet()
        for index, (start, end, bit) in enumerate(phases):
            if bit and index == 0:
                levels = self._sheet_levels(sheet, self.odd_cap)
            elif bit:
                data = self._data(self._enumerated(region, anchor, start))
                sheet, fresh = sheet.raised(data)
                levels = self._odd_levels(sheet, data, fresh)
                logger.debug("Raised %d tents for the phase at stage %d", len(fresh), start)
            elif index + 1 < len(phases):
                levels = self._ring_levels(sheet, index)
            else:
                levels = self._sphere_levels()
            region.children.append(
                Piece(
                    levels=[[geometry.point(o) for o in level] for level in levels],
                    anchor=start_point,
                    not_before=start,
                    until=end if end < self.budget else None,
                    eager=start > 0,
                )
            )
        return region

    def _enumerated(self, region: Piece, anchor: HCPoint, stage: int) -> list[HCPoint]:
        stream = assemble_stream(Piece(levels=[[anchor]], children=[region]), stage)
        return [p for p in stream.points if p != anchor]

    def _data(self, points: list[HCPoint]) -> dict[Foot, Fraction]:
        data: dict[Foot, Fraction] = {}
        for point in points:
            offset = self.geometry.offset(point)
            if self.geometry.is_pole(offset):
                sign = 1 if offset[-1] > 0 else -1
                if sign not in self.pole_feet:
                    raise StreamInvariantError("enumerated pole has no foot", 0)
                foot = self.pole_feet[sign]
            else:
                foot = self.geometry.foot(offset)
            if data.setdefault(foot, offset[-1]) != offset[-1]:
                raise StreamInvariantError("two enumerated points share a foot", 0)
        return data

    def _sheet_level(self, sheet: Sheet, level: int, seen: set[tuple[int, ...]]) -> list[Offset]:
        fresh = []
        for vector in lattice_vectors(self.geometry.k, level):
            key = canonical_vector(vector, level)
            if key in seen:
                continue
            seen.add(key)
            foot = self.geometry.lattice_foot(vector, level)
            self.used.add(foot)
            fresh.append(self.geometry.lift(foot, sheet.height(foot)))
        return fresh

    def _sheet_levels(self, sheet: Sheet, cap: int) -> list[list[Offset]]:
        last = final_level(self.geometry.rho, self.budget, cap)
        seen: set[tuple[int, ...]] = set()
        levels = []
        level = 1
        while level <= last:
            levels.append(self._sheet_level(sheet, level, seen))
            level *= 2
        return levels

    def _odd_levels(
        self, sheet: Sheet, data: dict[Foot, Fraction], fresh: list[Foot]
    ) -> list[list[Offset]]:
        """Sheet lattice, plus a dense path from each raised foot's base through its line."""
        levels = self._sheet_levels(sheet, self.odd_cap)
        last = final_level(self.geometry.rho, self.budget, self.odd_cap)
        mesh = max(Fraction(1, 2 ** (self.budget + 2)), 2 * self.geometry.rho / last)
        stops: dict[Foot, set[Fraction]] = {}
        for foot in data:
            if foot in self.lines:
                base, amount = self.lines[foot]
                stops.setdefault(base, {Fraction(0)}).add(amount)
        bases = set()
        for foot in fresh:
            if foot not in self.lines:
                raise StreamInvariantError("raised point has no slide line", 0)
            bases.add(self.lines[foot][0])
        for base in sorted(bases):

            def at(amount: Fraction, base: Foot = base) -> Offset:
                foot = slide(base, amount) if amount else base
                return self.geometry.lift(foot, sheet.height(foot))

            amounts = sorted(stops[base])
            for left, right in zip(amounts, amounts[1:], strict=False):
                levels[0].extend(refine_path(at, left, right, mesh))
        return levels

    def _ring_levels(self, sheet: Sheet, phase: int) -> list[list[Offset]]:
        """Sheet lattice plus points of U at heights m rho / N on slid feet of their own."""
        geometry = self.geometry
        last = final_level(geometry.rho, self.budget, self.even_cap)
        seen: set[tuple[int, ...]] = set()
        levels = []
        level = 1
        while level <= last:
            fresh = self._sheet_level(sheet, level, seen)
            heights = [m for m in range(-level, level + 1) if m]
            for vector in lattice_vectors(geometry.k, level):
                base = geometry.lattice_foot(vector, level)
                for index, m in enumerate(heights):
                    if abs(m) == level:
                        if level == 1 and vector == self.first:
                            fresh.append(self._pole(base, m, phase, index))
                        continue
                    if level > 1 and m % 2 == 0 and all(v % 2 == 0 for v in vector):
                        continue
                    amount = ring_amount(phase, index, level, geometry.k) * geometry.rho
                    foot = slide(base, amount)
                    if foot in self.used:
                        continue
                    self.used.add(foot)
                    self.lines[foot] = (base, amount)
                    fresh.append(geometry.lift(foot, geometry.rho * Fraction(m, level)))
            levels.append(fresh)
            level *= 2
        return levels

    def _pole(self, base: Foot, sign: int, phase: int, index: int) -> Offset:
        if sign not in self.pole_feet:
            amount = ring_amount(phase, index, 1, self.geometry.k) * self.geometry.rho
            foot = slide(base, amount)
            self.used.add(foot)
            self.lines[foot] = (base, amount)
            self.pole_feet[sign] = foot
        return self.geometry.pole(sign)

    def _sphere_levels(self) -> list[list[Offset]]:
        """Plain lattice of U, for an even phase that runs to the end."""
        geometry = self.geometry
        last = final_level(geometry.rho, self.budget, self.even_cap)
        seen: set[tuple[int, ...]] = set()
        levels = []
        level = 1
        while level <= last:
            fresh = []
            for vector in lattice_vectors(geometry.k + 1, level):
                key = canonical_vector(vector, level)
                if key not in seen:
                    seen.add(key)
                    fresh.append(tuple(geometry.rho * Fraction(v, level) for v in vector))
            levels.append(fresh)
            level *= 2
        return levels
