"""P_(D,1): spheres with circles S^1_(n,a) converging to a vertex, plus circle copies.

Circle S^1_(n,a) sits at metric distance D_a from the vertex p of the region's
S^(n+1) and has radius D_a / 4. In compact mode its lattice level j is kept
only when (n, a, b) is in the table for every b < j, so a circle is complete
exactly when its row never breaks. In Polish mode level 0 is always present
and levels 0 .. b are enumerated at stage b whenever (n, a, b) is in the table.
"""

import logging
from fractions import Fraction
from typing import Any

from polishforge.codec import WitnessSet
from polishforge.compiler import (
    TOP_CENTER,
    TOP_RADIUS,
    Slot,
    alpha_slots,
    compile_model,
    lattice_levels,
    sphere_levels,
    sphere_radius,
    sphere_top,
)
from polishforge.errors import GatePatternError
from polishforge.exactgeom import HCPoint, shift
from polishforge.models import PresentationStream
from polishforge.presentation import Piece, assemble_stream, polish_stream
from polishforge.spaceterm import (
    AlphaOmega,
    Ordinal,
    Pointed,
    SpaceTerm,
    Sphere,
    Sum,
    Wedge,
)

logger = logging.getLogger(__name__)

MODES = ("compact", "polish")


def drop_even_starts(witness: WitnessSet) -> WitnessSet:
    """Remove every row (n, 2a, 0) so that even-indexed circles never start complete."""
    rows = frozenset(row for row in witness.rows if not (row[2] == 0 and row[1] % 2 == 0))
    return WitnessSet(arity=witness.arity, rows=rows)


def allowed_levels(witness: WitnessSet, n: int, a: int, available: int) -> int:
    """Number of leading circle levels j with (n, a, b) in the table for all b < j."""
    j = 1
    while j < available and (n, a, j - 1) in witness:
        j += 1
    return j


def circle_offsets(region: Slot, budget: int) -> list[Fraction]:
    """Metric distances D_a = (radius / 2) 2^-a of the circles from p, above the stage floor."""
    floor = Fraction(1, 2 ** (budget + 1))
    offsets = []
    a = 0
    while Fraction(9, 8) * region.radius / 2 ** (a + 1) >= floor:
        offsets.append(region.radius / 2 ** (a + 1))
        a += 1
    return offsets


def circle_levels(
    n: int, vertex: HCPoint, distance: Fraction, budget: int
) -> list[list[HCPoint]]:
    """Lattice levels of S^1_(n,a) in coordinates n+3 and n+4."""
    d = n + 1
    center = shift(vertex, d + 2, distance * 2 ** (d + 2))
    return lattice_levels((d + 2, d + 3), center, distance / 4, budget, cap=1024)


class PD1Preset:
    """Spheres with gated circles in regions R_n, plus circle copies on the far side."""

    name = "pd1"
    arity = 3

    def build(
        self,
        witness: WitnessSet,
        budget: int,
        *,
        mode: str = "compact",
        count: int | None = None,
        **_: Any,
    ) -> PresentationStream:
        if mode not in MODES:
            raise GatePatternError(f"mode must be one of {MODES}, got {mode!r}")
        table = drop_even_starts(witness)
        regions = count if count is not None else witness.extent(0)
        slots = alpha_slots(TOP_CENTER, TOP_RADIUS, budget, regions)
        children = []
        circles: list[tuple[int, int, list[list[HCPoint]]]] = []
        for n, region in enumerate(slots):
            d = n + 1
            rho = sphere_radius(d, region.center, region.radius)
            vertex = sphere_top(region.center, rho)
            fringe = []
            for a, distance in enumerate(circle_offsets(region, budget)):
                levels = circle_levels(n, vertex, distance, budget)
                if mode == "compact":
                    kept = levels[: allowed_levels(table, n, a, len(levels))]
                    fringe.append(Piece(levels=kept, anchor=vertex))
                else:
                    circles.append((n, a, levels))
            children.append(
                Piece(
                    levels=sphere_levels(d, region.center, rho, budget),
                    anchor=TOP_CENTER,
                    children=fringe,
                )
            )
        for slot in alpha_slots(TOP_CENTER, TOP_RADIUS, budget, side=-1):
            copy = compile_model(Sphere(1), slot.center, slot.radius, budget, anchor=TOP_CENTER)
            children.append(copy.piece)
        root = Piece(levels=[[TOP_CENTER]], children=children)
        stream = assemble_stream(root, budget)
        if mode == "polish":
            stream = polish_stream(self._circle_events(stream, table, circles, budget), budget)
        logger.info("P_D,1 preset (%s): %d regions, %d points", mode, regions, len(stream.ids))
        return stream

    def _circle_events(
        self,
        skeleton: PresentationStream,
        table: WitnessSet,
        circles: list[tuple[int, int, list[list[HCPoint]]]],
        budget: int,
    ) -> list[tuple[int, HCPoint]]:
        events = [
            (stage.index, point) for stage in skeleton.stages for _, point in stage.new_points
        ]
        for n, a, levels in circles:
            events.extend((0, p) for p in levels[0])
            for b in range(budget):
                if (n, a, b) in table:
                    events.extend((b, p) for level in levels[: b + 1] for p in level)
        return events

    def skeleton_term(self, witness: WitnessSet) -> SpaceTerm:
        parts: list[SpaceTerm] = [
            Wedge((Pointed(Sphere(n + 1)), Pointed(Ordinal(1))))
            for n in range(witness.extent(0))
        ]
        parts.append(Sphere(1))
        return AlphaOmega(Sum(tuple(parts)))
