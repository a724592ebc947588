"""Z_(D,2): spheres with a gated rank-one fringe, compactified next to omega^2+1.

Region R_n holds S^(n+1) with the vertex p on coordinate 1. Points p_a converge
to p along coordinate n+3, and points p_ab converge to p_a along coordinate
n+4. Only the p_ab with (n, a, b) in the witness table are enumerated, from
stage b on. When infinitely many p_a collect infinitely many p_ab, rank-one
points accumulate at p. The stream stays compact.
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
    sphere_levels,
    sphere_radius,
    sphere_top,
)
from polishforge.exactgeom import HCPoint, shift
from polishforge.models import PresentationStream
from polishforge.presentation import Piece, assemble_stream
from polishforge.spaceterm import Ordinal, SpaceTerm, normalize, z_term

logger = logging.getLogger(__name__)


def fringe_offsets(region: Slot, budget: int) -> list[Fraction]:
    """Metric distances D_a = (radius / 2) 2^-a of p_a from p, while above the stage floor."""
    floor = Fraction(1, 2 ** (budget + 1))
    offsets = []
    a = 0
    while Fraction(9, 8) * region.radius / 2 ** (a + 1) >= floor:
        offsets.append(region.radius / 2 ** (a + 1))
        a += 1
    return offsets


def _fringe(
    n: int, vertex: HCPoint, region: Slot, witness: WitnessSet, budget: int
) -> list[Piece]:
    d = n + 1
    pieces = []
    for a, distance in enumerate(fringe_offsets(region, budget)):
        p_a = shift(vertex, d + 2, distance * 2 ** (d + 2))
        gated = [
            Piece(
                levels=[[shift(p_a, d + 3, distance / 2 ** (b + 1) * 2 ** (d + 3))]],
                anchor=p_a,
                not_before=b,
                eager=True,
            )
            for b in range(budget)
            if (n, a, b) in witness
        ]
        pieces.append(Piece(levels=[[p_a]], anchor=vertex, children=gated))
    return pieces


class ZD2Preset:
    """Spheres with gated fringes in regions R_n, plus one omega^2+1 block."""

    name = "zd2"
    arity = 3

    def build(
        self,
        witness: WitnessSet,
        budget: int,
        *,
        count: int | None = None,
        **_: Any,
    ) -> PresentationStream:
        regions = count if count is not None else witness.extent(0)
        slots = alpha_slots(TOP_CENTER, TOP_RADIUS, budget, regions + 1)
        children = []
        for n, region in enumerate(slots[:regions]):
            d = n + 1
            rho = sphere_radius(d, region.center, region.radius)
            vertex = sphere_top(region.center, rho)
            children.append(
                Piece(
                    levels=sphere_levels(d, region.center, rho, budget),
                    anchor=TOP_CENTER,
                    children=_fringe(n, vertex, region, witness, budget),
                )
            )
        block = slots[regions]
        ordinal = compile_model(
            normalize(Ordinal(2)), block.center, block.radius, budget, anchor=TOP_CENTER
        )
        children.append(ordinal.piece)
        stream = assemble_stream(Piece(levels=[[TOP_CENTER]], children=children), budget)
        logger.info("Z_D,2 preset: %d regions, %d points", regions, len(stream.ids))
        return stream

    def skeleton_term(self, witness: WitnessSet) -> SpaceTerm:
        return z_term([True] * witness.extent(0), 2)
