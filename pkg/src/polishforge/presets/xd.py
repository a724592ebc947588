"""Gated spheres S_(n,a,k) ~ S^(n+1) plus isolated points, compactified.

Each region (n, a, k) holds the lattice sequence q_0, q_1, ... of a sphere
S^(n+1). Point q_b is enumerated at the least stage s > b with (n, a, k, s) in
the witness table, so a region whose gate fires infinitely often is dense in
its sphere and one whose gate fires finitely often is a finite set of isolated
points. The stream is Polish: gated points carry no certificate.
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
    sphere_levels,
    sphere_radius,
)
from polishforge.config import DEFAULT_SPHERE_DIM_CAP
from polishforge.errors import UnsupportedTermError
from polishforge.exactgeom import HCPoint, hc_distance, shift
from polishforge.models import PresentationStream
from polishforge.presentation import polish_stream
from polishforge.spaceterm import Ordinal, SpaceTerm

logger = logging.getLogger(__name__)

# Finest cube grid level per cube dimension
CUBE_LEVEL_CAPS = {1: 8, 2: 4, 3: 3}


def region_keys(witness: WitnessSet) -> list[tuple[int, int, int]]:
    """Region tuples named by the table, by total then lexicographically."""
    keys = {(row[0], row[1], row[2]) for row in witness.rows}
    return sorted(keys, key=lambda key: (sum(key), key))


def gate_stage(witness: WitnessSet, key: tuple[int, int, int], b: int, budget: int) -> int | None:
    """Least s > b below budget with (n, a, k, s) in the table."""
    for s in range(b + 1, budget):
        if (*key, s) in witness:
            return s
    return None


def cube_levels(m: int, center: HCPoint, side: Fraction, budget: int) -> list[list[HCPoint]]:
    """Dyadic grids of the cube [-side/2, side/2]^m in coordinates 2 .. m+1, new points only."""
    levels: list[list[HCPoint]] = []
    seen: set[HCPoint] = set()
    cap = CUBE_LEVEL_CAPS.get(m, 2)
    level = 0
    while level <= cap and (level == 0 or side / 2**level > Fraction(1, 2 ** (budget + 1))):
        steps = 2**level
        grid: list[tuple[int, ...]] = [()]
        for _ in range(m):
            grid = [(*g, i) for g in grid for i in range(steps + 1)]
        fresh = []
        for cell in grid:
            point = center
            for axis, i in enumerate(cell, start=2):
                point = shift(point, axis, side * (Fraction(i, steps) - Fraction(1, 2)))
            if point not in seen:
                seen.add(point)
                fresh.append(point)
        levels.append(fresh)
        level += 1
    return levels


class XDPreset:
    """Gated sphere regions on one side of z, isolated points or cubes on the other."""

    name = "xd"
    arity = 4

    def build(
        self,
        witness: WitnessSet,
        budget: int,
        *,
        perfect: bool = False,
        sphere_dim_cap: int = DEFAULT_SPHERE_DIM_CAP,
        **_: Any,
    ) -> PresentationStream:
        events: list[tuple[int, HCPoint]] = [(0, TOP_CENTER)]
        keys = region_keys(witness)
        slots = alpha_slots(TOP_CENTER, TOP_RADIUS, budget, len(keys)) if keys else []
        for key, slot in zip(keys, slots, strict=True):
            if key[0] + 1 > sphere_dim_cap:
                raise UnsupportedTermError(f"region {key} needs S^{key[0] + 1} above the cap")
            events.extend(self._region_events(witness, key, slot, budget, perfect))
        for slot in alpha_slots(TOP_CENTER, TOP_RADIUS, budget, side=-1):
            stage = min(slot.index, budget - 1)
            if perfect:
                m = slot.index % 3 + 1
                for offset, level in enumerate(cube_levels(m, slot.center, slot.radius, budget)):
                    events.extend((min(stage + offset, budget - 1), p) for p in level)
            else:
                events.append((stage, slot.center))
        stream = polish_stream(events, budget)
        logger.info("X_D preset: %d regions, %d points", len(keys), len(stream.ids))
        return stream

    def _region_events(
        self,
        witness: WitnessSet,
        key: tuple[int, int, int],
        slot: Slot,
        budget: int,
        perfect: bool,
    ) -> list[tuple[int, HCPoint]]:
        d = key[0] + 1
        rho = sphere_radius(d, slot.center, slot.radius)
        levels = sphere_levels(d, slot.center, rho, budget)
        finest = levels[-1]
        events = []
        b = 0
        for j, level in enumerate(levels):
            spacing = 2 * rho / 2**j
            for q in level:
                stage = gate_stage(witness, key, b, budget)
                b += 1
                if stage is None:
                    continue
                events.append((stage, q))
                if perfect:
                    patch = [p for p in finest if hc_distance(p, q) < spacing / 4]
                    events.extend((stage, p) for p in patch)
        logger.debug("Region %s: %d gated points", key, len(events))
        return events

    def skeleton_term(self, witness: WitnessSet) -> SpaceTerm:
        return Ordinal(1)
