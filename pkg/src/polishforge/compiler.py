"""Compilation of space terms to compact presentation streams.

Every term is laid out in a region B(c, R) of the cube and turned into a tree
of scheduler pieces:

- a sphere S^d is the metric sphere of the weighted l1 norm around c, sampled
  on nested lattices (level N holds the integer vectors with sum |n_i| = N);
- a compactification places copy i at c + k 2^-i e_1 with k = min(R, 1 - c_1)/2,
  anchored at the point at infinity c;
- a sum uses the same slots without the point at infinity;
- a wedge of two parts places each part in B(c, R/4), reflects coordinate 1
  where needed so the first base is the rightmost point of its part and the
  second the leftmost, and translates both bases onto c.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction

from polishforge.errors import UnsupportedTermError
from polishforge.exactgeom import (
    FormalBall,
    HCPoint,
    contraction_factor,
    in_open_cube,
    place_in_region,
    reflect,
    shift,
    translate,
)
from polishforge.models import PresentationStream
from polishforge.presentation import Piece, assemble_stream
from polishforge.spaceterm import (
    AlphaOmega,
    Empty,
    OmegaSum,
    One,
    Ordinal,
    Pointed,
    SpaceTerm,
    Sphere,
    SPi,
    SSigma,
    Sum,
    Wedge,
    format_term,
    normalize,
    unfold,
)

logger = logging.getLogger(__name__)

# Largest sphere dimension compile accepts
MAX_COMPILED_SPHERE = 4

# Finest lattice level per sphere dimension
LATTICE_CAPS = {0: 1, 1: 1024, 2: 4, 3: 4, 4: 4, 5: 2, 6: 2}

# Number of coordinates of the top region's center
TOP_LENGTH = 8
TOP_CENTER = HCPoint(tuple(Fraction(1, 2) for _ in range(TOP_LENGTH)))
TOP_RADIUS = Fraction(1)


@dataclass
class Model:
    """A compiled term: its piece tree and distinguished points."""

    piece: Piece
    top: HCPoint
    isolated: HCPoint | None = None

    def points(self) -> list[HCPoint]:
        return list(self.piece.subtree_points())


@dataclass(frozen=True)
class Slot:
    """A separated sub-region of a compactification or sum layout."""

    index: int
    center: HCPoint
    radius: Fraction
    distance: Fraction = field(default=Fraction(0))


def axes_unit_radius(axes: tuple[int, ...]) -> Fraction:
    """Radius of the unit lattice sphere spanned by axes, which then fits the unit cube."""
    return Fraction(1, 2 ** (max(axes) + 1))


def unit_radius(d: int) -> Fraction:
    """Radius 2^-(d+2) of the unit model of S^d in coordinates 1 .. d+1."""
    return axes_unit_radius(sphere_axes(d))


def sphere_axes(d: int) -> tuple[int, ...]:
    return tuple(range(1, d + 2))


def gap_value(s: int) -> Fraction:
    """2^-(s+1) (1 + 2^-(2s+1)): strictly between r_(s+1) and r_s / 2."""
    return Fraction(1, 2 ** (s + 1)) * (1 + Fraction(1, 2 ** (2 * s + 1)))


def gap_radius(bound: Fraction, *, strict: bool = False) -> Fraction:
    """Largest gap value (s >= 1) not above bound, or strictly below it."""
    if bound <= 0:
        raise UnsupportedTermError(f"no sphere radius fits below {bound}")
    s = 1
    while gap_value(s) > bound or (strict and gap_value(s) == bound):
        s += 1
    return gap_value(s)


def lattice_vectors(dim: int, total: int) -> list[tuple[int, ...]]:
    """Integer vectors of length dim with sum of absolute values equal to total."""
    if dim == 1:
        return [(total,), (-total,)] if total else [(0,)]
    vectors = []
    for head in range(-total, total + 1):
        for tail in lattice_vectors(dim - 1, total - abs(head)):
            vectors.append((head, *tail))
    return vectors


def final_level(radius: Fraction, budget: int, cap: int) -> int:
    """Smallest power of two N with 2 radius / N <= 2^-(budget+1), at most cap."""
    n = 1
    while n < cap and 2 * radius / n > Fraction(1, 2 ** (budget + 1)):
        n *= 2
    return n


def _unit_point(
    vector: tuple[int, ...], level: int, axes: tuple[int, ...], length: int
) -> HCPoint:
    rho0 = axes_unit_radius(axes)
    half = Fraction(1, 2)
    coords = [half] * length
    for axis, value in zip(axes, vector, strict=True):
        coords[axis - 1] = half + rho0 * 2**axis * Fraction(value, level)
    return HCPoint(tuple(coords))


def lattice_levels(
    axes: tuple[int, ...],
    center: HCPoint,
    radius: Fraction,
    budget: int,
    cap: int,
) -> list[list[HCPoint]]:
    """Nested lattice levels of the radius-r sphere spanned by axes around center.

    Level N = 1, 2, 4, ... lists only the points that are new at that level;
    neighbours at level N are 2 r / N apart.
    """
    length = max(len(center.coords), max(axes))
    factor = radius / axes_unit_radius(axes)
    if factor > 1:
        raise UnsupportedTermError(f"lattice radius {radius} is too large for axes {axes}")
    region = FormalBall(center, factor)
    sample = [_unit_point((1, *([0] * (len(axes) - 1))), 1, axes, length)]
    if contraction_factor(sample, region) != factor:
        raise UnsupportedTermError(f"sphere of radius {radius} does not fit at {center.coords}")
    last = final_level(radius, budget, cap)
    levels = []
    seen: set[tuple[int, ...]] = set()
    n = 1
    while n <= last:
        fresh = []
        for vector in lattice_vectors(len(axes), n):
            reduced = canonical_vector(vector, n)
            if reduced in seen:
                continue
            seen.add(reduced)
            fresh.append(_unit_point(vector, n, axes, length))
        levels.append(place_in_region(fresh, region))
        n *= 2
    return levels


def sphere_levels(
    d: int, center: HCPoint, radius: Fraction, budget: int
) -> list[list[HCPoint]]:
    """Lattice levels of S^d in coordinates 1 .. d+1."""
    return lattice_levels(sphere_axes(d), center, radius, budget, LATTICE_CAPS.get(d, 2))


def canonical_vector(vector: tuple[int, ...], level: int) -> tuple[int, ...]:
    """Canonical representative of a lattice point across levels."""
    while level > 1 and all(v % 2 == 0 for v in vector):
        vector = tuple(v // 2 for v in vector)
        level //= 2
    return (*vector, level)


def sphere_top(center: HCPoint, radius: Fraction) -> HCPoint:
    """Vertex of a lattice sphere in the + direction of coordinate 1."""
    return shift(center, 1, 2 * radius)


def sphere_radius(
    d: int, center: HCPoint, radius: Fraction, *, below: Fraction | None = None
) -> Fraction:
    """Gap radius of the largest S^d that fits B(center, radius).

    With below, the result is also strictly smaller than below.
    """
    sample = HCPoint(tuple(Fraction(1, 2) for _ in range(max(len(center.coords), d + 1))))
    bound = unit_radius(d) * contraction_factor([sample], FormalBall(center, radius))
    if below is None:
        return gap_radius(bound)
    return gap_radius(min(bound, below), strict=True)


def alpha_slots(
    center: HCPoint,
    radius: Fraction,
    budget: int,
    count: int | None = None,
    *,
    side: int = 1,
) -> list[Slot]:
    """Separated slots converging to center along coordinate 1.

    Without a count, slots stop once a copy would stay within 2^-(budget+1)
    of the center for the whole budget. side = -1 mirrors the layout.
    """
    room = 1 - center.coord(1) if side > 0 else center.coord(1)
    kappa = min(radius, room) / 2
    if kappa <= 0:
        raise UnsupportedTermError("region touches the cube boundary")
    floor = Fraction(1, 2 ** (budget + 1))
    slots = []
    i = 0
    while count is None or i < count:
        delta = kappa / 2**i
        distance = delta / 2
        if count is None and Fraction(9, 8) * distance < floor:
            break
        slots.append(
            Slot(
                index=i,
                center=shift(center, 1, side * delta),
                radius=distance / 4,
                distance=distance,
            )
        )
        i += 1
    return slots


def map_piece(piece: Piece, fn: Callable[[HCPoint], HCPoint]) -> Piece:
    """Apply a point map to every point and anchor of a piece tree."""
    return Piece(
        levels=[[fn(p) for p in level] for level in piece.levels],
        anchor=fn(piece.anchor) if piece.anchor is not None else None,
        children=[map_piece(child, fn) for child in piece.children],
        not_before=piece.not_before,
        until=piece.until,
        eager=piece.eager,
    )


def _extreme(points: list[HCPoint], base: HCPoint, *, largest: bool) -> bool:
    """True iff base is the unique point with the largest (or smallest) coordinate 1."""
    values = [p.coord(1) for p in points]
    target = max(values) if largest else min(values)
    return base.coord(1) == target and values.count(target) == 1


def compile_model(
    term: SpaceTerm,
    center: HCPoint,
    radius: Fraction,
    budget: int,
    anchor: HCPoint | None = None,
) -> Model:
    """Lay out a normalized term in B(center, radius)."""
    match term:
        case One():
            return Model(Piece(levels=[[center]], anchor=anchor), top=center, isolated=center)
        case Sphere(d):
            return _compile_sphere(d, center, radius, budget, anchor)
        case AlphaOmega(inner):
            children = []
            isolated = None
            for slot in alpha_slots(center, radius, budget):
                model = compile_model(inner, slot.center, slot.radius, budget, anchor=center)
                if slot.index == 0:
                    isolated = model.isolated
                children.append(model.piece)
            piece = Piece(levels=[[center]], anchor=anchor, children=children)
            return Model(piece, top=center, isolated=isolated)
        case Sum(parts):
            models = [
                compile_model(part, slot.center, slot.radius, budget, anchor=anchor)
                for part, slot in zip(
                    parts, alpha_slots(center, radius, budget, len(parts)), strict=True
                )
            ]
            piece = Piece(children=[m.piece for m in models])
            return Model(piece, top=models[0].top, isolated=models[0].isolated)
        case Wedge(parts):
            return _compile_wedge(parts, center, radius, budget, anchor)
        case Ordinal() | SSigma() | SPi():
            return compile_model(unfold(term), center, radius, budget, anchor)
        case OmegaSum():
            raise UnsupportedTermError("countably many separated copies are not compact; use alpha")
        case Empty():
            raise UnsupportedTermError("the empty space has no presentation")
    raise UnsupportedTermError(f"cannot compile {term!r}")


def _compile_sphere(
    d: int, center: HCPoint, radius: Fraction, budget: int, anchor: HCPoint | None
) -> Model:
    if d > MAX_COMPILED_SPHERE:
        raise UnsupportedTermError(f"spheres above dimension {MAX_COMPILED_SPHERE} are not compiled")
    rho = sphere_radius(d, center, radius)
    levels = sphere_levels(d, center, rho, budget)
    top = sphere_top(center, rho)
    return Model(
        Piece(levels=levels, anchor=anchor),
        top=top,
        isolated=top if d == 0 else None,
    )


def _compile_wedge(
    parts: tuple[Pointed, ...],
    center: HCPoint,
    radius: Fraction,
    budget: int,
    anchor: HCPoint | None,
) -> Model:
    if len(parts) > 2:
        raise UnsupportedTermError("wedges of more than two non-point parts are not compiled")
    axis = center.coord(1)
    placed = []
    for position, part in enumerate(parts):
        model = compile_model(part.term, center, radius / 4, budget)
        base = model.top if part.base == "top" else model.isolated
        if base is None:
            raise UnsupportedTermError(f"{format_term(part.term)} has no isolated basepoint")
        points = model.points()
        largest = position == 0
        piece = model.piece
        if not _extreme(points, base, largest=largest):
            mirrored = [reflect(p, 1, axis) for p in points]
            base = reflect(base, 1, axis)
            if not _extreme(mirrored, base, largest=largest):
                raise UnsupportedTermError(f"basepoint of {format_term(part.term)} is not extreme")
            piece = map_piece(piece, lambda p: reflect(p, 1, axis))
        source = base
        moved = map_piece(piece, lambda p, source=source: translate(p, source, center))
        moved.anchor = center
        placed.append(moved)
    length = max(len(p.coords) for piece in placed for p in piece.subtree_points())
    for piece in placed:
        for point in piece.subtree_points():
            if not in_open_cube(point, length):
                raise UnsupportedTermError("wedge does not fit inside the open cube")
    root = Piece(levels=[[center]], anchor=anchor, children=placed)
    return Model(root, top=center, isolated=None)


def compile_term(term: SpaceTerm, budget: int) -> PresentationStream:
    """Compact stream of a concrete model of the term with `budget` stages."""
    normal = normalize(term)
    if isinstance(normal, Empty):
        raise UnsupportedTermError("the empty space has no presentation")
    model = compile_model(normal, TOP_CENTER, TOP_RADIUS, budget)
    stream = assemble_stream(model.piece, budget)
    logger.info(
        "Compiled %s: %d points over %d stages", format_term(normal), len(stream.ids), budget
    )
    return stream

