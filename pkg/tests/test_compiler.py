"""Tests for compiler module."""

from fractions import Fraction

import pytest

from polishforge.compiler import (
    TOP_CENTER,
    TOP_RADIUS,
    Model,
    alpha_slots,
    compile_model,
    compile_term,
    final_level,
    gap_radius,
    gap_value,
    lattice_vectors,
    map_piece,
    sphere_levels,
    sphere_radius,
    sphere_top,
    unit_radius,
)
from polishforge.errors import UnsupportedTermError
from polishforge.exactgeom import FormalBall, HCPoint, balls_formally_intersect, hc_distance, shift
from polishforge.models import cover_radius
from polishforge.presentation import Piece, check_certificate, refinement_sequence
from polishforge.spaceterm import (
    AlphaOmega,
    Empty,
    OmegaSum,
    One,
    Ordinal,
    Pointed,
    SpaceTerm,
    Sphere,
    Sum,
    Wedge,
)


@pytest.mark.parametrize("s", range(1, 10))
def test_gap_value_sits_between_radii(s: int) -> None:
    """Test that gap radii separate consecutive cover radii."""
    assert cover_radius(s + 1) < gap_value(s) < cover_radius(s) / 2


def test_gap_radius() -> None:
    """Test the largest gap value below a bound."""
    assert gap_value(1) == Fraction(9, 32)
    assert gap_radius(Fraction(1, 2)) == Fraction(9, 32)
    assert gap_radius(Fraction(9, 32)) == Fraction(9, 32)
    assert gap_radius(Fraction(9, 32), strict=True) == gap_value(2)
    with pytest.raises(UnsupportedTermError):
        gap_radius(Fraction(0))


def test_lattice_vectors_counts() -> None:
    """Test the number of l1 lattice vectors of each norm."""
    assert lattice_vectors(1, 0) == [(0,)]
    assert len(lattice_vectors(2, 1)) == 4
    assert len(lattice_vectors(2, 3)) == 12
    assert len(lattice_vectors(3, 1)) == 6
    assert all(sum(abs(v) for v in vector) == 2 for vector in lattice_vectors(3, 2))


def test_final_level_doubles_until_fine() -> None:
    """Test that the finest level resolves the budget or hits the cap."""
    assert final_level(Fraction(1, 32), 8, 1024) == 32
    assert final_level(Fraction(1, 32), 8, 4) == 4
    assert final_level(Fraction(1, 32), 2, 1024) == 1


@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_sphere_levels_lie_on_the_sphere(d: int) -> None:
    """Test that every lattice point is at exact distance rho from the center."""
    rho = sphere_radius(d, TOP_CENTER, TOP_RADIUS)
    levels = sphere_levels(d, TOP_CENTER, rho, 6)
    points = [p for level in levels for p in level]

    assert rho <= unit_radius(d) / 2
    assert all(hc_distance(p, TOP_CENTER) == rho for p in points)
    assert len(set(points)) == len(points)
    assert sphere_top(TOP_CENTER, rho) in levels[0]


def test_sphere_radius_below() -> None:
    """Test that a bound forces a strictly smaller radius."""
    rho = sphere_radius(1, TOP_CENTER, TOP_RADIUS)

    assert sphere_radius(1, TOP_CENTER, TOP_RADIUS, below=rho) < rho


def test_alpha_slots_layout() -> None:
    """Test that slots converge to the center and are pairwise separated."""
    slots = alpha_slots(TOP_CENTER, TOP_RADIUS, 6)

    assert len(slots) == 5
    for slot in slots:
        assert hc_distance(slot.center, TOP_CENTER) == slot.distance
        assert slot.center.coord(1) > TOP_CENTER.coord(1)
    balls = [FormalBall(slot.center, slot.radius) for slot in slots]
    for i, a in enumerate(balls):
        for b in balls[i + 1 :]:
            assert not balls_formally_intersect(a, b)
    assert len(alpha_slots(TOP_CENTER, TOP_RADIUS, 6, 3)) == 3
    assert all(s.center.coord(1) < Fraction(1, 2) for s in alpha_slots(TOP_CENTER, 1, 6, side=-1))


def test_alpha_slots_need_room() -> None:
    """Test that a center on the boundary has no room for slots."""
    with pytest.raises(UnsupportedTermError):
        alpha_slots(HCPoint.of(1, "1/2"), Fraction(1, 4), 6)


def test_map_piece_moves_anchors() -> None:
    """Test that point maps reach levels, anchors and children."""
    move = shift(TOP_CENTER, 2, Fraction(1, 8))
    child = Piece(levels=[[TOP_CENTER]], anchor=TOP_CENTER, not_before=2, eager=True)
    piece = Piece(levels=[[TOP_CENTER]], children=[child])

    moved = map_piece(piece, lambda p: shift(p, 2, Fraction(1, 8)))

    assert moved.levels == [[move]]
    assert moved.children[0].anchor == move
    assert moved.children[0].not_before == 2
    assert moved.children[0].eager


def test_compile_model_distinguished_points() -> None:
    """Test the top and isolated points of compiled models."""
    point = compile_model(One(), TOP_CENTER, TOP_RADIUS, 6)
    pair = compile_model(Sphere(0), TOP_CENTER, TOP_RADIUS, 6)
    circle = compile_model(Sphere(1), TOP_CENTER, TOP_RADIUS, 6)

    assert isinstance(point, Model)
    assert point.top == point.isolated == TOP_CENTER
    assert pair.isolated == pair.top
    assert len(pair.points()) == 2
    assert circle.isolated is None
    assert circle.top in circle.points()


def test_compile_rejects_unsupported_terms() -> None:
    """Test the terms compile refuses."""
    three = Wedge(tuple(Pointed(Sphere(1)) for _ in range(3)))

    with pytest.raises(UnsupportedTermError):
        compile_term(Empty(), 6)
    with pytest.raises(UnsupportedTermError):
        compile_term(OmegaSum(One()), 6)
    with pytest.raises(UnsupportedTermError):
        compile_term(Sphere(5), 6)
    with pytest.raises(UnsupportedTermError):
        compile_term(three, 6)
    with pytest.raises(UnsupportedTermError):
        compile_term(Wedge((Pointed(Sphere(1)), Pointed(Sphere(1), "isolated"))), 6)


def test_compile_sphere_zero_has_two_points() -> None:
    """Test that S^0 compiles to its two points."""
    stream = compile_term(Sphere(0), 6)

    assert stream.is_compact
    assert len(stream.ids) == 2
    assert stream.num_stages == 6


@pytest.mark.parametrize(
    "term",
    [
        One(),
        Sphere(1),
        Ordinal(1),
        Sum((Sphere(0), One())),
        AlphaOmega(Sphere(0)),
        Wedge((Pointed(Sphere(1)), Pointed(Sphere(1)))),
    ],
)
def test_compiled_streams_are_certified(term: SpaceTerm) -> None:
    """Test the certificate and refinement law at every stage of compiled streams."""
    stream = compile_term(term, 7)

    for s in range(stream.num_stages):
        check_certificate(stream, s)
        refinement_sequence(stream, s)


def test_wedge_glues_bases_at_the_center() -> None:
    """Test that both wedge parts touch the center and nothing else is shared."""
    model = compile_model(Wedge((Pointed(Sphere(1)), Pointed(Sphere(1)))), TOP_CENTER, TOP_RADIUS, 6)
    left, right = model.piece.children

    assert model.top == TOP_CENTER
    assert TOP_CENTER in left.own_points()
    assert TOP_CENTER in right.own_points()
    assert max(p.coord(1) for p in left.own_points()) == TOP_CENTER.coord(1)
    assert min(p.coord(1) for p in right.own_points()) == TOP_CENTER.coord(1)
