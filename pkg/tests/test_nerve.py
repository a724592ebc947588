"""Tests for nerve module."""

from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from polishforge.exactgeom import HCPoint, PointCloud
from polishforge.gf2 import dense_rank, to_dense
from polishforge.models import Cover
from polishforge.nerve import (
    SimplicialComplex,
    betti_gf2,
    chain_boundary,
    close_downward,
    cover_order,
    detect_holes,
    finite_modification,
    is_connected_cluster,
    nerve_summary,
    refines,
    witnessed_nerve,
)

HOLLOW_TRIANGLE = [(0, 1), (1, 2), (0, 2)]
OCTAHEDRON = [tuple(face) for face in product((0, 1), (2, 3), (4, 5))]


def _dense_betti(complex_: SimplicialComplex, d: int) -> int:
    n_d = len(complex_.faces_of_dim(d))
    lower = len(complex_.faces_of_dim(d - 1)) if d else 1
    upper = len(complex_.faces_of_dim(d))
    boundary = dense_rank(to_dense(complex_.boundary_columns(d), max(lower, 1))) if n_d else 0
    cobound_cols = complex_.boundary_columns(d + 1)
    higher = dense_rank(to_dense(cobound_cols, max(upper, 1))) if cobound_cols else 0
    return n_d - boundary - higher


def test_hollow_triangle_is_a_circle() -> None:
    """Test that a hollow triangle has one 1-hole and is connected."""
    complex_ = SimplicialComplex.from_maximal(HOLLOW_TRIANGLE)

    assert betti_gf2(complex_, 0) == 0
    assert betti_gf2(complex_, 1) == 1
    assert nerve_summary(complex_, 2) == {"face_counts": [3, 3], "betti": [0, 1, 0]}


def test_filled_triangle_and_cone_are_contractible() -> None:
    """Test that filling or coning off the circle kills the hole."""
    filled = SimplicialComplex.from_maximal([(0, 1, 2)])
    cone = SimplicialComplex.from_maximal([(0, 1, 3), (1, 2, 3), (0, 2, 3)])

    for complex_ in (filled, cone):
        assert [betti_gf2(complex_, d) for d in range(3)] == [0, 0, 0]


def test_octahedron_is_a_two_sphere() -> None:
    """Test the reduced GF(2) homology of the octahedron boundary."""
    complex_ = SimplicialComplex.from_maximal(OCTAHEDRON)

    assert complex_.dim == 2
    assert [betti_gf2(complex_, d) for d in range(4)] == [0, 0, 1, 0]


def test_two_points_have_reduced_betti_zero_one() -> None:
    """Test that two vertices give one reduced 0-class."""
    complex_ = SimplicialComplex.from_maximal([(0,), (1,)])

    assert betti_gf2(complex_, 0) == 1
    with pytest.raises(ValueError):
        betti_gf2(complex_, -1)


def test_close_downward_respects_max_dim() -> None:
    """Test that faces above max_dim are not generated."""
    faces = close_downward({(0, 1, 2, 3)}, 1)

    assert max(len(face) for face in faces) == 2
    assert len(faces) == 4 + 6


@given(
    st.lists(
        st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=4, unique=True),
        min_size=1,
        max_size=6,
    )
)
def test_betti_matches_dense_oracle_and_euler(maximal: list[list[int]]) -> None:
    """Test sparse Betti numbers against dense ranks and the Euler characteristic."""
    complex_ = SimplicialComplex.from_maximal(maximal, max_dim=4)
    degrees = range(complex_.dim + 1)
    betti = [betti_gf2(complex_, d) for d in degrees]

    assert betti == [_dense_betti(complex_, d) for d in degrees]
    euler = sum((-1) ** d * len(complex_.faces_of_dim(d)) for d in degrees) - 1
    assert sum((-1) ** d * b for d, b in enumerate(betti)) == euler


def test_detect_holes_returns_cycle() -> None:
    """Test that the detected 1-hole of a hollow triangle is a cycle."""
    complex_ = SimplicialComplex.from_maximal(HOLLOW_TRIANGLE)

    holes = detect_holes(complex_, 1, 4)

    assert len(holes) == 1
    assert holes[0].detected_at == 4
    assert set(holes[0].faces) == set(HOLLOW_TRIANGLE)
    assert chain_boundary(holes[0].faces) == set()
    assert not holes[0].modified


def test_detect_holes_on_octahedron() -> None:
    """Test that the 2-hole of the octahedron covers every triangle."""
    holes = detect_holes(SimplicialComplex.from_maximal(OCTAHEDRON), 2, 0)

    assert len(holes) == 1
    assert len(holes[0].faces) == 8
    assert chain_boundary(holes[0].faces) == set()


def test_chain_boundary() -> None:
    """Test boundaries of an edge and of a vertex pair."""
    assert chain_boundary([(0, 1)]) == {(0,), (1,)}
    assert chain_boundary([(0,), (1,)]) == set()
    assert chain_boundary([(0,)]) == {()}


def test_finite_modification_merges_witnessed_neighbours() -> None:
    """Test that witnessed neighbours merge into groups under the cap."""
    path = SimplicialComplex.from_maximal([(0, 1), (1, 2)])

    modification = finite_modification(path, 2)

    assert modification is not None
    assert modification.groups == {0: (0, 1), 2: (2,)}
    assert modification.complex.vertices == (0, 2)
    assert not modification.truncated
    assert finite_modification(SimplicialComplex.from_maximal([(0,), (1,)]), 3) is None


def test_finite_modification_reports_truncation() -> None:
    """Test that reaching the merge cap is flagged."""
    star = SimplicialComplex.from_maximal([(0, 1), (0, 2), (0, 3)])

    modification = finite_modification(star, 2)

    assert modification is not None
    assert modification.truncated


def _segment_cover(radius: Fraction) -> Cover:
    return Cover(
        stage=2,
        radius=radius,
        point_ids=(0, 1),
        centers=(HCPoint.of("1/4"), HCPoint.of("1/2")),
    )


def test_witnessed_nerve_needs_a_shared_witness() -> None:
    """Test that an edge appears only when a point lies in both balls."""
    cover = _segment_cover(Fraction(1, 8))
    shared = HCPoint.of("3/8")

    assert witnessed_nerve(cover, [HCPoint.of("1/4")]).faces_of_dim(1) == []
    nerve = witnessed_nerve(cover, [shared])
    assert nerve.faces_of_dim(1) == [(0, 1)]
    assert nerve.centers[1] == HCPoint.of("1/2")
    assert cover_order(cover, [shared]) == 2
    assert cover_order(cover, []) == 0


def test_refines() -> None:
    """Test formal refinement between covers."""
    coarse = _segment_cover(Fraction(1, 4))
    fine = Cover(stage=3, radius=Fraction(1, 16), point_ids=(5,), centers=(HCPoint.of("3/8"),))
    far = Cover(stage=3, radius=Fraction(1, 16), point_ids=(6,), centers=(HCPoint.of(1, 1),))

    assert refines(fine, coarse)
    assert not refines(far, coarse)


def test_is_connected_cluster() -> None:
    """Test the ball intersection graph connectivity check."""
    cloud = PointCloud([HCPoint.of("1/4"), HCPoint.of("3/8"), HCPoint.of("1/2"), HCPoint.of(1)])

    assert is_connected_cluster(cloud, [0, 1, 2], Fraction(1, 16))
    assert not is_connected_cluster(cloud, [0, 1, 2, 3], Fraction(1, 16))
    assert is_connected_cluster(cloud, [3], Fraction(1, 16))
