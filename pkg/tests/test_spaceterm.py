"""Tests for spaceterm module."""

import pytest

from polishforge.errors import TermSyntaxError, UnsupportedTermError
from polishforge.spaceterm import (
    AlphaOmega,
    Empty,
    OmegaSum,
    One,
    Ordinal,
    Pointed,
    Sphere,
    SPi,
    SSigma,
    Sum,
    Wedge,
    cb_derivative,
    expand_tower,
    format_term,
    is_empty,
    normalize,
    parse_term,
    pd1_term,
    s1_rank,
    sigma_tower,
    top_survives,
    xd_term,
    z_term,
    zd_term,
)


def test_format_and_parse() -> None:
    """Test that the printed s-expression parses back to the same term."""
    term = AlphaOmega(
        Sum((Wedge((Pointed(Sphere(2)), Pointed(Ordinal(1), "isolated"))), SSigma(3, plus=True)))
    )
    text = format_term(term)

    assert text == "(alpha (sum (wedge (top (sphere 2)) (isolated (ordinal 1))) (ssigma+ 3)))"
    assert parse_term(text) == term
    assert str(Sphere(1)) == "(sphere 1)"
    assert parse_term("(wedge (sphere 1) (sphere 1))") == Wedge(
        (Pointed(Sphere(1)), Pointed(Sphere(1)))
    )


@pytest.mark.parametrize(
    ("text", "position"),
    [
        ("(sphere x)", 8),
        ("(torus 1)", 1),
        ("(sphere 1) (one)", 11),
        ("(ssigma 2)", 0),
        ("(sum (one)", 10),
    ],
)
def test_parse_errors_carry_position(text: str, position: int) -> None:
    """Test that syntax errors report the offending position."""
    with pytest.raises(TermSyntaxError) as info:
        parse_term(text)

    assert info.value.position == position


def test_term_validation() -> None:
    """Test that out-of-range indices are rejected."""
    with pytest.raises(UnsupportedTermError):
        Sphere(-1)
    with pytest.raises(UnsupportedTermError):
        Ordinal(5)
    with pytest.raises(UnsupportedTermError):
        SPi(2)
    with pytest.raises(UnsupportedTermError):
        Sum(())


def test_expand_tower_base_cases() -> None:
    """Test the first tower steps."""
    assert expand_tower(SSigma(1)) == One()
    assert expand_tower(SPi(1)) == Sphere(1)
    assert expand_tower(SSigma(3)) == AlphaOmega(SSigma(1, plus=True))
    assert expand_tower(SPi(3)) == AlphaOmega(Sum((SPi(1), SSigma(1, plus=True))))
    assert sigma_tower(0) == One()


def test_normalize_flattens_and_sorts() -> None:
    """Test sum flattening, sorting and absorption."""
    assert normalize(Sum((Sphere(2), Sum((One(), Empty()))))) == Sum((One(), Sphere(2)))
    assert normalize(Sum((One(), OmegaSum(One())))) == OmegaSum(One())
    assert normalize(Sum((AlphaOmega(Sphere(1)), Sphere(1)))) == AlphaOmega(Sphere(1))
    assert normalize(Ordinal(2)) == AlphaOmega(AlphaOmega(One()))
    assert normalize(Ordinal(0)) == Sum((One(), One()))


def test_normalize_wedges() -> None:
    """Test that wedges drop point parts and lift detached summands."""
    lifted = normalize(Wedge((Pointed(Sum((Sphere(1), One()))), Pointed(Sphere(2)))))

    assert normalize(Wedge((Pointed(Sphere(1)), Pointed(One())))) == Sphere(1)
    assert lifted == Sum((One(), Wedge((Pointed(Sphere(1)), Pointed(Sphere(2))))))


def test_normalize_is_idempotent() -> None:
    """Test that normal forms are fixed points."""
    for term in (z_term([True, False], 2), pd1_term([False, True]), SPi(5), SSigma(5)):
        once = normalize(term)
        assert normalize(once) == once


def test_ordinal_derivatives_reach_a_point() -> None:
    """Test that omega^k + 1 reaches the point after k derivatives."""
    for k in range(1, 5):
        term = Ordinal(k)
        unfolded = normalize(Ordinal(k))
        for _ in range(k):
            term = cb_derivative(term)
            unfolded = normalize(cb_derivative(unfolded))
        assert term == One()
        assert unfolded == One()
        assert is_empty(cb_derivative(term))


def test_derivative_of_spheres_and_wedges() -> None:
    """Test the derivative on the building blocks."""
    assert is_empty(cb_derivative(Sphere(0)))
    assert cb_derivative(Sphere(3)) == Sphere(3)
    assert normalize(cb_derivative(Wedge((Pointed(Sphere(1)), Pointed(Ordinal(1)))))) == Sphere(1)
    hung = Wedge((Pointed(Sphere(1)), Pointed(Ordinal(1), "isolated")))
    assert normalize(cb_derivative(hung)) == Sum((One(), Sphere(1)))
    assert top_survives(Wedge((Pointed(Sphere(0)), Pointed(Ordinal(1)))))
    assert not top_survives(Sum((One(), Sphere(1))))


@pytest.mark.parametrize("table", [[True], [False], [True, False, True], [False, False]])
def test_z_term_derivative_lowers_k(table: list[bool]) -> None:
    """Test that the derivative of the k = 3 block is the k = 2 block."""
    assert normalize(cb_derivative(z_term(table, 3))) == normalize(z_term(table, 2))


@pytest.mark.parametrize("n", range(5))
def test_tower_circle_ranks(n: int) -> None:
    """Test the circle ranks of both towers."""
    assert s1_rank(SPi(2 * n + 1)) == n
    assert s1_rank(SSigma(2 * n + 3)) == n


def test_circle_rank_small_cases() -> None:
    """Test circle ranks of points, spheres and compactified circles."""
    assert s1_rank(One()) == 0
    assert s1_rank(Sphere(2)) == 0
    assert s1_rank(Empty()) == 0
    assert s1_rank(AlphaOmega(Sphere(1))) == 1
    assert s1_rank(AlphaOmega(Sphere(2))) == 0


def test_catalogue_terms() -> None:
    """Test the terms built from membership tables."""
    assert zd_term([]) == One()
    assert zd_term([True, False]) == AlphaOmega(Sum((Sphere(1), Sphere(4))))
    assert xd_term([True, False]) == AlphaOmega(Sum((One(), Sphere(1))))
    assert z_term([True], 1) == AlphaOmega(
        Sum((Wedge((Pointed(Sphere(1)), Pointed(Ordinal(0)))), Ordinal(1)))
    )
    with pytest.raises(UnsupportedTermError):
        z_term([True], 0)
