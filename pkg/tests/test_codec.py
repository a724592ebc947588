"""Tests for codec module."""

from fractions import Fraction

import pytest

from polishforge.codec import (
    DecodeSeries,
    LimitApprox,
    WitnessSet,
    decode_all,
    decode_limit,
    decode_series,
    encode_limit,
    encoder_regions,
    gated_encode,
    rank_decode_profile,
    sphere_evidence,
    stage_hausdorff_ok,
)
from polishforge.compiler import TOP_CENTER
from polishforge.components import isolated_points
from polishforge.config import Settings
from polishforge.errors import ConfigError, GatePatternError, UnsupportedTermError
from polishforge.exactgeom import hc_distance
from polishforge.models import PresentationStream
from polishforge.presentation import check_certificate


def test_limit_approx_reads_latest_change() -> None:
    """Test phi(n, s) as the bit of the latest change point at or before s."""
    phi = LimitApprox(rows=((0, 0, 1), (0, 2, 0), (0, 5, 1), (1, 3, 1)), count=2)

    assert [phi(0, s) for s in range(7)] == [1, 1, 0, 0, 0, 1, 1]
    assert [phi(1, s) for s in range(5)] == [0, 0, 0, 1, 1]
    assert phi.phases(0, 7) == [(0, 2, 1), (2, 5, 0), (5, 7, 1)]
    assert phi.phases(1, 3) == [(0, 3, 0)]


def test_limit_approx_validation() -> None:
    """Test that bad rows and empty index ranges raise ConfigError."""
    with pytest.raises(ConfigError):
        LimitApprox(rows=(), count=0)
    with pytest.raises(ConfigError):
        LimitApprox(rows=((2, 0, 1),), count=2)
    with pytest.raises(ConfigError):
        LimitApprox(rows=((0, 0, 2),), count=1)


def test_characteristic_approximation() -> None:
    """Test the constant approximation of a finite set."""
    phi = LimitApprox.characteristic({0, 2}, 3)

    assert [phi(n, 9) for n in range(3)] == [1, 0, 1]


def test_witness_set() -> None:
    """Test membership, extents and prefix matching."""
    witness = WitnessSet.from_rows([(0, 1, 2), (0, 1, 0), (2, 0, 0)])

    assert witness.arity == 3
    assert (0, 1, 2) in witness
    assert (1, 1, 1) not in witness
    assert witness.extent(0) == 3
    assert witness.extent(2) == 3
    assert witness.matching((0, 1)) == [(0, 1, 0), (0, 1, 2)]
    assert WitnessSet.from_rows([], arity=4).extent(0) == 1


def test_witness_set_validation() -> None:
    """Test that arity and row shape are checked."""
    with pytest.raises(GatePatternError):
        WitnessSet.from_rows([(0, 1)])
    with pytest.raises(GatePatternError):
        WitnessSet.from_rows([(0, 1, 2), (0, 1)])
    with pytest.raises(GatePatternError):
        WitnessSet.from_rows([(0, -1, 2)])
    with pytest.raises(GatePatternError):
        WitnessSet.from_rows([])


def test_encode_limit_checks_inputs() -> None:
    """Test budget and sphere-cap checks."""
    with pytest.raises(ConfigError):
        encode_limit(LimitApprox.characteristic({0}, 1), 0)
    with pytest.raises(UnsupportedTermError):
        encode_limit(LimitApprox.characteristic({0}, 3), 6, sphere_dim_cap=4)


def test_encoder_regions_are_disjoint() -> None:
    """Test that regions keep their distance to the compactification point."""
    regions = encoder_regions(3, 8)

    assert [r.index for r in regions] == [0, 1, 2]
    assert regions[0].distance == 2 * regions[1].distance


def test_flipping_region_stays_hausdorff_close() -> None:
    """Test phases after flips: one sphere per region, 2^-s close region sets."""
    phi = LimitApprox(rows=((0, 0, 1), (0, 2, 0), (0, 5, 1)), count=1)
    budget = 8

    stream = encode_limit(phi, budget)
    region = encoder_regions(1, budget)[0]

    assert stream.is_compact
    for s in range(budget - 1):
        assert stage_hausdorff_ok(stream, region, s)
    for s in range(budget):
        check_certificate(stream, s)
    distances = {hc_distance(point, region.center) for point in stream.points}
    assert region.center not in stream.points
    (radius,) = [d for d in distances if d < region.radius]
    assert radius < Fraction(1, 2**7)


@pytest.mark.parametrize(
    "rows",
    [((0, 0, 1),), ((0, 0, 1), (0, 2, 0), (0, 5, 1))],
    ids=["constant", "flips"],
)
def test_encoded_region_leaves_no_isolated_points(rows: tuple[tuple[int, int, int], ...]) -> None:
    """Test that only the compactification point is isolated, even across flips."""
    budget = 12

    stream = encode_limit(LimitApprox(rows=rows, count=1), budget)

    top = stream.ids[stream.points.index(TOP_CENTER)]
    assert isolated_points(stream, budget - 1) == [top]


def test_decode_series_properties() -> None:
    """Test stabilization bookkeeping of decoded bits."""
    series = DecodeSeries(n=0, bits=(0, 1, 1))

    assert series.stable_from == 1
    assert series.pre_stabilization == (True, False, False)
    assert series.final == 1
    assert DecodeSeries(n=0, bits=()).final is None


@pytest.mark.integration
def test_decode_member_reads_one() -> None:
    """Test that an index of the set decodes to 1."""
    stream = encode_limit(LimitApprox.characteristic({0}, 1), 6)

    assert decode_limit(stream, 0, 5) == 1


def test_decode_all_matches_series(monkeypatch: pytest.MonkeyPatch) -> None:
    """Test that threaded decoding gives one series per index."""
    monkeypatch.setenv("POLISH_FORGE_THREADS", "2")
    stream = encode_limit(LimitApprox.characteristic({0}, 2), 4)

    results = decode_all(stream, [1, 0, 1], 4, settings=Settings())

    assert sorted(results) == [0, 1]
    assert results[0] == decode_series(stream, 0, 4)
    assert len(results[1].bits) == 4


def test_gated_encode_rejects_unknown_kind_and_arity() -> None:
    """Test preset lookup and arity checks."""
    table = WitnessSet.from_rows([(0, 0, 0)])

    with pytest.raises(GatePatternError, match="unknown preset"):
        gated_encode("nope", table, 6)
    with pytest.raises(GatePatternError, match="arity"):
        gated_encode("xd", table, 6)


def test_evidence_without_holes(two_point_stream: PresentationStream) -> None:
    """Test that streams without a hole carrier give empty evidence."""
    assert sphere_evidence(two_point_stream, 0, 5) == {}
    assert rank_decode_profile(two_point_stream, 0, 5) == {"eta_path": [], "off_path_branching": []}
