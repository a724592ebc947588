"""Tests for components module."""

import pytest

from polishforge.components import (
    branching_profile,
    build_tree,
    component_graph,
    component_stream,
    derived_stream,
    extend_tree,
    isolated_path_evidence,
    isolated_points,
    leaf_count,
    order_components,
    start_tree,
)
from polishforge.compiler import compile_term
from polishforge.errors import TreeError
from polishforge.exactgeom import HCPoint
from polishforge.models import PresentationStream, StreamKind, stream_from_schedule
from polishforge.presentation import cover_at, validate_certificate
from polishforge.spaceterm import Sphere, Sum


def test_two_points_split_at_stage_four(two_point_stream: PresentationStream) -> None:
    """Test that the cover components separate once 2 r_s drops below 1/4."""
    tree = build_tree(two_point_stream, 5)

    assert [leaf_count(tree, s) for s in range(6)] == [1, 1, 1, 1, 2, 2]
    assert [node.label for node in tree.levels[4]] == [0, 1]
    assert all(node.last_branching_height == 4 for node in tree.levels[5])
    assert all(node.parent == 0 for node in tree.levels[4])


def test_tree_navigation(two_point_stream: PresentationStream) -> None:
    """Test children, ancestors and truncation."""
    tree = build_tree(two_point_stream, 5)
    root = tree.node(0, 0)
    leaf = tree.node(5, 1)

    assert len(tree.children(tree.node(3, 0))) == 2
    assert [node.stage for node in tree.ancestors(leaf)] == [0, 1, 2, 3, 4, 5]
    assert tree.ancestors(leaf)[0] == root
    assert tree.truncated(2).depth == 3
    assert tree.children(leaf) == []


def test_order_components(two_point_stream: PresentationStream) -> None:
    """Test that components are ordered by branching height, then label."""
    tree = build_tree(two_point_stream, 5)

    ordered = order_components(tree, 5)

    assert [(n.last_branching_height, n.label) for n in ordered] == [(4, 0), (4, 1)]


def test_branching_profile_and_isolation(two_point_stream: PresentationStream) -> None:
    """Test branching counts per level and isolated-path evidence."""
    tree = build_tree(two_point_stream, 5)

    profile = branching_profile(tree, tree.node(0, 0), 5)

    assert profile.descendant_branchings_per_level == (0, 0, 0, 1, 0)
    assert profile.nonzero_levels == 1
    assert isolated_path_evidence(tree.node(5, 0), 1)
    assert not isolated_path_evidence(tree.node(5, 0), 3)


def test_extend_tree_needs_next_stage(two_point_stream: PresentationStream) -> None:
    """Test that extending with a cover of the wrong stage raises TreeError."""
    tree = start_tree(two_point_stream)

    with pytest.raises(TreeError):
        extend_tree(tree, cover_at(two_point_stream, 2))


def test_component_graph(two_point_stream: PresentationStream) -> None:
    """Test the partition of cover ids before and after the split."""
    assert component_graph(cover_at(two_point_stream, 3)) == [frozenset({0, 1})]
    assert component_graph(cover_at(two_point_stream, 4)) == [frozenset({0}), frozenset({1})]


def test_component_stream(two_point_stream: PresentationStream) -> None:
    """Test restriction of the stream to one component."""
    tree = build_tree(two_point_stream, 5)

    local = component_stream(two_point_stream, tree, tree.node(4, 1))

    assert local.is_compact
    assert local.ids == (1,)
    assert local.stage_of_row == (0,)
    assert component_stream(two_point_stream, tree, tree.node(0, 0)) is two_point_stream


def test_isolated_points_and_derived_stream(segment_stream: PresentationStream) -> None:
    """Test that a far point looks isolated and is removed by the derivative."""
    far = HCPoint.of("1/2", 1)
    schedule = [(0, p) for p in segment_stream.points[:3]] + [(0, far)]
    stream = stream_from_schedule(schedule, 3, StreamKind.POLISH)

    assert isolated_points(stream, 0) == []
    assert isolated_points(segment_stream, 2) == []
    assert isolated_points(stream, 2) == [3]
    assert derived_stream(stream, 2).ids == (0, 1, 2)


def test_component_streams_of_a_sum_are_certified() -> None:
    """Test that every component stream of a compiled sum validates at every stage."""
    budget = 7
    stream = compile_term(Sum((Sphere(0), Sphere(1))), budget)
    tree = build_tree(stream, budget - 1)

    for s in range(budget):
        for node in tree.levels[s]:
            local = component_stream(stream, tree, node)
            for t in range(local.num_stages):
                assert validate_certificate(local, t), (s, node.index, t)
