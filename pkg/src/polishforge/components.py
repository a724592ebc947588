"""The tree of connected components of stage covers.

Level s of the tree partitions the stage-s cover into the connected
components of its intersection graph. Each component links to the unique
component of level s - 1 that formally contains all its balls, carries a label
(the least id of an enumerated point strictly inside it) and the last height at
which its branch split. Components are ordered by last branching height, then
label.
"""

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx
import numpy as np

from polishforge.errors import TreeError
from polishforge.exactgeom import PointCloud
from polishforge.models import (
    Cover,
    PresentationStream,
    Stage,
    StreamKind,
    cover_radius,
    restrict,
    stage_mesh,
)
from polishforge.presentation import cover_at, require_compact

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComponentNode:
    """A connected component of the stage-s cover."""

    stage: int
    index: int
    point_ids: tuple[int, ...]
    label: int
    parent: int | None
    last_branching_height: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.stage, self.index)


@dataclass(frozen=True)
class ComponentTree:
    """Component partitions of consecutive stages linked by formal containment."""

    stream: PresentationStream = field(compare=False, repr=False)
    levels: tuple[tuple[ComponentNode, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    def node(self, stage: int, index: int) -> ComponentNode:
        return self.levels[stage][index]

    def children(self, node: ComponentNode) -> list[ComponentNode]:
        """Components of the next level whose parent is node."""
        if node.stage + 1 >= self.depth:
            return []
        return [c for c in self.levels[node.stage + 1] if c.parent == node.index]

    def ancestors(self, node: ComponentNode) -> list[ComponentNode]:
        """Path from the root down to node, inclusive."""
        path = [node]
        while path[-1].parent is not None:
            current = path[-1]
            assert current.parent is not None
            path.append(self.levels[current.stage - 1][current.parent])
        return path[::-1]

    def truncated(self, s: int) -> "ComponentTree":
        """The tree through stage s."""
        return ComponentTree(stream=self.stream, levels=self.levels[: s + 1])


def _cover_components(cloud: PointCloud, rows: list[int], radius: Fraction) -> list[list[int]]:
    """Connected components (as position lists) of equal-radius balls at rows."""
    adjacency = cloud.within(rows, rows, 2 * radius, strict=True)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(rows)))
    graph.add_edges_from(zip(*np.nonzero(np.triu(adjacency, 1)), strict=True))
    return sorted((sorted(int(v) for v in c) for c in nx.connected_components(graph)), key=min)


def component_graph(cover: Cover) -> list[frozenset[int]]:
    """Partition of the cover's ball ids into intersection-graph components."""
    cloud = PointCloud(cover.centers)
    parts = _cover_components(cloud, list(range(len(cover.centers))), cover.radius)
    return [frozenset(cover.point_ids[i] for i in part) for part in parts]


def _labels(stream: PresentationStream, s: int, parts: list[list[int]]) -> list[int]:
    """Least id of a point enumerated through s strictly inside each part's balls."""
    cloud = stream.cloud
    rows = [row for part in parts for row in part]
    owner = [k for k, part in enumerate(parts) for _ in part]
    inside = cloud.within(stream.rows_through(s), rows, cover_radius(s), strict=True)
    labels: list[int | None] = [None] * len(parts)
    for witness_row, hits in enumerate(inside):
        positions = np.nonzero(hits)[0]
        if positions.size == 0:
            continue
        k = owner[int(positions[0])]
        if labels[k] is None:
            labels[k] = stream.ids[witness_row]
    return [label if label is not None else stream.ids[min(parts[k])] for k, label in enumerate(labels)]


def _level(
    stream: PresentationStream, cover: Cover
) -> list[tuple[tuple[int, ...], int, list[int]]]:
    """(ball ids, label, rows) per component, sorted by label."""
    rows = [stream.row_of[pid] for pid in cover.point_ids]
    parts = _cover_components(stream.cloud, rows, cover.radius)
    part_rows = [[rows[i] for i in part] for part in parts]
    labels = _labels(stream, cover.stage, part_rows)
    level = [
        (tuple(stream.ids[r] for r in part), label, part)
        for part, label in zip(part_rows, labels, strict=True)
    ]
    return sorted(level, key=lambda item: item[1])


def start_tree(stream: PresentationStream) -> ComponentTree:
    """Tree holding the stage-0 level only."""
    require_compact(stream)
    level = _level(stream, cover_at(stream, 0))
    nodes = tuple(
        ComponentNode(
            stage=0, index=i, point_ids=ids, label=label, parent=None, last_branching_height=0
        )
        for i, (ids, label, _) in enumerate(level)
    )
    return ComponentTree(stream=stream, levels=(nodes,))


def extend_tree(tree: ComponentTree, cover: Cover) -> ComponentTree:
    """Append the components of the next stage's cover, linked to their parents."""
    s = cover.stage
    if s != tree.depth:
        raise TreeError(f"expected the stage-{tree.depth} cover", s)
    stream = tree.stream
    parents = tree.levels[-1]
    parent_rows = [stream.row_of[pid] for node in parents for pid in node.point_ids]
    parent_owner = [node.index for node in parents for _ in node.point_ids]
    margin = cover_radius(s - 1) - cover.radius
    level = _level(stream, cover)
    child_rows = [row for _, _, rows in level for row in rows]
    contained = stream.cloud.within(child_rows, parent_rows, margin, strict=False)
    resolved = []
    offset = 0
    for ids, _label, rows in level:
        candidates: set[int] | None = None
        for position in range(offset, offset + len(rows)):
            owners = {parent_owner[int(k)] for k in np.nonzero(contained[position])[0]}
            candidates = owners if candidates is None else candidates & owners
        offset += len(rows)
        if not candidates or len(candidates) != 1:
            found = 0 if not candidates else len(candidates)
            raise TreeError(f"component {ids[0]} has {found} candidate parents", s)
        resolved.append(next(iter(candidates)))
    fanout = {index: resolved.count(index) for index in set(resolved)}
    nodes = []
    for i, ((ids, label, _), parent) in enumerate(zip(level, resolved, strict=True)):
        height = s if fanout[parent] >= 2 else parents[parent].last_branching_height
        nodes.append(
            ComponentNode(
                stage=s,
                index=i,
                point_ids=ids,
                label=label,
                parent=parent,
                last_branching_height=height,
            )
        )
    logger.debug("Stage %d: %d components", s, len(nodes))
    return ComponentTree(stream=stream, levels=(*tree.levels, tuple(nodes)))


def build_tree(stream: PresentationStream, s: int) -> ComponentTree:
    """Component tree through stage s."""
    tree = start_tree(stream)
    for t in range(1, s + 1):
        tree = extend_tree(tree, cover_at(stream, t))
    return tree


def order_components(tree: ComponentTree, s: int) -> list[ComponentNode]:
    """Stage-s components by (last branching height, label)."""
    return sorted(tree.levels[s], key=lambda n: (n.last_branching_height, n.label))


def component_stream(
    stream: PresentationStream, tree: ComponentTree, node: ComponentNode
) -> PresentationStream:
    """The stream restricted to the points strictly inside node's balls.

    Points enumerated by node.stage move to stage 0; later points keep their
    stage. The local net at t >= node.stage starts from the global net
    intersected with the component and grows until it covers every member
    within 2^-t; earlier stages reuse the stage-node.stage net.
    """
    require_compact(stream)
    s = node.stage
    cloud = stream.cloud
    centers = [stream.row_of[pid] for pid in node.point_ids]
    inside = cloud.within(list(range(len(cloud))), centers, cover_radius(s), strict=True)
    members = [int(r) for r in np.nonzero(inside.any(axis=1))[0]]
    if len(members) == len(cloud):
        return stream
    stage_of = stream.stage_of_row
    local_net = {}
    for t in range(s, stream.num_stages):
        size = stream.net_size(t)
        enumerated = sum(1 for r in members if stage_of[r] <= t)
        near = cloud.within(members, members, stage_mesh(t), strict=True)
        needed = int(near.argmax(axis=1).max()) + 1
        if needed > enumerated:
            logger.warning(
                "Stage %d: component %d is not covered by its own points", t, node.index
            )
        local_net[t] = min(max(sum(1 for r in members if r < size), needed), enumerated)
    buckets: list[list[int]] = [[] for _ in range(stream.num_stages)]
    for row in members:
        buckets[0 if stage_of[row] <= s else stage_of[row]].append(row)
    stages = []
    for t, bucket in enumerate(buckets):
        net = local_net[max(t, s)]
        stages.append(
            Stage(
                index=t,
                new_points=tuple((stream.ids[r], stream.points[r]) for r in bucket),
                net_size=net,
            )
        )
    return PresentationStream(kind=StreamKind.COMPACT, stages=tuple(stages))


@dataclass(frozen=True)
class BranchingProfile:
    """Branching descendants of a node per level."""

    descendant_branchings_per_level: tuple[int, ...]

    @property
    def nonzero_levels(self) -> int:
        return sum(1 for count in self.descendant_branchings_per_level if count)


def branching_profile(tree: ComponentTree, node: ComponentNode, s: int) -> BranchingProfile:
    """For each level node.stage .. s - 1, the count of branching descendants."""
    last = min(s, tree.depth - 1)
    counts = []
    frontier = [node]
    for _level in range(node.stage, last):
        next_frontier = []
        branching = 0
        for member in frontier:
            children = tree.children(member)
            if len(children) >= 2:
                branching += 1
            next_frontier.extend(children)
        counts.append(branching)
        frontier = next_frontier
    return BranchingProfile(descendant_branchings_per_level=tuple(counts))


def isolated_path_evidence(node: ComponentNode, window: int) -> bool:
    """No branching along the node's path in the last `window` levels."""
    return node.stage - node.last_branching_height >= window


def leaf_count(tree: ComponentTree, s: int) -> int:
    """Number of components at stage s."""
    return len(tree.levels[s])


def isolated_points(stream: PresentationStream, s: int) -> list[int]:
    """Ids enumerated through s with every other point at least 2^-s away."""
    cloud = stream.cloud
    rows = stream.rows_through(s)
    near = cloud.within(rows, list(range(len(cloud))), stage_mesh(s), strict=True)
    return [stream.ids[r] for r in rows if int(near[r].sum()) == 1]


def derived_stream(stream: PresentationStream, s: int) -> PresentationStream:
    """Polish stream without the points that look isolated at stage s."""
    isolated = set(isolated_points(stream, s))
    keep: Iterable[int] = (pid for pid in stream.ids if pid not in isolated)
    return restrict(stream, keep)
