"""Witnessed nerves of stage covers, GF(2) homology and hole tracking.

A set J of cover balls is a face when some enumerated point lies strictly
inside every ball of J. Holes are GF(2) cycles that are not boundaries; a hole
detected at stage s survives at a later stage t when, for each of its faces,
the stage-t balls formally inside the face's balls form a nonempty connected
cluster.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import networkx as nx
import numpy as np
import numpy.typing as npt

from polishforge.config import DEFAULT_MERGE_CAP
from polishforge.exactgeom import FormalBall, HCPoint, PointCloud
from polishforge.gf2 import bits, homology_representatives, rank
from polishforge.models import Cover, PresentationStream, cover_radius
from polishforge.presentation import require_compact

logger = logging.getLogger(__name__)

Face = tuple[int, ...]

# Largest face dimension kept when callers do not ask for more
DEFAULT_MAX_DIM = 3


@dataclass(frozen=True)
class SimplicialComplex:
    """Downward-closed family of vertex tuples over cover ball ids."""

    vertices: tuple[int, ...]
    faces: frozenset[Face]
    stage: int = 0
    radius: Fraction = Fraction(1)
    max_dim: int = DEFAULT_MAX_DIM
    centers: dict[int, HCPoint] = field(default_factory=dict, compare=False, hash=False)
    witness_sets: frozenset[Face] = field(default_factory=frozenset, compare=False)

    @classmethod
    def from_maximal(
        cls,
        maximal: Iterable[Iterable[int]],
        max_dim: int = DEFAULT_MAX_DIM,
    ) -> "SimplicialComplex":
        """Close a family of vertex sets downward, keeping faces up to max_dim."""
        sets = {tuple(sorted(set(face))) for face in maximal}
        faces = close_downward(sets, max_dim)
        vertices = tuple(sorted({v for face in faces for v in face}))
        return cls(
            vertices=vertices,
            faces=frozenset(faces),
            max_dim=max_dim,
            witness_sets=frozenset(sets),
        )

    @property
    def dim(self) -> int:
        return max((len(face) for face in self.faces), default=0) - 1

    def faces_of_dim(self, d: int) -> list[Face]:
        """d-faces in lexicographic order."""
        return sorted(face for face in self.faces if len(face) == d + 1)

    def boundary_columns(self, d: int) -> list[int]:
        """Boundary of each d-face as a bit-vector over the (d-1)-faces.

        For d = 0 every vertex maps to the augmentation (bit 0), which gives
        reduced homology in degree 0.
        """
        faces = self.faces_of_dim(d)
        if d == 0:
            return [1 for _ in faces]
        index = {face: i for i, face in enumerate(self.faces_of_dim(d - 1))}
        columns = []
        for face in faces:
            column = 0
            for drop in range(len(face)):
                column |= 1 << index[face[:drop] + face[drop + 1 :]]
            columns.append(column)
        return columns


def close_downward(sets: Iterable[Face], max_dim: int) -> set[Face]:
    """All nonempty subsets of the given sets with at most max_dim + 1 vertices."""
    faces: set[Face] = set()
    for top in sets:
        for size in range(1, min(len(top), max_dim + 1) + 1):
            faces.update(combinations(top, size))
    return faces


@dataclass(frozen=True)
class Hole:
    """A GF(2) d-cycle that is not a boundary, with its realizing balls."""

    dim: int
    faces: tuple[Face, ...]
    detected_at: int
    realization: tuple[tuple[tuple[int, ...], ...], ...]
    radius: Fraction
    cover_snapshot: tuple[tuple[tuple[FormalBall, ...], ...], ...] = field(compare=False)
    modified: bool = False


def witness_sets(cover: Cover, witnesses: Sequence[HCPoint]) -> set[Face]:
    """For each witness, the ids of the balls strictly containing it."""
    if not witnesses:
        return set()
    centers = list(cover.centers)
    cloud = PointCloud([*centers, *witnesses])
    n = len(centers)
    inside = cloud.within(
        list(range(n, n + len(witnesses))), list(range(n)), cover.radius, strict=True
    )
    ids = np.asarray(cover.point_ids)
    return {tuple(sorted(int(v) for v in ids[row])) for row in inside if row.any()}


def witnessed_nerve(
    cover: Cover,
    witnesses: Sequence[HCPoint],
    max_dim: int = DEFAULT_MAX_DIM,
) -> SimplicialComplex:
    """Nerve whose faces are the ball sets sharing a witness point."""
    return nerve_from_sets(cover, witness_sets(cover, witnesses), max_dim)


def nerve_from_sets(
    cover: Cover,
    sets: Iterable[Face],
    max_dim: int = DEFAULT_MAX_DIM,
) -> SimplicialComplex:
    """Witnessed nerve from already computed witness sets of the cover."""
    family = frozenset(sets)
    faces = close_downward(family, max_dim)
    faces.update((pid,) for pid in cover.point_ids)
    logger.debug("Stage %d nerve: %d witness sets, %d faces", cover.stage, len(family), len(faces))
    return SimplicialComplex(
        vertices=tuple(sorted(cover.point_ids)),
        faces=frozenset(faces),
        stage=cover.stage,
        radius=cover.radius,
        max_dim=max_dim,
        centers=dict(zip(cover.point_ids, cover.centers, strict=True)),
        witness_sets=family,
    )


def betti_gf2(complex_: SimplicialComplex, d: int) -> int:
    """Rank of the d-th reduced homology over GF(2)."""
    if d < 0:
        raise ValueError("homology degree must be nonnegative")
    n_d = len(complex_.faces_of_dim(d))
    if n_d == 0:
        return 0
    return n_d - rank(complex_.boundary_columns(d)) - rank(complex_.boundary_columns(d + 1))


@dataclass(frozen=True)
class Modification:
    """A coarsening of a nerve by merging balls that share a witness."""

    complex: SimplicialComplex
    groups: dict[int, tuple[int, ...]]
    truncated: bool


def finite_modification(complex_: SimplicialComplex, merge_cap: int) -> Modification | None:
    """Greedy merge of witnessed neighbours into groups of at most merge_cap balls.

    Vertices are visited in id order; a neighbour joins the current group only
    if the enlarged group is still a witnessed face. Returns None when no two
    balls can be merged.
    """
    neighbours: dict[int, list[int]] = {v: [] for v in complex_.vertices}
    for face in complex_.faces:
        if len(face) == 2:
            neighbours[face[0]].append(face[1])
            neighbours[face[1]].append(face[0])
    assigned: dict[int, int] = {}
    groups: dict[int, tuple[int, ...]] = {}
    truncated = False
    for vertex in complex_.vertices:
        if vertex in assigned:
            continue
        group = [vertex]
        for other in sorted(neighbours[vertex]):
            if other in assigned:
                continue
            if len(group) == merge_cap:
                truncated = True
                break
            candidate = tuple(sorted([*group, other]))
            if _is_witnessed(complex_, candidate):
                group.append(other)
        for member in group:
            assigned[member] = vertex
        groups[vertex] = tuple(sorted(group))
    if all(len(g) == 1 for g in groups.values()):
        return None
    merged = {tuple(sorted({assigned[v] for v in ws})) for ws in complex_.witness_sets}
    faces = close_downward(merged, complex_.max_dim)
    faces.update((rep,) for rep in groups)
    coarse = SimplicialComplex(
        vertices=tuple(sorted(groups)),
        faces=frozenset(faces),
        stage=complex_.stage,
        radius=complex_.radius,
        max_dim=complex_.max_dim,
        centers=complex_.centers,
        witness_sets=frozenset(merged),
    )
    return Modification(complex=coarse, groups=groups, truncated=truncated)


def _is_witnessed(complex_: SimplicialComplex, face: Face) -> bool:
    if len(face) <= complex_.max_dim + 1:
        return face in complex_.faces
    members = set(face)
    return any(members <= set(ws) for ws in complex_.witness_sets)


def _holes_of(
    complex_: SimplicialComplex,
    d: int,
    s: int,
    groups: dict[int, tuple[int, ...]] | None,
) -> list[Hole]:
    faces_d = complex_.faces_of_dim(d)
    if not faces_d:
        return []
    representatives = homology_representatives(
        complex_.boundary_columns(d), complex_.boundary_columns(d + 1)
    )
    holes = []
    for representative in representatives:
        chain = tuple(faces_d[i] for i in bits(representative))
        realization = tuple(
            tuple((groups or {}).get(v, (v,)) for v in face) for face in chain
        )
        snapshot: tuple[tuple[tuple[FormalBall, ...], ...], ...] = ()
        if complex_.centers:
            snapshot = tuple(
                tuple(
                    tuple(FormalBall(complex_.centers[pid], complex_.radius) for pid in group)
                    for group in face
                )
                for face in realization
            )
        holes.append(
            Hole(
                dim=d,
                faces=chain,
                detected_at=s,
                realization=realization,
                radius=complex_.radius,
                cover_snapshot=snapshot,
                modified=groups is not None,
            )
        )
    return holes


def detect_holes(
    complex_: SimplicialComplex,
    d: int,
    s: int,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> list[Hole]:
    """One canonical d-hole per homology class basis vector.

    When the nerve itself has no d-hole, a finite modification that merges
    witnessed neighbours is searched as well.
    """
    holes = _holes_of(complex_, d, s, None)
    if holes or len(complex_.vertices) < 2:
        return holes
    modification = finite_modification(complex_, merge_cap)
    if modification is None:
        return []
    if modification.truncated:
        logger.warning("Stage %d: finite modification truncated at merge cap %d", s, merge_cap)
    return _holes_of(modification.complex, d, s, modification.groups)


def chain_boundary(faces: Iterable[Face]) -> set[Face]:
    """GF(2) boundary of a chain; an odd 0-chain maps to the empty face ()."""
    boundary: set[Face] = set()
    for face in faces:
        for drop in range(len(face)):
            boundary ^= {face[:drop] + face[drop + 1 :]}
    return boundary


def _intersection_adjacency(
    cloud: PointCloud, rows: Sequence[int], radius: Fraction
) -> npt.NDArray[np.bool_]:
    return cloud.within(rows, rows, 2 * radius, strict=True)


def is_connected_cluster(cloud: PointCloud, rows: Sequence[int], radius: Fraction) -> bool:
    """True iff equal-radius balls around the rows form a connected intersection graph."""
    if len(rows) <= 1:
        return True
    adjacency = _intersection_adjacency(cloud, rows, radius)
    graph = nx.Graph()
    graph.add_nodes_from(range(len(rows)))
    graph.add_edges_from(zip(*np.nonzero(np.triu(adjacency, 1)), strict=True))
    return bool(nx.is_connected(graph))


def hole_survives(h: Hole, stream: PresentationStream, t: int) -> bool:
    """True iff every face of h still has a nonempty connected stage-t realization."""
    require_compact(stream)
    if t <= h.detected_at:
        return True
    radius = cover_radius(t)
    margin = h.radius - radius
    if margin < 0:
        return False
    cloud = stream.cloud
    cover_rows = stream.net_rows(t)
    members = sorted({pid for face in h.realization for group in face for pid in group})
    column = {pid: k for k, pid in enumerate(members)}
    contained = cloud.within(cover_rows, [stream.row_of[pid] for pid in members], margin, strict=False)
    for face in h.realization:
        mask = np.ones(len(cover_rows), dtype=bool)
        for group in face:
            mask &= contained[:, [column[pid] for pid in group]].any(axis=1)
        qualifying = [cover_rows[i] for i in np.nonzero(mask)[0]]
        if not qualifying:
            return False
        if not is_connected_cluster(cloud, qualifying, radius):
            return False
    return True


def cover_order(cover: Cover, witnesses: Sequence[HCPoint]) -> int:
    """Largest number of cover balls sharing a witness."""
    return max((len(ws) for ws in witness_sets(cover, witnesses)), default=0)


def refines(fine: Cover, coarse: Cover) -> bool:
    """True iff every fine ball is formally contained in some coarse ball."""
    cloud = PointCloud([*fine.centers, *coarse.centers])
    n = len(fine.centers)
    contained = cloud.within(
        list(range(n)),
        list(range(n, n + len(coarse.centers))),
        coarse.radius - fine.radius,
        strict=False,
    )
    return bool(contained.any(axis=1).all())


def nerve_summary(complex_: SimplicialComplex, max_degree: int) -> dict[str, list[int]]:
    """Face counts per dimension and Betti numbers up to max_degree."""
    counts = [len(complex_.faces_of_dim(d)) for d in range(complex_.dim + 1)]
    betti = [betti_gf2(complex_, d) for d in range(max_degree + 1)]
    return {"face_counts": counts, "betti": betti}
