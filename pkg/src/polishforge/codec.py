"""Encoders from set-membership data to presentation streams, and their decoders.

encode_limit realizes a limit-computable set D as the compactification of
regions R_n. Region R_n refines S^(2n+1) while the approximation says 1 and
S^(2n+2) while it says 0. Both live on one sphere of radius below 2^-(s+2)
for the last flip stage s, and each new phase passes through every point
already enumerated (see morph), so consecutive region sets stay 2^-s close.

decode_limit reads the bit back by following the least labeled component of
the stage cover.
"""

import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from polishforge.compiler import (
    TOP_CENTER,
    TOP_RADIUS,
    Slot,
    alpha_slots,
    sphere_radius,
)
from polishforge.components import (
    ComponentNode,
    ComponentTree,
    branching_profile,
    build_tree,
    component_stream,
    order_components,
)
from polishforge.config import DEFAULT_MERGE_CAP, DEFAULT_SPHERE_DIM_CAP, Settings
from polishforge.errors import ConfigError, GatePatternError, UnsupportedTermError
from polishforge.exactgeom import HCPoint, PointCloud, hc_distance
from polishforge.learner import detect_stage_holes, label_node, stabilized_from
from polishforge.models import PresentationStream, stage_mesh
from polishforge.morph import RegionNets, RegionSphere
from polishforge.nerve import hole_survives
from polishforge.presentation import Piece, assemble_stream, require_compact

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LimitApprox:
    """Stagewise guesses phi(n, s) given by change points (n, s, bit).

    phi(n, s) is the bit of the latest row (n, s', bit) with s' <= s, and 0
    before the first row.
    """

    rows: tuple[tuple[int, int, int], ...]
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ConfigError(f"a limit approximation needs at least one index, got {self.count}")
        for n, s, bit in self.rows:
            if not 0 <= n < self.count or s < 0 or bit not in (0, 1):
                raise ConfigError(f"invalid approximation row {(n, s, bit)}")

    @classmethod
    def characteristic(cls, members: Iterable[int], count: int) -> "LimitApprox":
        """Constant approximation of a finite set's characteristic function."""
        chosen = set(members)
        return cls(rows=tuple((n, 0, int(n in chosen)) for n in range(count)), count=count)

    def __call__(self, n: int, s: int) -> int:
        bit = 0
        latest = -1
        for row_n, row_s, row_bit in self.rows:
            if row_n == n and latest <= row_s <= s:
                latest, bit = row_s, row_bit
        return bit

    def phases(self, n: int, budget: int) -> list[tuple[int, int, int]]:
        """Maximal runs (start, end, bit) of constant phi(n, .) over stages < budget."""
        runs: list[tuple[int, int, int]] = []
        for s in range(budget):
            bit = self(n, s)
            if runs and runs[-1][2] == bit:
                start, _, _ = runs[-1]
                runs[-1] = (start, s + 1, bit)
            else:
                runs.append((s, s + 1, bit))
        return runs


@dataclass(frozen=True)
class WitnessSet:
    """A finite table of integer tuples of a fixed arity; absent tuples are non-members."""

    arity: int
    rows: frozenset[tuple[int, ...]]

    def __post_init__(self) -> None:
        if self.arity not in (3, 4):
            raise GatePatternError(f"witness arity must be 3 or 4, got {self.arity}")
        for row in self.rows:
            if len(row) != self.arity or any(v < 0 for v in row):
                raise GatePatternError(f"row {row} does not match arity {self.arity}")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], arity: int | None = None) -> "WitnessSet":
        table = frozenset(tuple(int(v) for v in row) for row in rows)
        if arity is None:
            if not table:
                raise GatePatternError("the arity of an empty witness table must be given")
            arity = len(next(iter(table)))
        return cls(arity=arity, rows=table)

    def __contains__(self, row: object) -> bool:
        return row in self.rows

    def extent(self, position: int) -> int:
        """One more than the largest value at a position, at least 1."""
        return max((row[position] + 1 for row in self.rows), default=1)

    def matching(self, prefix: tuple[int, ...]) -> list[tuple[int, ...]]:
        """Rows starting with prefix, sorted."""
        return sorted(row for row in self.rows if row[: len(prefix)] == prefix)


def encoder_regions(count: int, budget: int) -> list[Slot]:
    """Regions R_0 .. R_(count-1) around the compactification point."""
    return alpha_slots(TOP_CENTER, TOP_RADIUS, budget, count)


def _region_piece(n: int, region: Slot, phi: LimitApprox, budget: int) -> Piece:
    phases = phi.phases(n, budget)
    flips = [start for start, _, _ in phases if start > 0]
    below = Fraction(1, 2 ** (max(flips) + 2)) if flips else None
    rho = sphere_radius(2 * n + 2, region.center, region.radius, below=below)
    logger.debug("Region %d: radius %s, phases %s", n, rho, phases)
    nets = RegionNets(RegionSphere(region.center, rho, 2 * n + 2), budget)
    return nets.piece(phases, TOP_CENTER)


def encode_limit(
    phi: LimitApprox,
    budget: int,
    *,
    sphere_dim_cap: int = DEFAULT_SPHERE_DIM_CAP,
) -> PresentationStream:
    """Compact stream of the compactified regions R_n driven by phi."""
    if budget < 1:
        raise ConfigError(f"budget must be at least 1, got {budget}")
    if 2 * (phi.count - 1) + 2 > sphere_dim_cap:
        raise UnsupportedTermError(
            f"index {phi.count - 1} needs S^{2 * phi.count} above the sphere cap {sphere_dim_cap}"
        )
    regions = encoder_regions(phi.count, budget)
    root = Piece(
        levels=[[TOP_CENTER]],
        children=[_region_piece(n, region, phi, budget) for n, region in enumerate(regions)],
    )
    stream = assemble_stream(root, budget)
    logger.info("Encoded %d regions: %d points over %d stages", phi.count, len(stream.ids), budget)
    return stream


def _region_set(stream: PresentationStream, region: Slot, s: int) -> list[HCPoint]:
    enumerated = stream.points[: stream.count_through(s)]
    inside = [p for p in enumerated if hc_distance(p, region.center) < region.radius]
    return [region.center, *inside]


def stage_hausdorff_ok(stream: PresentationStream, region: Slot, s: int) -> bool:
    """True iff the stage-(s+1) region set is within 2^-s of the stage-s set.

    A region set is the region center together with the region points enumerated so far.
    """
    before = _region_set(stream, region, s)
    after = _region_set(stream, region, s + 1)
    cloud = PointCloud([*before, *after])
    left = list(range(len(before)))
    right = list(range(len(before), len(before) + len(after)))
    farthest = max(max(cloud.min_distances(left, right)), max(cloud.min_distances(right, left)))
    return cloud.to_fraction(farthest) <= stage_mesh(s)


def _decode_on_tree(
    stream: PresentationStream,
    tree: ComponentTree,
    n: int,
    s: int,
    merge_cap: int,
) -> int:
    nodes = order_components(tree, s)
    keys = [(node.last_branching_height, node.label) for node in nodes]
    assert len(set(keys)) == len(keys), "component order has ties"
    for node in nodes:
        label = label_node(stream, tree, node, dim_cap=2 * n + 2, merge_cap=merge_cap)
        if label == 2 * n + 1:
            return 1
        if label == 2 * n + 2:
            return 0
    return 1


def decode_limit(
    stream: PresentationStream,
    n: int,
    s: int,
    *,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> int:
    """Bit read off the least stage-s component labeled 2n+1 or 2n+2; 1 if none."""
    require_compact(stream)
    return _decode_on_tree(stream, build_tree(stream, s), n, s, merge_cap)


@dataclass(frozen=True)
class DecodeSeries:
    """Decoded bits for consecutive stages."""

    n: int
    bits: tuple[int, ...]

    @property
    def stable_from(self) -> int | None:
        return stabilized_from(self.bits)

    @property
    def pre_stabilization(self) -> tuple[bool, ...]:
        """Stages whose guess still differs from the final one, or precedes it."""
        start = self.stable_from
        return tuple(start is None or t < start for t in range(len(self.bits)))

    @property
    def final(self) -> int | None:
        return self.bits[-1] if self.bits else None


def decode_series(
    stream: PresentationStream,
    n: int,
    budget: int,
    *,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> DecodeSeries:
    """decode_limit at every stage below budget, sharing one component tree."""
    require_compact(stream)
    last = min(budget, stream.num_stages) - 1
    tree = build_tree(stream, last)
    bits = []
    for s in range(last + 1):
        bits.append(_decode_on_tree(stream, tree.truncated(s), n, s, merge_cap))
    series = DecodeSeries(n=n, bits=tuple(bits))
    if series.stable_from is not None and series.stable_from > 0:
        logger.warning(
            "Index %d: guesses before stage %d are pre-stabilization", n, series.stable_from
        )
    return series


def decode_all(
    stream: PresentationStream,
    indices: Iterable[int],
    budget: int,
    *,
    settings: Settings | None = None,
) -> dict[int, DecodeSeries]:
    """Decode series per index, in parallel up to the configured thread count."""
    merge_cap = settings.merge_cap if settings else DEFAULT_MERGE_CAP
    threads = settings.threads if settings else 1
    ordered = sorted(set(indices))

    def run(n: int) -> DecodeSeries:
        return decode_series(stream, n, budget, merge_cap=merge_cap)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, ordered))
    else:
        results = [run(n) for n in ordered]
    return dict(zip(ordered, results, strict=True))


def gated_encode(
    kind: str,
    witness: WitnessSet,
    budget: int,
    **options: Any,
) -> PresentationStream:
    """Stream of a gated preset: dense points appear only once their gate fires."""
    from polishforge.presets.registry import get_preset, list_presets

    preset = get_preset(kind)
    if preset is None:
        raise GatePatternError(f"unknown preset {kind!r}; choose from {list_presets()}")
    if witness.arity != preset.arity:
        raise GatePatternError(f"{kind} expects arity {preset.arity}, got {witness.arity}")
    stream = preset.build(witness, budget, **options)
    logger.info("Gated %s: %d points, %s stream", kind, len(stream.ids), stream.kind)
    return stream


def _earliest_surviving_hole(
    local: PresentationStream, dim: int, s: int, merge_cap: int
) -> int | None:
    """Earliest stage whose dim-holes include one that survives to s."""
    for t in range(min(s, local.num_stages - 1) + 1):
        holes = detect_stage_holes(local, t, dim, merge_cap)
        if any(hole_survives(h, local, s) for h in holes):
            return t
    return None


def _hole_carrier(
    stream: PresentationStream, tree: ComponentTree, dim: int, s: int, merge_cap: int
) -> tuple[ComponentNode, int] | None:
    """Stage-s component (>= 3 balls) with the earliest detected surviving dim-hole."""
    best: tuple[ComponentNode, int] | None = None
    for node in order_components(tree, s):
        if len(node.point_ids) < 3:
            continue
        local = component_stream(stream, tree, node)
        since = _earliest_surviving_hole(local, dim, s, merge_cap)
        if since is not None and (best is None or since < best[1]):
            best = (node, since)
    return best


def sphere_evidence(
    stream: PresentationStream,
    n: int,
    s: int,
    *,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> dict[str, int]:
    """Best stage-s component carrying a surviving (n+1)-hole, or an empty record."""
    require_compact(stream)
    tree = build_tree(stream, s)
    carrier = _hole_carrier(stream, tree, n + 1, s, merge_cap)
    if carrier is None:
        return {}
    node, since = carrier
    return {
        "component": node.label,
        "stage": node.stage,
        "isolated_k_levels": node.stage - node.last_branching_height,
        "hole_survived_since": since,
    }


def rank_decode_profile(
    stream: PresentationStream,
    n: int,
    s: int,
    *,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> dict[str, list[Any]]:
    """Branching of the components leaving the path of the longest-surviving (n+1)-hole.

    eta_path lists the labels of the path from the root to the carrier; each
    off-path entry records the departure stage t (a child of eta_t other than
    eta_(t+1)), its label and its branching profile through s.
    """
    require_compact(stream)
    tree = build_tree(stream, s)
    carrier = _hole_carrier(stream, tree, n + 1, s, merge_cap)
    if carrier is None:
        return {"eta_path": [], "off_path_branching": []}
    path = tree.ancestors(carrier[0])
    entries = []
    for t in range(len(path) - 1):
        for child in tree.children(path[t]):
            if child.index == path[t + 1].index:
                continue
            profile = branching_profile(tree, child, s)
            entries.append(
                {
                    "stage": t,
                    "label": child.label,
                    "branching": list(profile.descendant_branchings_per_level),
                }
            )
    return {"eta_path": [node.label for node in path], "off_path_branching": entries}
