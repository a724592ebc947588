"""Limit learner guessing the dimension of a presented sphere.

Holes are scanned lazily in (detection stage, dimension) order. The guess is
the dimension of the first bucket that still holds a surviving hole; buckets
whose holes have all failed are never revisited, since failure is latched.
"""

import logging
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from polishforge.components import ComponentNode, ComponentTree, component_stream
from polishforge.config import DEFAULT_DIM_CAP, DEFAULT_MERGE_CAP
from polishforge.models import PresentationStream
from polishforge.nerve import (
    Face,
    Hole,
    detect_holes,
    hole_survives,
    nerve_from_sets,
    witness_sets,
)
from polishforge.presentation import cover_at, require_compact, witnesses_through

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HoleRecord:
    """A detected hole and the stage at which it stopped surviving."""

    hole: Hole
    failed_at: int | None = None

    @property
    def alive(self) -> bool:
        return self.failed_at is None


@dataclass(frozen=True)
class LearnerState:
    """Recorded holes, scan cursor and guesses so far."""

    records: tuple[HoleRecord, ...] = ()
    current_guess: int = 0
    guess_history: tuple[int, ...] = ()
    cursor: tuple[int, int] = (0, 0)
    scanned: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    # stage -> witness sets of its cover, reused across dimensions and steps
    nerves: Mapping[int, frozenset[Face]] = field(default_factory=dict, compare=False)

    @property
    def detected(self) -> list[Hole]:
        return [record.hole for record in self.records]

    def survivors(self) -> list[Hole]:
        """Holes not yet failed."""
        return [record.hole for record in self.records if record.alive]


def stage_witness_sets(stream: PresentationStream, stage: int) -> frozenset[Face]:
    """Witness sets of the stage cover over the points enumerated through stage."""
    return frozenset(witness_sets(cover_at(stream, stage), witnesses_through(stream, stage)))


def detect_stage_holes(
    stream: PresentationStream,
    stage: int,
    dim: int,
    merge_cap: int = DEFAULT_MERGE_CAP,
    *,
    sets: frozenset[Face] | None = None,
) -> list[Hole]:
    """dim-holes of the witnessed nerve of the stage cover.

    sets are the cover's witness sets when the caller already has them.
    """
    cover = cover_at(stream, stage)
    if sets is None:
        sets = stage_witness_sets(stream, stage)
    complex_ = nerve_from_sets(cover, sets, max_dim=dim + 1)
    return detect_holes(complex_, dim, stage, merge_cap=merge_cap)


def step(
    state: LearnerState,
    stream: PresentationStream,
    s: int,
    *,
    dim_cap: int = DEFAULT_DIM_CAP,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> LearnerState:
    """Advance the learner to stage s and append its guess."""
    require_compact(stream)
    records = list(state.records)
    scanned = set(state.scanned)
    nerves = dict(state.nerves)
    stage, dim = state.cursor
    guess = 0
    while (stage, dim) <= (s, dim_cap):
        if (stage, dim) not in scanned:
            if stage not in nerves:
                nerves[stage] = stage_witness_sets(stream, stage)
            for hole in detect_stage_holes(stream, stage, dim, merge_cap, sets=nerves[stage]):
                records.append(HoleRecord(hole=hole))
            scanned.add((stage, dim))
        surviving = False
        for i, record in enumerate(records):
            hole = record.hole
            if not record.alive or (hole.detected_at, hole.dim) != (stage, dim):
                continue
            if hole_survives(hole, stream, s):
                surviving = True
            else:
                records[i] = replace(record, failed_at=s)
        if surviving:
            guess = dim
            break
        if dim < dim_cap:
            dim += 1
        else:
            stage, dim = stage + 1, 0
    logger.debug("Stage %d: guess %d (cursor %s)", s, guess, (stage, dim))
    return LearnerState(
        records=tuple(records),
        current_guess=guess,
        guess_history=(*state.guess_history, guess),
        cursor=(stage, dim),
        scanned=frozenset(scanned),
        nerves=nerves,
    )


def run_learner(
    stream: PresentationStream,
    budget: int,
    *,
    dim_cap: int = DEFAULT_DIM_CAP,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> LearnerState:
    """Run the learner on stages 0 .. budget - 1."""
    state = LearnerState()
    for s in range(min(budget, stream.num_stages)):
        state = step(state, stream, s, dim_cap=dim_cap, merge_cap=merge_cap)
    return state


def stabilized_from(history: tuple[int, ...] | list[int]) -> int | None:
    """First stage from which the guess never changes again."""
    if not history:
        return None
    start = len(history) - 1
    while start > 0 and history[start - 1] == history[-1]:
        start -= 1
    return start


def label_node(
    stream: PresentationStream,
    tree: ComponentTree,
    node: ComponentNode,
    *,
    dim_cap: int = DEFAULT_DIM_CAP,
    merge_cap: int = DEFAULT_MERGE_CAP,
) -> int:
    """Current guess of an independent learner on the node's component stream."""
    local = component_stream(stream, tree, node)
    state = run_learner(local, node.stage + 1, dim_cap=dim_cap, merge_cap=merge_cap)
    return state.current_guess


def label_tree(
    stream: PresentationStream,
    tree: ComponentTree,
    s: int,
    *,
    dim_cap: int = DEFAULT_DIM_CAP,
    merge_cap: int = DEFAULT_MERGE_CAP,
    threads: int = 1,
) -> dict[ComponentNode, int]:
    """Label every stage-s component with its learner's current guess."""
    nodes = list(tree.levels[s])

    def label(node: ComponentNode) -> int:
        return label_node(stream, tree, node, dim_cap=dim_cap, merge_cap=merge_cap)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            labels = list(pool.map(label, nodes))
    else:
        labels = [label(node) for node in nodes]
    return dict(zip(nodes, labels, strict=True))
