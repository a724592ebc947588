#!/usr/bin/env python3
"""Run the end-to-end acceptance checks and save a JSON report.

Usage:
    uv run python scripts/run_acceptance.py

Each check compiles, encodes or builds its inputs from scratch, logs what it
finds and records pass or fail. The report goes to
$POLISH_FORGE_DATA_DIR/acceptance_report.json and the script exits
non-zero when any check fails. The full run takes several minutes.
"""

import logging
import sys
import time
from collections.abc import Callable
from itertools import combinations
from typing import Any

import numpy as np

from polishforge.codec import (
    LimitApprox,
    WitnessSet,
    decode_all,
    encode_limit,
    encoder_regions,
    gated_encode,
    rank_decode_profile,
    stage_hausdorff_ok,
)
from polishforge.compiler import compile_term
from polishforge.config import Settings
from polishforge.errors import DimensionObstruction, UncertifiedStreamError
from polishforge.gf2 import dense_rank, to_dense
from polishforge.learner import run_learner, stabilized_from
from polishforge.models import PresentationStream
from polishforge.nerve import SimplicialComplex, betti_gf2
from polishforge.presentation import require_compact, validate_certificate
from polishforge.spaceterm import (
    One,
    Ordinal,
    SpaceTerm,
    Sphere,
    SPi,
    SSigma,
    cb_derivative,
    normalize,
    parse_term,
    s1_rank,
    z_term,
)
from polishforge.stone import (
    algebra_sequence,
    algebra_to_tree,
    comb,
    comb_of_combs,
    full_tree,
    single_path,
    tree_derivative,
    zero_dim_to_tree,
)
from polishforge.storage import write_report

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

BUDGET = 12
STONE_DEPTH = 8


def check_sphere_learner() -> bool:
    """The learner settles on d for compiled S^0, S^1 and S^2 with a run of 5 equal guesses."""
    ok = True
    for d in (0, 1, 2):
        started = time.perf_counter()
        state = run_learner(compile_term(Sphere(d), BUDGET), BUDGET)
        since = stabilized_from(state.guess_history)
        run_length = BUDGET - since if since is not None else 0
        logger.info(
            "S^%d: guesses %s, stable run %d, %.1f s",
            d,
            list(state.guess_history),
            run_length,
            time.perf_counter() - started,
        )
        ok = ok and state.current_guess == d and run_length >= 5
    return ok


def _dense_betti(complex_: SimplicialComplex, d: int) -> int:
    n_d = len(complex_.faces_of_dim(d))
    lower = len(complex_.faces_of_dim(d - 1)) if d else 1
    boundary = dense_rank(to_dense(complex_.boundary_columns(d), max(lower, 1))) if n_d else 0
    upper_cols = complex_.boundary_columns(d + 1)
    higher = dense_rank(to_dense(upper_cols, max(n_d, 1))) if upper_cols else 0
    return n_d - boundary - higher


def check_homology_oracle() -> bool:
    """Sparse Betti numbers agree with dense ranks on random complexes and known shapes."""
    rng = np.random.default_rng(0)
    for trial in range(50):
        n_vertices = int(rng.integers(3, 13))
        maximal = [
            sorted(int(v) for v in rng.choice(n_vertices, size=int(rng.integers(1, 5)), replace=False))
            for _ in range(int(rng.integers(1, 9)))
        ]
        complex_ = SimplicialComplex.from_maximal(maximal, max_dim=4)
        for d in range(complex_.dim + 1):
            if betti_gf2(complex_, d) != _dense_betti(complex_, d):
                logger.error("Trial %d: degree %d disagrees on %s", trial, d, maximal)
                return False
    triangle = SimplicialComplex.from_maximal([(0, 1), (1, 2), (0, 2)])
    octahedron = SimplicialComplex.from_maximal(
        [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    )
    cone = SimplicialComplex.from_maximal([(0, 1, 3), (1, 2, 3), (0, 2, 3)])
    return (
        betti_gf2(triangle, 1) == 1
        and betti_gf2(octahedron, 2) == 1
        and all(betti_gf2(cone, d) == 0 for d in range(3))
    )


def check_limit_round_trip() -> bool:
    """Encoding a subset of {0, 1, 2} decodes back to its characteristic bits."""
    settings = Settings()
    ok = True
    for size in range(4):
        for members in combinations(range(3), size):
            stream = encode_limit(LimitApprox.characteristic(members, 3), BUDGET)
            series = decode_all(stream, range(3), BUDGET, settings=settings)
            finals = [series[n].final for n in range(3)]
            expected = [int(n in members) for n in range(3)]
            logger.info("D=%s: decoded %s", set(members), finals)
            ok = ok and finals == expected
    return ok


def check_encoder_continuity() -> bool:
    """Region sets move by at most 2^-s between stages, through forced flips."""
    phi = LimitApprox(rows=((0, 0, 1), (0, 2, 0), (0, 5, 1)), count=1)
    stream = encode_limit(phi, BUDGET)
    regions = encoder_regions(phi.count, BUDGET)
    return all(
        stage_hausdorff_ok(stream, region, s) for region in regions for s in range(BUDGET - 1)
    )


def _certified(stream: PresentationStream) -> bool:
    return all(validate_certificate(stream, s) for s in range(stream.num_stages))


def check_certificates() -> bool:
    """Compiled and encoded compact streams are certified; gated Polish ones are refused."""
    terms = ["(one)", "(sphere 1)", "(ordinal 1)", "(alpha (sphere 0))"]
    compact = [compile_term(parse_term(text), 8) for text in terms]
    compact.append(encode_limit(LimitApprox.characteristic({1}, 2), 8))
    compact.append(gated_encode("zd2", WitnessSet.from_rows([(0, 0, 1), (0, 1, 2)]), 8))
    if not all(_certified(stream) for stream in compact):
        return False
    polish = gated_encode("xd", WitnessSet.from_rows([(0, 0, 0, 2), (0, 0, 0, 4)]), 8)
    try:
        require_compact(polish)
    except UncertifiedStreamError:
        return True
    return False


def check_symbolic_derivative() -> bool:
    """Ordinal(k) reaches a point in k derivatives; Z_3 derives to Z_2."""
    for k in range(1, 5):
        term: SpaceTerm = Ordinal(k)
        for _ in range(k):
            term = cb_derivative(term)
        if term != One():
            return False
    tables = [[True], [False], [True, False, True], [False, True]]
    return all(
        normalize(cb_derivative(z_term(table, 3))) == normalize(z_term(table, 2))
        for table in tables
    )


def check_circle_ranks() -> bool:
    """Both towers have circle rank n."""
    return all(s1_rank(SPi(2 * n + 1)) == n and s1_rank(SSigma(2 * n + 3)) == n for n in range(5))


def check_stone_round_trip() -> bool:
    """Tree to algebras and back keeps atom counts and multiplicities; derivatives step down."""
    for tree in (full_tree(5), single_path(STONE_DEPTH), comb(STONE_DEPTH), comb_of_combs(STONE_DEPTH)):
        algebras = algebra_sequence(tree)
        rebuilt = algebra_sequence(algebra_to_tree(algebras))
        if [len(a.atoms) for a in algebras] != [len(a.atoms) for a in rebuilt]:
            return False
        if [a.multiplicities() for a in algebras] != [a.multiplicities() for a in rebuilt]:
            return False
    depth = STONE_DEPTH
    return (
        tree_derivative(comb_of_combs(depth)) == comb(depth - 1)
        and tree_derivative(comb(depth - 1)) == single_path(depth - 2)
    )


def check_zero_dim_extraction() -> bool:
    """Two spines for S^0, one limit spine for omega + 1, an obstruction for S^1."""
    budget = 10
    pair = zero_dim_to_tree(compile_term(Sphere(0), budget), budget)
    sequence = zero_dim_to_tree(compile_term(Ordinal(1), budget), budget)
    limit = tree_derivative(sequence)
    logger.info(
        "S^0: %d leaves; omega+1: %d leaves, %d after the derivative",
        len(pair.levels[-1]),
        len(sequence.levels[-1]),
        len(limit.levels[-1]),
    )
    if len(pair.levels[-1]) != 2 or len(limit.levels[-1]) != 1 or len(sequence.levels[-1]) < 3:
        return False
    try:
        zero_dim_to_tree(compile_term(Sphere(1), budget), budget)
    except DimensionObstruction as exc:
        logger.info("S^1: %s", exc)
        return True
    return False


def _departures(profile: dict[str, list[Any]]) -> set[int]:
    return {
        entry["stage"]
        for entry in profile["off_path_branching"]
        if entry["stage"] > 1 and any(entry["branching"])
    }


def check_rank_separation() -> bool:
    """A full table keeps branching off the hole path at three or more stages.

    With rows at every b for only two fringes, at most two departures branch and
    every later one is quiet.
    """
    budget = 14
    full = WitnessSet.from_rows([(0, a, b) for a in range(6) for b in range(budget)])
    member = WitnessSet.from_rows([(0, a, b) for a in range(2) for b in range(budget)])
    busy = rank_decode_profile(gated_encode("zd2", full, budget, count=1), 0, budget - 1)
    quiet = rank_decode_profile(gated_encode("zd2", member, budget, count=1), 0, budget - 1)
    logger.info(
        "Departures: full table %s, two-fringe table %s",
        sorted(_departures(busy)),
        sorted(_departures(quiet)),
    )
    last = max(_departures(quiet), default=1)
    settled = all(
        not any(entry["branching"])
        for entry in quiet["off_path_branching"]
        if entry["stage"] > last
    )
    return len(_departures(busy)) >= 3 and len(_departures(quiet)) <= 2 and settled


CHECKS: list[tuple[str, Callable[[], bool]]] = [
    ("sphere_learner", check_sphere_learner),
    ("homology_oracle", check_homology_oracle),
    ("limit_round_trip", check_limit_round_trip),
    ("encoder_continuity", check_encoder_continuity),
    ("certificates", check_certificates),
    ("symbolic_derivative", check_symbolic_derivative),
    ("circle_ranks", check_circle_ranks),
    ("stone_round_trip", check_stone_round_trip),
    ("zero_dim_extraction", check_zero_dim_extraction),
    ("rank_separation", check_rank_separation),
]


def main() -> None:
    """Run every check and write the report."""
    settings = Settings()
    results: dict[str, Any] = {}
    for name, check in CHECKS:
        logger.info("Running %s", name)
        started = time.perf_counter()
        passed = check()
        results[name] = {"passed": passed, "wall_time_s": round(time.perf_counter() - started, 3)}
        logger.info("%s: %s", name, "passed" if passed else "FAILED")

    report_path = settings.report_path("acceptance")
    write_report({"checks": results}, report_path)
    logger.info("Report written to %s", report_path)

    failed = [name for name, result in results.items() if not result["passed"]]
    if failed:
        logger.error("Failed checks: %s", ", ".join(failed))
        sys.exit(1)


if __name__ == "__main__":
    main()
