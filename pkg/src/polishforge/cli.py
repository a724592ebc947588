"""Command-line front end.

Usage:
    polishforge compile "(sphere 1)" --budget 10 --out data/circle.jsonl
    polishforge learn data/circle.jsonl --budget 10
    polishforge encode --kind zd --witness data/phi.json --budget 12 --out data/zd.jsonl
    polishforge decode data/zd.jsonl --n 0 --stage 11
    polishforge stone extract data/points.jsonl --out data/points_tree.json

Every run prints a JSON report with sorted keys: the config echoed back,
per-stage metrics, the final result and the wall time.
"""

import argparse
import json
import logging
import sys
import time
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from polishforge.codec import LimitApprox, WitnessSet, decode_series, encode_limit, gated_encode
from polishforge.compiler import compile_term
from polishforge.components import build_tree, leaf_count, order_components
from polishforge.config import Settings
from polishforge.errors import BudgetExceeded, ConfigError, PolishForgeError
from polishforge.learner import label_tree, run_learner, stabilized_from
from polishforge.models import PresentationStream
from polishforge.nerve import betti_gf2, nerve_summary, witnessed_nerve
from polishforge.presentation import (
    cover_at,
    refinement_sequence,
    validate_certificate,
    witnesses_through,
)
from polishforge.presets.registry import get_preset
from polishforge.spaceterm import format_term, parse_term
from polishforge.stone import (
    algebra_sequence,
    algebra_to_tree,
    tree_derivative,
    tree_to_algebra,
    zero_dim_to_tree,
)
from polishforge.storage import (
    append_trace,
    read_stream,
    read_tree,
    read_witness,
    write_report,
    write_stream,
    write_tree,
)

logger = logging.getLogger(__name__)

COMMANDS = ("compile", "encode", "decode", "learn", "components", "nerve", "stone", "validate")
STONE_ACTIONS = ("tree2ba", "ba2tree", "derive", "extract")
ENCODE_KINDS = ("zd", "xd", "zd2", "pd1")


@dataclass
class ExperimentConfig:
    """One CLI run: command, inputs, budgets and caps."""

    command: str
    inputs: tuple[str, ...] = ()
    budget: int = 10
    dim_cap: int = 4
    merge_cap: int = 3
    output: str | None = None
    trace: str | None = None
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("budget", "dim_cap", "merge_cap"):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be positive, got {value}")


def _load_stream(config: ExperimentConfig, position: int = 0) -> PresentationStream:
    if len(config.inputs) <= position:
        raise ConfigError(f"{config.command} needs an input stream")
    return read_stream(Path(config.inputs[position]), config.options.get("stages"))


def _stream_output(config: ExperimentConfig) -> Path | None:
    if config.output:
        return Path(config.output)
    if name := config.options.get("save"):
        return Settings().stream_path(name)
    return None


def _tree_output(config: ExperimentConfig) -> Path | None:
    if config.output:
        return Path(config.output)
    if name := config.options.get("save"):
        return Settings().tree_path(name)
    return None


def _trace(config: ExperimentConfig, record: dict[str, Any]) -> None:
    if config.trace:
        append_trace(record, Path(config.trace))


def _require_stages(stream: PresentationStream, needed: int, partial: dict[str, Any]) -> None:
    if stream.num_stages < needed:
        raise BudgetExceeded(
            f"{needed} stages requested, the stream has {stream.num_stages}", partial
        )


def _stage_metrics(stream: PresentationStream) -> list[dict[str, Any]]:
    return [
        {"stage": stage.index, "new_points": len(stage.new_points), "net_size": stage.net_size}
        for stage in stream.stages
    ]


def _cmd_compile(config: ExperimentConfig) -> dict[str, Any]:
    term = parse_term(config.options["term"])
    stream = compile_term(term, config.budget)
    if (path := _stream_output(config)) is not None:
        write_stream(stream, path)
    return {
        "metrics": _stage_metrics(stream),
        "result": {"term": format_term(term), "points": len(stream.ids)},
    }


def _cmd_encode(config: ExperimentConfig) -> dict[str, Any]:
    kind = config.options["kind"]
    rows = read_witness(Path(config.options["witness"]))
    settings = Settings()
    result: dict[str, Any] = {"kind": kind}
    if kind == "zd":
        triples = [(int(n), int(s), int(bit)) for n, s, bit in rows]
        count = max((n + 1 for n, _, _ in triples), default=1)
        phi = LimitApprox(rows=tuple(triples), count=count)
        stream = encode_limit(phi, config.budget, sphere_dim_cap=settings.sphere_dim_cap)
    else:
        preset = get_preset(kind)
        arity = preset.arity if preset is not None else None
        witness = WitnessSet.from_rows(rows, arity)
        options = {
            key: config.options[key] for key in ("mode", "perfect") if config.options.get(key)
        }
        stream = gated_encode(kind, witness, config.budget, **options)
        if preset is not None:
            result["skeleton"] = format_term(preset.skeleton_term(witness))
    if (path := _stream_output(config)) is not None:
        write_stream(stream, path)
    result.update({"points": len(stream.ids), "stream_kind": str(stream.kind)})
    return {"metrics": _stage_metrics(stream), "result": result}


def _cmd_decode(config: ExperimentConfig) -> dict[str, Any]:
    stream = _load_stream(config)
    n = config.options["n"]
    stage = config.options.get("stage")
    last = stage if stage is not None else config.budget - 1
    _require_stages(stream, last + 1, {"n": n, "available_stages": stream.num_stages})
    series = decode_series(stream, n, last + 1, merge_cap=config.merge_cap)
    for s, (bit, early) in enumerate(zip(series.bits, series.pre_stabilization, strict=True)):
        _trace(config, {"stage": s, "n": n, "bit": bit, "pre_stabilization": early})
    return {
        "metrics": [
            {"stage": s, "bit": bit, "pre_stabilization": early}
            for s, (bit, early) in enumerate(zip(series.bits, series.pre_stabilization, strict=True))
        ],
        "result": {"n": n, "final_guess": series.final, "stable_from": series.stable_from},
    }


def _cmd_learn(config: ExperimentConfig) -> dict[str, Any]:
    if "term" in config.options and config.options["term"]:
        stream = compile_term(parse_term(config.options["term"]), config.budget)
    else:
        stream = _load_stream(config)
    budget = config.budget
    if stream.num_stages < budget:
        state = run_learner(stream, stream.num_stages, dim_cap=config.dim_cap, merge_cap=config.merge_cap)
        raise BudgetExceeded(
            f"budget {budget} exceeds the {stream.num_stages} available stages",
            {"guess_history": list(state.guess_history), "final_guess": state.current_guess},
        )
    state = run_learner(stream, budget, dim_cap=config.dim_cap, merge_cap=config.merge_cap)
    for s, guess in enumerate(state.guess_history):
        _trace(config, {"stage": s, "guess": guess})
    return {
        "metrics": [{"stage": s, "guess": g} for s, g in enumerate(state.guess_history)],
        "result": {
            "final_guess": state.current_guess,
            "stabilized_from": stabilized_from(state.guess_history),
            "holes_detected": len(state.records),
            "holes_alive": len(state.survivors()),
        },
    }


def _cmd_components(config: ExperimentConfig) -> dict[str, Any]:
    stream = _load_stream(config)
    stage = config.options.get("stage")
    last = min(stage if stage is not None else config.budget - 1, stream.num_stages - 1)
    tree = build_tree(stream, last)
    ordered = order_components(tree, last)
    guesses = label_tree(
        stream,
        tree,
        last,
        dim_cap=config.dim_cap,
        merge_cap=config.merge_cap,
        threads=Settings().threads,
    )
    return {
        "metrics": [{"stage": s, "components": leaf_count(tree, s)} for s in range(last + 1)],
        "result": {
            "stage": last,
            "order": [
                {
                    "label": node.label,
                    "height": node.last_branching_height,
                    "balls": len(node.point_ids),
                    "guess": guesses[node],
                }
                for node in ordered
            ],
        },
    }


def _cmd_nerve(config: ExperimentConfig) -> dict[str, Any]:
    stream = _load_stream(config)
    stage = config.options.get("stage", 0)
    _require_stages(stream, stage + 1, {"available_stages": stream.num_stages})
    max_dim = config.dim_cap
    complex_ = witnessed_nerve(cover_at(stream, stage), witnesses_through(stream, stage), max_dim + 1)
    summary = nerve_summary(complex_, max_dim)
    return {
        "metrics": [{"dim": d, "betti": betti_gf2(complex_, d)} for d in range(max_dim + 1)],
        "result": {"stage": stage, **summary},
    }


def _cmd_stone(config: ExperimentConfig) -> dict[str, Any]:
    action = config.options["action"]
    if not config.inputs:
        raise ConfigError("stone needs an input file")
    source = Path(config.inputs[0])
    if action == "extract":
        tree = zero_dim_to_tree(
            read_stream(source, config.options.get("stages")), config.budget, merge_cap=config.merge_cap
        )
    else:
        tree = read_tree(source)
        depth = config.options.get("depth")
        if action == "derive":
            tree = tree_derivative(tree, depth)
        elif action == "ba2tree":
            tree = algebra_to_tree(algebra_sequence(tree, depth))
        elif action == "tree2ba":
            algebras = algebra_sequence(tree, depth)
            return {
                "metrics": [
                    {"depth": a.depth, "atoms": len(a.atoms), "multiplicities": list(a.multiplicities())}
                    for a in algebras
                ],
                "result": {"atoms": list(tree_to_algebra(tree, algebras[-1].depth).atoms)},
            }
        else:
            raise ConfigError(f"unknown stone action {action!r}")
    if (path := _tree_output(config)) is not None:
        write_tree(tree, path)
    return {
        "metrics": [{"depth": k, "nodes": len(level)} for k, level in enumerate(tree.levels)],
        "result": {"depth": tree.depth, "leaves": sorted(tree.levels[-1])},
    }


def _cmd_validate(config: ExperimentConfig) -> dict[str, Any]:
    stream = _load_stream(config)
    if not stream.is_compact:
        return {"metrics": [], "result": {"certified": False, "stages": stream.num_stages}}
    metrics = []
    for s in range(stream.num_stages):
        certified = validate_certificate(stream, s)
        refined = True
        try:
            refinement_sequence(stream, s)
        except PolishForgeError as exc:
            logger.warning("Stage %d: %s", s, exc)
            refined = False
        metrics.append({"stage": s, "certificate": certified, "refinement": refined})
        _trace(config, metrics[-1])
    ok = all(m["certificate"] and m["refinement"] for m in metrics)
    return {"metrics": metrics, "result": {"certified": ok, "stages": stream.num_stages}}


_HANDLERS = {
    "compile": _cmd_compile,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "learn": _cmd_learn,
    "components": _cmd_components,
    "nerve": _cmd_nerve,
    "stone": _cmd_stone,
    "validate": _cmd_validate,
}


def run(config: ExperimentConfig) -> dict[str, Any]:
    """Execute one command and return its report."""
    started = time.perf_counter()
    outcome = _HANDLERS[config.command](config)
    report = {
        "config": asdict(config),
        "metrics": outcome["metrics"],
        "result": outcome["result"],
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    logger.info("%s finished in %.3f s", config.command, report["wall_time_s"])
    return report


def _parse_args(argv: Sequence[str] | None) -> argparse.Namespace:
    settings = Settings()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=settings.budget, help="Stage budget.")
    common.add_argument("--dim-cap", type=int, default=settings.dim_cap, help="Hole dimension cap.")
    common.add_argument(
        "--merge-cap", type=int, default=settings.merge_cap, help="Finite-modification merge cap."
    )
    common.add_argument("--out", default=None, help="Output stream or tree path.")
    common.add_argument(
        "--save", default=None, help="Save the output under this name in the data directory."
    )
    common.add_argument("--trace", default=None, help="JSON-lines stage trace path; enables debug logs.")
    common.add_argument("--stages", type=int, default=None, help="Read only this many stages.")
    common.add_argument("--report", default=None, help="Also write the report to this path.")

    p = argparse.ArgumentParser(prog="polishforge", description="Finite-stage topology experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    compile_p = sub.add_parser("compile", parents=[common], help="Compile a space term.")
    compile_p.add_argument("term", help='Space term, e.g. "(alpha (sphere 1))".')

    encode_p = sub.add_parser("encode", parents=[common], help="Encode witness data as a stream.")
    encode_p.add_argument("--kind", choices=ENCODE_KINDS, required=True)
    encode_p.add_argument("--witness", required=True, help="JSON list of integer tuples.")
    encode_p.add_argument("--mode", choices=("compact", "polish"), default=None)
    encode_p.add_argument("--perfect", action="store_true")

    decode_p = sub.add_parser("decode", parents=[common], help="Decode one index of a stream.")
    decode_p.add_argument("inputs", nargs=1)
    decode_p.add_argument("--n", type=int, required=True)
    decode_p.add_argument("--stage", type=int, default=None)

    learn_p = sub.add_parser("learn", parents=[common], help="Run the sphere learner.")
    learn_p.add_argument("inputs", nargs="*")
    learn_p.add_argument("--term", default=None, help="Compile this term instead of reading a stream.")

    for name, text in (("components", "Component tree."), ("nerve", "Stage nerve homology.")):
        cmd_p = sub.add_parser(name, parents=[common], help=text)
        cmd_p.add_argument("inputs", nargs=1)
        cmd_p.add_argument("--stage", type=int, default=None)

    stone_p = sub.add_parser("stone", parents=[common], help="Trees and clopen algebras.")
    stone_p.add_argument("action", choices=STONE_ACTIONS)
    stone_p.add_argument("inputs", nargs=1)
    stone_p.add_argument("--depth", type=int, default=None)

    validate_p = sub.add_parser("validate", parents=[common], help="Check certificates.")
    validate_p.add_argument("inputs", nargs=1)

    return p.parse_args(argv)


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    options = {
        key: value
        for key in (
            "term",
            "kind",
            "witness",
            "mode",
            "perfect",
            "n",
            "stage",
            "action",
            "depth",
            "stages",
            "save",
        )
        if (value := getattr(args, key, None)) is not None
    }
    return ExperimentConfig(
        command=args.command,
        inputs=tuple(getattr(args, "inputs", None) or ()),
        budget=args.budget,
        dim_cap=args.dim_cap,
        merge_cap=args.merge_cap,
        output=args.out,
        trace=args.trace,
        options=options,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run the command and print its report."""
    args = _parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.trace else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    try:
        config = _config_from_args(args)
        report = run(config)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        print(json.dumps({"partial": exc.partial}, sort_keys=True))
        return 2
    except (PolishForgeError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.report:
        write_report(report, Path(args.report))
    print(json.dumps(report, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
