"""Read/write presentation streams, witness tables, trees and reports.

Streams are JSON lines: an optional header {"kind": ...} followed by one object
per stage {"s": int, "points": [[id, ["p/q", ...]], ...], "net": int | null}.
"""

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

from polishforge.errors import StreamFormatError
from polishforge.exactgeom import HCPoint, format_rational, parse_rational
from polishforge.models import PresentationStream, Stage, StreamKind

if TYPE_CHECKING:
    from polishforge.stone import PrunedTree


def write_stream(stream: PresentationStream, path: Path) -> None:
    """Save a stream as JSON lines."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        f.write(json.dumps({"kind": stream.kind.value}) + "\n")
        for stage in stream.stages:
            f.write(json.dumps(_stage_to_dict(stage)) + "\n")


def read_stream(path: Path, stages: int | None = None) -> PresentationStream:
    """Load a stream, optionally keeping only the first `stages` stages."""
    kind: StreamKind | None = None
    parsed: list[Stage] = []
    with path.open("r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            if stages is not None and len(parsed) >= stages:
                break
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StreamFormatError(f"invalid JSON: {exc.msg}", line_no) from exc
            if not isinstance(data, dict):
                raise StreamFormatError("expected a JSON object", line_no)
            if "kind" in data and "s" not in data:
                if parsed or kind is not None:
                    raise StreamFormatError("header must be the first line", line_no)
                try:
                    kind = StreamKind(data["kind"])
                except ValueError as exc:
                    raise StreamFormatError(f"unknown stream kind {data['kind']!r}", line_no) from exc
                continue
            parsed.append(_dict_to_stage(data, line_no))
    if kind is None:
        kind = StreamKind.POLISH if parsed and parsed[0].net_size is None else StreamKind.COMPACT
    return PresentationStream(kind=kind, stages=tuple(parsed))


def _stage_to_dict(stage: Stage) -> dict[str, Any]:
    """Convert a Stage to a dictionary for JSON serialization."""
    return {
        "s": stage.index,
        "points": [
            [pid, [format_rational(c) for c in point.coords]] for pid, point in stage.new_points
        ],
        "net": stage.net_size,
    }


def _dict_to_stage(data: dict[str, Any], line_no: int) -> Stage:
    """Convert a dictionary from JSON to a Stage."""
    try:
        index = data["s"]
        raw_points = data["points"]
        net = data.get("net")
    except KeyError as exc:
        raise StreamFormatError(f"missing key {exc.args[0]!r}", line_no) from exc
    if not isinstance(index, int) or not isinstance(raw_points, list):
        raise StreamFormatError("'s' must be an int and 'points' a list", line_no)
    if net is not None and not isinstance(net, int):
        raise StreamFormatError("'net' must be an int or null", line_no)
    points = []
    for entry in raw_points:
        if not (isinstance(entry, list) and len(entry) == 2 and isinstance(entry[0], int)):
            raise StreamFormatError("point entries must be [id, [coords]]", line_no)
        try:
            point = HCPoint(tuple(parse_rational(str(c)) for c in entry[1]))
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise StreamFormatError(f"bad coordinates for point {entry[0]}: {exc}", line_no) from exc
        points.append((entry[0], point))
    return Stage(index=index, new_points=tuple(points), net_size=net)


def read_witness(path: Path) -> list[tuple[int, ...]]:
    """Load a witness table: a JSON list of integer tuples."""
    with path.open("r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(data, list):
        raise StreamFormatError("witness file must hold a JSON list", 1)
    rows = []
    for row in data:
        if not (isinstance(row, list) and all(isinstance(v, int) for v in row)):
            raise StreamFormatError(f"witness rows must be integer lists, got {row!r}", 1)
        rows.append(tuple(row))
    return rows


def write_witness(rows: list[tuple[int, ...]], path: Path) -> None:
    """Save a witness table."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump([list(row) for row in rows], f)


def write_tree(tree: "PrunedTree", path: Path) -> None:
    """Save a pruned tree as a JSON list of binary strings per depth."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump([sorted(level) for level in tree.levels], f, indent=2)


def read_tree(path: Path) -> "PrunedTree":
    """Load a pruned tree written by write_tree."""
    from polishforge.stone import PrunedTree

    with path.open("r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise StreamFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(data, list) or not all(isinstance(level, list) for level in data):
        raise StreamFormatError("tree file must hold a list of string lists", 1)
    return PrunedTree(levels=tuple(frozenset(str(node) for node in level) for level in data))


def write_report(report: dict[str, Any], path: Path) -> None:
    """Save a run report as JSON with sorted keys."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, ensure_ascii=False, sort_keys=True)
        f.write("\n")


def append_trace(record: dict[str, Any], path: Path) -> None:
    """Append one stage record to a JSON-lines trace."""
    with path.open("a", encoding="utf-8") as f:
        f.write(json.dumps(record, sort_keys=True) + "\n")
