"""Tests for storage module."""

import json
from fractions import Fraction
from pathlib import Path

import pytest

from polishforge.errors import StreamFormatError
from polishforge.models import PresentationStream, StreamKind
from polishforge.stone import comb
from polishforge.storage import (
    append_trace,
    read_stream,
    read_tree,
    read_witness,
    write_report,
    write_stream,
    write_tree,
    write_witness,
)


def test_save_and_load_stream(tmp_path: Path, two_point_stream: PresentationStream) -> None:
    """Test saving and loading a compact stream as JSON lines."""
    path = tmp_path / "data" / "two.jsonl"

    write_stream(two_point_stream, path)
    loaded = read_stream(path)

    assert loaded == two_point_stream
    lines = path.read_text().splitlines()
    assert json.loads(lines[0]) == {"kind": "compact"}
    assert json.loads(lines[1]) == {"s": 0, "points": [[0, ["1/4"]]], "net": 1}


def test_load_stream_prefix(tmp_path: Path, segment_stream: PresentationStream) -> None:
    """Test that read_stream can stop after a number of stages."""
    path = tmp_path / "segment.jsonl"
    write_stream(segment_stream, path)

    loaded = read_stream(path, stages=3)

    assert loaded.num_stages == 3
    assert loaded.ids == segment_stream.ids[: segment_stream.count_through(2)]


def test_load_stream_without_header(tmp_path: Path) -> None:
    """Test that a headerless file is polish when stage 0 has no net size."""
    path = tmp_path / "bare.jsonl"
    path.write_text('{"s": 0, "points": [[0, ["1/2", "1/3"]]], "net": null}\n')

    loaded = read_stream(path)

    assert loaded.kind is StreamKind.POLISH
    assert loaded.points[0].coords[1] == Fraction(1, 3)


def test_load_stream_reports_bad_line(tmp_path: Path) -> None:
    """Test that malformed lines raise StreamFormatError with the line number."""
    path = tmp_path / "bad.jsonl"
    path.write_text('{"kind": "compact"}\n{"s": 0, "points": [[0, ["3/2"]]], "net": 1}\n')

    with pytest.raises(StreamFormatError, match="line 2") as info:
        read_stream(path)

    assert info.value.line == 2


def test_load_stream_rejects_unknown_kind(tmp_path: Path) -> None:
    """Test that an unknown header kind is a format error."""
    path = tmp_path / "odd.jsonl"
    path.write_text('{"kind": "banach"}\n')

    with pytest.raises(StreamFormatError, match="unknown stream kind"):
        read_stream(path)


def test_witness_round_trip(tmp_path: Path) -> None:
    """Test saving and loading a witness table."""
    path = tmp_path / "witness.json"

    write_witness([(0, 1, 2), (1, 0, 0)], path)

    assert read_witness(path) == [(0, 1, 2), (1, 0, 0)]


def test_witness_rejects_non_integer_rows(tmp_path: Path) -> None:
    """Test that witness rows must be integer lists."""
    path = tmp_path / "witness.json"
    path.write_text('[[0, "a", 1]]')

    with pytest.raises(StreamFormatError):
        read_witness(path)


def test_tree_round_trip(tmp_path: Path) -> None:
    """Test saving and loading a pruned tree."""
    path = tmp_path / "comb_tree.json"

    write_tree(comb(4), path)

    assert read_tree(path) == comb(4)
    assert json.loads(path.read_text())[1] == ["0", "1"]


def test_report_and_trace(tmp_path: Path) -> None:
    """Test that reports have sorted keys and traces append one line per record."""
    report_path = tmp_path / "out" / "report.json"
    trace_path = tmp_path / "trace.jsonl"

    write_report({"b": 1, "a": [2]}, report_path)
    append_trace({"stage": 0}, trace_path)
    append_trace({"stage": 1}, trace_path)

    assert report_path.read_text().index('"a"') < report_path.read_text().index('"b"')
    assert [json.loads(line) for line in trace_path.read_text().splitlines()] == [
        {"stage": 0},
        {"stage": 1},
    ]
