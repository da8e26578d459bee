import io
import json

import numpy as np
import pytest

from ocean_tdp import ValidationError
from ocean_tdp.results import COLUMNS, ResultRow, read_results, scan, thread_count, tsv_line, write_results
from ocean_tdp.state import PreparedState
from ocean_tdp.twoway import TwoWaySelection, query


@pytest.fixture
def named_toy(toy_state):
    rows = tuple(f"g{i}" for i in range(toy_state.p))
    cols = tuple(f"c{i}" for i in range(toy_state.q))
    return PreparedState.from_categories(toy_state.categories, row_ids=rows, col_ids=cols)


ROW_SETS = {"all": [f"g{i}" for i in range(6)], "head": ["g0", "g1", "g2"], "tail": ["g3", "g4", "g5"]}
COL_SETS = {"left": ["c0", "c1", "c2"], "right": ["c3", "c4", "c5", "c6"]}


def test_toy_row(toy_state, toy_sel):
    row = ResultRow.from_report("A", "B", query(toy_state, toy_sel))
    assert row.row_tdp_lower == row.row_tdp_upper == pytest.approx(0.5)
    assert row.row_exact and row.col_exact
    assert (row.n_rows, row.n_cols) == (6, 7)
    assert tsv_line(row).split("\t")[:6] == ["A", "B", "6", "7", repr(8 / 42), "0.5"]


def test_scan_order_and_count(named_toy):
    rows = list(scan(named_toy, ROW_SETS, COL_SETS, threads=1))
    assert [(r.row_set, r.col_set) for r in rows] == [
        (a, b) for a in ("all", "head", "tail") for b in ("left", "right")
    ]


def test_scan_threads_match_serial(named_toy):
    serial = list(scan(named_toy, ROW_SETS, COL_SETS, threads=1))
    parallel = list(scan(named_toy, ROW_SETS, COL_SETS, threads=4))
    assert serial == parallel


def test_scan_selected_names(named_toy):
    rows = list(scan(named_toy, ROW_SETS, COL_SETS, ["tail"], ["left"], threads=1))
    assert len(rows) == 1 and rows[0].n_rows == 3 and rows[0].n_cols == 3


def test_scan_unknown_set_fails_before_querying(named_toy):
    with pytest.raises(ValidationError):
        list(scan(named_toy, ROW_SETS, COL_SETS, ["nope"], None))


def test_tsv_round_trip(named_toy, tmp_path):
    rows = list(scan(named_toy, ROW_SETS, COL_SETS, threads=1))
    buf = io.StringIO()
    write_results(rows, buf, "tsv")
    text = buf.getvalue()
    assert text.splitlines()[0].split("\t") == list(COLUMNS)
    (tmp_path / "r.tsv").write_text(text)
    assert read_results(tmp_path / "r.tsv") == [r.encoded() for r in rows]


def test_json_mirrors_tsv(named_toy, tmp_path):
    rows = list(scan(named_toy, ROW_SETS, COL_SETS, threads=1))
    buf = io.StringIO()
    write_results(rows, buf, "json")
    records = json.loads(buf.getvalue())
    assert [list(r) for r in records] == [list(COLUMNS)] * len(rows)
    (tmp_path / "r.json").write_text(buf.getvalue())
    assert read_results(tmp_path / "r.json") == [r.encoded() for r in rows]


def test_empty_json_is_valid():
    buf = io.StringIO()
    write_results([], buf, "json")
    assert json.loads(buf.getvalue()) == []


def test_bad_header(tmp_path):
    (tmp_path / "r.tsv").write_text("a\tb\n1\t2\n")
    with pytest.raises(ValidationError):
        read_results(tmp_path / "r.tsv")


def test_thread_env(monkeypatch):
    monkeypatch.setenv("OCEAN_THREADS", "1")
    assert thread_count() == 1
    monkeypatch.setenv("OCEAN_THREADS", "zero")
    with pytest.raises(ValidationError):
        thread_count()


def test_bounds_in_unit_interval(rng):
    state = PreparedState.from_categories(rng.integers(1, 40, size=(12, 9)))
    sel = TwoWaySelection.full(state)
    enc = ResultRow.from_report("r", "c", query(state, sel, 0)).encoded()
    for key in ("pair_tdp", "row_tdp_lower", "row_tdp_upper", "col_tdp_lower", "col_tdp_upper"):
        assert 0.0 <= enc[key] <= 1.0
    assert enc["row_tdp_lower"] <= enc["row_tdp_upper"]
    assert enc["col_tdp_lower"] <= enc["col_tdp_upper"]
    assert np.isfinite(enc["pair_tdp"])
