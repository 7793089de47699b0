"""Tests for canonical JSON and CSV output."""

import io
import math

import numpy as np
import pytest

from dgwave.blowup_analysis import HISTORY_FIELDS, RunHistory, run_until_blowup
from dgwave.contracts import PropertyResult, RunStatus, TimeStepPolicy
from dgwave.dg_solver import Mesh
from dgwave.serialization import HistoryCsvWriter, format_number, to_canonical_json, write_rows_csv


class TestKeyOrdering:
    """Keys sorted, no whitespace."""

    def test_sorted_keys(self):
        assert to_canonical_json({"z": 3, "a": 1, "A": 0}) == '{"A":0,"a":1,"z":3}'

    def test_nested(self):
        assert to_canonical_json({"b": [1, {"d": 2, "c": 1}], "a": None}) == '{"a":null,"b":[1,{"c":1,"d":2}]}'


class TestNumberNormalization:
    """Shortest round-trip floats."""

    def test_integer_from_float(self):
        assert to_canonical_json(100.0) == "100"

    def test_negative_zero(self):
        assert to_canonical_json(-0.0) == "0"

    def test_round_trip_precision(self):
        assert to_canonical_json(0.1 + 0.2) == "0.30000000000000004"

    def test_non_finite_is_null(self):
        assert to_canonical_json([math.inf, math.nan]) == "[null,null]"

    def test_numpy_values(self):
        assert to_canonical_json(np.array([1.5, 2.0])) == "[1.5,2]"
        assert to_canonical_json(np.int64(7)) == "7"
        assert to_canonical_json(np.bool_(True)) == "true"


class TestModels:
    """Pydantic models and enums."""

    def test_model_is_deterministic(self):
        result = PropertyResult(name="alpha_table", passed=True, detail="ok")
        assert to_canonical_json(result) == '{"detail":"ok","name":"alpha_table","passed":true}'
        assert to_canonical_json(result) == to_canonical_json(result.model_copy())

    def test_enum(self):
        assert to_canonical_json({"status": RunStatus.BLOWN_UP}) == '{"status":"blown_up"}'

    def test_escaping(self):
        assert to_canonical_json('say "hi"\n') == '"say \\"hi\\"\\n"'

    def test_unsupported_type(self):
        with pytest.raises(TypeError):
            to_canonical_json(object())


class TestCsv:
    """CSV cells and files."""

    def test_format_number(self):
        assert format_number(3) == "3"
        assert format_number(0.1) == "0.10000000000000001"
        assert format_number(None) == ""
        assert format_number(RunStatus.COMPLETED) == "completed"

    def test_write_rows(self, tmp_path):
        path = tmp_path / "rows.csv"
        count = write_rows_csv(path, ["a", "b"], [(1, 0.5), (2, 1.25)])
        assert count == 2
        assert path.read_text().splitlines() == ["a,b", "1,0.5", "2,1.25"]

    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        assert write_rows_csv(path, ["a"], []) == 0
        assert path.read_text() == "a\n"


class TestHistoryWriter:
    """Streaming history rows."""

    def test_skips_initial_record(self):
        buffer = io.StringIO()
        writer = HistoryCsvWriter(buffer, scheme="dg")
        history = RunHistory("dg")
        history.append(0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0)
        writer(None, history)
        history.append(1, 0.5, 0.5, 2.0, 2.0, 1.5, 1.5)
        writer(None, history)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == ",".join(HISTORY_FIELDS) + ",scheme"
        assert lines[1:] == ["1,0.5,0.5,2,2,1.5,1.5,dg"]
        assert writer.rows_written == 1

    def test_one_row_per_step(self, p1, zero_problem):
        buffer = io.StringIO()
        writer = HistoryCsvWriter(buffer)
        result, _ = run_until_blowup(
            zero_problem, Mesh(0.0, 1.0, 4), p1, TimeStepPolicy(), threshold=1.0, max_steps=7, observers=[writer]
        )
        assert result.steps == 7
        assert len(buffer.getvalue().splitlines()) == 8
