"""Artifact formatting: CSV bytes, JSON manifests, config parsing."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from snakeqec.io import (
    RATE_SCHEMA,
    RunManifest,
    env_overrides,
    format_value,
    load_config,
    read_csv_rows,
    read_json,
    read_manifest,
    read_table,
    write_csv,
    write_json,
    write_manifest,
)


class TestFormatValue:
    @given(st.floats(allow_nan=False))
    def test_floats_round_trip_exactly(self, x):
        assert float(format_value(x)) == x

    def test_scalar_kinds(self):
        assert format_value(3) == "3"
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value("half") == "half"
        assert format_value(np.float64(0.1)) == "0.1"
        assert format_value(np.int64(7)) == "7"

    def test_unsupported_type_rejected(self):
        with pytest.raises(TypeError):
            format_value([1, 2])


class TestCsv:
    def test_round_trip_with_manifest_comment(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ("a", "b"), [(1, 0.5), (2, 1.5)], manifest="m.json")
        text = path.read_text(encoding="utf-8")
        assert text.startswith("# manifest: m.json\n")
        header, rows = read_csv_rows(path)
        assert header == ("a", "b")
        assert rows == [{"a": "1", "b": "0.5"}, {"a": "2", "b": "1.5"}]

    def test_lf_endings_and_trailing_newline(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(path, ("x",), [(0.1,)])
        data = path.read_bytes()
        assert b"\r" not in data
        assert data.endswith(b"\n")

    def test_row_width_mismatch_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="cells"):
            write_csv(tmp_path / "t.csv", ("a", "b"), [(1,)])

    def test_identical_rows_identical_bytes(self, tmp_path):
        rows = [(3, 0.001, 0.25, 2, "postselected", 100, 90, 5,
                 5 / 90, 0.01, 0.11, 0)]
        write_csv(tmp_path / "a.csv", RATE_SCHEMA, rows, manifest="m")
        write_csv(tmp_path / "b.csv", RATE_SCHEMA, rows, manifest="m")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_read_table_types_cells(self, tmp_path):
        path = tmp_path / "r.csv"
        rows = [(3, 1e-3, 0.0, 2, "raw", 100, 100, 7, 0.07, 0.03, 0.14, 0)]
        write_csv(path, RATE_SCHEMA, rows)
        [row] = read_table(path, RATE_SCHEMA)
        assert row["d"] == 3 and isinstance(row["d"], int)
        assert row["p"] == 1e-3
        assert row["method"] == "raw"

    def test_read_table_missing_column(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv(path, ("d", "p"), [(3, 0.1)])
        with pytest.raises(ValueError, match="missing columns"):
            read_table(path, RATE_SCHEMA)

    def test_read_table_bad_cell_names_row(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("d,omega\n3,abc\n", encoding="utf-8")
        with pytest.raises(ValueError, match="row 1"):
            read_table(path, {"d": int, "omega": float})

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ValueError, match="header"):
            read_csv_rows(path)


class TestJsonAndManifest:
    def test_key_order_does_not_change_bytes(self, tmp_path):
        write_json(tmp_path / "a.json", {"b": 1, "a": [1.5, 2.5]})
        write_json(tmp_path / "b.json", {"a": [1.5, 2.5], "b": 1})
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_numpy_values_serialise(self, tmp_path):
        write_json(tmp_path / "n.json", {"x": np.float64(0.25),
                                         "v": np.arange(3)})
        assert read_json(tmp_path / "n.json") == {"x": 0.25, "v": [0, 1, 2]}

    def test_manifest_round_trip(self, tmp_path):
        manifest = RunManifest(
            subcommand="monitor", config={"N": 900, "lam": 0.002},
            seed=0, version="0.1.0", created="2026-01-01T00:00:00+00:00",
            outputs=("monitor.json",))
        write_manifest(tmp_path / "m.json", manifest)
        assert read_manifest(tmp_path / "m.json") == manifest

    def test_manifest_missing_field_rejected(self, tmp_path):
        write_json(tmp_path / "m.json", {"subcommand": "monitor"})
        with pytest.raises(ValueError, match="manifest"):
            read_manifest(tmp_path / "m.json")


class TestConfigFiles:
    def test_key_value_format(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# comment\n"
            "shots = 50000\n"
            "p = 1e-3\n"
            "gmin = half\n"
            "d = [3, 5, 7]\n"
            "density = false\n"
            "\n"
            "[monitor]\n"
            "N = 800   # inline comment\n",
            encoding="utf-8")
        cfg = load_config(path)
        assert cfg == {"shots": 50000, "p": 1e-3, "gmin": "half",
                       "d": [3, 5, 7], "density": False,
                       "monitor": {"N": 800}}

    def test_bare_comma_list(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("omega = 0.1,0.2,0.3\n", encoding="utf-8")
        assert load_config(path) == {"omega": [0.1, 0.2, 0.3]}

    def test_json_fallback(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text('{"shots": 12000, "d": [3]}', encoding="utf-8")
        assert load_config(path) == {"shots": 12000, "d": [3]}

    def test_json_suffix(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"seed": 9}', encoding="utf-8")
        assert load_config(path) == {"seed": 9}

    def test_garbage_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("shots 50000\nnot a config\n", encoding="utf-8")
        with pytest.raises(ValueError, match="neither"):
            load_config(path)

    def test_non_mapping_json_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2, 3]", encoding="utf-8")
        with pytest.raises(ValueError, match="mapping"):
            load_config(path)

    def test_env_overrides(self):
        env = {"SNAKEQEC_SHOTS": "50000", "SNAKEQEC_GMIN": "half",
               "SNAKEQEC_D": "3,5,7", "PATH": "/usr/bin", "SNAKEQEC_": "x"}
        assert env_overrides(env) == {"shots": 50000, "gmin": "half",
                                      "d": [3, 5, 7]}
