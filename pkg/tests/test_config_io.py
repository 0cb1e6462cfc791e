import json
import struct

import numpy as np
import pytest

from qcontrol.config import RunConfig, load_config, parse_config
from qcontrol.errors import ConfigError, OutputError
from qcontrol.io import (
    HEADER,
    OutputWriter,
    csv_text,
    decode_field,
    dumps_json,
    encode_field,
    output_files,
    read_field,
    read_trajectory,
    slice_rows,
    spectrum_rows,
    svg_line_plot,
)
from qcontrol.propagators import TimeGrid, free_flow_trajectory
from qcontrol.spectral import Field, make_grid, plane_wave


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg == RunConfig()
        assert (cfg.dimension, cfg.n, cfg.half_side, cfg.radius, cfg.horizon) == (1, 64, 8.0, 2.0, 2.0)

    def test_sections_group_keys(self):
        cfg = parse_config("[grid]\nn = 32\nhalf_side = 10\n[control]\nradius = 3.0\n")
        assert cfg.n == 32 and cfg.half_side == 10.0 and cfg.radius == 3.0

    def test_radius_too_large_for_box(self):
        with pytest.raises(ConfigError, match="radius"):
            parse_config("radius = 7.0\n")

    @pytest.mark.parametrize("n", [12, 4])
    def test_bad_grid_size(self, n):
        with pytest.raises(ConfigError):
            parse_config(f"n = {n}\n")

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("n = 32\n\nbogus = 1\n")
        assert info.value.line == 3 and "bogus" in str(info.value)

    def test_unknown_section_reports_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("seed = 1\n[extras]\nx = 1\n")
        assert info.value.line == 2

    def test_syntax_error_reports_line(self):
        with pytest.raises(ConfigError) as info:
            parse_config("n = 32\nhorizon = = 2\n")
        assert info.value.line == 2

    def test_duplicate_across_sections(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("n = 32\n[grid]\nn = 64\n")

    def test_type_errors(self):
        with pytest.raises(ConfigError, match="integer"):
            parse_config("n = 32.5\n")
        with pytest.raises(ConfigError, match="number"):
            parse_config('horizon = "long"\n')

    def test_integer_promoted_to_float(self):
        assert parse_config("horizon = 3\n").horizon == 3.0

    def test_tolerance_range(self):
        with pytest.raises(ConfigError):
            parse_config("cg_tol = 1.5\n")

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "none.toml")

    def test_load_file(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text("[run]\nseed = 9\n")
        assert load_config(path).seed == 9

    def test_updated_ignores_none(self):
        cfg = RunConfig().updated(n=32, seed=None)
        assert cfg.n == 32 and cfg.seed == 0


class TestFieldFormat:
    def test_header_layout(self):
        g = make_grid(2, 8, 3.5)
        blob = encode_field(Field(g, np.ones((8, 8))))
        assert HEADER.size == 32
        magic, d, n = struct.unpack_from("<4sII", blob)
        assert (magic, d, n) == (b"QCF1", 2, 8)
        assert blob[12:16] == b"\0\0\0\0"
        assert struct.unpack_from("<d", blob, 16)[0] == 3.5
        assert struct.unpack_from("<Q", blob, 24)[0] == 16 * 64
        assert len(blob) == 32 + 16 * 64

    def test_round_trip(self, rng):
        g = make_grid(3, 8, 5.0)
        vals = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
        back = decode_field(encode_field(Field(g, vals)))
        assert back.grid == g and np.array_equal(back.values, vals)

    def test_bad_magic(self):
        blob = bytearray(encode_field(Field.zeros(make_grid(1, 8, 1.0))))
        blob[:4] = b"XXXX"
        with pytest.raises(OutputError, match="magic"):
            decode_field(bytes(blob))

    def test_truncated_payload(self):
        blob = encode_field(Field.zeros(make_grid(1, 8, 1.0)))
        with pytest.raises(OutputError):
            decode_field(blob[:-16])
        with pytest.raises(OutputError):
            decode_field(blob[:10])

    def test_read_missing(self, tmp_path):
        with pytest.raises(OutputError):
            read_field(tmp_path / "nothing.qcf")


class TestText:
    def test_json_is_sorted_and_nan_free(self):
        text = dumps_json({"b": float("nan"), "a": np.float64(1.5), "c": np.arange(2)})
        assert json.loads(text) == {"a": 1.5, "b": None, "c": [0, 1]}
        assert text.index('"a"') < text.index('"b"')

    def test_csv_uses_full_precision(self):
        text = csv_text(["x"], [(0.1,), (float("nan"),)])
        assert text.splitlines() == ["x", "0.10000000000000001", "nan"]

    def test_spectrum_of_plane_wave(self):
        g = make_grid(1, 16, 4.0)
        rows = list(spectrum_rows(plane_wave(g, [2])))
        peak = max(rows, key=lambda r: abs(r[1]))
        assert np.isclose(peak[0], (2 * np.pi / 4) ** 2) and np.isclose(peak[1], 1.0)

    def test_slice_is_central_plane(self):
        g = make_grid(3, 8, 4.0)
        x = g.mesh()
        rows = list(slice_rows(Field(g, x[2] + 1j * x[0])))
        assert len(rows) == 64
        assert all(r[2] == 0 for r in rows)
        assert all(r[3] == r[0] for r in rows)

    def test_slice_requires_three_dimensions(self):
        with pytest.raises(ValueError):
            list(slice_rows(Field.zeros(make_grid(2, 8, 4.0))))

    def test_svg(self):
        svg = svg_line_plot([1, 2, 3], {"a": [1.0, 0.1, float("nan")]}, "t<1>", log_y=True)
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
        assert "t&lt;1&gt;" in svg and svg.count("<circle") == 2


class TestWriter:
    def test_manifest_lists_checksums(self, tmp_path):
        out = OutputWriter(tmp_path / "run", {"seed": 1}, "0.1.0")
        out.json("a.json", {"x": 1})
        out.plot("p", ["k", "v"], [(1, 2.0), (2, 3.0)])
        manifest = out.finish({"ok": True})
        assert set(manifest["files"]) == {"a.json", "p.csv", "p.svg"}
        assert set(output_files(tmp_path / "run")) == set(manifest["files"])
        on_disk = json.loads((tmp_path / "run" / "manifest.json").read_text())
        assert on_disk["verdicts"] == {"ok": True} and on_disk["artifact_version"] == "0.1.0"

    def test_trajectory_round_trip(self, tmp_path, rng):
        g = make_grid(1, 16, 4.0)
        tg = TimeGrid(0.0, 1.0, 8)
        traj = free_flow_trajectory(Field(g, rng.standard_normal(16)), tg)
        out = OutputWriter(tmp_path)
        out.trajectory("traj", traj, every=2)
        index = json.loads((tmp_path / "traj" / "index.json").read_text())
        assert index["frame_files"][0] == "frame_00000.qcf" and len(index["times"]) == 5
        back = read_trajectory(tmp_path / "traj" / "index.json")
        assert np.array_equal(back.frames, traj.frames[::2])

    def test_snapshot_adds_slice_in_3d(self, tmp_path):
        out = OutputWriter(tmp_path)
        out.snapshot("f", Field.zeros(make_grid(3, 8, 4.0)))
        assert set(out.files) == {"f.qcf", "f_slice.csv"}

    def test_unwritable_root(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OutputError):
            OutputWriter(blocker / "sub")
