import csv
import json
from pathlib import Path

import pytest

from pivotal.cli import CSV_HEADER, ConfigError, load_config, run
from pivotal.suites import parse_density, parse_shape


def write_cfg(tmp_path: Path, payload: dict) -> Path:
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(payload))
    return p


BASE = {"seed": 4242, "reps": 500, "suites": ["identities"]}


class TestConfig:
    def test_seed_required(self, tmp_path):
        cfg = write_cfg(tmp_path, {"suites": ["identities"]})
        assert run(cfg, tmp_path / "out") == 2

    def test_empty_suites_is_usage_error(self, tmp_path):
        cfg = write_cfg(tmp_path, {"seed": 1, "suites": []})
        assert run(cfg, tmp_path / "out") == 2

    def test_zero_reps_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, {"seed": 1, "reps": 0, "suites": ["identities"]})
        assert run(cfg, tmp_path / "out") == 2

    def test_unknown_suite_rejected(self, tmp_path):
        cfg = write_cfg(tmp_path, {"seed": 1, "suites": ["nope"]})
        assert run(cfg, tmp_path / "out") == 2

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "cfg.json"
        p.write_text("{not json")
        assert run(p, tmp_path / "out") == 2

    def test_all_expands(self, tmp_path):
        cfg = write_cfg(tmp_path, {"seed": 1, "suites": ["all"]})
        _, names = load_config(cfg)
        assert set(names) == {"identities", "russo", "poisson-derivative", "stable", "crofton"}

    def test_overrides(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        parsed, names = load_config(cfg, seed_override=7, suites_override=["russo"])
        assert parsed.seed == 7
        assert names == ["russo"]

    def test_tolerance_overrides(self, tmp_path):
        cfg = write_cfg(tmp_path, dict(BASE, tolerances={"identity": 1e-8, "z": 5.0}))
        parsed, _ = load_config(cfg)
        assert parsed.tol_identity == 1e-8
        assert parsed.zmax == 5.0
        bad = write_cfg(tmp_path, dict(BASE, tolerances={"wat": 1.0}))
        with pytest.raises(ConfigError):
            load_config(bad)


class TestShapeParsing:
    def test_all_kinds(self):
        parse_shape({"kind": "disk", "center": [0, 0], "radius": 1.0})
        parse_shape({"kind": "box", "lo": [0, 0], "hi": [1, 2]})
        parse_shape({"kind": "polygon", "vertices": [[0, 0], [1, 0], [0.5, 1]]})
        parse_shape({"kind": "segment", "a": [0, 0], "b": [1, 0]})

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            parse_shape({"kind": "torus"})

    def test_density_specs(self):
        h, sup = parse_density("const:2.5")
        import numpy as np
        assert sup == 2.5
        assert h(np.zeros((3, 2))).tolist() == [2.5, 2.5, 2.5]
        h, sup = parse_density("affine:1,0.5,0")
        assert sup is None
        assert h(np.array([[2.0, 9.0]]))[0] == 2.0
        with pytest.raises(ValueError):
            parse_density("cubic:1")


class TestRunner:
    def test_identities_run(self, tmp_path):
        cfg = write_cfg(tmp_path, BASE)
        out = tmp_path / "out"
        assert run(cfg, out) == 0
        rows = list(csv.reader((out / "results.csv").open()))
        assert rows[0] == CSV_HEADER
        assert len(rows) - 1 >= 12
        summary = json.loads((out / "summary.json").read_text())
        assert summary["failures"] == []
        assert summary["checks"] == len(rows) - 1

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_cfg(tmp_path, {"seed": 99, "reps": 400, "suites": ["identities", "russo"],
                                   "russo": {"events": 5, "max_bits": 6}})
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(cfg, out1) == 0
        assert run(cfg, out2) == 0
        assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
        assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()

    def test_malformed_shape_is_config_error(self, tmp_path):
        cfg = write_cfg(tmp_path, {"seed": 1, "reps": 300, "suites": ["crofton"],
                                   "crofton": {"reps": 200, "shape": {"kind": "torus"}}})
        assert run(cfg, tmp_path / "out") == 2

    def test_main_usage_error(self):
        from pivotal.cli import main
        assert main(["--config"]) == 2
