import json
import math

from tau2sov.report import (CheckRecord, build_report, load_config, report_to_json, save_config,
                            save_report, strip_timing, summarize)

from conftest import config


def test_record_pass_semantics():
    assert CheckRecord("a", 1e-12, 1e-10).passed
    assert not CheckRecord("a", 1e-9, 1e-10).passed
    assert not CheckRecord("a", math.nan, 1e-10).passed
    d = CheckRecord("a", math.inf, 1.0, context={"z": 1 + 2j}).to_dict()
    assert d["residual"] is None and d["pass"] is False
    assert d["context"]["z"] == "1.0,2.0"


def test_report_structure_and_serialization(tmp_path):
    recs = [CheckRecord("s/x", 0.0, 1e-10, 5), CheckRecord("s/y", 2.0, 1.0, 7)]
    rep = save_report(recs, tmp_path / "r.json", {"p": 3, "wall_time_ms": 12})
    assert rep["summary"] == {"pass": 1, "fail": 1}
    assert rep["meta"]["schema_version"] == 1
    text = (tmp_path / "r.json").read_text()
    assert json.loads(text) == rep and text.endswith("\n")
    stripped = strip_timing(rep)
    assert "wall_time_ms" not in stripped["meta"]
    assert all("wall_time_ms" not in c for c in stripped["checks"])
    assert report_to_json(build_report(recs, {"p": 3})) == report_to_json(build_report(recs, {"p": 3}))


def test_summarize_lines():
    lines = summarize([CheckRecord("s/x", 0.0, 1e-10), CheckRecord("s/y", 2.0, 1.0)]).splitlines()
    assert lines[0].startswith("PASS s/x") and lines[1].startswith("FAIL s/y")


def test_config_file_round_trip(tmp_path):
    cfg = config(3, 2, 1, mode="sov")
    path = tmp_path / "c.json"
    save_config(cfg, path)
    again = load_config(path)
    save_config(again, tmp_path / "d.json")
    assert path.read_bytes() == (tmp_path / "d.json").read_bytes()
    assert again.N == 2 and again.j == cfg.j
