import json
import math

import numpy as np

from hyplab import reporting


def test_json_payload_sorted_and_stable():
    payload = {"b": 1.0, "a": {"y": np.float64(2.5), "x": np.int64(3)}}
    text = reporting.json_payload(payload)
    assert text == reporting.json_payload(payload)
    parsed = json.loads(text)
    assert parsed["a"]["x"] == 3
    assert list(parsed.keys()) == ["a", "b"]


def test_json_payload_handles_arrays_and_nan():
    text = reporting.json_payload({"v": np.array([1.0, 2.0]), "bad": float("nan")})
    parsed = json.loads(text)
    assert parsed["v"] == [1.0, 2.0]
    assert parsed["bad"] is None


def test_csv_payload_header_and_quoting():
    text = reporting.csv_payload(
        {"command": "demo", "note": "a,b"},
        ["name", "value"],
        [{"name": "with,comma", "value": 1.5}, {"name": "plain", "value": 2}],
    )
    lines = text.splitlines()
    assert lines[0] == "# command=demo"
    assert lines[2] == "name,value"
    assert lines[3] == '"with,comma",1.5'


def test_write_csv_roundtrip(tmp_path):
    path = reporting.write_csv(tmp_path / "x.csv", {"k": 1}, ["a"], [{"a": 2.0}])
    body = path.read_text()
    assert "# k=1" in body and "a\n2.0" in body


def test_figure_rendering(tmp_path):
    out = tmp_path / "fig.csv"
    p = reporting.render_error_figure(out, [0, 1, 2], [1e-3, 1e-6, 1e-9], "index")
    assert p.exists() and p.suffix == ".png"
    rows = [{"t": t, "l2": math.exp(-t), "h1": math.exp(-t), "l2_ut": math.exp(-t)} for t in range(5)]
    assert reporting.render_trajectory_figure(out, rows).exists()
    assert reporting.render_kernel_figure(out, [0.1, 1.0, 10.0], [100.0, 1.0, 1e-4]).exists()
    assert reporting.render_ratio_figure(out, [{"ratio": 0.5}, {"ratio": 0.7}]).exists()
