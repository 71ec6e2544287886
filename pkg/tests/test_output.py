import json
import math
import os

import numpy as np
import pytest

from thinguide.output import atomic_write_text, csv_text, dumps_json, write_csv, write_json


def test_json_round_trip_floats():
    vals = [math.pi, -1e-300, 1 / 3, 2.0**60, 0.1]
    back = json.loads(dumps_json({"v": vals}))
    assert back["v"] == vals


def test_json_special_values_and_numpy():
    text = dumps_json({"a": np.float64(0.0), "b": -0.0, "n": float("nan"), "i": np.int64(3),
                       "c": 1 + 2j, "flag": np.bool_(True), "arr": np.array([1.5, 2.5])})
    assert '"a": 0,' in text and '"b": 0,' in text
    assert "NaN" in text
    back = json.loads(text)
    assert back["i"] == 3 and back["c"] == [1.0, 2.0] and back["flag"] is True
    assert back["arr"] == [1.5, 2.5]
    with pytest.raises(TypeError):
        dumps_json({"x": object()})


def test_json_is_deterministic():
    obj = {"z": [1e-17, 3.0], "a": {"nested": [True, None]}}
    assert dumps_json(obj) == dumps_json(json.loads(dumps_json(obj)))


def test_csv_formatting():
    text = csv_text(["x", "ok"], [(0.1, True), (-0.0, False), (1 / 3, np.bool_(True))])
    lines = text.splitlines()
    assert lines == ["x,ok", "0.1,true", "0,false", "0.333333333333,true"]


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "first\n")
    atomic_write_text(target, "second\n")
    assert target.read_text() == "second\n"
    assert sorted(os.listdir(tmp_path)) == ["out.txt"]


def test_write_helpers(tmp_path):
    write_json(tmp_path / "a.json", {"x": 1.25})
    write_csv(tmp_path / "b.csv", ["p", "q"], [(1, 2.5)])
    assert json.loads((tmp_path / "a.json").read_text()) == {"x": 1.25}
    assert (tmp_path / "b.csv").read_text().splitlines() == ["p,q", "1,2.5"]
