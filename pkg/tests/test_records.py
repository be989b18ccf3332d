import json
from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from rauzy_lab.records import csv_text, format_number, read_csv, write_json, write_series


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    assert float(format_number(x)) == x


def test_number_formats():
    assert format_number(10 ** 30) == "1" + "0" * 30
    assert format_number(np.int64(7)) == "7"
    assert format_number(True) == "true"
    assert format_number(Fraction(1, 3)) == "1/3"
    assert format_number(0.1) == "0.10000000000000001"


def test_csv_text():
    assert csv_text(("a", "b"), [(1, 0.5), ("x", False)]) == "a,b\n1,0.5\nx,false\n"


def test_series_and_json_files(tmp_path):
    path = tmp_path / "s.csv"
    write_series(path, [(0, "A", "length", 0.25), (0, "", "total", 1.0)])
    assert read_csv(path) == [["n", "alpha", "quantity", "value"], ["0", "A", "length", "0.25"],
                              ["0", "", "total", "1"]]
    write_json(tmp_path / "o.json", {"b": np.arange(2), "a": np.float64(0.5), "c": float("inf")})
    text = (tmp_path / "o.json").read_text()
    assert json.loads(text) == {"a": 0.5, "b": [0, 1], "c": "inf"}
    assert text.index('"a"') < text.index('"b"')
    assert not list(tmp_path.glob(".tmp-*"))
