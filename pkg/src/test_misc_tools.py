import json
import math

import numpy as np
import pandas as pd

from misc_tools import *


def test_pairwise_ratios():
    ratios = pairwise_ratios([4.0, 2.0, 0.0, 1.0])
    assert math.isnan(ratios[0])
    assert ratios[1] == 0.5 and ratios[2] == 0.0
    assert math.isnan(ratios[3]), "division by a zero predecessor should give NaN"


def test_write_csv_atomic(tmp_path):
    df = pd.DataFrame({"t": [0.0, 0.5], "value": [1 / 3, np.pi]})
    path = write_csv_atomic(df, tmp_path / "nested" / "table.csv")
    assert path.read_text() == df_to_csv_text(df)
    assert pd.read_csv(path, float_precision="round_trip")["value"].tolist() == [1 / 3, np.pi]
    assert [p.name for p in path.parent.iterdir()] == ["table.csv"]


def test_write_json_atomic_strict(tmp_path):
    data = {"b": np.float64(1.5), "a": [np.nan, 2], "n": np.int64(3), "inf": float("inf")}
    path = write_json_atomic(data, tmp_path / "report.json")
    text = path.read_text()
    assert "NaN" not in text and "Infinity" not in text
    assert json.loads(text) == {"a": [None, 2], "b": 1.5, "inf": None, "n": 3}
    assert text.index('"a"') < text.index('"b"')
