import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import build_f
from vertexkit import io


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_csv_round_trip_real(M):
    meta, back = io.read_matrix_csv(io.matrix_csv(M, "m1", M.shape[0], 1))
    assert meta == {"kind": "m1", "N": M.shape[0], "index_base": 1}
    assert np.array_equal(back, M)


def test_csv_complex_columns():
    M = np.array([[1 + 2j, 3 - 4j]])
    text = io.matrix_csv(M, "fmatrix", 1, 0)
    assert text.splitlines()[2] == "1,2,3,-4"


def test_fmt17_round_trips():
    x = 0.1 + 0.2
    assert float(io.fmt17(x)) == x


def test_fmatrix_payload_round_trip():
    F = build_f(8)
    data = json.loads(io.dumps(io.fmatrix_payload(F)))
    back = io.fmatrix_from_payload(data)
    assert np.array_equal(back.entries, F.entries)
    assert back.sum_cfg == F.sum_cfg


def test_dumps_is_deterministic():
    a = io.dumps({"b": 1, "a": [1.5, 2]})
    b = io.dumps({"a": [1.5, 2], "b": 1})
    assert a == b


def test_write_text_atomic(tmp_path):
    target = tmp_path / "sub" / "out.json"
    io.write_text(target, "x\n")
    io.write_text(target, "y\n")
    assert target.read_text() == "y\n"
    assert [p.name for p in target.parent.iterdir()] == ["out.json"]


def test_family_payload_keys():
    out = io.family_payload(2, {(1, 2): np.eye(3), (1, 1): np.zeros((3, 3))}, {"kind": "k"})
    assert list(out["blocks"]) == ["11", "12"]
    assert out["kind"] == "k"
