import json
import math

import numpy as np
import pytest

from multipdo.errors import ValidationError
from multipdo.grid import GridFunction, GridSpec
from multipdo.io import (coefficients_from_csv, coefficients_to_csv, decode_gridfn, encode_gridfn,
                         load_gridfn, save_gridfn)

from conftest import banded


def test_gridfn_round_trip(tmp_path):
    spec = GridSpec(2, 16, 2.0)
    f = banded(spec, 3, 1)
    path = tmp_path / "f.gridfn"
    save_gridfn(f, path)
    g = load_gridfn(path)
    assert g.spec == spec and g.domain == "space"
    assert np.array_equal(g.samples, f.samples)


def test_gridfn_layout():
    spec = GridSpec(1, 4, 1.0)
    f = GridFunction(spec, np.array([1 + 2j, 3, 0, -1j]), "frequency")
    blob = encode_gridfn(f)
    head, body = blob.split(b"\n", 1)
    h = json.loads(head)
    assert h["n"] == 1 and h["points_per_dim"] == 4 and h["domain_tag"] == "frequency"
    assert h["period"] == pytest.approx(2 * math.pi)
    assert np.frombuffer(body, "<f8").tolist() == [1, 2, 3, 0, 0, 0, 0, -1]
    assert decode_gridfn(blob).domain == "frequency"


def test_gridfn_errors(tmp_path):
    with pytest.raises(ValidationError):
        decode_gridfn(b"no header")
    spec = GridSpec(1, 4, 1.0)
    blob = encode_gridfn(GridFunction(spec, np.zeros(4)))
    with pytest.raises(ValidationError):
        decode_gridfn(blob[:-8])
    with pytest.raises(ValidationError):
        load_gridfn(tmp_path / "missing.gridfn")


def test_coefficient_csv_round_trip():
    mem = np.array([[[1], [-2]], [[0], [5]]])
    c = np.array([1 + 0.5j, -0.25j])
    text = coefficients_to_csv(mem, c)
    assert text.splitlines()[0] == "mu_1_1,mu_2_1,re,im"
    m2, c2 = coefficients_from_csv(text, 2, 1)
    assert np.array_equal(m2, mem) and np.array_equal(c2, c)
