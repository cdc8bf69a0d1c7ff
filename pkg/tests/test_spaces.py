import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multipdo.errors import CoverageError, ValidationError
from multipdo.grid import GridFunction, GridSpec
from multipdo.partitions import make_lp_family, make_uniform_window
from multipdo.spaces import (MaximalConfig, NormRequest, besov_blocks, besov_norm, bmo_norm,
                             embedding_ratio, evaluate_norm, local_hardy_norm, lp_norm, lq_norm,
                             maximal_function, wiener_amalgam_norm, wiener_exponential_closed_form)

from conftest import banded


def test_lq_values():
    assert lq_norm([3, 4], 1) == 7
    assert lq_norm([3, 4], 2) == pytest.approx(5)
    assert lq_norm([3, -4], "inf") == 4
    assert lq_norm([3, 4], "1/2") == pytest.approx((math.sqrt(3) + 2) ** 2)
    assert lq_norm([], 2) == 0.0


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=30))
def test_lq_monotone_in_q(a):
    qs = ["1/3", "1/2", "1", "3/2", "2", "5", "inf"]
    vals = [lq_norm(a, q) for q in qs]
    assert all(v <= u for u, v in zip(vals, vals[1:]))


def test_lp_of_constant():
    spec = GridSpec(1, 256, 1.0)
    f = GridFunction(spec, np.full(spec.shape, 2.0))
    assert lp_norm(f, 1) == pytest.approx(2 * 2 * math.pi)
    assert lp_norm(f, 2) == pytest.approx(2 * math.sqrt(2 * math.pi))
    assert lp_norm(f, "inf") == 2.0


def test_maximal_dominates_and_hardy_bounds_lp():
    spec = GridSpec(1, 1024, 2.0)
    f = banded(spec, 60, 7)
    M = maximal_function(f)
    assert np.all(M >= np.abs(f.values()) - 1e-12)
    for p in ("1", "2"):
        assert local_hardy_norm(f, p) >= lp_norm(f, p) * (1 - 1e-12)
    with pytest.raises(ValidationError):
        local_hardy_norm(f, "inf")
    with pytest.raises(ValidationError):
        MaximalConfig(t_levels=(0.5, 0.5))


def test_besov_single_band_and_l2():
    spec = GridSpec(1, 1024, 1.0)
    fam = make_lp_family("generic_lp", 9)
    # B^0_{2,2} is comparable to L^2; for a pure exponential only one or two blocks are non-zero
    x = spec.points()[..., 0]
    f = GridFunction(spec, np.exp(1j * 40 * x))
    blocks = besov_blocks(f, 2, 0, fam)
    nz = [k for k, b in enumerate(blocks) if b > 1e-12]
    assert set(nz) <= {5, 6}
    total = sum(fam[k](np.array([[40.0]]))[0] for k in range(fam.K + 1))
    assert total == pytest.approx(1.0, abs=1e-12)
    # s shifts block k by 2^{ks}
    b1 = besov_blocks(f, 2, 1, fam)
    for k in nz:
        assert b1[k] == pytest.approx(2.0**k * blocks[k])


def test_besov_coverage_error():
    spec = GridSpec(1, 1024, 1.0)
    f = banded(spec, 400, 1)
    with pytest.raises(CoverageError):
        besov_norm(f, 2, 2, 0, make_lp_family("generic_lp", 4))


def test_bmo_bounded_by_twice_sup():
    spec = GridSpec(1, 1024, 1.0)
    for seed in range(5):
        f = banded(spec, 50, seed)
        assert bmo_norm(f) <= 2 * np.abs(f.values()).max()


def test_bmo_of_constant_is_mean_part():
    spec = GridSpec(1, 256, 1.0)
    f = GridFunction(spec, np.full(spec.shape, 3.0))
    assert bmo_norm(f) == pytest.approx(3.0)


@pytest.mark.parametrize("nu", [0.0, 2.0, 3.5, -7.25])
@pytest.mark.parametrize("p,q,s", [("1", "2", "0.5"), ("2", "1", "-1"), ("inf", "inf", "0")])
def test_wiener_exponential_closed_form(nu, p, q, s):
    spec = GridSpec(1, 256, 4.0)
    x = spec.points()[..., 0]
    f = GridFunction(spec, np.exp(1j * nu * x))
    assert wiener_amalgam_norm(f, p, q, s) == pytest.approx(
        wiener_exponential_closed_form([nu], spec, p, q, s), rel=1e-10)


def test_embedding_ratio_skips_zero():
    spec = GridSpec(1, 256, 1.0)
    fs = [GridFunction(spec, np.zeros(spec.shape)), banded(spec, 30, 2)]
    r = embedding_ratio(fs, NormRequest("lp", p="2"), NormRequest("local_hardy", p="2"))
    assert r.skipped == [0] and r.arg_max == 1 and r.max_ratio >= 1.0


def test_norm_request_validation():
    with pytest.raises(ValidationError):
        NormRequest("besov", p="2", q="2")
    with pytest.raises(ValidationError):
        NormRequest("nope")
    assert evaluate_norm(NormRequest("lq", q="2"), [3, 4]) == pytest.approx(5)
