import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from multipdo.errors import ValidationError
from multipdo.partitions import (fourier_lower_bound, make_lp_family, make_uniform_window,
                                 smooth_step, verify_partition)


def test_smooth_step_endpoints():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    v = smooth_step(t)
    assert v[0] == 0.0 and v[1] == 0.0 and v[3] == 1.0 and v[4] == 1.0
    assert v[2] == pytest.approx(0.5)
    assert smooth_step(0.3) + smooth_step(0.7) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("kind,K", [("generic_lp", 8), ("sharp_lp", 8)])
def test_families_verify(kind, K):
    rep = verify_partition(make_lp_family(kind, K))
    assert rep.passed, rep.to_dict()
    assert rep["partition_of_unity"].deviation <= 1e-12


def test_tilde_family_support_and_plateau():
    rep = verify_partition(make_lp_family("sharp_lp_tilde", 6))
    assert rep.passed
    assert "partition_of_unity" not in [c.name for c in rep.checks]


def test_removed_window_reports_gap():
    fam = make_lp_family("generic_lp", 6).without(4)
    rep = verify_partition(fam)
    chk = rep["partition_of_unity"]
    assert not chk.passed
    r = abs(chk.detail["worst_frequency"][0])
    assert 2**3 <= r <= 2**5


@given(st.floats(0, 2**7, allow_nan=False))
def test_sharp_partition_at_arbitrary_radius(r):
    fam = make_lp_family("sharp_lp", 7)
    assert fam.total(np.array([[r]]))[0] == pytest.approx(1.0, abs=1e-12)


def test_sharp_tilde_product():
    fam = make_lp_family("sharp_lp", 6)
    tf = make_lp_family("sharp_lp_tilde", 6)
    xi = np.linspace(-100, 100, 4001)[:, None]
    for l in range(7):
        assert np.abs(fam[l](xi) * tf[l](xi) - tf[l](xi)).max() == 0.0


@pytest.mark.parametrize("kind,variant", [("phi", "s3"), ("phi_tilde", "s3"), ("phi", "s4"),
                                          ("phi_tilde", "s4"), ("kappa_wiener", "s3")])
def test_uniform_windows_verify(kind, variant):
    for n in (1, 2):
        rep = verify_partition(make_uniform_window(kind, variant), n=n)
        assert rep.passed, rep.to_dict()


def test_s4_lower_bound_independent_quadrature():
    w = make_uniform_window("phi", "s4")
    # independent check: trapezoid on a fine grid at x = 1 (the minimum)
    t = np.linspace(-0.25, 0.25, 20001)
    val = np.trapezoid(w.profile_1d(t) * np.cos(t), t) / (2 * math.pi)
    assert val == pytest.approx(1.1, rel=1e-6)
    assert fourier_lower_bound(w) == pytest.approx(val, rel=1e-8)


def test_window_integral():
    w = make_uniform_window("phi", "s3")
    # translates sum to 1, so the integral over one period cell is 1
    assert w.integral_1d() == pytest.approx(1.0, abs=1e-12)


def test_bad_inputs():
    with pytest.raises(ValidationError):
        make_lp_family("nope", 3)
    with pytest.raises(ValidationError):
        make_lp_family("generic_lp", -1)
    with pytest.raises(ValidationError):
        make_uniform_window("kappa_wiener", "s4")
