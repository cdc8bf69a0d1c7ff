import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multipdo.errors import ContractError
from multipdo.grid import (GridFunction, GridSpec, active_boxes, apply_multiplier, band_project,
                           box_project, spectral_support, transform)
from multipdo.partitions import make_lp_family, make_uniform_window

from conftest import banded


def test_spec_validation():
    with pytest.raises(ContractError):
        GridSpec(1, 100, 1.0)
    with pytest.raises(ContractError):
        GridSpec(2, 2**11, 1.0)
    with pytest.raises(ContractError):
        GridSpec(4, 8, 1.0)
    s = GridSpec(1, 1024, 2.0)
    assert s.dx == pytest.approx(4 * math.pi / 1024)
    assert s.nyquist == pytest.approx(511 / 2)


def test_frequencies_are_lattice_over_scale():
    s = GridSpec(1, 16, 4.0)
    f = s.axis_frequencies()
    assert np.allclose(f * 4.0, np.rint(f * 4.0))
    assert f.min() == pytest.approx(-2.0)


def test_gaussian_transform_matches_closed_form():
    # int exp(-x^2/2) exp(-i x xi) dx = sqrt(2 pi) exp(-xi^2/2)
    spec = GridSpec(1, 1024, 8.0)
    x = spec.points()[..., 0]
    x = np.where(x >= spec.period / 2, x - spec.period, x)
    f = GridFunction(spec, np.exp(-x**2 / 2))
    F = transform(f, "forward").samples
    xi = spec.frequencies()[..., 0]
    assert np.abs(F - math.sqrt(2 * math.pi) * np.exp(-xi**2 / 2)).max() < 1e-12


def test_round_trip_and_domains():
    spec = GridSpec(2, 32, 1.0)
    f = banded(spec, 5, 0)
    back = transform(transform(f, "forward"), "inverse")
    assert np.abs(back.samples - f.samples).max() < 1e-12
    with pytest.raises(ContractError):
        transform(f, "inverse")


@given(st.integers(0, 2**31 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_transform_is_linear(seed, a, b):
    spec = GridSpec(1, 64, 1.0)
    f, g = banded(spec, 20, seed), banded(spec, 20, seed + 1)
    lhs = transform(f * a + g * b, "forward").samples
    rhs = a * transform(f, "forward").samples + b * transform(g, "forward").samples
    assert np.abs(lhs - rhs).max() <= 1e-9 * (1 + np.abs(rhs).max())


@given(st.integers(0, 2**31 - 1))
def test_parseval(seed):
    spec = GridSpec(1, 128, 2.0)
    f = banded(spec, 25, seed)
    l2x = np.sum(np.abs(f.values())**2) * spec.dx
    F = f.spectrum()
    l2xi = np.sum(np.abs(F)**2) / (2 * math.pi * spec.scale)
    assert l2x == pytest.approx(l2xi, rel=1e-10)


def test_multiplier_and_projections():
    spec = GridSpec(1, 256, 1.0)
    f = banded(spec, 100, 3)
    one = apply_multiplier(lambda xi: np.ones(xi.shape[:-1]), f)
    assert np.allclose(one.samples, f.samples, atol=1e-12)
    fam = make_lp_family("generic_lp", 7)
    total = sum(band_project(k, fam, f).values() for k in range(fam.K + 1))
    assert np.abs(total - f.values()).max() < 1e-10
    kappa = make_uniform_window("kappa_wiener")
    boxes = sum(box_project([m], kappa, f).values() for m in range(-101, 102))
    assert np.abs(boxes - f.values()).max() < 1e-10


def test_active_boxes_open_rule():
    spec = GridSpec(1, 64, 1.0)
    F = np.zeros(spec.shape, complex)
    F[3] = 1.0  # xi = 3 exactly
    f = GridFunction.from_spectrum(spec, F)
    assert spectral_support(f).sum() == 1
    # open boxes mu + (-1, 1) containing 3: only mu = 3
    assert active_boxes(f, 1.0).tolist() == [[3]]
    assert active_boxes(f, 1.5).tolist() == [[2], [3], [4]]
