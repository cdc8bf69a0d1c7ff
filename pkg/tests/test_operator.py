import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multipdo.errors import CostGuardError, ResolutionError
from multipdo.grid import GridFunction, GridSpec, apply_multiplier
from multipdo.operator import (apply_direct, apply_via_expansion, coefficient_band_decay,
                               decompose_symbol, joint_support_halfwidth, make_plan,
                               support_exponent, symbol_fourier_coefficients)
from multipdo.partitions import make_lp_family, make_uniform_window
from multipdo.symbols import bracket, make_test_symbol, smooth_periodic_profile

from conftest import banded, expansion_symbols


def _rel(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


def test_direct_identities():
    spec = GridSpec(1, 1024, 1.0)
    f1, f2 = banded(spec, 100, 0), banded(spec, 80, 1)
    one = make_test_symbol("constant", c=1.0, N=2)
    assert _rel(apply_direct(one, [f1, f2]).values(), f1.values() * f2.values()) < 1e-10
    ms = [{"type": "bracket", "power": -1.0}, {"type": "gaussian", "width": 20.0}]
    sep = make_test_symbol("separable", multipliers=ms)
    m1 = lambda xi: 1 / bracket(xi)
    m2 = lambda xi: np.exp(-0.5 * np.sum(xi**2, -1) / 400)
    ref = apply_multiplier(m1, f1).values() * apply_multiplier(m2, f2).values()
    assert _rel(apply_direct(sep, [f1, f2]).values(), ref) < 1e-10
    osc = make_test_symbol("oscillatory_x", multipliers=ms, profile="smooth")
    a = smooth_periodic_profile(spec.points())
    assert _rel(apply_direct(osc, [f1, f2]).values(), a * ref) < 1e-10


@given(st.integers(0, 1000), st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
@settings(max_examples=15)
def test_multilinearity(seed, c):
    spec = GridSpec(1, 64, 1.0)
    f, g, h = banded(spec, 12, seed), banded(spec, 12, seed + 1), banded(spec, 12, seed + 2)
    sym = expansion_symbols()["x_dependent"]
    lhs = apply_direct(sym, [f + g * c, h]).values()
    rhs = apply_direct(sym, [f, h]).values() + c * apply_direct(sym, [g, h]).values()
    assert np.abs(lhs - rhs).max() <= 1e-10 * (1 + np.abs(rhs).max())


def test_direct_cost_guard():
    spec = GridSpec(1, 1024, 1.0)
    f = banded(spec, 400, 0)
    sym = expansion_symbols()["x_dependent"]
    with pytest.raises(CostGuardError):
        apply_direct(sym, [f, f], budget=1e6)


def test_decomposition_partition_and_piece_count():
    spec = GridSpec(1, 32, 1.0)
    B = 4
    f = banded(spec, B, 0)
    plan = make_plan([f, f])
    assert plan.piece_count == (2 * B + 3) ** 2
    one = make_test_symbol("constant", c=1.0, N=2)
    pieces = decompose_symbol(one, plan)
    rng = np.random.default_rng(0)
    xi = rng.uniform(-B, B, size=(100, 2, 1))
    total = sum(p(None, xi) for p in pieces.values())
    assert np.abs(total - 1).max() < 1e-12
    nu, piece = next(iter(pieces.items()))
    far = np.array(nu, float)[None] + 1.0 + rng.uniform(0, 1, size=(50, 2, 1))
    assert np.all(piece(None, far) == 0)


def test_p_of_unit_symbol():
    one = make_test_symbol("constant", c=1.0, N=2)
    tab = symbol_fourier_coefficients(one, [[3], [-2]], 4, 0, quad_points=128)
    phi_int = make_uniform_window("phi", "s3").integral_1d()
    P0, Q0 = tab.coefficient([[0], [0]])
    assert complex(P0) == pytest.approx((2 * math.pi) ** -2 * phi_int**2, rel=1e-8)
    assert np.array_equal(tab.P, tab.Q)


def test_q_equals_bracket_power_times_p():
    sym = expansion_symbols()["nonseparable"]
    tab = symbol_fourier_coefficients(sym, [[1], [2]], 6, 2)
    mu = np.arange(-6, 7)
    brk = 1 + mu[:, None] ** 2 + mu[None, :] ** 2
    assert np.allclose(tab.P, tab.Q / brk**2, rtol=1e-14, atol=0)


def test_fd_laplacian_agrees_with_spectral():
    sym = expansion_symbols()["separable"]
    errs = []
    for Qp in (64, 128):
        a = symbol_fourier_coefficients(sym, [[0], [1]], 4, 1, quad_points=Qp, laplacian="spectral")
        b = symbol_fourier_coefficients(sym, [[0], [1]], 4, 1, quad_points=Qp, laplacian="fd")
        errs.append(np.abs(a.Q - b.Q).max() / np.abs(a.Q).max())
    assert errs[0] < 2e-2 and errs[1] < errs[0] / 3  # second order


def test_resolution_error():
    one = make_test_symbol("constant", c=1.0, N=2)
    with pytest.raises(ResolutionError):
        symbol_fourier_coefficients(one, [[0], [0]], 10, 0, quad_points=16)
    with pytest.raises(ResolutionError):
        symbol_fourier_coefficients(one, [[0], [0]], 20, 0, quad_points=40)


def test_reconstruction_improves_with_radius():
    sym = expansion_symbols()["nonseparable"]
    nu = np.array([[1], [-2]])
    phi = make_uniform_window("phi", "s3")
    phit = make_uniform_window("phi_tilde", "s3")
    rng = np.random.default_rng(0)
    Xi = nu[None] + rng.uniform(-1, 1, size=(200, 2, 1))
    target = sym(None, Xi) * np.prod(phi(Xi - nu), axis=-1)
    errs = []
    for R in (4, 8, 16, 32):
        tab = symbol_fourier_coefficients(sym, nu, R, 0)
        mu = np.arange(-R, R + 1)
        E = [np.exp(1j * np.outer(Xi[:, j, 0], mu)) for j in range(2)]
        rec = np.einsum("sa,sb,ab->s", E[0], E[1], tab.P)
        errs.append(np.abs(rec * np.prod(phit(Xi - nu), -1) - target).max())
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_expansion_matches_direct(small_spec):
    fs = [banded(small_spec, 3, 1), banded(small_spec, 3, 2)]
    for name in ("constant", "nonseparable"):
        sym = expansion_symbols()[name]
        d = apply_direct(sym, fs).values()
        e = apply_via_expansion(sym, fs, radius=64).values()
        assert _rel(e, d) < 1e-6, name


def test_expansion_zero_input(small_spec):
    f = banded(small_spec, 3, 1)
    z = GridFunction(small_spec, np.zeros(small_spec.shape))
    out = apply_via_expansion(expansion_symbols()["constant"], [z, f], radius=8)
    assert np.all(out.values() == 0)


def test_support_cube():
    fam = make_lp_family("sharp_lp", 8)
    assert support_exponent(2) == 4 and support_exponent(3) == 4 and support_exponent(4) == 5
    for l0 in range(9):
        assert joint_support_halfwidth(l0, 2, fam) >= 6 + fam.supports[l0][1]


def test_band_decay_trivial_for_x_independent():
    one = make_test_symbol("constant", c=1.0, N=2)
    res = coefficient_band_decay(one, [[0], [0]], [[0], [0]], make_lp_family("sharp_lp", 6))
    assert res["trivial"] and res["values"][0] > 0
