import json
import math

import numpy as np
import pytest

from multipdo.errors import FitError
from multipdo.exponents import ExponentProfile
from multipdo.experiments import (ExperimentReport, fit_slope, keyprop_sides, run_band_decay,
                                  run_keyprop_ratio, run_sharpness_s, run_sharpness_sj,
                                  run_wainger_threshold, substream)
from multipdo.grid import GridSpec


def test_fit_slope_exact_line():
    fit = fit_slope([(l, 3 * 2.0 ** (-1.5 * l)) for l in range(2, 8)])
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.max_abs_residual < 1e-12


def test_fit_errors_name_level():
    with pytest.raises(FitError):
        fit_slope([(1, 1.0), (2, 2.0)])
    with pytest.raises(FitError, match="level 4"):
        fit_slope([(2, 1.0), (3, 1.0), (4, 0.0)])


def test_substreams_are_independent_and_reproducible():
    a = substream(5, "x").standard_normal(4)
    assert np.array_equal(a, substream(5, "x").standard_normal(4))
    assert not np.array_equal(a, substream(5, "y").standard_normal(4))
    assert not np.array_equal(a, substream(6, "x").standard_normal(4))


def test_report_serialisation():
    rep = ExperimentReport("t", {"x": 1}, [{"level": 1, "measured": 2.0, "theory": 1.0}],
                           0.5, 0.5, 0.0, "pass", 0.1)
    assert rep.to_csv() == "level,measured,theory,log2_measured\n1,2.0,1.0,1.0\n"
    assert json.loads(rep.to_json())["verdict"] == "pass"


def test_sharpness_s_small():
    rep = run_sharpness_s(ell_range=(6, 10))
    assert rep.passed
    assert rep.theory_slope == pytest.approx(-0.6)
    assert rep.parameters["m"] == -0.5


def test_sharpness_s_rejects_mode():
    with pytest.raises(Exception):
        run_sharpness_s(mode="bogus")


def test_sharpness_sj_n3():
    prof = ExponentProfile.build(3, 1, "2", ["2"] * 3)
    rep = run_sharpness_sj(prof, ell_range=(6, 10))
    assert rep.passed


def test_keyprop_sides_scale_covariance():
    spec = GridSpec(1, 256, 4.0)
    rng = substream(0, "t")
    from multipdo.experiments import _shell_function
    fs = [_shell_function(spec, 4, rng) for _ in range(2)]
    l1, r1 = keyprop_sides(fs, 4, [4, 4], "1", ["2", "2"])
    l2, r2 = keyprop_sides([fs[0] * 2.0, fs[1]], 4, [4, 4], "1", ["2", "2"])
    assert l2 == pytest.approx(2 * l1) and r2 == pytest.approx(2 * r1)


def test_keyprop_small_run_deterministic():
    a = run_keyprop_ratio(R_values=(2, 4, 8), trials=3, grid_points=256, seed=3)
    b = run_keyprop_ratio(R_values=(2, 4, 8), trials=3, grid_points=256, seed=3)
    assert a.to_csv() == b.to_csv()


def test_wainger_threshold_run():
    rep = run_wainger_threshold(p_values=("4",), grid_points=2**14, j_range=(6, 9))
    assert rep.passed


def test_band_decay_without_remainder():
    rep = run_band_decay(remainder=False)
    assert rep.passed and rep.fitted_slope < -3
