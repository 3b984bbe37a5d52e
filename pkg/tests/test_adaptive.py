import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from adaptdeconv.adaptive import (GridBounds, build_grid, calibrate_cstar, cstar_from_pool, null_max_ratios,
                                  run_test_poly, run_test_stable)
from adaptdeconv.errors import NTooSmall, ParameterError
from adaptdeconv.fourier import QuadratureSpec
from adaptdeconv.kernels import bandwidth_threshold_thm1
from adaptdeconv.model import Gaussian, Laplace, PolynomialNoise, StableNoise, sample_convolution
from adaptdeconv.stable_index import StableIndexParams

G = PolynomialNoise(2.0)
B = GridBounds(0.25, 1.0, 1.0, 2.0, 0.5, 1.0)
QUAD = QuadratureSpec(50, 256)


def test_grid_counts_thm1():
    grid = build_grid("thm1", 10_000, B, 2.0)
    assert len(grid.points) == 10 + 1
    assert grid.counts == (10,)
    betas = [p.tau[2] for p in grid.points[:-1]]
    assert_allclose(betas, np.linspace(0.5, 1.0, 10))
    last = grid.points[-1]
    assert last.tau == (0.25, 2.0, 0.0)
    assert (last.h, last.t2) == bandwidth_threshold_thm1(10_000, 1.0, 2.0, last=True)


def test_grid_counts_thm2():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        grid = build_grid("thm2", 10_000, B, 2.0)
    n_r = math.ceil(math.log(math.log(10_000)) / 1.0)
    assert grid.counts == (10, n_r)
    assert len(grid.points) == 10 + n_r
    assert [p.tau[1] for p in grid.points[10:]] == list(np.linspace(1.0, 2.0, n_r))


def test_grid_degenerate_and_errors():
    grid = build_grid("thm1", 1000, GridBounds(0.25, 1.0, 1.0, 2.0, 1.0, 1.0), 2.0)
    assert len(grid.points) == 2
    with pytest.raises(ParameterError):
        build_grid("thm3", 1000, B, 2.0)
    with pytest.raises(NTooSmall):
        build_grid("thm1", 10, B, 2.0)
    with pytest.raises(ParameterError):
        build_grid("thm2", 1000, GridBounds(0.25, 1.0, 0.0, 2.0, 0.5, 1.0), 2.0)
    with pytest.raises(ParameterError):
        build_grid("thm2", 1000, GridBounds(0.25, 1.0, 1.0, 1.0, 0.5, 1.0), 2.0)
    with pytest.raises(ParameterError):
        GridBounds(1.0, 0.5, 1.0, 2.0, 0.5, 1.0)


def test_decision_invariants(rng):
    y = sample_convolution(Laplace(), G, 300, rng)
    grid = build_grid("thm1", 300, B, 2.0)
    base = run_test_poly(y, grid, 0.0, Laplace(), G, QUAD)
    ratios = [abs(t) / t2 for _, t, t2 in base.per_point]
    assert base.max_ratio == max(ratios)
    assert base.reject and base.trigger_index == int(np.argmax(ratios))
    for c in (0.5 * base.max_ratio, base.max_ratio, 2.0 * base.max_ratio):
        out = run_test_poly(y, grid, c, Laplace(), G, QUAD)
        assert out.reject == (base.max_ratio > c)
        assert out.max_ratio == base.max_ratio
        assert (out.trigger_index is None) == (not out.reject)
    rows = base.rows()
    assert len(rows) == len(grid.points) and "ratio" in rows[0]
    assert base.to_csv().startswith("index,alpha,r,beta,T,t2,ratio\r\n")


def test_stable_test_needs_cor3(rng):
    y = sample_convolution(Laplace(), StableNoise(1.5), 500, rng)
    sip = StableIndexParams(1.0, 2.0, 2.0, 0.5, d_recipe="cor1", beta_bar=1.0)
    with pytest.raises(ParameterError):
        run_test_stable(y, Laplace(), sip)
    sip3 = StableIndexParams(1.0, 2.0, 2.0, 0.5, d_recipe="cor3", beta_bar=0.5)
    out = run_test_stable(y, Laplace(), sip3, c_star=1.0, quad=QUAD, s_hat=1.5)
    assert out.extra["s_hat"] == 1.5 and len(out.per_point) == 1


@given(arrays(float, st.integers(2000, 2500), elements=st.floats(0, 100)), st.sampled_from([0.02, 0.1, 0.5]))
def test_cstar_order_statistic(pool, eps):
    c = cstar_from_pool(pool, eps)
    assert np.mean(pool > c) <= eps / 2
    assert np.mean(pool >= c) > eps / 2 - 1.0 / pool.size


@given(arrays(float, st.integers(500, 1999), elements=st.floats(0.01, 100)), st.sampled_from([0.05, 0.1, 0.5]))
def test_cstar_ladder(pool, eps):
    c = cstar_from_pool(pool, eps)
    assert np.mean(pool > c) <= eps / 2


def test_cstar_examples():
    pool = np.arange(1.0, 2001.0)
    assert cstar_from_pool(pool, 0.1) == 1900.0
    assert cstar_from_pool(pool, 1.0) == 0.0


def test_calibration_errors():
    grid = build_grid("thm1", 100, B, 2.0)
    with pytest.raises(ParameterError):
        calibrate_cstar(Laplace(), G, 100, grid, 0.1, 400, 0)
    with pytest.raises(ParameterError):
        calibrate_cstar(Laplace(), G, 100, grid, 0.01, 600, 0)
    with pytest.raises(ParameterError):
        calibrate_cstar(Laplace(), G, 100, grid, 0.0, 600, 0)
    assert calibrate_cstar(Laplace(), G, 100, grid, 1.0, 10, 0) == 0.0


def test_calibration_reproducible_and_thread_independent():
    grid = build_grid("thm1", 100, B, 2.0)
    a = null_max_ratios(Gaussian(), G, 100, grid, 40, 7, QUAD, threads=1)
    b = null_max_ratios(Gaussian(), G, 100, grid, 40, 7, QUAD, threads=3)
    np.testing.assert_array_equal(a, b)
    c, pool = calibrate_cstar(Gaussian(), G, 100, grid, 0.2, 500, 7, QUAD, return_pool=True)
    assert pool.size == 500 and np.mean(pool > c) <= 0.1
