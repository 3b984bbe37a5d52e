import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from adaptdeconv.errors import NTooSmall, OrderingError, ParameterError
from adaptdeconv.model import Laplace, StableNoise, sample_convolution
from adaptdeconv.stable_index import (StableIndexParams, build_s_grid, classify_pipe, estimate_s, estimate_s_oracle,
                                      frequency_u_n, grid_oracle_index, grid_step, pipe_midpoints, pipes_ordered)

SIP = StableIndexParams(1.0, 2.0, 2.0, 0.5)


def test_params_validation():
    with pytest.raises(ParameterError):
        StableIndexParams(1.5, 1.0, 2.0, 0.5)
    with pytest.raises(ParameterError):
        StableIndexParams(0.5, 2.5, 2.0, 0.5)
    with pytest.raises(ParameterError):
        StableIndexParams(0.5, 2.0, 2.0, 0.0)
    with pytest.raises(ParameterError):
        StableIndexParams(0.5, 2.0, 2.0, 0.5, d_recipe="cor1")
    with pytest.raises(ParameterError):
        StableIndexParams(0.5, 2.0, 2.0, 0.5, a=3.0, d_recipe="cor1", beta_bar=1.0)
    assert StableIndexParams(0.5, 2.0, 2.0, 0.5, d_recipe="cor2", beta_bar=1.0).a == 4.5
    assert SIP.a == 1.5


def test_frequency_frozen():
    # (log n/2 - 1.75 log log n)^(1/2) at n = 1e6
    assert_allclose(frequency_u_n(10 ** 6, SIP), 1.52072989996551266, rtol=1e-13)


def test_frequency_small_n():
    with pytest.raises(NTooSmall) as info:
        frequency_u_n(16, SIP)
    assert info.value.min_n == 743
    frequency_u_n(743, SIP)


def test_grid_frozen():
    sip = StableIndexParams(0.3, 2.0, 2.0, 0.5)
    assert_allclose(grid_step(10 ** 4, sip), 0.0977996754031220094, rtol=1e-13)
    g = build_s_grid(10 ** 4, sip)
    assert g.size == 19 and g[0] == 0.3 and g[-1] == 2.0
    cor1 = StableIndexParams(0.3, 2.0, 2.0, 0.5, d_recipe="cor1", beta_bar=0.8)
    assert_allclose(grid_step(10 ** 4, cor1), min(math.log(1e4) ** -1.0, 0.0977996754031220094), rtol=1e-13)


@given(st.floats(0.1, 1.0), st.floats(0.05, 1.0), st.integers(100, 10 ** 9))
def test_grid_properties(s_lo, width, n):
    sip = StableIndexParams(s_lo, min(2.0, s_lo + width), 1.0, 0.5)
    g = build_s_grid(n, sip)
    steps = np.diff(g)
    assert g[0] == sip.s_lo and g[-1] == sip.s_hi
    assert np.all(steps > 0)
    assert np.max(steps) <= grid_step(n, sip) * (1 + 1e-9)
    assert_allclose(steps, steps[0], rtol=1e-9)


def test_classify_examples():
    grid = np.array([0.7, 1.0, 1.4, 1.8])
    u = 30.0
    phi = np.exp(-u ** grid)
    assert classify_pipe(1.0, u, grid, 2.0, 0.5) == 0
    assert classify_pipe(0.0, u, grid, 2.0, 0.5) == 3
    assert classify_pipe(float(phi[1]), u, grid, 2.0, 0.5) == 1
    assert classify_pipe(float(phi[2]), u, grid, 2.0, 0.5) == 2
    assert pipes_ordered(u, grid, 2.0, 0.5)


def test_classify_errors():
    grid = np.array([1.0, 1.5, 2.0])
    with pytest.raises(OrderingError):
        classify_pipe(0.5, 0.9, grid, 2.0, 0.5)
    with pytest.raises(ParameterError):
        classify_pipe(1.5, 30.0, grid, 2.0, 0.5)
    with pytest.raises(ParameterError):
        classify_pipe(0.5, 0.0, grid, 2.0, 0.5)
    assert not pipes_ordered(0.9, grid, 2.0, 0.5)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_classify_monotone(a, b):
    grid = np.linspace(0.8, 2.0, 7)
    u = 8.0
    lo, hi = sorted((a, b))
    assert classify_pipe(hi, u, grid, 1.0, 0.5) <= classify_pipe(lo, u, grid, 1.0, 0.5)


def test_midpoints_are_between_pipes():
    grid = np.array([1.0, 1.3, 1.6])
    u = 10.0
    q = 0.5 * u ** -2.0
    phi = np.exp(-u ** grid)
    mids = pipe_midpoints(u, grid, 2.0, 0.5)
    assert np.all(mids <= q * phi[:-1]) and np.all(mids >= phi[1:])


def test_grid_oracle_index():
    grid = np.array([1.0, 1.25, 1.5, 1.75, 2.0])
    assert grid_oracle_index(1.0, grid) == 0
    assert grid_oracle_index(1.3, grid) == 1
    assert grid_oracle_index(2.0, grid) == 4
    with pytest.raises(ParameterError):
        grid_oracle_index(2.1, grid)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_oracle_recovers_grid_index():
    grid = [0.7, 1.0, 1.4, 1.8]
    f = Laplace(0, 1)
    for k, s in enumerate(grid):
        g = StableNoise(s)
        res = estimate_s_oracle(lambda u, g=g: f.cf(u) * g.cf(u), 10 ** 4, SIP, u=30.0, grid=grid)
        assert res.index == k and res.s_hat == s and res.pipes_ordered


def test_estimate_records_everything(rng):
    y = sample_convolution(Laplace(), StableNoise(1.5), 5000, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = estimate_s(y, StableIndexParams(1.0, 2.0, 0.0, 0.5, a=1.1))
    assert res.u_n > 1
    d = json.loads(res.to_json())
    for key in ("s_hat", "index", "u_n", "d_n", "grid", "ecf_mod", "branch", "pipes_ordered", "remark_condition"):
        assert key in d
    assert d["s_hat"] in d["grid"]
    assert d["branch"] in ("top", "interior", "bottom")


def test_remark_condition_warns():
    with pytest.warns(RuntimeWarning, match="violates"):
        res = estimate_s_oracle(lambda u: np.exp(-u ** 1.5) / (1 + u * u), 10 ** 4, SIP, u=30.0,
                                grid=[1.0, 1.5, 2.0])
    assert not res.remark_condition
