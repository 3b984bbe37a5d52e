import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose

from adaptdeconv.errors import ParameterError
from adaptdeconv.fourier import QuadratureSpec
from adaptdeconv.model import Laplace, StableNoise, sample_convolution
from adaptdeconv.semiparam import (density_given_s, estimate_density_at, estimate_quadratic_functional,
                                   functional_given_s)
from adaptdeconv.stable_index import StableIndexParams, estimate_s

QUAD = QuadratureSpec(50, 4096)


def _sip(recipe):
    return StableIndexParams(1.0, 2.0, 0.0, 0.5, a=2.5, d_recipe=recipe, beta_bar=1.0)


def test_single_observation_oracle():
    # (1/2pi) int_{|u| <= 2} exp(|u|^s) du, 30-digit reference
    assert_allclose(density_given_s([0.0], 0.0, 1.0, 1.0, QUAD, h=0.5).value, 2.03369971967246891, rtol=1e-10)
    assert_allclose(density_given_s([0.0], 0.0, 1.5, 1.0, QUAD, h=0.5).value, 2.85353237601009711, rtol=1e-10)


def test_density_is_average_of_shifted_kernels(rng):
    y = rng.normal(size=5)
    full = density_given_s(y, 0.4, 1.2, 1.0, QUAD, h=0.7).value
    parts = [density_given_s([yk], 0.4, 1.2, 1.0, QUAD, h=0.7).value for yk in y]
    assert_allclose(full, np.mean(parts), rtol=1e-12)
    # shifting the data and the point together leaves the estimate unchanged
    assert_allclose(density_given_s(y + 2.0, 2.4, 1.2, 1.0, QUAD, h=0.7).value, full, rtol=1e-9)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_plugin_equals_given_s_on_selected_index():
    y = sample_convolution(Laplace(), StableNoise(1.5), 20000, np.random.default_rng(3))
    sip = _sip("cor1")
    sel = estimate_s(y, sip)
    est = estimate_density_at(y, 0.0, sip, quad=QUAD)
    assert est.s_hat == sel.s_hat
    assert est.value == density_given_s(y, 0.0, sel.s_hat, 1.0, QUAD).value
    assert est.diagnostics["index"] == sel.index
    sip2 = _sip("cor2")
    sel2 = estimate_s(y, sip2)
    est2 = estimate_quadratic_functional(y, sip2, quad=QUAD)
    assert est2.value == functional_given_s(y, sel2.s_hat, 1.0, QUAD).value


def test_recipe_mismatch():
    y = np.zeros(100)
    with pytest.raises(ParameterError):
        estimate_density_at(y, 0.0, _sip("cor2"))
    with pytest.raises(ParameterError):
        estimate_quadratic_functional(y, _sip("cor1"))
    with pytest.raises(ParameterError):
        estimate_density_at(y, 0.0, _sip("cor1"), beta_bar=0.5)


def test_functional_consistency():
    # integral of the Laplace(1) density squared is 1/4
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        vals = [functional_given_s(sample_convolution(Laplace(), StableNoise(1.0), 4000,
                                                      np.random.default_rng(i)), 1.0, 1.0, QUAD, h=0.5).value
                for i in range(20)]
    # (1/2pi) int_{|u|<=2} (1+u^2)^-2 du = 1/4 - tail(2)
    target = 0.25 - 0.0101298315884585028
    assert abs(np.mean(vals) - target) < 4 * np.std(vals) / np.sqrt(len(vals))
