import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from adaptdeconv.errors import ParameterError
from adaptdeconv.fourier import (QuadratureSpec, ecf, exp_sum_grid, parseval_inner, quadrature_weights,
                                 symmetric_grid, tail_energy)
from adaptdeconv.model import Gaussian, Laplace


def test_quadrature_spec_validation():
    for bad in ({"u_max": 0}, {"u_max": np.inf}, {"m_points": 255}, {"m_points": 301}, {"rule": "simpson"}):
        with pytest.raises(ParameterError):
            QuadratureSpec(**bad)
    assert QuadratureSpec().refined().m_points == 16384


def test_ecf_examples():
    assert ecf([0.0], 3.7) == 1.0
    assert ecf([1.0, -2.0, 5.0], 0.0) == 1.0
    assert_allclose(ecf([np.pi, -np.pi], 1.0), -1.0, atol=1e-15)
    u = np.linspace(-3, 3, 7)
    assert ecf([0.5, 1.5], u).shape == u.shape


@given(arrays(float, st.integers(1, 30), elements=st.floats(-50, 50)), st.floats(-20, 20))
def test_ecf_modulus_and_permutation(y, u):
    v = ecf(y, u)
    assert abs(v) <= 1 + 1e-12
    assert_allclose(ecf(y[::-1], u), v, atol=1e-13)


def test_exp_sum_grid_matches_direct(rng):
    y = rng.standard_normal(300) * 4
    c, m = 3.3, 512
    u, _ = symmetric_grid(c, m)
    direct = np.exp(1j * np.outer(u, y)).sum(axis=1)
    assert_allclose(exp_sum_grid(y, c, m), direct, rtol=0, atol=1e-10)


def test_gregory_weights_exact_for_cubics():
    w = quadrature_weights(256, 2.0 / 256)
    x = np.linspace(-1, 1, 257)
    assert_allclose(np.sum(w * (x ** 3 + 2 * x ** 2 + 1)), 2 + 4 / 3, rtol=1e-13)


def test_parseval_examples():
    ind = lambda u: (np.abs(u) <= 1).astype(float)  # noqa: E731
    assert_allclose(parseval_inner(ind, ind, QuadratureSpec(1.0, 256)).real, 1 / np.pi, rtol=1e-13)
    g = Gaussian(0, 1)
    assert_allclose(parseval_inner(g, g), 1 / (2 * np.sqrt(np.pi)), rtol=1e-9)
    assert parseval_inner(g, lambda u: np.zeros_like(u)) == 0


@given(st.floats(0.1, 5.0), st.floats(-2, 2))
def test_parseval_nonnegative_and_real(scale, loc):
    f = Laplace(loc, scale)
    v = parseval_inner(f, f, QuadratureSpec(50, 1024))
    assert v.real >= -1e-12
    assert abs(v.imag) <= 1e-12


def test_tail_energy_examples():
    lap = Laplace(0, 1)
    assert_allclose(tail_energy(lap, 0.0, QuadratureSpec(400, 2 ** 16)).value, 0.25, rtol=1e-5)
    # frozen 30-digit quadrature of (1/pi) int_2^inf (1+u^2)^-2 du, truncated part bounded by the remainder
    t = tail_energy(lap, 2.0)
    assert abs(t.value - 0.0101298315884585028) <= t.remainder
    ind = lambda u: (np.abs(u) <= 1).astype(float)  # noqa: E731
    assert tail_energy(ind, 2.0).value == 0.0
    assert tail_energy(lap, 49.0).value < 1e-5
    with pytest.raises(ParameterError):
        tail_energy(lap, 60.0)
    with pytest.raises(ParameterError):
        tail_energy(lap, -1.0)


@pytest.mark.parametrize("cutoff", [0.0, 1.0, 4.0])
def test_richardson_stability(cutoff):
    quad = QuadratureSpec()
    for f in (Laplace(0, 1), Gaussian(0.5, 0.8)):
        a = tail_energy(f, cutoff, quad).value
        b = tail_energy(f, cutoff, quad.refined()).value
        assert abs(a - b) <= 1e-6 * abs(b)
        a, b = parseval_inner(f, f, quad), parseval_inner(f, f, quad.refined())
        assert abs(a - b) <= 1e-6 * abs(b)


def test_symmetric_grid_handles_kink_at_origin():
    # (1/2pi) int_{|u| <= 1.25} exp(2|u|^1.2) du, 30-digit reference with the origin as a breakpoint
    u, w = symmetric_grid(1.25, 2048)
    assert_allclose(np.sum(w * np.exp(2 * np.abs(u) ** 1.2)) / (2 * np.pi), 1.75056976216701755, rtol=1e-8)
    assert u[1024] == 0.0
    assert_allclose(np.sum(w), 2.5, rtol=1e-14)
