"""Tour of the main entry points on simulated data.

Run with ``python demos/quickstart.py``.
"""

import warnings

import numpy as np

from adaptdeconv import (GridBounds, Laplace, Mixture, PolynomialNoise, QuadratureSpec, StableIndexParams,
                         StableNoise, build_grid, calibrate_cstar, estimate_density_at,
                         estimate_quadratic_functional, estimate_s, run_test_poly, sample_convolution)

rng = np.random.default_rng(0)
quad = QuadratureSpec(50, 1024)

# goodness-of-fit under Laplace noise: null Laplace(0, 1), data from a shifted mixture
g = PolynomialNoise(2.0)
f0 = Laplace(0, 1)
f = Mixture((Laplace(0, 1), Laplace(1.0, 1)), (0.5, 0.5))
n = 2000
grid = build_grid("thm1", n, GridBounds(0.25, 1.0, 1.0, 2.0, 0.5, 1.0), g.sigma)
c_star = calibrate_cstar(f0, g, n, grid, eps=0.1, reps=500, seed=1, quad=quad)
for name, dens in (("null", f0), ("mixture", f)):
    out = run_test_poly(sample_convolution(dens, g, n, rng), grid, c_star, f0, g, quad)
    print(f"{name:8s} max |T|/t2 = {out.max_ratio:.3f}  C* = {c_star:.3f}  reject = {out.reject}")

# stable noise of unknown index: index selection, density at 0 and the integral of f^2
# (both converge at logarithmic rates, so single estimates are noisy)
y = sample_convolution(Laplace(0, 1), StableNoise(2.0), 20000, rng)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    sel = estimate_s(y, StableIndexParams(1.0, 2.0, 0.0, 0.5, a=2.5))
    dens = estimate_density_at(y, 0.0, StableIndexParams(1.0, 2.0, 0.0, 0.5, a=2.5, d_recipe="cor1",
                                                         beta_bar=0.75), quad=quad)
    func = estimate_quadratic_functional(y, StableIndexParams(1.0, 2.0, 0.0, 0.5, a=2.5, d_recipe="cor2",
                                                              beta_bar=0.75), quad=quad)
print(f"s_hat = {sel.s_hat} (branch {sel.branch}, u_n = {sel.u_n:.3f}, grid of {len(sel.grid)})")
print(f"f_hat(0) = {dens.value:.4f} (true 0.5), int f^2 estimate = {func.value:.4f} (true 0.25)")
