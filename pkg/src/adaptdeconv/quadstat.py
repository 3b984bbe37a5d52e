"""Quadratic-functional U-statistics of deconvolution kernels.

The statistic is

    T = 2/(n(n-1)) sum_{k<j} < K_h(. - Y_k) - f0, K_h(. - Y_j) - f0 >

evaluated in the Fourier domain by Parseval.  Without ``f0`` the same code
computes the U-statistic estimator of the integral of ``f**2``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import OracleMisuse, ParameterError, QuadratureError
from .fourier import (DEFAULT_QUAD, QuadratureSpec, TailEnergy, _callable_cf, _observations, exp_sum_grid,
                      quadrature_weights, symmetric_grid, tail_energy)

_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class QuadStatResult:
    """Value of a quadratic statistic.

    Attributes
    ----------
    value : float
        The statistic (may be negative).
    h : float
        Bandwidth, the inverse of the kernel cutoff.
    n : int
        Sample size.
    path : str
        ``"fast"`` or ``"reference"``.
    tail : TailEnergy
        Energy of ``f0`` beyond the kernel cutoff, already included in ``value``.
    """

    value: float
    h: float
    n: int
    path: str
    tail: TailEnergy


@lru_cache(maxsize=256)
def _cached_tail(f0, cutoff, quad):
    u_max = max(quad.u_max, 200.0, 40.0 * cutoff)
    return tail_energy(f0, cutoff, QuadratureSpec(u_max, max(quad.m_points, 8192), quad.rule))


def f0_tail(f0, cutoff, quad=None):
    """Energy of ``f0`` beyond ``cutoff`` on a range wide enough for the kernel at hand.

    Results are cached for hashable ``f0`` since calibration loops recompute
    the same tail for every replicate.
    """
    quad = quad or DEFAULT_QUAD
    try:
        return _cached_tail(f0, float(cutoff), quad)
    except TypeError:
        return _cached_tail.__wrapped__(f0, float(cutoff), quad)


def _check_imag(imag, scale):
    if abs(imag) > _IMAG_TOL * max(1.0, abs(scale)):
        raise QuadratureError(f"imaginary residue {imag:.3g} exceeds {_IMAG_TOL:g}; refine the quadrature grid")


def quad_stat(sample, kernel, f0=None, quad=None, path="fast"):
    """U-statistic estimate of ``||K_h * f - f0||^2``-type quadratic functionals.

    Parameters
    ----------
    sample : Sample or array_like
        Observations ``Y``.
    kernel : KernelCF
        Deconvolution kernel; its cutoff sets the integration range.
    f0 : DensitySpec or callable, optional
        Null density (or its characteristic function).  When omitted the
        statistic estimates the integral of ``f**2``.
    quad : QuadratureSpec, optional
        ``m_points`` and ``rule`` set the grid on ``[-1/h, 1/h]``.
    path : {"fast", "reference"}
        ``"fast"`` uses ``|sum g_k|^2 - sum |g_k|^2`` in O(n M); ``"reference"``
        sums the pairwise integrals one by one.

    Returns
    -------
    QuadStatResult
    """
    quad = quad or DEFAULT_QUAD
    y = _observations(sample)
    n = y.size
    if n < 2:
        raise ParameterError(f"need at least 2 observations, got {n}")
    if path not in ("fast", "reference"):
        raise ParameterError(f"path must be 'fast' or 'reference', got {path!r}")
    c = float(kernel.support_cutoff)
    u, w = symmetric_grid(c, quad.m_points, quad.rule)
    phik = np.asarray(kernel.cf_inside(u), dtype=complex)
    if f0 is None:
        phi0 = np.zeros_like(phik)
        tail = TailEnergy(0.0, 0.0)
    else:
        phi0 = np.asarray(_callable_cf(f0)(u), dtype=complex)
        tail = f0_tail(f0, c, quad)
    if path == "fast":
        # sorting makes the floating-point summation order permutation invariant
        e = exp_sum_grid(np.sort(y), c, quad.m_points)
        cross = e * phik * np.conj(phi0)
        integrand = (np.abs(phik) ** 2 * (np.abs(e) ** 2 - n) - 2.0 * (n - 1) * cross.real
                     + n * (n - 1) * np.abs(phi0) ** 2)
        value = float(np.sum(w * integrand)) / (2.0 * np.pi * n * (n - 1))
        imag = float(np.sum(w * cross.imag)) / (np.pi * n)
        _check_imag(imag, value)
    else:
        g = np.exp(1j * np.outer(y, u)) * phik - phi0
        gram = (g * w) @ np.conj(g).T / (2.0 * np.pi)
        iu = np.triu_indices(n, 1)
        pairs = gram[iu]
        _check_imag(float(np.max(np.abs(pairs.imag))), float(np.max(np.abs(pairs.real))))
        value = 2.0 * float(np.sum(pairs.real)) / (n * (n - 1))
    return QuadStatResult(value + tail.value, 1.0 / c, n, path, tail)


# --------------------------------------------------------------------------
# x-domain oracle

_ORACLE_MAX_N = 20


def _breakpoints(f0):
    """Locations where ``f0`` is not smooth (kinks of Laplace-type components)."""
    name = getattr(f0, "name", "")
    if name == "laplace":
        return [float(f0.loc)]
    if name == "symgamma":
        return [0.0]
    if name == "mixture":
        return sorted({b for comp in f0.components for b in _breakpoints(comp)})
    return []


def kernel_x(kernel, x):
    """``K_h(x) = (1/pi) int_0^c phi_K(u) cos(u x) du`` by Gauss-Legendre quadrature."""
    x = np.asarray(x, dtype=float)
    c = float(kernel.support_cutoff)
    order = int(0.7 * c * float(np.max(np.abs(x)))) + 96
    t, wt = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * c * (t + 1.0)
    weights = 0.5 * c * wt * np.real(kernel.cf_inside(nodes))
    out = np.empty(x.size)
    chunk = max(1, 4_000_000 // order)
    flat = x.ravel()
    for lo in range(0, flat.size, chunk):
        out[lo:lo + chunk] = np.cos(np.outer(flat[lo:lo + chunk], nodes)) @ weights
    return out.reshape(x.shape) / np.pi


def _piecewise_grid(lo, hi, breaks, step):
    """Nodes and Gregory weights on ``[lo, hi]`` with every breakpoint a node."""
    edges = [lo] + [b for b in breaks if lo < b < hi] + [hi]
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(8, int(np.ceil((b - a) / step)))
        xs.append(np.linspace(a, b, m + 1))
        ws.append(quadrature_weights(m, (b - a) / m, "gregory"))
    return np.concatenate(xs), np.concatenate(ws)


def _support_radius(f0, limit):
    probe = np.concatenate([np.linspace(-50.0, 50.0, 2001), _breakpoints(f0)])
    peak = float(np.max(f0.pdf(probe)))
    r = 1.0
    while max(f0.pdf(np.array([-r, r]))) > 1e-16 * max(peak, 1e-300):
        r *= 1.5
        if r > limit:
            raise OracleMisuse("the null density decays too slowly for the x-domain oracle")
    return r


def quad_stat_xdomain_oracle(sample, kernel, f0=None, x_max=400.0):
    """Independent x-domain evaluation of ``quad_stat`` for tiny samples.

    ``K_h`` is computed by numerical Fourier inversion and the pairwise inner
    products by quadrature in ``x``.  The kernel-kernel products are band
    limited, so the trapezoid rule on ``[-x_max, x_max]`` is exact up to the
    truncation, which is corrected with the leading ``sin(cx)/x`` asymptote of
    ``K_h``.  Terms involving ``f0`` use an end-corrected rule split at the
    kinks of ``f0``.

    Only symmetric kernels, ``n <= 20`` and null densities with exponential
    tails are supported; anything else raises ``OracleMisuse``.
    """
    y = _observations(sample)
    n = y.size
    if n < 2:
        raise ParameterError(f"need at least 2 observations, got {n}")
    if n > _ORACLE_MAX_N:
        raise OracleMisuse(f"the x-domain oracle is O(n^2) and refuses n={n} > {_ORACLE_MAX_N}")
    if not kernel.symmetric:
        raise OracleMisuse("the x-domain oracle needs a real, even kernel transform")
    c = float(kernel.support_cutoff)
    if x_max <= 10.0 * float(np.max(np.abs(y))):
        raise OracleMisuse("x_max must be well beyond the observations")

    # kernel-kernel part, band limited to 2c
    m = int(np.ceil(2.0 * x_max / (0.4 * np.pi / c)))
    x = np.linspace(-x_max, x_max, m + 1)
    wx = np.full(m + 1, 2.0 * x_max / m)
    wx[0] = wx[-1] = 0.5 * wx[1]
    kx = np.stack([kernel_x(kernel, x - yk) for yk in y])
    kk = (kx * wx) @ kx.T
    edge = float(np.real(kernel.cf_inside(np.array([c]))[0]))
    a, b = y[:, None], y[None, :]
    diff = a - b
    with np.errstate(divide="ignore", invalid="ignore"):
        right = np.where(diff == 0, 1.0 / (x_max - a), np.log1p(diff / (x_max - a)) / diff)
        left = np.where(diff == 0, 1.0 / (x_max + a), np.log1p(-diff / (x_max + a)) / -diff)
    kk += edge ** 2 / (2.0 * np.pi ** 2) * np.cos(c * diff) * (right + left)

    iu = np.triu_indices(n, 1)
    total = float(np.sum(kk[iu]))
    if f0 is not None:
        radius = _support_radius(f0, x_max)
        lo, hi = -radius + min(0.0, y.min()), radius + max(0.0, y.max())
        xf, wf = _piecewise_grid(lo, hi, _breakpoints(f0), min(0.4 * np.pi / c, 0.01))
        p = f0.pdf(xf)
        kf = np.array([np.sum(wf * kernel_x(kernel, xf - yk) * p) for yk in y])
        ff = float(np.sum(wf * p * p))
        # sum over k<j of (-kf_k - kf_j + ff)
        total += -(n - 1) * float(np.sum(kf)) + 0.5 * n * (n - 1) * ff
    return 2.0 * total / (n * (n - 1))
