"""Deconvolution kernels in the Fourier domain and the bandwidth/threshold recipes.

Kernels are represented by their characteristic function on the frequency
scale of the data: ``cf(u) = phi_J(h u) / phi_g(u)`` with the sinc kernel
``phi_J = 1_{|u| <= 1}``, so every kernel vanishes outside ``[-1/h, 1/h]``.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import KernelOverflowError, NTooSmall, ParameterError
from .model import PolynomialNoise, StableNoise

# largest x with exp(x) finite in double precision
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class KernelCF:
    """Characteristic function of a deconvolution kernel.

    ``cf`` is evaluated on the frequency scale of the data and vanishes for
    ``|u| > support_cutoff``.  ``symmetric`` marks a real, even ``cf``.
    """

    cf_inside: Callable
    support_cutoff: float
    provenance: str
    symmetric: bool = True

    @property
    def h(self):
        return 1.0 / self.support_cutoff

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) <= self.support_cutoff
        out = np.zeros(u.shape, dtype=complex)
        out[inside] = self.cf_inside(u[inside])
        return out if u.ndim else complex(out)


@dataclass(frozen=True)
class GridPoint:
    """One point of an adaptive grid: smoothness triple, bandwidth and threshold."""

    tau: tuple
    h: float
    t2: float

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise ParameterError(f"bandwidth must lie in (0, 1), got {self.h}")
        if not self.t2 > 0:
            raise ParameterError(f"threshold must be positive, got {self.t2}")


def kernel_poly(h, g):
    """Sinc-truncated inverse of a polynomially smooth noise transform."""
    if not 0.0 < h < 1.0:
        raise ParameterError(f"bandwidth must lie in (0, 1), got {h}")
    if not isinstance(g, PolynomialNoise):
        raise ParameterError("kernel_poly needs polynomial noise")
    return KernelCF(lambda u: 1.0 / g.cf(u), 1.0 / h, f"poly(sigma={g.sigma}, gamma={g.gamma}, h={h:.6g})",
                    symmetric=g.symmetric)


def max_stable_cutoff(s):
    """Largest cutoff ``1/h`` with ``exp((1/h)^s)`` representable."""
    return _LOG_MAX ** (1.0 / s)


def kernel_stable(h, s_hat):
    """Kernel for stable noise with index ``s_hat``: ``exp(|u|^s_hat)`` on ``|u| <= 1/h``.

    This is the effective transform of ``(1/h) K((x)/h)`` with
    ``phi_K(v) = exp((|v|/h)^s_hat) 1_{|v| <= 1}``.  A bandwidth of 1 or more
    is allowed here: the semiparametric recipes can produce it at small n.
    """
    if not h > 0:
        raise ParameterError(f"bandwidth must be positive, got {h}")
    if not 0.0 < s_hat <= 2.0:
        raise ParameterError(f"s_hat must lie in (0, 2], got {s_hat}")
    cutoff = 1.0 / h
    if cutoff ** s_hat >= _LOG_MAX:
        raise KernelOverflowError(
            f"exp((1/h)^s) overflows for h={h}, s={s_hat}; the largest cutoff is {max_stable_cutoff(s_hat):.6g}",
            max_cutoff=max_stable_cutoff(s_hat))
    return KernelCF(lambda u: np.exp(np.abs(u) ** s_hat), cutoff, f"stable(s={s_hat:.6g}, h={h:.6g})")


def kernel_for_noise(h, g):
    if isinstance(g, StableNoise):
        return kernel_stable(h, g.s)
    return kernel_poly(h, g)


# --------------------------------------------------------------------------
# recipes


def _loglog(n):
    return math.log(math.log(n))


def _check_n(n, floor=16):
    if n < floor:
        raise NTooSmall(f"n={n} is below the floor {floor} of this recipe", min_n=floor)


def bandwidth_threshold_thm1(n, beta_i, sigma, last=False):
    """Bandwidth and threshold for one Sobolev grid point (polynomial noise).

    With ``m = n / sqrt(log log n)``:
    ``h = m^(-2/(4 beta + 4 sigma + 1))`` and ``t2 = m^(-4 beta/(4 beta + 4 sigma + 1))``.
    ``last=True`` gives the supersmooth-adaptation point, which uses ``n``
    instead of ``m`` with ``beta_i`` the upper smoothness bound.
    """
    _check_n(n)
    if beta_i < 0 or sigma <= 1:
        raise ParameterError("need beta_i >= 0 and sigma > 1")
    m = float(n) if last else n / math.sqrt(_loglog(n))
    denom = 4.0 * beta_i + 4.0 * sigma + 1.0
    return m ** (-2.0 / denom), m ** (-4.0 * beta_i / denom)


def supersmooth_c_default(alpha_lo, r_lo):
    return 0.9 * alpha_lo * math.exp(-1.0 / r_lo)


def bandwidth_threshold_thm2_supersmooth(n, r_i, sigma, c, alpha_lo=None, r_lo=None):
    """Bandwidth and threshold for a supersmooth grid point (polynomial noise).

    ``h = (log n / (2c))^(-1/r_i)`` and
    ``t2 = (log n)^((4 sigma + 1)/(2 r_i)) / n * sqrt(log log log n)``.
    When ``log log log n < 1`` the square-root factor is clamped to 1 with a
    warning (the recipe is asymptotic and the factor would shrink the
    threshold below its intended order).
    """
    _check_n(n)
    if not r_i > 0 or not c > 0:
        raise ParameterError("need r_i > 0 and c > 0")
    if alpha_lo is not None and r_lo is not None:
        bound = alpha_lo * math.exp(-1.0 / r_lo)
        if not c < bound:
            raise ParameterError(f"c={c} must be below alpha_lo*exp(-1/r_lo)={bound:.6g}")
    logn = math.log(n)
    lll = math.log(_loglog(n)) if _loglog(n) > 0 else 0.0
    if lll < 1.0:
        warnings.warn(f"log log log n = {lll:.3f} < 1 at n={n}; clamping the factor to 1", RuntimeWarning,
                      stacklevel=2)
        lll = 1.0
    h = (logn / (2.0 * c)) ** (-1.0 / r_i)
    t2 = logn ** ((4.0 * sigma + 1.0) / (2.0 * r_i)) / n * math.sqrt(lll)
    return h, t2


def semiparam_bracket(n, s_hat, beta_bar, variant):
    logn, ll = math.log(n), _loglog(n)
    if variant == "estimation":
        return 0.5 * logn - (beta_bar - s_hat + 0.5) / s_hat * ll
    if variant == "test":
        return 0.5 * logn - (2.0 * beta_bar / s_hat) * ll
    raise ParameterError(f"variant must be 'estimation' or 'test', got {variant!r}")


def _min_n_for(fn, start=16):
    n = start
    while fn(n) <= 0:
        n *= 2
        if n > 1e300:
            return None
    lo, hi = n // 2, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fn(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def bandwidth_semiparam(n, s_hat, beta_bar, variant="estimation"):
    """Random bandwidth for the stable-noise plug-in procedures.

    ``estimation``: ``(log n/2 - (beta_bar - s + 1/2)/s log log n)^(-1/s)``;
    ``test``: ``(log n/2 - (2 beta_bar/s) log log n)^(-1/s)``.
    """
    _check_n(n)
    bracket = semiparam_bracket(n, s_hat, beta_bar, variant)
    if bracket <= 0:
        min_n = _min_n_for(lambda m: semiparam_bracket(m, s_hat, beta_bar, variant))
        raise NTooSmall(f"bandwidth bracket {bracket:.4g} <= 0 at n={n}; need n >= {min_n}", min_n=min_n)
    return bracket ** (-1.0 / s_hat)


def threshold_semiparam(n, s_hat, beta_bar):
    """Random threshold ``(log n / 2)^(-2 beta_bar / s_hat)`` of the stable-noise test."""
    _check_n(n)
    return (0.5 * math.log(n)) ** (-2.0 * beta_bar / s_hat)


_REGIMES = ("thm1_sobolev", "thm1_supersmooth", "thm2_sobolev", "thm2_supersmooth", "cor3")


def testing_rate(regime, n, beta=None, sigma=None, beta_bar=None, r=None, s=None):
    """Separation rate ``psi_n`` of each adaptive test.

    Parameters consumed per regime:

    - ``thm1_sobolev``, ``thm2_sobolev``: ``beta``, ``sigma``
    - ``thm1_supersmooth``: ``beta_bar``, ``sigma``
    - ``thm2_supersmooth``: ``r``, ``sigma``
    - ``cor3``: ``beta``, ``s``
    """
    if regime not in _REGIMES:
        raise ParameterError(f"unknown regime {regime!r}; expected one of {_REGIMES}")
    _check_n(n)
    logn = math.log(n)
    if regime in ("thm1_sobolev", "thm2_sobolev"):
        m = n / math.sqrt(_loglog(n))
        return m ** (-2.0 * beta / (4.0 * beta + 4.0 * sigma + 1.0))
    if regime == "thm1_supersmooth":
        return float(n) ** (-2.0 * beta_bar / (4.0 * beta_bar + 4.0 * sigma + 1.0))
    if regime == "thm2_supersmooth":
        lll = max(math.log(_loglog(n)), 1.0) if _loglog(n) > 0 else 1.0
        return logn ** ((4.0 * sigma + 1.0) / (4.0 * r)) / math.sqrt(n) * lll ** 0.25
    return (0.5 * logn) ** (-beta / s)
