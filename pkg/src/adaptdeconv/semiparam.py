"""Plug-in deconvolution under stable noise of unknown index.

The index is estimated first, then fed to the stable deconvolution kernel
and the random bandwidth.  The ``*_given_s`` functions take the index
directly; the plug-in functions call them with the estimate, so on the event
that the estimate equals the grid oracle both produce identical outputs.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError, QuadratureError
from .fourier import DEFAULT_QUAD, _observations, exp_sum_grid, symmetric_grid
from .kernels import bandwidth_semiparam, kernel_stable
from .quadstat import quad_stat
from .stable_index import estimate_s


@dataclass(frozen=True)
class PluginEstimate:
    """Output of a plug-in procedure.

    ``s_hat`` is the index actually used and ``h`` the bandwidth built from
    it.  ``diagnostics`` holds the index-selection record when the index was
    estimated.
    """

    value: float
    s_hat: float
    h: float
    mode: str
    diagnostics: Optional[dict] = None

    def to_dict(self):
        return asdict(self)


def _require_recipe(sip, recipe):
    if sip.d_recipe != recipe:
        raise ParameterError(f"this procedure uses the {recipe} grid recipe, got {sip.d_recipe}")


def density_given_s(sample, x, s, beta_bar, quad=None, h=None):
    """Deconvolution density estimate at ``x`` for a known index ``s``.

    Computes ``(1/2pi) int_{|u| <= 1/h} exp(iux) exp(|u|^s) ecf(u) du`` where
    ``ecf(u) = (1/n) sum_j exp(-iuY_j)``, i.e. the average of ``K_h(x - Y_j)``.
    ``h`` defaults to the random-bandwidth recipe evaluated at ``s``.
    """
    quad = quad or DEFAULT_QUAD
    y = _observations(sample)
    if h is None:
        h = bandwidth_semiparam(y.size, s, beta_bar, "estimation")
    kernel = kernel_stable(h, s)
    c = kernel.support_cutoff
    u, w = symmetric_grid(c, quad.m_points, quad.rule)
    emp = np.conj(exp_sum_grid(np.sort(y), c, quad.m_points)) / y.size
    total = np.sum(w * np.exp(1j * u * x) * kernel.cf_inside(u) * emp) / (2.0 * np.pi)
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise QuadratureError(f"imaginary residue {total.imag:.3g} in the density estimate")
    return PluginEstimate(float(total.real), float(s), float(h), "density_at_x")


def estimate_density_at(sample, x, sip, beta_bar=None, quad=None):
    """Adaptive density estimate at ``x`` with the estimated stable index.

    ``sip`` must use the ``cor1`` grid recipe; ``beta_bar`` defaults to
    ``sip.beta_bar`` and must exceed 1/2.
    """
    _require_recipe(sip, "cor1")
    beta_bar = sip.beta_bar if beta_bar is None else beta_bar
    if not beta_bar > 0.5:
        raise ParameterError(f"beta_bar must exceed 1/2, got {beta_bar}")
    sel = estimate_s(sample, sip)
    est = density_given_s(sample, x, sel.s_hat, beta_bar, quad)
    return PluginEstimate(est.value, est.s_hat, est.h, est.mode, sel.to_dict())


def functional_given_s(sample, s, beta_bar, quad=None, h=None):
    """U-statistic estimate of the integral of ``f**2`` for a known index ``s``."""
    y = _observations(sample)
    if h is None:
        h = bandwidth_semiparam(y.size, s, beta_bar, "estimation")
    res = quad_stat(y, kernel_stable(h, s), None, quad)
    return PluginEstimate(res.value, float(s), float(h), "quadratic_functional")


def estimate_quadratic_functional(sample, sip, beta_bar=None, quad=None):
    """Adaptive estimate of the integral of ``f**2`` (``cor2`` grid recipe)."""
    _require_recipe(sip, "cor2")
    beta_bar = sip.beta_bar if beta_bar is None else beta_bar
    if not beta_bar > 0:
        raise ParameterError(f"beta_bar must be positive, got {beta_bar}")
    sel = estimate_s(sample, sip)
    est = functional_given_s(sample, sel.s_hat, beta_bar, quad)
    return PluginEstimate(est.value, est.s_hat, est.h, est.mode, sel.to_dict())
