"""Adaptive goodness-of-fit tests.

The test rejects when the largest normalized statistic ``|T_i| / t_i^2``
over a grid of smoothness classes exceeds a constant ``C*``, calibrated by
Monte Carlo under the null.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NTooSmall, ParameterError
from .fourier import _observations
from .kernels import (GridPoint, bandwidth_semiparam, bandwidth_threshold_thm1, bandwidth_threshold_thm2_supersmooth,
                      kernel_poly, kernel_stable, supersmooth_c_default, threshold_semiparam)
from .model import sample_convolution
from .quadstat import quad_stat
from .replicate import run_replicates
from .stable_index import StableIndexParams, estimate_s


@dataclass(frozen=True)
class GridBounds:
    """Bounds of the smoothness classes covered by the adaptive test."""

    alpha_lo: float
    alpha_hi: float
    r_lo: float
    r_hi: float
    beta_lo: float
    beta_hi: float

    def __post_init__(self):
        if not (0 <= self.alpha_lo <= self.alpha_hi and 0 <= self.r_lo <= self.r_hi
                and 0 <= self.beta_lo <= self.beta_hi):
            raise ParameterError(f"bounds must be nonnegative and ordered, got {self}")


@dataclass(frozen=True)
class AdaptiveGrid:
    points: tuple
    regime: str
    counts: tuple
    n: int
    sigma: float


@dataclass
class TestOutcome:
    """Decision of an adaptive test.

    ``per_point`` lists ``(tau, T, t2)`` for every grid point; ``trigger_index``
    is the grid index attaining the maximum ratio when the test rejects.
    """

    reject: bool
    max_ratio: float
    trigger_index: Optional[int]
    per_point: list
    c_star: float
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def rows(self):
        """One dict per grid point, suitable for CSV output."""
        out = []
        for i, (tau, t, t2) in enumerate(self.per_point):
            row = {"index": i}
            row.update({k: v for k, v in zip(("alpha", "r", "beta"), tau)} if len(tau) == 3 else {"s_hat": tau[0]})
            row.update({"T": t, "t2": t2, "ratio": abs(t) / t2})
            out.append(row)
        return out

    def to_csv(self):
        rows = self.rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()

    def summary(self):
        return {"reject": self.reject, "max_ratio": self.max_ratio, "trigger_index": self.trigger_index,
                "c_star": self.c_star, **self.extra}

    def to_json(self, **kwargs):
        return json.dumps(self.summary(), **kwargs)


def build_grid(regime, n, bounds, sigma, c=None):
    """Grid of smoothness classes with their bandwidths and thresholds.

    ``thm1``: ``ceil(log n)`` Sobolev points from ``beta_lo`` to ``beta_hi``
    plus one point ``(alpha_lo, r_hi, 0)`` for supersmooth alternatives.
    ``thm2``: the same Sobolev points plus ``ceil(log log n/(r_hi - r_lo))``
    supersmooth points from ``r_lo`` to ``r_hi``; ``c`` defaults to
    ``0.9 alpha_lo exp(-1/r_lo)``.
    """
    if regime not in ("thm1", "thm2"):
        raise ParameterError(f"regime must be 'thm1' or 'thm2', got {regime!r}")
    if n < 16:
        raise NTooSmall(f"n={n} is below 16", min_n=16)
    n_beta = math.ceil(math.log(n))
    betas = [bounds.beta_lo] if bounds.beta_lo == bounds.beta_hi else np.linspace(bounds.beta_lo, bounds.beta_hi,
                                                                                   n_beta)
    points = [GridPoint((0.0, 0.0, float(b)), *bandwidth_threshold_thm1(n, b, sigma)) for b in betas]
    if regime == "thm1":
        h, t2 = bandwidth_threshold_thm1(n, bounds.beta_hi, sigma, last=True)
        points.append(GridPoint((bounds.alpha_lo, bounds.r_hi, 0.0), h, t2))
        return AdaptiveGrid(tuple(points), regime, (len(betas),), n, sigma)
    if not bounds.r_lo > 0:
        raise ParameterError("thm2 needs r_lo > 0")
    if bounds.r_hi == bounds.r_lo:
        raise ParameterError("thm2 needs r_hi > r_lo")
    c = supersmooth_c_default(bounds.alpha_lo, bounds.r_lo) if c is None else c
    n_r = math.ceil(math.log(math.log(n)) / (bounds.r_hi - bounds.r_lo))
    for r in np.linspace(bounds.r_lo, bounds.r_hi, n_r):
        h, t2 = bandwidth_threshold_thm2_supersmooth(n, r, sigma, c, bounds.alpha_lo, bounds.r_lo)
        # the supersmooth points carry (alpha_hi, r, 0); beta0 never enters the recipes
        points.append(GridPoint((bounds.alpha_hi, float(r), 0.0), h, t2))
    return AdaptiveGrid(tuple(points), regime, (len(betas), n_r), n, sigma)


def _decide(stats, c_star, extra=None):
    ratios = [abs(t) / t2 for _, t, t2 in stats]
    i = int(np.argmax(ratios))
    reject = bool(ratios[i] > c_star)
    return TestOutcome(reject, float(ratios[i]), i if reject else None, stats, float(c_star), extra or {})


def run_test_poly(sample, grid, c_star, f0, g, quad=None):
    """Adaptive test under polynomial noise: reject iff ``max_i |T_i|/t_i^2 > c_star``."""
    stats = []
    for p in grid.points:
        t = quad_stat(sample, kernel_poly(p.h, g), f0, quad).value
        stats.append((p.tau, t, p.t2))
    return _decide(stats, c_star)


def run_test_stable(sample, f0, sip, beta_bar=None, c_star=1.0, quad=None, s_hat=None):
    """Goodness-of-fit test under stable noise of unknown index.

    The index is estimated with the ``cor3`` grid recipe unless ``s_hat`` is
    given; bandwidth and threshold are then built from it.
    """
    if sip.d_recipe != "cor3":
        raise ParameterError(f"the stable-noise test uses the cor3 grid recipe, got {sip.d_recipe}")
    beta_bar = sip.beta_bar if beta_bar is None else beta_bar
    y = _observations(sample)
    n = y.size
    extra = {}
    if s_hat is None:
        sel = estimate_s(y, sip)
        s_hat = sel.s_hat
        extra["s_index"] = sel.to_dict()
    h = bandwidth_semiparam(n, s_hat, beta_bar, "test")
    t2 = threshold_semiparam(n, s_hat, beta_bar)
    t = quad_stat(y, kernel_stable(h, s_hat), f0, quad).value
    extra.update({"s_hat": float(s_hat), "h": float(h)})
    return _decide([((float(s_hat),), t, t2)], c_star, extra)


def null_max_ratios(f0, g, n, grid, reps, seed, quad=None, threads=1):
    """Pool of ``max_i |T_i|/t_i^2`` over ``reps`` samples drawn under the null.

    ``grid`` is an ``AdaptiveGrid`` for polynomial noise or a
    ``StableIndexParams`` (``cor3`` recipe) for stable noise.
    """
    if isinstance(grid, StableIndexParams):
        def one(rng, i):
            return run_test_stable(sample_convolution(f0, g, n, rng), f0, grid, quad=quad).max_ratio
    else:
        def one(rng, i):
            return run_test_poly(sample_convolution(f0, g, n, rng), grid, 0.0, f0, g, quad).max_ratio
    return np.array(run_replicates(one, seed, reps, threads))


def _ladder(pool, n_points=64):
    centre = float(np.median(pool))
    if not centre > 0:
        centre = float(np.max(pool)) or 1.0
    return centre * np.geomspace(0.1, 100.0, n_points)


def cstar_from_pool(pool, eps):
    """Smallest ``C*`` whose empirical exceedance frequency in ``pool`` is at most ``eps/2``.

    With at least 2000 values the exact order statistic is used; otherwise
    the smallest point of a 64-point geometric ladder around the pool median.
    """
    pool = np.asarray(pool, dtype=float)
    if eps >= 1.0:
        return 0.0
    target = eps / 2.0
    if pool.size >= 2000:
        k = math.ceil(pool.size * (1.0 - target))
        return float(np.sort(pool)[k - 1])
    ladder = _ladder(pool)
    freq = np.array([np.mean(pool > c) for c in ladder])
    ok = np.nonzero(freq <= target)[0]
    return float(ladder[ok[0]]) if ok.size else float(np.max(pool))


def calibrate_cstar(f0, g, n, grid, eps, reps, seed, quad=None, threads=1, return_pool=False):
    """Monte Carlo calibration of ``C*`` for level ``eps``.

    Parameters
    ----------
    f0 : DensitySpec
        Null density.
    g : NoiseSpec
        Noise law.
    n : int
        Sample size.
    grid : AdaptiveGrid or StableIndexParams
        Test configuration.
    eps : float
        Total error budget; the first-kind error is held at ``eps/2``.
    reps : int
        Null replications, at least 500 and with ``reps * eps/2 >= 5``.
    seed : int, SeedSequence or Generator
    """
    if not 0.0 < eps <= 1.0:
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    if eps == 1.0:
        return (0.0, np.array([])) if return_pool else 0.0
    if reps < 500 or reps * eps / 2.0 < 5:
        raise ParameterError(f"reps={reps} is too small for the {1 - eps / 2:.4g} quantile (need >= 500 "
                             f"and reps*eps/2 >= 5)")
    pool = null_max_ratios(f0, g, n, grid, reps, seed, quad, threads)
    c = cstar_from_pool(pool, eps)
    return (c, pool) if return_pool else c
