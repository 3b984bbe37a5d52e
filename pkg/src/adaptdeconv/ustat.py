"""Martingale structure of degenerate U-statistics.

For a symmetric pair function ``H`` the statistic
``U_n = sum_{i<j} H(Y_i, Y_j)`` splits into martingale differences
``Z_i = v_n^-1 sum_{j<i} H(Y_i, Y_j)``.  This module computes the
decomposition, Monte Carlo estimates of the conditional variance ``V_n^2``
and of the Lyapunov-type quantity ``L_n``, the resulting Berry-Esseen type
bound, and Kolmogorov-Smirnov experiments on the normal approximation.
"""

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .errors import NumericalError, ParameterError
from .kernels import kernel_for_noise
from .model import sample_convolution
from .quadstat import f0_tail, quad_stat
from .replicate import run_replicates


@dataclass
class Decomposition:
    """Martingale decomposition of one U-statistic.

    ``V_n2`` and ``L_n`` are ``nan`` when no sampler for fresh draws was given.
    """

    u_n_value: float
    z: np.ndarray
    v_n2: float
    V_n2: float
    L_n: float
    delta: float
    identity_residual: float


def pair_matrix(y, H):
    """Matrix ``H(Y_i, Y_j)`` with the diagonal zeroed."""
    y = np.asarray(y, dtype=float)
    m = np.asarray(H(y[:, None], y[None, :]), dtype=float)
    np.fill_diagonal(m, 0.0)
    return m


def ustat_decompose(sample, H, v_n, delta=1.0, sampler=None, inner=200, rng=None):
    """Decompose ``U_n`` into martingale differences.

    Parameters
    ----------
    sample : array_like
        Observations ``Y_1..Y_n`` in filtration order.
    H : callable
        Symmetric, vectorized pair function ``H(x, y)``.
    v_n : float
        Normalizer; ``v_n**2`` should be the variance of ``U_n``.
    delta : float
        Moment exponent in ``(0, 1]``.
    sampler : callable, optional
        ``sampler(rng, size)`` drawing fresh observations.  Needed for the
        conditional moments, which are estimated by an inner Monte Carlo over
        fresh ``Y_i`` with the past held fixed.
    inner : int
        Inner Monte Carlo size.
    rng : numpy.random.Generator, optional

    Returns
    -------
    Decomposition
    """
    if not v_n > 0:
        raise ParameterError(f"v_n must be positive, got {v_n}")
    if not 0.0 < delta <= 1.0:
        raise ParameterError(f"delta must lie in (0, 1], got {delta}")
    y = np.asarray(getattr(sample, "y", sample), dtype=float)
    n = y.size
    if n < 2:
        raise ParameterError("need at least 2 observations")
    m = pair_matrix(y, H)
    lower = np.tril(m, -1)
    z = np.array([math.fsum(row) for row in lower[1:]]) / v_n
    u = math.fsum(m[np.triu_indices(n, 1)])
    recon = v_n * math.fsum(z)
    residual = abs(recon - u) / max(abs(u), np.finfo(float).tiny)
    if residual > 1e-12 and abs(recon - u) > 1e-12 * v_n:
        raise NumericalError(f"martingale identity violated: residual {residual:.3g}")

    V2 = L = float("nan")
    if sampler is not None:
        rng = rng if rng is not None else np.random.default_rng()
        fresh = np.asarray(sampler(rng, inner), dtype=float)
        # row i holds v_n^-1 sum_{j<i} H(y', Y_j) for every fresh draw y'
        hz = np.asarray(H(fresh[:, None], y[None, :-1]), dtype=float)
        cond = np.cumsum(hz, axis=1) / v_n
        V2 = float(np.sum(np.mean(cond ** 2, axis=0)))
        moment = float(np.sum(np.mean(np.abs(cond) ** (2.0 + 2.0 * delta), axis=0)))
        L = moment + abs(V2 - 1.0) ** (1.0 + delta)
    return Decomposition(u, z, float(v_n) ** 2, V2, L, float(delta), float(residual))


def berry_esseen_bound(L_n, eps, x, v_n, delta=1.0, C=1.0):
    """``16 eps^(1/2) exp(-x^2/(4 v_n^2)) + C eps^-(1+delta) L_n``.

    ``C`` stands for the unspecified constant depending on ``delta``; it
    defaults to 1 so only ratios of bounds are meaningful.
    """
    if not 0.0 < eps < 0.5:
        raise ParameterError(f"eps must lie in (0, 1/2), got {eps}")
    if not v_n > 0:
        raise ParameterError("v_n must be positive")
    return 16.0 * math.sqrt(eps) * math.exp(-x * x / (4.0 * v_n * v_n)) + C / eps ** (1.0 + delta) * L_n


@dataclass(frozen=True)
class UStatDesign:
    """A U-statistic experiment at one sample size.

    ``statistic(rng)`` draws a sample and returns the statistic; ``center`` is
    its known null mean, subtracted before standardization.
    """

    statistic: Callable
    center: float = 0.0
    label: str = ""


def simulate_design(design, reps, seed, threads=1):
    """``reps`` centered draws of the design's statistic."""
    vals = run_replicates(lambda rng, i: design.statistic(rng), seed, reps, threads)
    return np.asarray(vals, dtype=float) - design.center


def ks_to_normal(vals):
    """Kolmogorov-Smirnov distance of ``vals / sd(vals)`` to N(0, 1), and that sd."""
    sd = float(np.std(vals, ddof=1))
    return float(stats.kstest(np.asarray(vals) / sd, "norm").statistic), sd


def cdf_discrepancy_experiment(design_builder, n_list, reps, seed, threads=1):
    """Kolmogorov-Smirnov distance of the standardized statistic to N(0, 1).

    For each ``n`` the statistic is simulated ``reps`` times, centered by the
    design's known mean and divided by its replicate standard deviation.

    Returns
    -------
    list of dict
        Rows with keys ``n``, ``ks``, ``sd``, ``mean``, ``reps``.
    """
    if reps < 1000:
        raise ParameterError(f"reps must be at least 1000, got {reps}")
    ss = np.random.SeedSequence(seed)
    rows = []
    for n, child in zip(n_list, ss.spawn(len(n_list))):
        vals = simulate_design(design_builder(n), reps, child, threads)
        ks, sd = ks_to_normal(vals)
        rows.append({"n": int(n), "ks": ks, "sd": sd, "mean": float(np.mean(vals)), "reps": int(reps)})
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\r\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# ready-made designs


def product_design(n, sampler=None):
    """Fixed kernel ``H(x, y) = x y`` with standard normal data.

    ``U_n / v_n`` converges to ``(chi2_1 - 1)/sqrt(2)``, not to a normal law.
    """
    def stat(rng):
        y = rng.standard_normal(n) if sampler is None else sampler(rng, n)
        s = math.fsum(y)
        return 0.5 * (s * s - math.fsum(y * y))
    return UStatDesign(stat, 0.0, "product")


def quadstat_design(n, f0, g, h, quad=None):
    """Deconvolution quadratic statistic under the null at bandwidth ``h``.

    Its null mean is the tail energy of ``f0`` beyond ``1/h``.
    """
    kernel = kernel_for_noise(h, g)
    center = f0_tail(f0, kernel.support_cutoff, quad).value

    def stat(rng):
        return quad_stat(sample_convolution(f0, g, n, rng), kernel, f0, quad).value
    return UStatDesign(stat, center, f"quadstat(h={h:.4g})")
