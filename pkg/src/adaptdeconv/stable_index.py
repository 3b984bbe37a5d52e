"""Estimation of the self-similarity index of symmetric stable noise.

The modulus of the characteristic function of the observations lies, at
large frequencies, in the pipe ``[A u^-beta' exp(-u^s), exp(-u^s)]``.  On a
grid of candidate indices the estimator evaluates the empirical
characteristic function at one frequency ``u_n`` and picks the pipe whose
midpoint band contains its modulus.
"""

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import NTooSmall, OrderingError, ParameterError
from .fourier import _callable_cf, ecf
from .kernels import _check_n, _min_n_for

_RECIPES = ("prop1", "cor1", "cor2", "cor3")


@dataclass(frozen=True)
class StableIndexParams:
    """Tuning of the index estimator.

    Parameters
    ----------
    s_lo, s_hi : float
        Bounds of the candidate range, ``0 < s_lo < s_hi <= 2``.
    beta_prime, A : float
        Polynomial lower bound ``|phi_f(u)| >= A |u|^-beta_prime`` of the
        signal transform.
    a : float, optional
        Exponent in the frequency ``u_n``.  Defaults to 1.5, or to
        ``s_hi/s_lo + 0.5`` for the ``cor1`` and ``cor2`` recipes, which need
        ``a > s_hi/s_lo``.
    d_recipe : {"prop1", "cor1", "cor2", "cor3"}
        Grid-step recipe.
    beta_bar : float, optional
        Upper smoothness bound used by the ``cor*`` recipes.
    """

    s_lo: float
    s_hi: float
    beta_prime: float
    A: float
    a: Optional[float] = None
    d_recipe: str = "prop1"
    beta_bar: Optional[float] = None

    def __post_init__(self):
        if not 0.0 < self.s_lo < self.s_hi <= 2.0:
            raise ParameterError(f"need 0 < s_lo < s_hi <= 2, got ({self.s_lo}, {self.s_hi})")
        if not self.A > 0:
            raise ParameterError("A must be positive")
        if self.beta_prime < 0:
            raise ParameterError("beta_prime must be nonnegative")
        if self.d_recipe not in _RECIPES:
            raise ParameterError(f"d_recipe must be one of {_RECIPES}, got {self.d_recipe!r}")
        if self.d_recipe != "prop1" and self.beta_bar is None:
            raise ParameterError(f"recipe {self.d_recipe} needs beta_bar")
        if self.a is None:
            default = self.s_hi / self.s_lo + 0.5 if self.d_recipe in ("cor1", "cor2") else 1.5
            object.__setattr__(self, "a", default)
        if not self.a > 1:
            raise ParameterError(f"a must exceed 1, got {self.a}")
        if self.d_recipe in ("cor1", "cor2") and not self.a > self.s_hi / self.s_lo:
            raise ParameterError(f"recipe {self.d_recipe} needs a > s_hi/s_lo = {self.s_hi / self.s_lo:.4g}")

    def to_dict(self):
        return asdict(self)


def _u_bracket(n, sip):
    ll = math.log(math.log(n))
    return 0.5 * math.log(n) - (2.0 * sip.beta_prime + sip.a * sip.s_hi) / (2.0 * sip.s_hi) * ll


def frequency_u_n(n, sip):
    """Evaluation frequency ``(log n/2 - (2 beta' + a s_hi)/(2 s_hi) log log n)^(1/s_hi)``."""
    _check_n(n)
    bracket = _u_bracket(n, sip)
    if bracket <= 0:
        min_n = _min_n_for(lambda m: _u_bracket(m, sip))
        raise NTooSmall(f"frequency bracket {bracket:.4g} <= 0 at n={n}; need n >= {min_n}", min_n=min_n)
    return bracket ** (1.0 / sip.s_hi)


def grid_step(n, sip):
    """Nominal grid step ``d_n`` of the selected recipe."""
    _check_n(n)
    logn = math.log(n)
    base = sip.s_hi / (logn * math.log(logn))
    if sip.d_recipe == "prop1":
        return base
    power = {"cor1": (sip.beta_bar - 0.5) / sip.s_lo,
             "cor2": 2.0 * sip.beta_bar / sip.s_lo,
             "cor3": sip.beta_bar / sip.s_lo}[sip.d_recipe]
    return min(logn ** (-power), base)


def build_s_grid(n, sip):
    """Equispaced grid from ``s_lo`` to ``s_hi`` with step at most ``d_n``."""
    d = grid_step(n, sip)
    intervals = max(1, math.ceil((sip.s_hi - sip.s_lo) / d - 1e-12))
    grid = np.linspace(sip.s_lo, sip.s_hi, intervals + 1)
    grid[0], grid[-1] = sip.s_lo, sip.s_hi
    return grid


def pipe_midpoints(u, grid, beta_prime, A):
    """``(q Phi[k] + Phi[k+1]) / 2`` at ``u`` for consecutive grid points."""
    grid = np.asarray(grid, dtype=float)
    phi = np.exp(-np.abs(u) ** grid)
    q = A * abs(u) ** (-beta_prime)
    return 0.5 * (q * phi[:-1] + phi[1:])


def pipes_ordered(u, grid, beta_prime, A):
    """Whether ``Phi[1] >= q Phi[1] >= Phi[2] >= ... >= q Phi[N]`` holds at ``u``."""
    grid = np.asarray(grid, dtype=float)
    phi = np.exp(-abs(u) ** grid)
    q = A * abs(u) ** (-beta_prime)
    if q > 1.0:
        return False
    return bool(np.all(q * phi[:-1] >= phi[1:]))


def classify_pipe(ecf_mod, u, grid, beta_prime, A):
    """Index (0-based) of the pipe selected for the modulus ``ecf_mod`` at ``u``.

    Returns the number of midpoints strictly above ``ecf_mod``: 0 is the top
    branch (``s_lo``), ``len(grid) - 1`` the bottom branch (``s_hi``).

    Raises
    ------
    OrderingError
        When the midpoints are not strictly decreasing at ``u``, in which case
        the bands are not well defined.
    """
    if not u > 0:
        raise ParameterError(f"u must be positive, got {u}")
    if not 0.0 <= ecf_mod <= 1.0 + 1e-12:
        raise ParameterError(f"ecf_mod must lie in [0, 1], got {ecf_mod}")
    mids = pipe_midpoints(u, grid, beta_prime, A)
    if np.any(np.diff(mids) >= 0):
        raise OrderingError(f"pipe midpoints are not decreasing at u={u:.4g}; the frequency is too low")
    return int(np.sum(mids > ecf_mod))


def grid_oracle_index(s, grid):
    """Index of the grid point ``s_k`` with ``s_k <= s < s_{k+1}`` (the last point for ``s = s_hi``)."""
    grid = np.asarray(grid, dtype=float)
    if s < grid[0] or s > grid[-1]:
        raise ParameterError(f"s={s} lies outside the grid range [{grid[0]}, {grid[-1]}]")
    return int(min(np.searchsorted(grid, s, side="right") - 1, grid.size - 1))


@dataclass
class SIndexResult:
    """Selected index and every intermediate quantity."""

    s_hat: float
    index: int
    u_n: float
    d_n: float
    grid: list
    ecf_mod: float
    branch: str
    recipe: str
    pipes_ordered: bool
    remark_condition: bool
    n: int
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _select(mod, n, sip, u, grid):
    u_n = frequency_u_n(n, sip) if u is None else float(u)
    grid = build_s_grid(n, sip) if grid is None else np.asarray(grid, dtype=float)
    d = float(grid[1] - grid[0]) if grid.size > 1 else 0.0
    remark = d * u_n ** sip.s_hi * math.log(u_n) <= 1.0
    if not remark:
        warnings.warn(f"grid step {d:.4g} violates d u^s log u <= 1 at u={u_n:.4g}", RuntimeWarning, stacklevel=3)
    k = classify_pipe(min(mod, 1.0), u_n, grid, sip.beta_prime, sip.A)
    branch = "top" if k == 0 else "bottom" if k == grid.size - 1 else "interior"
    return SIndexResult(float(grid[k]), k, u_n, d, grid.tolist(), float(mod), branch, sip.d_recipe,
                        pipes_ordered(u_n, grid, sip.beta_prime, sip.A), bool(remark), int(n))


def estimate_s(sample, sip, u=None, grid=None):
    """Estimate the stable index from a sample.

    Parameters
    ----------
    sample : Sample or array_like
    sip : StableIndexParams
    u, grid : optional
        Override the frequency ``u_n`` and the candidate grid.

    Returns
    -------
    SIndexResult
    """
    y = np.asarray(getattr(sample, "y", sample), dtype=float)
    n = y.size
    u_n = frequency_u_n(n, sip) if u is None else float(u)
    return _select(abs(ecf(y, u_n)), n, sip, u_n, grid)


def estimate_s_oracle(cf_p, n, sip, u=None, grid=None):
    """Same selection as ``estimate_s`` with the exact modulus ``|cf_p(u_n)|``."""
    f = _callable_cf(cf_p)
    u_n = frequency_u_n(n, sip) if u is None else float(u)
    return _select(abs(complex(f(u_n))), n, sip, u_n, grid)
