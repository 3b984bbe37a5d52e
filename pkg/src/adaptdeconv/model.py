"""Convolution model ``Y = X + eps``: smoothness classes, densities, noises, samplers.

Signal densities come from a small catalog with closed-form characteristic
functions, so every downstream statistic has an exact Fourier-side target.
Noise is either polynomially smooth (a Laplace-type family with free decay
exponent) or symmetric stable with characteristic function ``exp(-|u|^s)``.

All objects are immutable. Samplers take an explicit ``numpy.random.Generator``.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special, stats

from .errors import DivergenceError, ParameterError
from .fourier import DEFAULT_QUAD, QuadratureSpec, quadrature_weights


@dataclass(frozen=True)
class SmoothnessClass:
    """Parameters ``(alpha, r, beta)`` and radius ``L`` of a smoothness ball.

    A density belongs to the ball when
    ``(1/2pi) * int |Phi(u)|^2 |u|^(2 beta) exp(2 alpha |u|^r) du <= L``.
    ``r = 0`` is the Sobolev case, where ``alpha`` only rescales ``L`` and the
    conventional value is ``alpha = 0``.
    """

    alpha: float
    r: float
    beta: float
    L: float

    def __post_init__(self):
        if not 0.0 <= self.r <= 2.0:
            raise ParameterError(f"r must lie in [0, 2], got {self.r}")
        if self.beta < 0:
            raise ParameterError(f"beta must be nonnegative, got {self.beta}")
        if not self.L > 0:
            raise ParameterError(f"L must be positive, got {self.L}")
        if self.alpha < 0 or (self.r > 0 and self.alpha <= 0):
            raise ParameterError(f"alpha must be positive when r > 0 (got alpha={self.alpha}, r={self.r})")
        if not (self.r > 0 or self.beta > 0):
            raise ParameterError("either r > 0 or beta > 0 is required")

    @property
    def tau(self):
        return (self.alpha, self.r, self.beta)

    def weight(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        return u ** (2.0 * self.beta) * np.exp(2.0 * self.alpha * u ** self.r)


# --------------------------------------------------------------------------
# noise


class NoiseSpec:
    """Base class for noise laws; subclasses provide ``cf`` and ``sample``."""

    symmetric = True

    def cf(self, u):
        raise NotImplementedError

    def sample(self, n, rng):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class PolynomialNoise(NoiseSpec):
    """Noise with ``cf(u) = (1 + gamma^2 u^2)^(-sigma/2)``.

    ``|cf(u)| ~ c_g |u|^(-sigma)`` with ``c_g = gamma^(-sigma)``.  ``sigma = 2``
    is the Laplace law with scale ``gamma``.  Draws use the normal
    variance-mixture representation ``sqrt(V) Z`` with
    ``V ~ Gamma(sigma/2, scale=2 gamma^2)``.
    """

    sigma: float
    gamma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 1:
            raise ParameterError(f"polynomial noise needs sigma > 1, got {self.sigma}")
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")

    @property
    def c_g(self):
        return self.gamma ** (-self.sigma)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return (1.0 + (self.gamma * u) ** 2) ** (-0.5 * self.sigma)

    def sample(self, n, rng):
        v = rng.gamma(0.5 * self.sigma, 2.0 * self.gamma ** 2, size=n)
        return np.sqrt(v) * rng.standard_normal(n)

    def to_dict(self):
        return {"kind": "polynomial", "sigma": self.sigma, "gamma": self.gamma}


@dataclass(frozen=True)
class StableNoise(NoiseSpec):
    """Symmetric stable noise with ``cf(u) = exp(-|u|^s)``, ``0 < s <= 2``."""

    s: float

    def __post_init__(self):
        if not 0.0 < self.s <= 2.0:
            raise ParameterError(f"stable index s must lie in (0, 2], got {self.s}")

    def cf(self, u):
        return np.exp(-np.abs(np.asarray(u, dtype=float)) ** self.s)

    def sample(self, n, rng):
        return sample_stable(self.s, n, rng)

    def to_dict(self):
        return {"kind": "stable", "s": self.s}


def sample_stable(s, n, rng):
    """Symmetric stable draws with characteristic function ``exp(-|u|^s)``.

    Chambers-Mallows-Stuck construction with ``V ~ U(-pi/2, pi/2)`` and
    ``W ~ Exp(1)``; the Cauchy case ``s = 1`` reduces to ``tan(V)`` and is
    handled on its own branch because the general formula is singular there.
    """
    if not 0.0 < s <= 2.0:
        raise ParameterError(f"stable index s must lie in (0, 2], got {s}")
    v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size=n)
    w = rng.standard_exponential(size=n)
    if s == 1.0:
        return np.tan(v)
    return (np.sin(s * v) / np.cos(v) ** (1.0 / s)) * (np.cos((1.0 - s) * v) / w) ** ((1.0 - s) / s)


def noise_from_dict(d):
    kind = d.get("kind")
    if kind == "polynomial":
        return PolynomialNoise(float(d["sigma"]), float(d.get("gamma", 1.0)))
    if kind == "stable":
        return StableNoise(float(d["s"]))
    raise ParameterError(f"unknown noise kind {kind!r}")


# --------------------------------------------------------------------------
# densities


class DensitySpec:
    """Catalog density with closed-form pdf and characteristic function.

    Attributes
    ----------
    name : str
    smoothness : SmoothnessClass or None
        A ball the density provably belongs to.
    A, beta_prime : float or None
        Lower-bound constants ``|cf(u)| >= A |u|^(-beta_prime)``, valid for
        ``|u| >= A_cutoff``.
    """

    name = "density"
    A = None
    beta_prime = None
    A_cutoff = None

    def pdf(self, x):
        raise NotImplementedError

    def cf(self, u):
        raise NotImplementedError

    def sample(self, n, rng):
        raise NotImplementedError

    def tail_bound(self, u):
        """Upper bound on ``(1/2pi) int_{|v|>u} |cf(v)|^2 dv``."""
        return None

    @property
    def smoothness(self):
        return None

    def lower_bound(self, u):
        if self.A is None:
            raise ParameterError(f"{self.name} carries no lower bound constants")
        return self.A * np.abs(np.asarray(u, dtype=float)) ** (-self.beta_prime)

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(DensitySpec):
    mean: float = 0.0
    sd: float = 1.0
    name: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if not self.sd > 0:
            raise ParameterError("sd must be positive")

    def pdf(self, x):
        return stats.norm.pdf(x, self.mean, self.sd)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * self.mean * u - 0.5 * (self.sd * u) ** 2)

    def sample(self, n, rng):
        return self.mean + self.sd * rng.standard_normal(n)

    def tail_bound(self, u):
        return special.erfc(self.sd * u) / (2.0 * self.sd * math.sqrt(math.pi))

    @property
    def smoothness(self):
        return SmoothnessClass(alpha=self.sd ** 2 / 4.0, r=2.0, beta=0.0,
                               L=1.0 / (self.sd * math.sqrt(2.0 * math.pi)))

    def to_dict(self):
        return {"kind": "gaussian", "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class Cauchy(DensitySpec):
    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="cauchy", init=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError("scale must be positive")

    def pdf(self, x):
        return stats.cauchy.pdf(x, self.loc, self.scale)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * self.loc * u - self.scale * np.abs(u))

    def sample(self, n, rng):
        return self.loc + self.scale * rng.standard_cauchy(n)

    def tail_bound(self, u):
        return math.exp(-2.0 * self.scale * u) / (2.0 * math.pi * self.scale)

    @property
    def smoothness(self):
        return SmoothnessClass(alpha=self.scale / 2.0, r=1.0, beta=0.0, L=1.0 / (math.pi * self.scale))

    def to_dict(self):
        return {"kind": "cauchy", "loc": self.loc, "scale": self.scale}


@dataclass(frozen=True)
class Laplace(DensitySpec):
    """Laplace law, ``cf(u) = exp(i loc u) / (1 + b^2 u^2)``.

    Sobolev with ``beta = 1`` and ``L = 1/(4 b^3)``.  Satisfies the
    polynomial lower bound with ``beta_prime = 2``, ``A = 1/(2 b^2)`` for
    ``|u| >= 1/b``.
    """

    loc: float = 0.0
    scale: float = 1.0
    name: str = field(default="laplace", init=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError("scale must be positive")

    @property
    def A(self):
        return 0.5 / self.scale ** 2

    @property
    def beta_prime(self):
        return 2.0

    @property
    def A_cutoff(self):
        return 1.0 / self.scale

    def pdf(self, x):
        return stats.laplace.pdf(x, self.loc, self.scale)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        return np.exp(1j * self.loc * u) / (1.0 + (self.scale * u) ** 2)

    def sample(self, n, rng):
        return rng.laplace(self.loc, self.scale, size=n)

    def tail_bound(self, u):
        return 1.0 / (3.0 * math.pi * self.scale ** 4 * u ** 3)

    @property
    def smoothness(self):
        return SmoothnessClass(alpha=0.0, r=0.0, beta=1.0, L=0.25 / self.scale ** 3)

    def to_dict(self):
        return {"kind": "laplace", "loc": self.loc, "scale": self.scale}


@dataclass(frozen=True)
class SymmetrizedGamma(DensitySpec):
    """``X = S G`` with a random sign ``S`` and ``G ~ Gamma(shape, scale)``.

    ``cf(u) = (1 + scale^2 u^2)^(-shape/2) cos(shape * atan(scale u))``; Sobolev
    with ``beta = shape/2`` for ``shape > 1``.
    """

    shape: float = 2.0
    scale: float = 1.0
    name: str = field(default="symgamma", init=False)

    def __post_init__(self):
        if not self.shape > 1 or not self.scale > 0:
            raise ParameterError("symmetrized Gamma needs shape > 1 and scale > 0")

    def pdf(self, x):
        return 0.5 * stats.gamma.pdf(np.abs(x), self.shape, scale=self.scale)

    def cf(self, u):
        u = np.asarray(u, dtype=float)
        t = self.scale * u
        return (1.0 + t * t) ** (-0.5 * self.shape) * np.cos(self.shape * np.arctan(t)) + 0j

    def sample(self, n, rng):
        return rng.choice([-1.0, 1.0], size=n) * rng.gamma(self.shape, self.scale, size=n)

    def tail_bound(self, u):
        k = self.shape
        return (self.scale * u) ** (1.0 - 2.0 * k) / (math.pi * self.scale * (2.0 * k - 1.0))

    @property
    def smoothness(self):
        beta = 0.5 * self.shape
        proto = SmoothnessClass(0.0, 0.0, beta, 1.0)
        return SmoothnessClass(0.0, 0.0, beta, class_membership_integral(self, proto, QuadratureSpec(400.0, 2 ** 16)))

    def to_dict(self):
        return {"kind": "symgamma", "shape": self.shape, "scale": self.scale}


@dataclass(frozen=True)
class PointMass(DensitySpec):
    """Degenerate law at ``loc`` (testing hook: then ``Y`` is pure noise)."""

    loc: float = 0.0
    name: str = field(default="pointmass", init=False)

    def pdf(self, x):
        raise ParameterError("a point mass has no density")

    def cf(self, u):
        return np.exp(1j * self.loc * np.asarray(u, dtype=float))

    def sample(self, n, rng):
        return np.full(n, float(self.loc))

    def to_dict(self):
        return {"kind": "pointmass", "loc": self.loc}


@dataclass(frozen=True)
class Mixture(DensitySpec):
    """Finite mixture of catalog densities (alternatives for power studies).

    Its smoothness ball is that of the roughest component, with the radius
    computed by quadrature. The lower-bound constants are inherited from the
    first component scaled by its weight when every other component has a
    faster-decaying transform; they are left unset otherwise.
    """

    components: tuple
    weights: tuple
    name: str = field(default="mixture", init=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.components) != w.size or w.size == 0:
            raise ParameterError("components and weights must have equal nonzero length")
        if np.any(w < 0) or not math.isclose(w.sum(), 1.0, rel_tol=1e-12):
            raise ParameterError("mixture weights must be nonnegative and sum to one")

    def pdf(self, x):
        return sum(w * c.pdf(x) for c, w in zip(self.components, self.weights))

    def cf(self, u):
        return sum(w * c.cf(u) for c, w in zip(self.components, self.weights))

    def sample(self, n, rng):
        labels = rng.choice(len(self.components), size=n, p=np.asarray(self.weights, dtype=float))
        out = np.empty(n)
        for i, comp in enumerate(self.components):
            mask = labels == i
            out[mask] = comp.sample(int(mask.sum()), rng)
        return out

    def tail_bound(self, u):
        bounds = [c.tail_bound(u) for c in self.components]
        if any(b is None for b in bounds):
            return None
        # |sum w_i cf_i|^2 <= sum w_i |cf_i|^2 by convexity
        return float(sum(w * b for w, b in zip(self.weights, bounds)))

    @property
    def smoothness(self):
        classes = [c.smoothness for c in self.components]
        if any(c is None for c in classes):
            return None
        rough = min(classes, key=lambda c: (c.r, c.beta if c.r == 0 else c.alpha))
        proto = SmoothnessClass(rough.alpha, rough.r, rough.beta, 1.0)
        u_max = 400.0 if rough.r == 0 else 50.0
        return SmoothnessClass(rough.alpha, rough.r, rough.beta,
                               class_membership_integral(self, proto, QuadratureSpec(u_max, 2 ** 16)))

    def to_dict(self):
        return {"kind": "mixture", "weights": list(self.weights),
                "components": [c.to_dict() for c in self.components]}


_DENSITY_KINDS = {
    "gaussian": lambda d: Gaussian(float(d.get("mean", 0.0)), float(d.get("sd", 1.0))),
    "cauchy": lambda d: Cauchy(float(d.get("loc", 0.0)), float(d.get("scale", 1.0))),
    "laplace": lambda d: Laplace(float(d.get("loc", 0.0)), float(d.get("scale", 1.0))),
    "symgamma": lambda d: SymmetrizedGamma(float(d.get("shape", 2.0)), float(d.get("scale", 1.0))),
    "pointmass": lambda d: PointMass(float(d.get("loc", 0.0))),
    "mixture": lambda d: Mixture(tuple(density_from_dict(c) for c in d["components"]),
                                 tuple(float(w) for w in d["weights"])),
}


def density_from_dict(d):
    """Build a catalog density from ``{"kind": ..., **params}``.

    A bare string is accepted for the default member of a family.
    """
    if isinstance(d, str):
        d = {"kind": d}
    try:
        build = _DENSITY_KINDS[d["kind"]]
    except KeyError:
        raise ParameterError(f"unknown density {d.get('kind')!r}; known: {sorted(_DENSITY_KINDS)}") from None
    return build(d)


# --------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class Sample:
    """Observations ``Y_1..Y_n`` plus provenance metadata."""

    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        y = np.array(self.y, dtype=float).ravel()
        y.flags.writeable = False
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.y.size

    def permuted(self, rng):
        return Sample(rng.permutation(self.y), dict(self.meta))


def sample_convolution(f, g, n, rng, meta=None):
    """Draw ``Y_j = X_j + eps_j`` with ``X ~ f`` and ``eps ~ g`` independent."""
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    x = f.sample(n, rng)
    eps = g.sample(n, rng)
    info = {"n": int(n), "f": f.to_dict(), "noise": g.to_dict()}
    info.update(meta or {})
    return Sample(x + eps, info)


def save_sample(sample, path):
    """Write one observation per line; metadata goes to ``<path>.meta.json``."""
    path = Path(path)
    np.savetxt(path, sample.y, fmt="%.17g")
    meta = dict(sample.meta)
    meta.setdefault("n", sample.n)
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def load_sample(path):
    path = Path(path)
    y = np.loadtxt(path, dtype=float, ndmin=1)
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return Sample(y, meta)


# --------------------------------------------------------------------------
# class membership


def class_membership_integral(f, c, quad=None):
    """Smoothness functional ``(1/2pi) int |cf|^2 |u|^(2 beta) exp(2 alpha |u|^r) du``.

    The integral is computed on ``[-u_max, u_max]`` and the part beyond
    ``u_max`` is added from a power-law fit ``v(u) ~ v(U) (u/U)^(-p)`` to the
    last octave of the integrand, i.e. ``v(U) U / (p - 1)``; for
    exponentially decaying integrands this correction is negligible.  The
    caller compares the result with ``c.L``.

    Raises
    ------
    DivergenceError
        When the integrand is not decaying at the truncation edge
        (fitted exponent ``p <= 1``): the ball is empty for ``f``.
    """
    quad = quad or DEFAULT_QUAD
    m = quad.m_points
    u = np.linspace(0.0, quad.u_max, m + 1)
    w = quadrature_weights(m, quad.u_max / m, quad.rule)
    with np.errstate(over="ignore", invalid="ignore"):
        mod2 = np.abs(f.cf(u)) ** 2 + np.abs(f.cf(-u)) ** 2
        # an underflowed cf contributes nothing even where the weight overflows
        vals = np.where(mod2 > 0.0, mod2 * c.weight(u), 0.0)
    if not np.all(np.isfinite(vals)):
        raise DivergenceError("smoothness integrand overflows on the quadrature range")
    body = float(np.sum(w * vals))
    edge, mid = float(vals[-1]), float(vals[m // 2])
    if edge == 0.0:
        return body / (2.0 * np.pi)
    if mid <= 0.0 or edge >= mid:
        raise DivergenceError(f"integrand is not decaying at u_max={quad.u_max}")
    p = math.log(mid / edge) / math.log(2.0)
    if p <= 1.05:
        raise DivergenceError(f"integrand decays like |u|^-{p:.3f} at u_max={quad.u_max}; the integral diverges")
    tail = edge * quad.u_max / (p - 1.0)
    return (body + tail) / (2.0 * np.pi)
