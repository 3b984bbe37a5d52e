"""Reproducible Monte Carlo experiments.

An experiment is described by a YAML document (or the equivalent dict)
and writes ``results.csv`` with one row per replicate plus ``summary.json``
with per-n aggregates and every derived constant.  Replicate ``i`` of each
sample size always uses random sub-stream ``i``, so outputs do not depend on
the number of threads.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np
import yaml
from scipy import integrate, stats

from .adaptive import GridBounds, build_grid, calibrate_cstar, run_test_poly, run_test_stable
from .errors import DeconvError, ParameterError
from .fourier import QuadratureSpec
from .model import StableNoise, density_from_dict, noise_from_dict, sample_convolution
from .replicate import run_replicates
from .semiparam import estimate_density_at, estimate_quadratic_functional
from .stable_index import StableIndexParams, build_s_grid, estimate_s, frequency_u_n, grid_oracle_index
from .ustat import ks_to_normal, product_design, quadstat_design, simulate_design

SCENARIOS = ("level", "power", "risk_density", "risk_functional", "s_index", "clt")


class ConfigError(ParameterError):
    """A configuration field is missing or invalid; ``field`` names it."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ExperimentConfig:
    """Validated experiment description.

    ``f`` is the density that generates data (defaults to ``f0``), ``noise``
    a noise dict such as ``{"kind": "polynomial", "sigma": 2}``.  ``recipe``
    selects the polynomial-noise grid (``thm1`` or ``thm2``).  ``sindex``
    holds ``StableIndexParams`` fields for the stable-noise scenarios, and
    ``clt`` the design of the ``clt`` scenario.
    """

    scenario: str
    noise: dict
    n_list: list
    f0: object = "laplace"
    f: object = None
    reps: int = 200
    eps: float = 0.1
    seed: int = 0
    threads: int = 1
    quadrature: dict = field(default_factory=dict)
    recipe: str = "thm1"
    bounds: dict = field(default_factory=lambda: {"alpha_lo": 0.25, "alpha_hi": 1.0, "r_lo": 1.0, "r_hi": 2.0,
                                                  "beta_lo": 0.5, "beta_hi": 1.0})
    calib_reps: int = 500
    c_star: Optional[float] = None
    sindex: dict = field(default_factory=dict)
    x: float = 0.0
    clt: dict = field(default_factory=lambda: {"design": "quadstat", "h_scale": 2.0, "h_power": 0.5})

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("<root>", "configuration must be a mapping")
        known = {f.name for f in fields(cls)}
        for key in d:
            if key not in known:
                raise ConfigError(key, "unknown field")
        for key in ("scenario", "noise", "n_list"):
            if key not in d:
                raise ConfigError(key, "required field is missing")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_yaml(cls, path, overrides=None):
        try:
            d = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError("--config", str(exc)) from None
        d.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(d)

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError("scenario", f"must be one of {SCENARIOS}, got {self.scenario!r}")
        if not isinstance(self.n_list, list) or not self.n_list:
            raise ConfigError("n_list", "must be a nonempty list")
        if any(int(n) != n or n < 2 for n in self.n_list):
            raise ConfigError("n_list", "entries must be integers >= 2")
        if list(self.n_list) != sorted(self.n_list):
            raise ConfigError("n_list", "must be sorted ascending")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError("reps", "must be a positive integer")
        if not 0.0 < self.eps <= 1.0:
            raise ConfigError("eps", "must lie in (0, 1]")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed", "must be a nonnegative integer")
        if self.threads < 1:
            raise ConfigError("threads", "must be at least 1")
        if self.recipe not in ("thm1", "thm2"):
            raise ConfigError("recipe", "must be 'thm1' or 'thm2'")
        for name in ("f0", "f", "noise", "quadrature", "bounds", "sindex"):
            try:
                getattr(self, name + "_obj")
            except (ParameterError, TypeError, KeyError) as exc:
                raise ConfigError(name, str(exc)) from None
        if self.scenario in ("risk_density", "risk_functional", "s_index") and not isinstance(self.noise_obj,
                                                                                            StableNoise):
            raise ConfigError("noise", f"scenario {self.scenario} needs stable noise")
        if self.scenario in ("risk_density", "risk_functional", "s_index") or (
                self.scenario in ("level", "power") and isinstance(self.noise_obj, StableNoise)):
            if self.sindex_obj is None:
                raise ConfigError("sindex", f"scenario {self.scenario} with stable noise needs sindex parameters")

    @property
    def f0_obj(self):
        return density_from_dict(self.f0)

    @property
    def f_obj(self):
        return self.f0_obj if self.f is None else density_from_dict(self.f)

    @property
    def noise_obj(self):
        if not isinstance(self.noise, dict):
            raise ParameterError("noise must be a mapping with a 'kind' key")
        return noise_from_dict(self.noise)

    @property
    def quadrature_obj(self):
        return QuadratureSpec(**self.quadrature)

    @property
    def bounds_obj(self):
        return GridBounds(**self.bounds)

    @property
    def sindex_obj(self):
        if not self.sindex:
            return None
        d = dict(self.sindex)
        if self.scenario == "risk_density":
            d.setdefault("d_recipe", "cor1")
        elif self.scenario == "risk_functional":
            d.setdefault("d_recipe", "cor2")
        elif self.scenario in ("level", "power"):
            d.setdefault("d_recipe", "cor3")
        return StableIndexParams(**d)

    def to_dict(self):
        return asdict(self)


def _wilson(k, n, conf=0.99):
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return (float("nan"), float("nan"))
    z = stats.norm.ppf(0.5 + conf / 2.0)
    p = k / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (centre - half, centre + half)


def _mean_ci(x, conf=0.99):
    x = np.asarray(x, dtype=float)
    x = x[np.isfinite(x)]
    if x.size < 2:
        return (float("nan"), float("nan"))
    half = stats.norm.ppf(0.5 + conf / 2.0) * float(np.std(x, ddof=1)) / math.sqrt(x.size)
    m = float(np.mean(x))
    return (m - half, m + half)


def integral_f2(f):
    """Integral of ``f**2`` by adaptive quadrature in ``x``."""
    pdf = lambda x: float(f.pdf(np.array([x]))[0]) ** 2  # noqa: E731
    left = integrate.quad(pdf, -np.inf, 0.0, limit=200)[0]
    right = integrate.quad(pdf, 0.0, np.inf, limit=200)[0]
    return left + right


# --------------------------------------------------------------------------
# scenarios; each returns (rows, per-n summary dict)


def _testing(cfg, n, ss):
    f0, f, g, quad = cfg.f0_obj, cfg.f_obj, cfg.noise_obj, cfg.quadrature_obj
    calib_seq, run_seq = ss.spawn(2)
    if isinstance(g, StableNoise):
        grid = cfg.sindex_obj
        constants = {"u_n": frequency_u_n(n, grid), "grid": build_s_grid(n, grid).tolist()}
    else:
        grid = build_grid(cfg.recipe, n, cfg.bounds_obj, g.sigma)
        constants = {"grid": [{"tau": list(p.tau), "h": p.h, "t2": p.t2} for p in grid.points]}
    if cfg.c_star is not None:
        c_star = float(cfg.c_star)
    else:
        c_star = calibrate_cstar(f0, g, n, grid, cfg.eps, cfg.calib_reps, calib_seq, quad, cfg.threads)

    def one(rng, i):
        y = sample_convolution(f, g, n, rng)
        if isinstance(g, StableNoise):
            out = run_test_stable(y, f0, grid, c_star=c_star, quad=quad)
            return {"max_ratio": out.max_ratio, "reject": int(out.reject), "s_hat": out.extra["s_hat"]}
        out = run_test_poly(y, grid, c_star, f0, g, quad)
        return {"max_ratio": out.max_ratio, "reject": int(out.reject),
                "trigger_index": "" if out.trigger_index is None else out.trigger_index}

    rows = run_replicates(one, run_seq, cfg.reps, cfg.threads)
    k = sum(r["reject"] for r in rows)
    key = "level" if cfg.scenario == "level" else "power"
    summary = {key: k / cfg.reps, f"{key}_ci99": _wilson(k, cfg.reps), "c_star": c_star, **constants}
    return rows, summary


def _risk_density(cfg, n, ss):
    f, g, sip, quad = cfg.f_obj, cfg.noise_obj, cfg.sindex_obj, cfg.quadrature_obj
    truth = float(f.pdf(np.array([cfg.x]))[0])

    def one(rng, i):
        est = estimate_density_at(sample_convolution(f, g, n, rng), cfg.x, sip, quad=quad)
        return {"estimate": est.value, "error": est.value - truth, "s_hat": est.s_hat, "h": est.h}

    rows = run_replicates(one, ss, cfg.reps, cfg.threads)
    sq = [r["error"] ** 2 for r in rows]
    return rows, {"truth": truth, "mse": float(np.mean(sq)), "mse_ci99": _mean_ci(sq)}


def _risk_functional(cfg, n, ss):
    f, g, sip, quad = cfg.f_obj, cfg.noise_obj, cfg.sindex_obj, cfg.quadrature_obj
    truth = integral_f2(f)

    def one(rng, i):
        est = estimate_quadratic_functional(sample_convolution(f, g, n, rng), sip, quad=quad)
        return {"estimate": est.value, "error": est.value - truth, "s_hat": est.s_hat, "h": est.h}

    rows = run_replicates(one, ss, cfg.reps, cfg.threads)
    sq = [r["error"] ** 2 for r in rows]
    return rows, {"truth": truth, "sq_error": float(np.mean(sq)), "sq_error_ci99": _mean_ci(sq)}


def _s_index(cfg, n, ss):
    f, g, sip = cfg.f_obj, cfg.noise_obj, cfg.sindex_obj
    grid = build_s_grid(n, sip)
    s_tilde = float(grid[grid_oracle_index(g.s, grid)])
    try:
        u_n = frequency_u_n(n, sip)
    except DeconvError as exc:
        u_n, u_err = float("nan"), str(exc)
    else:
        u_err = ""

    def one(rng, i):
        y = sample_convolution(f, g, n, rng)
        try:
            res = estimate_s(y, sip)
        except DeconvError as exc:
            return {"s_hat": float("nan"), "s_tilde": s_tilde, "agree": 0, "branch": "", "error": type(exc).__name__}
        return {"s_hat": res.s_hat, "s_tilde": s_tilde, "agree": int(res.s_hat == s_tilde), "branch": res.branch,
                "error": ""}

    rows = run_replicates(one, ss, cfg.reps, cfg.threads)
    k = sum(r["agree"] for r in rows)
    return rows, {"agreement": k / cfg.reps, "agreement_ci99": _wilson(k, cfg.reps), "s_tilde": s_tilde,
                  "u_n": u_n, "u_n_error": u_err, "d_n": float(grid[1] - grid[0]), "grid_size": int(grid.size)}


def _clt(cfg, n, ss):
    design_cfg = dict(cfg.clt)
    if design_cfg.get("design", "quadstat") == "product":
        design = product_design(n)
        consts = {}
    else:
        g = cfg.noise_obj
        h = min(0.9, float(design_cfg.get("h_scale", 2.0)) * n ** (-float(design_cfg.get("h_power", 0.5))))
        base = cfg.quadrature_obj
        quad = QuadratureSpec(base.u_max, max(base.m_points, 2 * int(15.0 / h)), base.rule)
        design = quadstat_design(n, cfg.f0_obj, g, h, quad)
        consts = {"h": h, "center": design.center}
    vals = simulate_design(design, cfg.reps, ss, cfg.threads)
    ks, sd = ks_to_normal(vals)
    return [{"value": float(v)} for v in vals], {"ks": ks, "sd": sd, **consts}


_RUNNERS = {"level": _testing, "power": _testing, "risk_density": _risk_density,
            "risk_functional": _risk_functional, "s_index": _s_index, "clt": _clt}


def run_experiment(cfg, out_dir=None):
    """Run a configured experiment.

    Returns ``(rows, summary)``; when ``out_dir`` is given also writes
    ``results.csv`` and ``summary.json`` there.
    """
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    seqs = np.random.SeedSequence(int(cfg.seed)).spawn(len(cfg.n_list))
    rows, per_n = [], []
    for n, ss in zip(cfg.n_list, seqs):
        n = int(n)
        part, summary = _RUNNERS[cfg.scenario](cfg, n, ss)
        rows.extend({"n": n, "replicate": i, **r} for i, r in enumerate(part))
        per_n.append({"n": n, **summary})
    summary = {"scenario": cfg.scenario, "config": cfg.to_dict(), "results": per_n}
    if out_dir is not None:
        write_outputs(rows, summary, out_dir)
    return rows, summary


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


def write_outputs(rows, summary, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for r in rows:
        names.extend(k for k in r if k not in names)
    with open(out / "results.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=names, lineterminator="\r\n", restval="")
        writer.writeheader()
        writer.writerows({k: repr(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows)
    (out / "summary.json").write_text(json.dumps(to_jsonable(summary), indent=2, sort_keys=True) + "\n")
