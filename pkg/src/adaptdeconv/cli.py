"""Command-line interface.

Every subcommand prints one JSON document on standard output (a plain table
with ``--pretty``).  Option values come, in order of precedence, from the
command line, from the YAML file given by ``--config`` (keys named like the
long options, with dashes or underscores) and from built-in defaults.

Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from .adaptive import GridBounds, build_grid, calibrate_cstar, run_test_poly, run_test_stable
from .errors import NumericalError, ParameterError
from .fourier import QuadratureSpec
from .harness import ConfigError, ExperimentConfig, to_jsonable, run_experiment
from .model import density_from_dict, load_sample, noise_from_dict, sample_convolution, save_sample
from .semiparam import estimate_density_at, estimate_quadratic_functional
from .stable_index import StableIndexParams, estimate_s

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

_DEFAULTS = {
    "seed": 0, "threads": 1, "out": None, "pretty": False,
    "f": "laplace", "f0": "laplace", "noise": "polynomial:2", "n": 1000,
    "s_lo": 0.5, "s_hi": 2.0, "beta_prime": 2.0, "A": 0.5, "a": None, "beta_bar": 1.0, "recipe": None,
    "x": 0.0, "c_star": 1.0, "regime": "thm1", "eps": 0.1, "reps": 500,
    "bounds": "0.25,1,1,2,0.5,1", "m_points": 2048, "u_max": 50.0, "s_hat": None,
}


def _parse_structured(text, what):
    """YAML text, or ``kind:value`` shorthand for noise."""
    if isinstance(text, (dict, list)):
        return text
    if what == "noise" and isinstance(text, str) and ":" in text and "{" not in text:
        kind, _, value = text.partition(":")
        key = "sigma" if kind.strip() in ("polynomial", "poly") else "s"
        kind = "polynomial" if kind.strip() == "poly" else kind.strip()
        return {"kind": kind, key: float(value)}
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParameterError(f"--{what}: {exc}") from None


def _add_common(p):
    p.add_argument("--config", help="YAML file with option values")
    p.add_argument("--seed", type=int, help="random seed (u64)")
    p.add_argument("--threads", type=int, help="worker threads for replications")
    p.add_argument("--out", help="output file or directory")
    p.add_argument("--pretty", action="store_true", default=None, help="print a table instead of JSON")


def _add_sample(p):
    p.add_argument("--sample", required=True, help="file with one observation per line")


def _add_sip(p):
    p.add_argument("--s-lo", type=float)
    p.add_argument("--s-hi", type=float)
    p.add_argument("--beta-prime", type=float)
    p.add_argument("--A", type=float, dest="A")
    p.add_argument("--a", type=float)
    p.add_argument("--beta-bar", type=float)
    p.add_argument("--recipe", choices=["prop1", "cor1", "cor2", "cor3"])


def _add_quad(p):
    p.add_argument("--m-points", type=int)
    p.add_argument("--u-max", type=float)


def _add_poly_test(p):
    p.add_argument("--f0")
    p.add_argument("--noise", help="YAML mapping or shorthand polynomial:SIGMA / stable:S")
    p.add_argument("--regime", choices=["thm1", "thm2"])
    p.add_argument("--bounds", help="alpha_lo,alpha_hi,r_lo,r_hi,beta_lo,beta_hi")


def build_parser():
    parser = argparse.ArgumentParser(prog="adaptdeconv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw Y = X + noise")
    _add_common(p)
    p.add_argument("--f")
    p.add_argument("--noise")
    p.add_argument("--n", type=int)

    p = sub.add_parser("estimate-s", help="estimate the stable index")
    _add_common(p), _add_sample(p), _add_sip(p)

    p = sub.add_parser("estimate-density", help="plug-in density estimate at a point")
    _add_common(p), _add_sample(p), _add_sip(p), _add_quad(p)
    p.add_argument("--x", type=float)

    p = sub.add_parser("quadfunc", help="plug-in estimate of the integral of f^2")
    _add_common(p), _add_sample(p), _add_sip(p), _add_quad(p)

    p = sub.add_parser("test-poly", help="adaptive test under polynomial noise")
    _add_common(p), _add_sample(p), _add_poly_test(p), _add_quad(p)
    p.add_argument("--c-star", type=float)

    p = sub.add_parser("test-stable", help="goodness-of-fit test under stable noise")
    _add_common(p), _add_sample(p), _add_sip(p), _add_quad(p)
    p.add_argument("--f0")
    p.add_argument("--c-star", type=float)
    p.add_argument("--s-hat", type=float, help="use this index instead of estimating it")

    p = sub.add_parser("calibrate", help="Monte Carlo calibration of C*")
    _add_common(p), _add_poly_test(p), _add_sip(p), _add_quad(p)
    p.add_argument("--n", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--reps", type=int)

    p = sub.add_parser("experiment", help="run a configured experiment")
    _add_common(p)
    return parser


def _resolve(args):
    """Merge command line, config file and defaults (in that order)."""
    opts = dict(_DEFAULTS)
    if args.config and args.command != "experiment":
        try:
            loaded = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError("--config", str(exc)) from None
        if not isinstance(loaded, dict):
            raise ConfigError("--config", "must contain a mapping")
        opts.update({k.replace("-", "_"): v for k, v in loaded.items()})
    opts.update({k: v for k, v in vars(args).items() if v is not None})
    return opts


def _sip(o, recipe):
    return StableIndexParams(o["s_lo"], o["s_hi"], o["beta_prime"], o["A"], o["a"], o["recipe"] or recipe,
                             o["beta_bar"])


def _quad(o):
    return QuadratureSpec(o["u_max"], o["m_points"])


def _bounds(o):
    b = o["bounds"]
    vals = b if isinstance(b, (list, tuple)) else [float(v) for v in str(b).split(",")]
    if len(vals) != 6:
        raise ParameterError("--bounds needs six comma-separated numbers")
    return GridBounds(*vals)


def _cmd_simulate(o):
    f = density_from_dict(_parse_structured(o["f"], "f"))
    g = noise_from_dict(_parse_structured(o["noise"], "noise"))
    s = sample_convolution(f, g, int(o["n"]), np.random.default_rng(o["seed"]), {"seed": o["seed"]})
    result = {"n": s.n, "mean": float(np.mean(s.y)), "median": float(np.median(s.y)), **s.meta}
    if o["out"]:
        save_sample(s, o["out"])
        result["path"] = str(o["out"])
    else:
        result["y"] = s.y.tolist()
    return result


def _cmd_estimate_s(o):
    return estimate_s(load_sample(o["sample"]), _sip(o, "prop1")).to_dict()


def _cmd_estimate_density(o):
    return estimate_density_at(load_sample(o["sample"]), o["x"], _sip(o, "cor1"), quad=_quad(o)).to_dict()


def _cmd_quadfunc(o):
    return estimate_quadratic_functional(load_sample(o["sample"]), _sip(o, "cor2"), quad=_quad(o)).to_dict()


def _cmd_test_poly(o):
    s = load_sample(o["sample"])
    g = noise_from_dict(_parse_structured(o["noise"], "noise"))
    if not hasattr(g, "sigma"):
        raise ParameterError("test-poly needs polynomial noise")
    grid = build_grid(o["regime"], s.n, _bounds(o), g.sigma)
    out = run_test_poly(s, grid, o["c_star"], density_from_dict(_parse_structured(o["f0"], "f0")), g, _quad(o))
    if o["out"]:
        Path(o["out"]).write_text(out.to_csv())
    return {**out.summary(), "per_point": out.rows()}


def _cmd_test_stable(o):
    s = load_sample(o["sample"])
    f0 = density_from_dict(_parse_structured(o["f0"], "f0"))
    out = run_test_stable(s, f0, _sip(o, "cor3"), c_star=o["c_star"], quad=_quad(o), s_hat=o["s_hat"])
    return out.summary()


def _cmd_calibrate(o):
    f0 = density_from_dict(_parse_structured(o["f0"], "f0"))
    g = noise_from_dict(_parse_structured(o["noise"], "noise"))
    n = int(o["n"])
    grid = _sip(o, "cor3") if g.to_dict()["kind"] == "stable" else build_grid(o["regime"], n, _bounds(o), g.sigma)
    c, pool = calibrate_cstar(f0, g, n, grid, o["eps"], o["reps"], o["seed"], _quad(o), o["threads"],
                              return_pool=True)
    q = np.quantile(pool, [0.5, 0.9, 0.95, 0.99]) if pool.size else [float("nan")] * 4
    return {"c_star": c, "eps": o["eps"], "reps": o["reps"], "n": n, "seed": o["seed"],
            "null_ratio_quantiles": dict(zip(["0.5", "0.9", "0.95", "0.99"], map(float, q)))}


def _cmd_experiment(args):
    if not args.config:
        raise ConfigError("--config", "experiment needs a configuration file")
    overrides = {"seed": args.seed, "threads": args.threads}
    cfg = ExperimentConfig.from_yaml(args.config, overrides)
    _, summary = run_experiment(cfg, args.out or "results")
    return summary


_COMMANDS = {"simulate": _cmd_simulate, "estimate-s": _cmd_estimate_s, "estimate-density": _cmd_estimate_density,
             "quadfunc": _cmd_quadfunc, "test-poly": _cmd_test_poly, "test-stable": _cmd_test_stable,
             "calibrate": _cmd_calibrate}


def _table(result, prefix=""):
    lines = []
    for key, value in result.items():
        if isinstance(value, dict):
            lines.extend(_table(value, f"{prefix}{key}."))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, item in enumerate(value):
                lines.extend(_table(item, f"{prefix}{key}[{i}]."))
        else:
            lines.append(f"{prefix + key:<32} {value}")
    return lines


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "experiment":
            result, pretty = _cmd_experiment(args), bool(args.pretty)
        else:
            opts = _resolve(args)
            result, pretty = _COMMANDS[args.command](opts), bool(opts["pretty"])
    except ParameterError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL
    result = to_jsonable(result)
    print("\n".join(_table(result)) if pretty else json.dumps(result, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
