"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 boundary parameters, 3 regime
mismatch, 4 budget exceeded, 64 usage error, 65 config error, 74 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager

import numpy as np
from scipy.special import ndtr

from . import __version__
from .errors import BudgetExceeded, ConfigError, InvalidParams, RegimeMismatch
from .model import ModelParams, level_count
from .norm import StableSpec
from .phase import Zone, critical_betas, free_energy, is_classical, p1, p2, stable_threshold
from .rng import RngStream
from .simulate import ExperimentConfig, Statistic, run_experiment
from .stable import sample_stable_many
from .stats import hill_upper_tail, ks_critical, ks_one_sample, ks_two_sample
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BOUNDARY = 2
EXIT_REGIME = 3
EXIT_BUDGET = 4
EXIT_USAGE = 64
EXIT_CONFIG = 65
EXIT_IO = 74

CONFIG_KEYS = {"a", "sigma", "beta", "n_values", "replicas", "seed", "statistic", "workers"}
REQUIRED_KEYS = CONFIG_KEYS - {"workers"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays strict."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


def _params(a: float, sigma: float) -> ModelParams:
    try:
        return ModelParams(a, sigma)
    except InvalidParams as e:
        raise UsageError(str(e)) from None


# classify ------------------------------------------------------------------

def cmd_classify(args) -> int:
    rep = critical_betas(_params(args.a, args.sigma))
    out = {"a": args.a, "sigma": args.sigma, **rep.to_dict()}
    sys.stdout.write(_dump(out))
    return EXIT_BOUNDARY if rep.zone is Zone.BOUNDARY else EXIT_OK


# phase diagram -------------------------------------------------------------

PHASE_COLUMNS = ["a", "sigma", "zone", "beta_plus", "beta_clt", "beta_stable_threshold",
                 "stable_alpha_formula"]


def phase_rows(a_lo, a_hi, s_lo, s_hi, steps):
    for a in np.linspace(a_lo, a_hi, steps):
        for s in np.linspace(s_lo, s_hi, steps):
            p = ModelParams(float(a), float(s))
            rep = critical_betas(p)
            st = stable_threshold(p)
            skip = st is None or (rep.zone is Zone.BOUNDARY and not is_classical(p))
            yield [float(a), float(s), rep.zone.value, rep.beta_plus, rep.beta_plus / 2,
                   None if skip else st.threshold, None if skip else st.formula]


def cmd_phase_diagram(args) -> int:
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    if args.sigma_range[0] <= 0:
        raise UsageError("sigma range must be positive")
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PHASE_COLUMNS)
        for row in phase_rows(*args.a_range, *args.sigma_range, args.steps):
            w.writerow([_fmt(v) for v in row])
    return EXIT_OK


# free energy ---------------------------------------------------------------

def cmd_free_energy(args) -> int:
    p = _params(args.a, args.sigma)
    lo, hi = args.beta_range
    if lo <= 0 or hi < lo:
        raise UsageError("beta range must be positive and increasing")
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    with _output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["beta", "P1", "P2", "P"])
        for b in np.linspace(lo, hi, args.steps):
            b = float(b)
            w.writerow([_fmt(b), _fmt(p1(b)), _fmt(p2(b, p)), _fmt(free_energy(b, p))])
    return EXIT_OK


# simulate ------------------------------------------------------------------

def parse_config(text: str) -> dict:
    """Flat ``key = value`` grammar; ``#`` starts a comment, blank lines are skipped."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    missing = REQUIRED_KEYS - raw.keys()
    if missing:
        raise ConfigError(f"missing keys: {', '.join(sorted(missing))}")
    try:
        cfg = {
            "a": float(raw["a"]),
            "sigma": float(raw["sigma"]),
            "beta": float(raw["beta"]),
            "n_values": [int(v) for v in raw["n_values"].split(",") if v.strip()],
            "replicas": int(raw["replicas"]),
            "seed": int(raw["seed"], 0),
            "statistic": Statistic(raw["statistic"]),
            "workers": int(raw["workers"]) if "workers" in raw else None,
        }
    except ValueError as e:
        raise ConfigError(f"bad value: {e}") from None
    if cfg["workers"] is not None and cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


STABLE_REFERENCE_DRAWS = 100_000


def _verdict(stat: Statistic, values: np.ndarray, reg: dict | None, norm: dict | None,
             seed: int) -> dict:
    n = values.size
    if stat is Statistic.LLN_RATIO:
        target = 0.5 if (reg and reg["lln"]["critical"]) else 1.0
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        tol = max(0.01, 3 * se)
        mean = float(values.mean())
        return {"test": "mean ratio", "target": target, "tolerance": tol, "mean": mean,
                "verdict": "PASS" if abs(mean - target) <= tol else "FAIL"}
    if stat is Statistic.CLT_NORMALIZED:
        var = 0.5 if reg["clt"]["critical"] else 1.0
        d = ks_one_sample(values, lambda x: ndtr(x / math.sqrt(var)))
        crit = ks_critical(n, 0.05)
        return {"test": "one-sample KS vs normal", "limit_variance": var, "ks": d,
                "critical_value_5pct": crit, "verdict": "PASS" if d <= crit else "FAIL"}
    alpha = norm["alpha"]
    out = {"test": "stable", "alpha": alpha}
    try:
        h = hill_upper_tail(values)
        out["hill"] = {"k": h["k"], "estimate": h["estimate"], "tail": h["tail"],
                       "sensitivity": {str(k): v for k, v in h["sensitivity"].items()}}
        hill_ok = abs(h["estimate"] - alpha) <= 0.15
    except ValueError as e:
        out["hill"] = {"error": str(e)}
        hill_ok = False
    ref = sample_stable_many(StableSpec(alpha, drift=norm["drift"]),
                             RngStream(seed, 0x57AB1E), STABLE_REFERENCE_DRAWS)
    d = ks_two_sample(values, ref)
    out["ks_two_sample"] = d
    out["verdict"] = "PASS" if (hill_ok and d < 0.08) else "FAIL"
    return out


def cmd_simulate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from None
    raw = parse_config(text)
    try:
        params = ModelParams(raw["a"], raw["sigma"])
        workers = args.workers or raw["workers"]
        cfg = ExperimentConfig(params, raw["beta"], raw["n_values"], raw["replicas"],
                               raw["seed"], raw["statistic"], workers)
    except InvalidParams as e:
        raise ConfigError(str(e)) from None
    res = run_experiment(cfg)
    per_n = {}
    for n in cfg.n_values:
        per_n[str(n)] = {
            "m": level_count(n),
            "summary": res.summaries[n],
            "normalization": res.normalizations[n],
            "verdict": _verdict(cfg.statistic, res.values[n], res.regime, res.normalizations[n],
                                cfg.seed),
        }
    report = {
        "version": __version__,
        "config": {"a": params.a, "sigma": params.sigma, "beta": cfg.beta,
                   "n_values": list(cfg.n_values), "replicas": cfg.replicas, "seed": cfg.seed,
                   "statistic": cfg.statistic.value},
        "regime": res.regime,
        "results": per_n,
    }
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "replica", "value"])
            for n in cfg.n_values:
                for i, v in enumerate(res.values[n]):
                    w.writerow([n, i, _fmt(float(v))])
    with _output(args.report) as fh:
        fh.write(_dump(_clean(report)))
    return EXIT_OK


# verify --------------------------------------------------------------------

def cmd_verify(args) -> int:
    results = run_suite(args.suite, seed=args.seed, workers=args.workers)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    ok = all(r.passed for r in results)
    out = {"suite": args.suite, "seed": args.seed, "passed": ok,
           "criteria": [r.to_dict() for r in results], "members": list(SUITES[args.suite])}
    with _output(args.out) as fh:
        fh.write(_dump(_clean(out)))
    return EXIT_OK if ok else EXIT_VERIFY_FAILED


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="alloy-rem", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="zone and critical betas of (a, sigma) as JSON")
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--sigma", type=float, required=True)
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("phase-diagram", help="zone grid as CSV")
    c.add_argument("--a-range", type=float, nargs=2, default=(-4.0, 4.0), metavar=("LO", "HI"))
    c.add_argument("--sigma-range", type=float, nargs=2, default=(0.1, 3.0),
                   metavar=("LO", "HI"))
    c.add_argument("--steps", type=int, default=200)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_phase_diagram)

    c = sub.add_parser("free-energy", help="P1, P2 and P over a beta grid as CSV")
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--sigma", type=float, required=True)
    c.add_argument("--beta-range", type=float, nargs=2, default=(0.05, 3.0),
                   metavar=("LO", "HI"))
    c.add_argument("--steps", type=int, default=100)
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_free_energy)

    c = sub.add_parser("simulate", help="run an experiment from a key=value config file")
    c.add_argument("config")
    c.add_argument("--report", default="-", help="JSON report path (default stdout)")
    c.add_argument("--csv", help="write replica values as CSV")
    c.add_argument("--workers", type=_positive_int)
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("verify", help="run an acceptance suite")
    c.add_argument("suite", choices=sorted(SUITES))
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--workers", type=_positive_int)
    c.add_argument("--out", default="-", help="JSON results path (default stdout)")
    c.set_defaults(func=cmd_verify)
    return ap


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        sys.stderr.write(f"alloy-rem: error: {e}\n")
        return EXIT_USAGE
    except ConfigError as e:
        sys.stderr.write(f"alloy-rem: config error: {e}\n")
        return EXIT_CONFIG
    except RegimeMismatch as e:
        sys.stderr.write(f"alloy-rem: regime mismatch: {e}\n")
        return EXIT_REGIME
    except BudgetExceeded as e:
        sys.stderr.write(f"alloy-rem: budget exceeded: {e}\n")
        return EXIT_BUDGET
    except OSError as e:
        sys.stderr.write(f"alloy-rem: I/O error: {e}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
