"""``rankdiff`` command line: sample, capital-curve, verify, asymptotics.

Every run is driven by one TOML file. A minimal sampling config::

    seed = 7
    replicates = 1000
    m = 50

    [model]
    kind = "gravity"        # atlas | gravity | custom | top_push | two_block | pd
    n = 2000
    eta = { rule = "constant", value = 0.25 }

Exit codes: 0 success, 1 failing verdict, 2 config or argument error,
3 drift vector without a stationary law.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import rng as _rng
from . import verification as V
from .asymptotics import EtaParam, limit_dp, limit_entropy, max_weight_moment
from .errors import ConditionViolated, DomainError
from .pd import PDConfig, sample_pd
from .stationary import stationary_weight_matrix
from .stats import linear_fit
from .types import DriftSpec

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = V.SCHEMA_VERSION


class ConfigError(Exception):
    pass


# -- config -----------------------------------------------------------------

class Config:
    """Typed access to a parsed TOML table; errors name the dotted field."""

    def __init__(self, data: dict, prefix: str = ""):
        self.data = data
        self.prefix = prefix

    @classmethod
    def load(cls, path) -> "Config":
        try:
            with open(path, "rb") as fh:
                return cls(tomllib.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"{path}: no such file")
        except tomllib.TOMLDecodeError as exc:
            # tomli reports "(at line L, column C)"
            raise ConfigError(f"{path}: {exc}")

    def _name(self, key):
        return f"{self.prefix}{key}"

    def has(self, key):
        return key in self.data

    def get(self, key, kind, default=None, required=False):
        if key not in self.data:
            if required:
                raise ConfigError(f"field {self._name(key)!r}: required")
            return default
        value = self.data[key]
        ok = {
            int: lambda v: isinstance(v, int) and not isinstance(v, bool),
            float: lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
            str: lambda v: isinstance(v, str),
            list: lambda v: isinstance(v, list),
            bool: lambda v: isinstance(v, bool),
        }[kind](value)
        if not ok:
            raise ConfigError(f"field {self._name(key)!r}: expected {kind.__name__}, got {value!r}")
        return float(value) if kind is float else value

    def positive_int(self, key, default=None, required=False):
        v = self.get(key, int, default, required)
        if v is not None and v < 1:
            raise ConfigError(f"field {self._name(key)!r}: must be >= 1, got {v}")
        return v

    def section(self, key, required=False) -> "Config":
        if key not in self.data:
            if required:
                raise ConfigError(f"section [{self._name(key)}]: required")
            return Config({}, self._name(key) + ".")
        value = self.data[key]
        if not isinstance(value, dict):
            raise ConfigError(f"field {self._name(key)!r}: expected a table")
        return Config(value, self._name(key) + ".")


def _eta_rule(cfg: Config) -> V.EtaRule:
    if not cfg.has("eta"):
        raise ConfigError(f"field {cfg.prefix}eta: required")
    if not isinstance(cfg.data["eta"], dict):
        return V.constant(cfg.get("eta", float))
    eta = cfg.section("eta")
    rule = eta.get("rule", str, "constant")
    if rule in ("constant", "proportional"):
        value = eta.get("value", float, required=True)
        return V.constant(value) if rule == "constant" else V.proportional(value)
    if rule == "critical":
        return V.critical()
    if rule == "table":
        tab = eta.section("table", required=True)
        try:
            return V.table({int(k): tab.get(k, float) for k in tab.data})
        except ValueError:
            raise ConfigError(f"field {eta.prefix}table: keys must be integers n")
    raise ConfigError(f"field {eta.prefix}rule: unknown rule {rule!r} "
                      "(constant | proportional | critical | table)")


def parse_model(cfg: Config):
    """DriftModel for drift kinds, PDConfig for kind = "pd"."""
    kind = cfg.get("kind", str, required=True)
    if kind == "pd":
        alpha = cfg.get("alpha", float, required=True)
        try:
            return PDConfig(alpha, atom_floor=cfg.get("atom_floor", float, 1e-8),
                            residual_tol=cfg.get("residual_tol", float, 1e-9))
        except ValueError as exc:
            raise ConfigError(f"field {cfg.prefix}alpha: {exc}")
    if kind == "atlas":
        return V.DriftModel.atlas(_eta_rule(cfg))
    if kind == "gravity":
        return V.DriftModel.gravity(_eta_rule(cfg))
    if kind == "top_push":
        return V.DriftModel.top_push(cfg.get("push", float, 0.25))
    if kind == "two_block":
        return V.DriftModel.two_block(cfg.get("eta", float, required=True), cfg.get("beta", float))
    if kind == "custom":
        deltas = cfg.get("deltas", list, required=True)
        try:
            spec = DriftSpec(np.asarray(deltas, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field {cfg.prefix}deltas: {exc}")
        return V.DriftModel.custom(lambda n: spec, "custom", params={"deltas": list(spec.deltas)})
    raise ConfigError(f"field {cfg.prefix}kind: unknown model {kind!r} "
                      "(atlas | gravity | custom | top_push | two_block | pd)")


def _model_n(model, cfg: Config):
    if isinstance(model, PDConfig):
        return None
    if model.label == "custom":
        return len(model.params["deltas"])
    return cfg.positive_int("n", required=True)


# -- output -----------------------------------------------------------------

def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(V._num(payload), indent=2, sort_keys=True, allow_nan=False) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def _weight_rows(model, n, replicates, seed, threads, depth):
    """Weights as a (replicates, depth) matrix plus the mass beyond ``depth``.

    D_p and entropy are computed on the full sequences before truncation.
    """
    if isinstance(model, PDConfig):
        samples = sample_pd(model, replicates, _rng.child(seed, "pd"), threads=threads)
        full = [s.weights for s in samples]
    else:
        w = stationary_weight_matrix(model(n), replicates, _rng.child(seed, "stationary", n), threads)
        full = list(w)
    top = np.zeros((replicates, depth))
    rest = np.empty(replicates)
    for i, row in enumerate(full):
        k = min(depth, row.size)
        top[i, :k] = row[:k]
        rest[i] = max(0.0, math.fsum(row[k:]))
    return top, rest, full


def _summary_stats(full, p_values):
    dp = np.array([[float(np.sum(row ** p)) for p in p_values] for row in full])
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.array([-float(np.sum(np.where(row > 0, row * np.log(row), 0.0))) for row in full])
    r = len(full)
    se = (lambda a: a.std(axis=0, ddof=1) / math.sqrt(r)) if r > 1 else (lambda a: np.full(a.shape[1:], np.nan))
    return {
        "dp": {f"{p:g}": {"mean": float(m), "se": float(s)} for p, m, s in zip(p_values, dp.mean(0), se(dp))},
        "entropy": {"mean": float(ent.mean()), "se": float(se(ent[:, None])[0])},
    }


def _describe(model):
    if isinstance(model, PDConfig):
        return {"kind": "pd", "alpha": model.alpha, "atom_floor": model.atom_floor,
                "residual_tol": model.residual_tol}
    return model.describe()


# -- commands ---------------------------------------------------------------

def cmd_sample(cfg: Config, seed: int, threads: int, out: Path) -> int:
    model = parse_model(cfg.section("model", required=True))
    n = _model_n(model, cfg.section("model"))
    replicates = cfg.positive_int("replicates", required=True)
    m = cfg.positive_int("m", 50)
    p_values = [float(p) for p in cfg.get("p_values", list, [2.0])]
    if any(p <= 0 for p in p_values):
        raise ConfigError("field 'p_values': every p must be positive")
    top, rest, full = _weight_rows(model, n, replicates, seed, threads, m)
    header = [f"rank_{i}" for i in range(1, m + 1)] + [f"mass_beyond_rank_{m}"]
    _write_csv(out / "weights.csv", header, np.column_stack([top, rest]))
    summary = {"schema_version": SCHEMA_VERSION, "command": "sample", "seed": seed, "model": _describe(model),
               "n": n, "replicates": replicates, "m": m, **_summary_stats(full, p_values)}
    _write_json(out / "summary.json", summary)
    return 0


def cmd_capital_curve(cfg: Config, seed: int, threads: int, out: Path) -> int:
    model = parse_model(cfg.section("model", required=True))
    n = _model_n(model, cfg.section("model"))
    replicates = cfg.positive_int("replicates", required=True)
    cc = cfg.section("capital_curve")
    depth = cc.positive_int("max_rank", n if n is not None else 1000)
    if n is not None:
        depth = min(depth, n)
    lo, hi = cc.get("fit_ranks", list, [10, 100])
    top, _, _ = _weight_rows(model, n, replicates, seed, threads, depth)
    with np.errstate(divide="ignore"):
        logw = np.log(top)
    ranks = np.arange(1, depth + 1)
    mean = logw.mean(axis=0)
    q05, q95 = np.quantile(logw, [0.05, 0.95], axis=0)
    rows = np.column_stack([np.log(ranks), mean, q05, q95])
    _write_csv(out / "capital_curve.csv", ["log_rank", "mean_log_weight", "q05", "q95"], rows)
    fit = {"ranks": [lo, hi], "slope": None, "intercept": None, "r2": None}
    sel = (ranks >= lo) & (ranks <= hi) & np.isfinite(mean)
    if sel.sum() >= 2:
        fit["slope"], fit["intercept"], fit["r2"] = linear_fit(np.log(ranks[sel]), mean[sel])
    summary = {"schema_version": SCHEMA_VERSION, "command": "capital-curve", "seed": seed,
               "model": _describe(model), "n": n, "replicates": replicates, "max_rank": depth, "fit": fit}
    if isinstance(model, PDConfig):
        summary["reference_slope"] = -1.0 / model.alpha
    _write_json(out / "capital_curve.json", summary)
    return 0


def _scenarios():
    """name -> callable(seed, threads, overrides) -> ExperimentReport."""
    def trich(model, grid, reps, expected, **kw):
        return lambda s, t, o: V.phase_sweep(model, o.pop("n_grid", grid), o.pop("replicates", reps), s,
                                             expected=expected, threads=t, **{**kw, **o})

    def rate(model, grid, reps, scenario):
        return lambda s, t, o: V.rate_regression(model, o.pop("n_grid", grid), o.pop("replicates", reps), s,
                                                 threads=t, scenario=scenario, **o)

    return {
        "lemma9": lambda s, t, o: V.lemma_phase_suite(seed=s, threads=t,
                                                      **{"configs": 100, "replicates": 10_000, **o}),
        "trichotomy-pd": trich(V.DriftModel.gravity(V.constant(0.25)), [2000], 5000, "pd-limit",
                               pd_draws=5000, scenario="trichotomy-pd"),
        "trichotomy-collapse": trich(V.DriftModel.gravity(V.constant(1.0)), [500, 1000, 2000], 1000,
                                     "collapse", scenario="trichotomy-collapse"),
        "trichotomy-eta0": trich(V.DriftModel.atlas(V.constant(1.0)), [1000], 1000, "dominance",
                                 scenario="trichotomy-eta0"),
        "rate-supercritical": rate(V.DriftModel.gravity(V.constant(1.0)), [500, 1000, 2000, 5000], 1000,
                                   "rate-supercritical"),
        "rate-critical": rate(V.DriftModel.gravity(V.critical()), [1000, 5000], 1000, "rate-critical"),
        "counterexamples": lambda s, t, o: V.counterexample_scenarios(s, threads=t, **o),
        "conditions": lambda s, t, o: V.condition_suite(**o),
    }


SCENARIO_SETS = {
    "trichotomy": ["trichotomy-pd", "trichotomy-collapse", "trichotomy-eta0"],
    "rate": ["rate-supercritical", "rate-critical"],
}


def scenario_names():
    return sorted(_scenarios()) + sorted(SCENARIO_SETS) + ["all"]


def _expand(names):
    registry = _scenarios()
    picked = []
    for name in names:
        if name == "all":
            group = list(registry)
        elif name in SCENARIO_SETS:
            group = SCENARIO_SETS[name]
        elif name in registry:
            group = [name]
        else:
            raise ConfigError(f"field 'verify.scenarios': unknown scenario {name!r}; valid names: "
                              + ", ".join(scenario_names()))
        picked += [g for g in group if g not in picked]
    return picked


def cmd_verify(cfg: Config, seed: int, threads: int, out: Path) -> int:
    vcfg = cfg.section("verify", required=True)
    names = vcfg.get("scenarios", list, required=True)
    picked = _expand(names)
    registry = _scenarios()
    failure = None
    for name in picked:
        overrides = dict(vcfg.section(name).data) if isinstance(vcfg.data.get(name), dict) else {}
        for k in ("n_grid",):
            if k in overrides:
                overrides[k] = [int(x) for x in overrides[k]]
        try:
            report = registry[name](seed, threads, overrides)
        except TypeError as exc:
            raise ConfigError(f"section [verify.{name}]: {exc}")
        (out / f"{name}.json").write_text(report.to_json(), encoding="utf-8")
        status = "PASS" if report.passed else "FAIL"
        outcome = f" outcome={report.outcome}" if report.outcome else ""
        print(f"{status} {name}{outcome}")
        if failure is None and not report.passed:
            failure = (name, report.first_failure())
    if failure:
        print(f"first failing verdict: {failure[0]}: {failure[1]}", file=sys.stderr)
        return 1
    return 0


def cmd_asymptotics(eta: float, p_values, tol: float, out: Path | None) -> int:
    try:
        e = EtaParam(eta)
    except DomainError:
        raise ConfigError(f"eta = {eta} is outside (0, 1/2), the range where the limit law is "
                          "Poisson-Dirichlet PD(2 eta)")
    rows = []
    for p in p_values:
        rows.append(("E[mu_1^p]", p, max_weight_moment(e, p, tol), tol))
    for p in p_values:
        value = limit_dp(e, p) if p > e.alpha else math.inf
        rows.append(("D_p", p, value, 1e-12))
    rows.append(("entropy", None, limit_entropy(e, min(tol, 1e-9)), min(tol, 1e-9)))
    print(f"{'quantity':<10} {'p':>6} {'value':>20} {'tol':>8}")
    for name, p, value, t in rows:
        ps = "" if p is None else f"{p:g}"
        print(f"{name:<10} {ps:>6} {value:>20.12g} {t:>8.0e}")
    if out is not None:
        _write_json(out / "asymptotics.json", {
            "schema_version": SCHEMA_VERSION, "command": "asymptotics", "eta": eta,
            "rows": [{"quantity": n, "p": p, "value": v if math.isfinite(v) else None, "tol": t}
                     for n, p, v, t in rows]})
    return 0


# -- entry point ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="rankdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sample", "capital-curve", "verify", "asymptotics"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "asymptotics", type=Path)
        sp.add_argument("--seed", type=int, help="overrides the config seed")
        sp.add_argument("--threads", type=int, help="worker count (default: $RANKDIFF_THREADS or all CPUs)")
        sp.add_argument("--out", type=Path, default=Path("."))
        if name == "asymptotics":
            sp.add_argument("--eta", type=float)
            sp.add_argument("--p", type=float, nargs="+", dest="p_values")
            sp.add_argument("--tol", type=float)
    return parser


def _asymptotics_args(args, cfg: Config | None):
    sec = cfg.section("asymptotics") if cfg else Config({}, "asymptotics.")
    eta = args.eta if args.eta is not None else sec.get("eta", float)
    if eta is None:
        raise ConfigError("eta is required (--eta or asymptotics.eta)")
    p_values = args.p_values or [float(p) for p in sec.get("p", list, [1.0, 2.0])]
    if any(p <= 0 for p in p_values):
        raise ConfigError("every p must be positive")
    tol = args.tol if args.tol is not None else sec.get("tol", float, 1e-8)
    return eta, p_values, tol


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = Config.load(args.config) if args.config else None
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "asymptotics":
            return cmd_asymptotics(*_asymptotics_args(args, cfg), args.out if args.config else None)
        seed = args.seed if args.seed is not None else cfg.get("seed", int, required=True)
        if seed < 0:
            raise ConfigError("field 'seed': must be >= 0")
        threads = _rng.resolve_threads(args.threads)
        cmd = {"sample": cmd_sample, "capital-curve": cmd_capital_curve, "verify": cmd_verify}[args.command]
        code = cmd(cfg, seed, threads, args.out)
    except ConfigError as exc:
        print(f"rankdiff: config error: {exc}", file=sys.stderr)
        return 2
    except ConditionViolated as exc:
        print(f"rankdiff: no stationary law: condition α_k > 0 for all 1 ≤ k ≤ n−1 "
              f"fails at k={exc.index} (alpha_k={exc.value:.6g})",
              file=sys.stderr)
        return 3
    print(f"done in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
