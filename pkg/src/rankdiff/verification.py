"""Statistical checks of the large-n behaviour of stationary market weights.

Each scenario returns an :class:`ExperimentReport` whose verdicts record the
measured value, the threshold and the comparison, so a report can be judged
without rerunning it. Reports are reproducible from (seed, replicates): all
randomness comes from labelled sub-streams of the master seed and every
reduction runs in replicate order.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import rng as _rng
from . import stats
from .errors import ModelMismatch
from .pd import PDConfig, sample_pd_top
from .stationary import log_weights_from_spacings, stationary_spacing_matrix, weights_from_spacing_matrix
from .types import DriftSpec, alpha_vector, atlas, gravity, top_push, two_block

SCHEMA_VERSION = 1


# -- drift models -----------------------------------------------------------

@dataclass(frozen=True)
class EtaRule:
    """How eta_n depends on n: constant, proportional (c n), critical
    (1/2 + 1/log n) or an explicit table."""

    kind: str
    value: float = 0.0
    table: tuple = ()

    def __call__(self, n: int) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "proportional":
            return self.value * n
        if self.kind == "critical":
            return 0.5 + 1.0 / math.log(n)
        if self.kind == "table":
            lookup = dict(self.table)
            if n not in lookup:
                raise KeyError(f"eta table has no entry for n={n}")
            return lookup[n]
        raise ValueError(f"unknown eta rule {self.kind!r}")

    def limit(self):
        """lim eta_n, or None when the rule does not pin it down."""
        return {"constant": self.value, "critical": 0.5,
                "proportional": math.inf if self.value > 0 else 0.0}.get(self.kind)

    def limit_per_n(self):
        """lim eta_n / n."""
        return {"constant": 0.0, "critical": 0.0, "proportional": self.value}.get(self.kind)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "table":
            d["table"] = {str(k): v for k, v in self.table}
        elif self.kind != "critical":
            d["value"] = self.value
        return d


def constant(value: float) -> EtaRule:
    return EtaRule("constant", float(value))


def proportional(value: float) -> EtaRule:
    return EtaRule("proportional", float(value))


def critical() -> EtaRule:
    return EtaRule("critical")


def table(mapping) -> EtaRule:
    return EtaRule("table", table=tuple(sorted((int(k), float(v)) for k, v in dict(mapping).items())))


@dataclass(frozen=True)
class DriftModel:
    """A triangular drift array n -> DriftSpec with its declared limit eta.

    ``lipschitz`` certifies |delta_i(n) - delta_1(n)| <= C (i - 1) / n on the
    top ranks; ``critical`` declares delta_bar(n) - delta_1(n) = 1/2 + O(1/log n).
    """

    kind: str
    generator: Callable[[int], DriftSpec]
    label: str
    eta: float | None = None
    lipschitz: bool = False
    critical: bool = False
    params: dict = field(default_factory=dict)

    def __call__(self, n: int) -> DriftSpec:
        return self.generator(n)

    @classmethod
    def atlas(cls, rule: EtaRule) -> "DriftModel":
        eta = rule.limit_per_n()
        return cls("atlas", lambda n: atlas(n, rule(n)), f"atlas[{rule.kind} {rule.value:g}]",
                   eta=eta, lipschitz=True, critical=eta == 0.5,
                   params={"eta_rule": rule.to_dict()})

    @classmethod
    def gravity(cls, rule: EtaRule) -> "DriftModel":
        eta = rule.limit()
        return cls("gravity", lambda n: gravity(n, rule(n)), f"gravity[{rule.kind} {rule.value:g}]",
                   eta=eta, lipschitz=eta is not None and math.isfinite(eta),
                   critical=eta == 0.5, params={"eta_rule": rule.to_dict()})

    @classmethod
    def top_push(cls, push: float = 0.25) -> "DriftModel":
        return cls("custom", lambda n: top_push(n, push), f"top_push[{push:g}]",
                   params={"push": push})

    @classmethod
    def two_block(cls, eta: float, beta: float | None = None) -> "DriftModel":
        beta = 4.0 * (1.0 - eta) if beta is None else beta
        return cls("custom", lambda n: two_block(n, eta, beta), f"two_block[{eta:g},{beta:g}]",
                   eta=eta, params={"eta": eta, "beta": beta})

    @classmethod
    def custom(cls, generator, label="custom", **kw) -> "DriftModel":
        return cls("custom", generator, label, **kw)

    def describe(self) -> dict:
        return {"kind": self.kind, "label": self.label, "eta": _num(self.eta), **self.params}


# -- reports ----------------------------------------------------------------

def _num(x):
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, str):
        return x
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    raise TypeError(f"cannot serialize {type(x).__name__}")


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    measured: object
    threshold: object
    comparator: str

    @classmethod
    def check(cls, name, measured, comparator, threshold):
        ops = {
            "<": lambda a, b: a < b,
            "<=": lambda a, b: a <= b,
            ">": lambda a, b: a > b,
            ">=": lambda a, b: a >= b,
            "==": lambda a, b: a == b,
            "in": lambda a, b: b[0] <= a <= b[1],
        }
        return cls(name, bool(ops[comparator](measured, threshold)), measured, threshold, comparator)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "measured": _num(self.measured),
                "threshold": _num(self.threshold), "comparator": self.comparator}

    def __str__(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.measured!r} {self.comparator} {self.threshold!r}"


@dataclass
class ExperimentReport:
    scenario: str
    seed: int
    replicates: int
    statistics: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    runtime: float = 0.0
    outcome: str | None = None
    labels: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def first_failure(self):
        return next((v for v in self.verdicts if not v.passed), None)

    def stat(self, name, estimate, se=None):
        self.statistics[name] = {"estimate": estimate, "se": se}

    def to_dict(self, include_runtime: bool = False) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "seed": self.seed,
            "replicates": self.replicates,
            "outcome": self.outcome,
            "labels": list(self.labels),
            "statistics": _num(self.statistics),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "details": _num(self.details),
            "passed": self.passed,
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return d

    def to_json(self, include_runtime: bool = False) -> str:
        """Canonical JSON; runtime is left out by default so equal runs give
        byte-identical output."""
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True, allow_nan=False) + "\n"


class _timed:
    def __init__(self, report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.runtime = time.perf_counter() - self.t0


# -- condition diagnostics --------------------------------------------------

def check_drift_conditions(model: DriftModel, n_grid, top: int = 5, tol: float = 0.05) -> ExperimentReport:
    """Edge-gap diagnostics delta_bar(n) - delta_i(n) along ``n_grid``.

    The edge condition asks the first few gaps to share a common limit eta;
    it is flagged when they still spread by more than ``tol`` at the largest
    n. The max condition is flagged when max_i gap exceeds the estimated eta
    by more than ``tol``.
    """
    n_grid = [int(n) for n in n_grid]
    if sorted(n_grid) != n_grid:
        raise ValueError("n_grid must be increasing")
    report = ExperimentReport("drift-conditions", seed=0, replicates=0, labels=[model.label])
    with _timed(report):
        rows = []
        for n in n_grid:
            gaps = model(n).edge_gaps()
            rows.append({"n": n, "edge_gaps": gaps[: min(top, n)], "max_gap": float(gaps.max()),
                         "alpha_min": float(alpha_vector(model(n)).min())})
        last = rows[-1]
        eta_hat = float(last["edge_gaps"][0])
        spread = float(np.ptp(last["edge_gaps"]))
        excess = last["max_gap"] - eta_hat
        report.stat("eta_estimate", eta_hat)
        report.stat("edge_gap_spread", spread)
        report.stat("max_gap_excess", excess)
        report.details["trajectory"] = rows
        report.details["edge_condition_holds"] = spread <= tol
        report.details["max_condition_holds"] = excess <= tol
    return report


# -- phase sweep ------------------------------------------------------------

@dataclass(frozen=True)
class TrichotomyRules:
    dominance: float = 0.9
    collapse: float = 0.05
    ks: float = 0.05


def _weights(model, n, replicates, seed, label, threads):
    y = stationary_spacing_matrix(model(n), replicates, _rng.child(seed, label, n), threads)
    return y, weights_from_spacing_matrix(y)


def phase_sweep(model: DriftModel, n_grid, replicates: int, seed: int, *, expected: str | None = None,
                pd_draws: int | None = None, m: int = 10, rules: TrichotomyRules = TrichotomyRules(),
                threads=1, scenario: str = "phase-sweep") -> ExperimentReport:
    """Sample stationary weights along ``n_grid`` and classify the phase.

    Outcome is one of "pd-limit", "collapse", "dominance" when exactly one
    rule fires at the largest n, "inconclusive" otherwise.
    """
    n_grid = [int(n) for n in n_grid]
    report = ExperimentReport(scenario, seed, replicates, labels=[model.label])
    with _timed(report):
        eta = model.eta
        ref = None
        if eta is not None and 0 < eta < 0.5:
            draws = pd_draws or replicates
            ref = sample_pd_top(PDConfig(2 * eta), draws, _rng.child(seed, "pd"), m, threads=threads)
        medians, rows = [], []
        for n in n_grid:
            _, w = _weights(model, n, replicates, seed, "stationary", threads)
            mu1 = w[:, 0]
            med, med_se = stats.bootstrap_median(mu1, _rng.substream(seed, "bootstrap", n))
            medians.append(med)
            row = {"n": n, "median_mu1": med, "median_mu1_se": med_se}
            if ref is not None:
                row["ks_vs_pd"], row["ks_pvalue"] = stats.ks_two_sample(mu1, ref[:, 0])
                top = np.zeros((replicates, m))
                k = min(m, n)
                top[:, :k] = w[:, :k]
                row["dprime_quantile_coupled"] = stats.quantile_coupled_l1(top, ref)
            rows.append(row)
        last = rows[-1]
        fired = {
            "dominance": last["median_mu1"] > rules.dominance,
            "collapse": last["median_mu1"] < rules.collapse and bool(np.all(np.diff(medians) <= 0)),
            "pd-limit": ref is not None and last["ks_vs_pd"] < rules.ks,
        }
        hits = [k for k, v in fired.items() if v]
        report.outcome = hits[0] if len(hits) == 1 else "inconclusive"
        report.stat("median_mu1", last["median_mu1"], last["median_mu1_se"])
        if ref is not None:
            report.stat("ks_vs_pd", last["ks_vs_pd"])
            report.stat("dprime_quantile_coupled", last["dprime_quantile_coupled"])
        report.details.update(model=model.describe(), trajectory=rows, rules=rules.__dict__, fired=fired)
        if expected is not None:
            report.verdicts.append(Verdict.check("phase", report.outcome, "==", expected))
    return report


# -- rate laws --------------------------------------------------------------

def rate_regression(model: DriftModel, n_grid, replicates: int, seed: int, *, tol: float | None = None,
                    threads=1, scenario: str = "rate-law") -> ExperimentReport:
    """Median of log mu_1 / log n (or / log log n at eta = 1/2) along ``n_grid``.

    The limit is extrapolated by a linear fit in 1/log n (1/log log n in the
    critical case), since log mu_1 = (1/(2 eta) - 1) log n + O(1).
    """
    if not model.lipschitz:
        raise ModelMismatch(f"{model.label} carries no Lipschitz certificate for the top drifts")
    eta = model.eta
    if eta is None or eta < 0.5:
        raise ModelMismatch(f"rate law needs eta >= 1/2, model declares {eta}")
    crit = model.critical
    target = -1.0 if crit else 1.0 / (2.0 * eta) - 1.0
    tol = (0.3 if crit else 0.1) if tol is None else tol
    n_grid = [int(n) for n in n_grid]
    report = ExperimentReport(scenario, seed, replicates, labels=[model.label])
    if crit:
        report.labels.append("slow-convergence diagnostic")
    with _timed(report):
        rows = []
        for n in n_grid:
            y = stationary_spacing_matrix(model(n), replicates, _rng.child(seed, "stationary", n), threads)
            log_mu1 = log_weights_from_spacings(y)[:, 0]
            scale = math.log(math.log(n)) if crit else math.log(n)
            med, se = stats.bootstrap_median(log_mu1 / scale, _rng.substream(seed, "bootstrap", n))
            rows.append({"n": n, "median_ratio": med, "median_ratio_se": se})
        last = rows[-1]
        report.stat("median_ratio", last["median_ratio"], last["median_ratio_se"])
        report.stat("target", target)
        report.verdicts.append(Verdict.check(
            f"median ratio at n={last['n']}", last["median_ratio"], "in", (target - tol, target + tol)))
        if len(rows) >= 2:
            x = [1.0 / (math.log(math.log(r["n"])) if crit else math.log(r["n"])) for r in rows]
            slope, intercept, _ = stats.linear_fit(x, [r["median_ratio"] for r in rows])
            report.stat("extrapolated_limit", intercept)
            if not crit:
                report.verdicts.append(Verdict.check(
                    "extrapolated limit", intercept, "in", (target - tol, target + tol)))
        report.details.update(model=model.describe(), trajectory=rows, tolerance=tol)
    return report


# -- Lemma bounds -----------------------------------------------------------

@dataclass(frozen=True)
class LemmaPhaseConfig:
    """Means theta_i of independent exponentials V_1..V_K (K = 0 allowed:
    the empty sum makes mu_V identically 1)."""

    thetas: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.thetas)
        if any(not x > 0 for x in t):
            raise ValueError("every theta_i must be positive")
        object.__setattr__(self, "thetas", t)

    @property
    def K(self) -> int:
        return len(self.thetas)

    @property
    def sigma(self) -> float:
        return math.sqrt(math.fsum(t * t for t in self.thetas))

    @property
    def mu_bar(self) -> float:
        partial = np.cumsum(self.thetas)
        return 1.0 / (1.0 + float(np.exp(-partial).sum()))


def _mu_v(thetas, draws, gen):
    if not thetas:
        return np.zeros(draws)
    v = gen.exponential(np.asarray(thetas), size=(draws, len(thetas)))
    return -np.log1p(np.exp(-np.cumsum(v, axis=1)).sum(axis=1))


def lemma_phase_check(cfg: LemmaPhaseConfig, replicates: int, seed, scenario="lemma-bounds") -> ExperimentReport:
    """Monte Carlo check of the three moment bounds for mu_V.

    A bound counts as violated only when the estimate is beyond it by more
    than three standard errors.
    """
    ss = _rng.as_seed_sequence(seed)
    report = ExperimentReport(scenario, int(ss.entropy), replicates)
    with _timed(report):
        log_mu = _mu_v(cfg.thetas, replicates, _rng.substream(ss, "lemma"))
        sigma, mu_bar = cfg.sigma, cfg.mu_bar
        mu = np.exp(log_mu)
        e1, s1 = stats.mean_se(mu)
        lower = math.exp(-sigma ** 2) * mu_bar
        if sigma > 0:
            e2, s2 = stats.mean_se(np.exp(log_mu / (2 * sigma)))
            upper = 4 * math.exp(0.25) * mu_bar ** (1 / (2 * sigma))
        else:
            e2, s2, upper = 1.0, 0.0, 4 * math.exp(0.25)
        e3, s3 = stats.mean_se((log_mu - math.log(mu_bar)) ** 2)
        s1, s2, s3 = (0.0 if math.isnan(s) else s for s in (s1, s2, s3))
        report.stat("sigma", sigma)
        report.stat("mu_bar", mu_bar)
        report.stat("E_mu", e1, s1)
        report.stat("E_mu_pow", e2, s2)
        report.stat("E_log_gap_sq", e3, s3)
        report.verdicts += [
            Verdict.check("E mu_V >= exp(-sigma^2) mu_bar (3 SE)", e1 + 3 * s1, ">=", lower),
            Verdict.check("E mu_V^(1/2sigma) <= 4 e^(1/4) mu_bar^(1/2sigma) (3 SE)", e2 - 3 * s2, "<=", upper),
            Verdict.check("E (log mu_V - log mu_bar)^2 <= 8 sigma^2 (3 SE)", e3 - 3 * s3, "<=", 8 * sigma ** 2),
        ]
        report.details["K"] = cfg.K
    return report


def random_lemma_configs(count: int, seed, max_k: int = 50, max_theta: float = 1.0):
    gen = _rng.substream(seed, "lemma-configs")
    out = []
    for _ in range(count):
        k = int(gen.integers(1, max_k + 1))
        # (0, max_theta]
        out.append(LemmaPhaseConfig(tuple(max_theta * (1.0 - gen.random(k)))))
    return out


def lemma_phase_suite(configs: int, replicates: int, seed: int, threads=1) -> ExperimentReport:
    cfgs = random_lemma_configs(configs, seed)
    report = ExperimentReport("lemma9", seed, replicates)
    with _timed(report):
        subs = _rng.ordered_map(
            lambda ic: lemma_phase_check(ic[1], replicates, _rng.child(seed, "config", ic[0])),
            list(enumerate(cfgs)), threads)
        failures = [
            {"config": i, "K": cfgs[i].K, "verdict": v.name}
            for i, r in enumerate(subs) for v in r.verdicts if not v.passed
        ]
        report.stat("configs", configs)
        report.stat("violations", len(failures))
        report.details["failures"] = failures
        report.verdicts.append(Verdict.check("bound violations beyond 3 SE", len(failures), "==", 0))
    return report


# -- counterexamples --------------------------------------------------------

def counterexample_scenarios(seed: int, *, n: int = 2000, replicates: int = 10_000, pd_draws: int = 10_000,
                             eta: float = 0.25, beta: float | None = None, n_grid=(256, 1024, 4096),
                             grid_replicates: int = 2000, ks_equal: float = 0.02, ks_differ: float = 0.05,
                             slope_max: float = -0.15, threads=1) -> ExperimentReport:
    """Two drift arrays that break one condition each and miss the PD limit.

    Top push: the ratios mu_2/mu_1 and mu_3/mu_2 become equal in law, which
    no PD law allows (checked against a PD(2 eta) control). Two-block: the
    edge gaps converge to eta in (0, 1/2) yet mu_1 still decays with n.
    """
    report = ExperimentReport("counterexamples", seed, replicates)
    with _timed(report):
        push = DriftModel.top_push(0.25)
        _, w = _weights(push, n, replicates, seed, "top-push", threads)
        r1, r2 = w[:, 1] / w[:, 0], w[:, 2] / w[:, 1]
        ks_push, p_push = stats.ks_two_sample(r1, r2)
        ref = sample_pd_top(PDConfig(2 * eta), pd_draws, _rng.child(seed, "pd"), 3, threads=threads)
        ks_pd, p_pd = stats.ks_two_sample(ref[:, 1] / ref[:, 0], ref[:, 2] / ref[:, 1])
        report.stat("ks_push_ratios", ks_push)
        report.stat("ks_pd_ratios", ks_pd)
        report.verdicts.append(Verdict.check(f"top push n={n}: KS(mu2/mu1, mu3/mu2)", ks_push, "<", ks_equal))
        report.verdicts.append(Verdict.check(f"PD({2 * eta:g}) control: KS(V2/V1, V3/V2)", ks_pd, ">", ks_differ))

        block = DriftModel.two_block(eta, beta)
        medians = []
        for m in n_grid:
            _, wb = _weights(block, m, grid_replicates, seed, "two-block", threads)
            medians.append(float(np.median(wb[:, 0])))
        slope, _, _ = stats.linear_fit(np.log(n_grid), np.log(medians))
        report.stat("two_block_loglog_slope", slope)
        report.verdicts.append(Verdict.check("two-block median mu1 strictly decreasing",
                                             bool(np.all(np.diff(medians) < 0)), "==", True))
        report.verdicts.append(Verdict.check("two-block log-log slope", slope, "<=", slope_max))
        report.details.update(two_block={"n_grid": list(n_grid), "median_mu1": medians,
                                         "model": block.describe()},
                              top_push={"n": n, "ks_pvalue": p_push}, pd_control={"ks_pvalue": p_pd})
    return report


def condition_suite(n_grid=(100, 1000, 10_000)) -> ExperimentReport:
    """Condition diagnostics on three reference arrays: Atlas with eta_n = n/2
    and gravity with eta_n = 1/4 satisfy both conditions; the two-block array
    keeps the edge condition but breaks the max condition."""
    report = ExperimentReport("conditions", seed=0, replicates=0)
    cases = [
        (DriftModel.atlas(proportional(0.5)), True, True),
        (DriftModel.gravity(constant(0.25)), True, True),
        (DriftModel.two_block(0.25), True, False),
    ]
    with _timed(report):
        for model, edge, mx in cases:
            sub = check_drift_conditions(model, n_grid)
            report.labels.append(model.label)
            report.details[model.label] = {"eta_estimate": sub.statistics["eta_estimate"]["estimate"],
                                           "max_gap_excess": sub.statistics["max_gap_excess"]["estimate"],
                                           "edge_condition_holds": sub.details["edge_condition_holds"],
                                           "max_condition_holds": sub.details["max_condition_holds"]}
            report.verdicts.append(Verdict.check(f"{model.label} edge condition holds",
                                                 sub.details["edge_condition_holds"], "==", edge))
            report.verdicts.append(Verdict.check(f"{model.label} max condition holds",
                                                 sub.details["max_condition_holds"], "==", mx))
    return report
