"""Poisson-Dirichlet PD(alpha) samplers and weight-sequence statistics.

Two independent constructions of PD(alpha):

* normalized atoms of a Poisson point process with intensity
  x^(-alpha-1) dx on (0, inf), truncated below an atom floor;
* GEM(alpha, 0) stick-breaking, sorted decreasingly.

A third route, normalized exponentials of ordered Exp(1) samples, converges
to PD(1/beta) as the sample size grows and serves as a cross-check.

Mass that a truncated sampler cannot resolve into individual atoms ("dust")
is spread evenly over a bounded number of small atoms, so every output still
sums to one and the dust adds almost nothing to D_p for p > 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr, logsumexp

from . import rng as _rng
from .errors import InvalidBeta
from .types import WeightSequence


@dataclass(frozen=True)
class PDConfig:
    """PD(alpha) parameter plus truncation policy for both samplers.

    ``atom_floor`` is raised where needed so that the expected number of
    PPP atoms never exceeds ``max_atoms``; the expected mass of the atoms
    below the floor is added to the normalizing sum either way. The stick
    sampler stops at ``residual_tol`` or after ``max_atoms * 4`` sticks,
    whichever comes first.
    """

    alpha: float
    atom_floor: float = 1e-8
    residual_tol: float = 1e-9
    max_atoms: int = 4096

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("PD parameter alpha must lie in (0, 1)")
        if self.atom_floor <= 0 or self.residual_tol <= 0:
            raise ValueError("truncation levels must be positive")

    @property
    def effective_floor(self) -> float:
        a = self.alpha
        return max(self.atom_floor, (a * self.max_atoms) ** (-1.0 / a))

    @property
    def max_sticks(self) -> int:
        return 4 * self.max_atoms


def _spread(mass: float, cap: float, limit: int) -> np.ndarray:
    if mass <= 0:
        return np.empty(0)
    k = int(min(max(1, math.ceil(mass / cap)), limit))
    return np.full(k, mass / k)


def _finish(atoms: np.ndarray, dust: np.ndarray) -> WeightSequence:
    w = np.concatenate([atoms, dust])
    w = np.sort(w)[::-1]
    return WeightSequence(w / w.sum())


def sample_pd_ppp(cfg: PDConfig, rng) -> WeightSequence:
    """Normalized PPP(x^(-alpha-1) dx) atoms above the effective floor."""
    gen = _rng.as_generator(rng)
    a, eps = cfg.alpha, cfg.effective_floor
    count = gen.poisson(eps ** -a / a)
    u = 1.0 - gen.random(count)
    log_atoms = math.log(eps) - np.log(u) / a
    log_tail = (1.0 - a) * math.log(eps) - math.log(1.0 - a)
    top = max(log_atoms.max(initial=-np.inf), log_tail)
    atoms = np.exp(log_atoms - top)
    tail = math.exp(log_tail - top)
    return _finish(atoms, _spread(tail, math.exp(math.log(eps) - top), cfg.max_atoms))


def sample_pd_stickbreaking(cfg: PDConfig, rng, chunk: int = 2048) -> WeightSequence:
    """Sorted GEM(alpha, 0) sticks W_i ~ Beta(1 - alpha, i alpha).

    Beta variates come from Gamma pairs; 1 - W is formed as G2 / (G1 + G2)
    so small sticks do not cancel. The residual is tracked in linear space,
    which is safe because generation stops long before it could underflow.
    """
    gen = _rng.as_generator(rng)
    a = cfg.alpha
    pieces = []
    residual = 1.0
    done = 0
    while done < cfg.max_sticks:
        i = np.arange(done + 1, min(done + chunk, cfg.max_sticks) + 1)
        g1 = gen.standard_gamma(1.0 - a, i.size)
        g2 = gen.standard_gamma(a * i)
        total = g1 + g2
        keep = np.cumprod(g2 / total) * residual
        prev = np.concatenate([[residual], keep[:-1]])
        sticks = g1 / total * prev
        hit = np.flatnonzero(keep < cfg.residual_tol)
        if hit.size:
            stop = hit[0] + 1
            pieces.append(sticks[:stop])
            residual = keep[stop - 1]
            break
        pieces.append(sticks)
        residual = keep[-1]
        done += i.size
    dust = _spread(residual, cfg.residual_tol, cfg.max_atoms)
    return _finish(np.concatenate(pieces), dust)


def ordered_exponential_weights(order_stats: np.ndarray, beta: float) -> np.ndarray:
    """exp(beta e_(i)) / sum_j exp(beta e_(j)) computed in log space."""
    z = beta * np.asarray(order_stats, dtype=float)
    return np.exp(z - logsumexp(z, axis=-1, keepdims=True))


def sample_pd_via_ordered_exponentials(beta: float, n: int, rng, method: str = "sort") -> WeightSequence:
    """Normalized exponentiated order statistics of n i.i.d. Exp(1) variables.

    ``method="renyi"`` builds the order statistics as reversed partial sums
    of e_i / i instead of sorting; the law is the same.
    """
    if not beta > 1:
        raise InvalidBeta(f"beta must exceed 1 for a PD(1/beta) limit, got {beta}")
    if n < 2:
        raise ValueError("n must be >= 2")
    gen = _rng.as_generator(rng)
    e = gen.standard_exponential(n)
    if method == "sort":
        order = np.sort(e)[::-1]
    elif method == "renyi":
        order = np.cumsum((e / np.arange(1, n + 1))[::-1])[::-1]
    else:
        raise ValueError(f"unknown method {method!r}")
    w = ordered_exponential_weights(order, beta)
    return WeightSequence(np.minimum.accumulate(w))


_SAMPLERS = {"ppp": sample_pd_ppp, "stickbreaking": sample_pd_stickbreaking}


def sample_pd(cfg: PDConfig, draws: int, seed, method: str = "ppp", threads=1) -> list[WeightSequence]:
    """``draws`` independent PD samples; draw i uses the sub-stream (seed, i)."""
    sampler = _SAMPLERS[method]
    ss = _rng.as_seed_sequence(seed)

    def run(block):
        return [sampler(cfg, _rng.substream(ss, i)) for i in range(*block)]

    return [w for part in _rng.ordered_map(run, _rng.blocks(draws), threads) for w in part]


def sample_pd_top(cfg: PDConfig, draws: int, seed, m: int, method: str = "ppp", threads=1) -> np.ndarray:
    """Top-m weights of ``draws`` PD samples, zero-padded; same streams as
    :func:`sample_pd` but only O(draws * m) memory."""
    sampler = _SAMPLERS[method]
    ss = _rng.as_seed_sequence(seed)

    def run(block):
        return np.stack([sampler(cfg, _rng.substream(ss, i)).top(m) for i in range(*block)])

    return np.concatenate(_rng.ordered_map(run, _rng.blocks(draws), threads))


def sample_ordered_exponentials(beta: float, n: int, draws: int, seed, method="sort", threads=1) -> list[WeightSequence]:
    ss = _rng.as_seed_sequence(seed)

    def run(block):
        return [sample_pd_via_ordered_exponentials(beta, n, _rng.substream(ss, i), method) for i in range(*block)]

    return [w for part in _rng.ordered_map(run, _rng.blocks(draws), threads) for w in part]


def top_matrix(samples, m: int) -> np.ndarray:
    """Top-m weights of each sample as rows, zero-padded."""
    return np.stack([s.top(m) for s in samples])


@dataclass(frozen=True)
class WeightStatistics:
    p_values: tuple
    dp: np.ndarray          # (samples, len(p_values))
    entropy: np.ndarray     # (samples,)

    @property
    def count(self) -> int:
        return self.entropy.size

    def _se(self, a):
        if self.count < 2:
            return np.full(a.shape[1:], np.nan)
        return a.std(axis=0, ddof=1) / math.sqrt(self.count)

    @property
    def dp_mean(self):
        return self.dp.mean(axis=0)

    @property
    def dp_se(self):
        return self._se(self.dp)

    @property
    def entropy_mean(self) -> float:
        return float(self.entropy.mean())

    @property
    def entropy_se(self) -> float:
        return float(self._se(self.entropy[:, None])[0])

    def table(self) -> list[dict]:
        rows = [
            {"statistic": f"D_{p:g}", "mean": float(m), "se": float(s)}
            for p, m, s in zip(self.p_values, self.dp_mean, self.dp_se)
        ]
        rows.append({"statistic": "entropy", "mean": self.entropy_mean, "se": self.entropy_se})
        return rows


def empirical_weight_statistics(samples, p_values) -> WeightStatistics:
    """Per-sample D_p = sum_i w_i^p and entropy -sum_i w_i log w_i (0 log 0 = 0)."""
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample")
    p_values = tuple(float(p) for p in p_values)
    if any(p <= 0 for p in p_values):
        raise ValueError("every p must be positive")
    dp = np.empty((len(samples), len(p_values)))
    ent = np.empty(len(samples))
    for r, s in enumerate(samples):
        w = s.weights if isinstance(s, WeightSequence) else np.asarray(s)
        for c, p in enumerate(p_values):
            dp[r, c] = np.sum(w ** p)
        ent[r] = entr(w).sum()
    return WeightStatistics(p_values, dp, ent)
