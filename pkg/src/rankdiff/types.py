"""Sequence-space types, the metrics d and d', and drift parametrizations.

Ranks are 1-based and rank 1 is the *largest* particle throughout the
package, so ``deltas[0]`` is the drift handed to the top particle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditionViolated

SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class DriftSpec:
    """Rank drifts (delta_1(n), ..., delta_n(n)) for an n-particle system."""

    deltas: np.ndarray

    def __post_init__(self):
        deltas = _frozen(self.deltas)
        if deltas.ndim != 1 or deltas.size < 2:
            raise ValueError("DriftSpec needs a 1-d vector of at least 2 drifts")
        if not np.all(np.isfinite(deltas)):
            raise ValueError("drifts must be finite")
        object.__setattr__(self, "deltas", deltas)

    @property
    def n(self) -> int:
        return self.deltas.size

    @property
    def mean_drift(self) -> float:
        return float(self.deltas.mean())

    def edge_gaps(self) -> np.ndarray:
        """delta_bar(n) - delta_i(n) for every rank i."""
        return self.mean_drift - self.deltas

    def __repr__(self):
        return f"DriftSpec(n={self.n})"


def atlas(n: int, eta_n: float) -> DriftSpec:
    """Only the bottom particle is pushed, with drift eta_n."""
    deltas = np.zeros(n)
    deltas[-1] = eta_n
    return DriftSpec(deltas)


def gravity(n: int, eta_n: float) -> DriftSpec:
    """One-dimensional gravity model: delta_i = eta_n (2i - n - 1) / n."""
    i = np.arange(1, n + 1)
    return DriftSpec(eta_n * (2 * i - n - 1) / n)


def top_push(n: int, push: float = 0.25) -> DriftSpec:
    """Atlas-like model pushed from the top: delta_1 = -push, rest zero."""
    deltas = np.zeros(n)
    deltas[0] = -push
    return DriftSpec(deltas)


def two_block(n: int, eta: float, beta: float | None = None) -> DriftSpec:
    """Antisymmetric drift array with a thin -eta top block and a -beta bulk.

    Ranks 1..floor(n**eta) get -eta, ranks up to floor(n/2) get -beta and the
    lower half mirrors the upper half with opposite sign. ``beta`` defaults
    to 4 (1 - eta).
    """
    if beta is None:
        beta = 4.0 * (1.0 - eta)
    top = int(math.floor(n ** eta))
    half = n // 2
    deltas = np.empty(n)
    i = np.arange(1, n + 1)
    upper = i <= half
    deltas[upper] = np.where(i[upper] <= top, -eta, -beta)
    # delta_i = -delta_{n-i+1} for i > n/2; for odd n the middle rank is its
    # own mirror and gets 0
    lower = np.nonzero(~upper)[0]
    deltas[lower] = -deltas[n - 1 - lower]
    if n % 2:
        deltas[half] = 0.0
    return DriftSpec(deltas)


def alpha_vector(spec: DriftSpec) -> np.ndarray:
    """alpha_k = sum_{i<=k} (delta_bar - delta_i) for k = 1..n-1."""
    return np.cumsum(spec.edge_gaps())[:-1]


def check_stationarity_condition(spec: DriftSpec) -> bool:
    return bool(np.all(alpha_vector(spec) > 0))


def require_stationary(spec: DriftSpec) -> np.ndarray:
    """Return alpha_vector(spec), raising ConditionViolated if any alpha_k <= 0."""
    alpha = alpha_vector(spec)
    bad = np.nonzero(alpha <= 0)[0]
    if bad.size:
        k = int(bad[0])
        raise ConditionViolated(k + 1, float(alpha[k]))
    return alpha


@dataclass(frozen=True, eq=False)
class SpacingSample:
    """Spacings y[j] = X_(j+1) - X_(j+2) of the decreasingly sorted positions."""

    y: np.ndarray

    def __post_init__(self):
        y = _frozen(self.y)
        if y.ndim != 1:
            raise ValueError("spacings must be a 1-d vector")
        if np.any(y < 0) or np.any(np.isnan(y)):
            raise ValueError("spacings must be nonnegative")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.size + 1

    @classmethod
    def from_positions(cls, x) -> "SpacingSample":
        xs = np.sort(np.asarray(x, dtype=float))[::-1]
        return cls(np.maximum(-np.diff(xs), 0.0))


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Decreasing nonnegative weights summing to one (an element of S')."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d vector")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        if np.any(np.diff(w) > 0):
            raise ValueError("weights must be nonincreasing")
        total = w.sum()
        err = abs(total - 1.0)
        if err > RENORMALIZE_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1")
        if err > SUM_TOL:
            w = w / total
        object.__setattr__(self, "weights", _frozen(w))

    def __len__(self):
        return self.weights.size

    def __getitem__(self, i):
        return self.weights[i]

    def top(self, m: int) -> np.ndarray:
        """First m weights, zero-padded when the sequence is shorter."""
        out = np.zeros(m)
        k = min(m, self.weights.size)
        out[:k] = self.weights[:k]
        return out


@dataclass(frozen=True, eq=False)
class PointSequence:
    """A finite nonincreasing prefix of an element of S, padded with -inf."""

    points: np.ndarray

    def __post_init__(self):
        p = _frozen(self.points)
        if p.ndim != 1:
            raise ValueError("points must be a 1-d vector")
        if np.any(np.isnan(p)) or np.any(np.diff(p) > 0):
            raise ValueError("points must be nonincreasing")
        object.__setattr__(self, "points", p)

    def padded(self, depth: int) -> np.ndarray:
        out = np.full(depth, -np.inf)
        k = min(depth, self.points.size)
        out[:k] = self.points[:k]
        return out


def metric_d(a: PointSequence, b: PointSequence, depth: int = 64) -> float:
    """Partial sum of sum_i (|a_i - b_i| ^ 1) / 2^i over the first ``depth`` terms.

    Two padded -inf coordinates contribute nothing; finite against -inf
    clamps to 1. The neglected tail is at most 2**-depth.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x, y = a.padded(depth), b.padded(depth)
    both_inf = np.isneginf(x) & np.isneginf(y)
    with np.errstate(invalid="ignore"):
        diff = np.abs(x - y)
    diff = np.where(both_inf, 0.0, np.minimum(np.nan_to_num(diff, nan=1.0, posinf=1.0), 1.0))
    return float(np.sum(diff / 2.0 ** np.arange(1, depth + 1)))


def metric_dprime(a: WeightSequence, b: WeightSequence) -> float:
    """L1 distance between weight sequences, zero-padding the shorter one."""
    m = max(len(a), len(b))
    return float(np.abs(a.top(m) - b.top(m)).sum())
