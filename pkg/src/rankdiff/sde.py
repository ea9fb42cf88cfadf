"""Euler-Maruyama simulation of Brownian particles with rank-dependent drift.

At each step the particles are ranked from the top (ties go to the lower
particle index), particle of rank j receives drift delta_j for the whole
step, and independent N(0, dt) noise is added.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .errors import ConditionViolated
from .types import DriftSpec, SpacingSample, alpha_vector

NOISE_BLOCK = 1024


class NotTightWarning(UserWarning):
    """The drift vector violates the stationarity condition; spacings diverge."""


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.005
    t_max: float = 400.0
    burn_in: float | None = None
    thin: int | None = None
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.dt <= 0 or self.t_max <= 0:
            raise ValueError("dt and t_max must be positive")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.t_max / 4)
        if self.thin is None:
            object.__setattr__(self, "thin", max(1, round(1 / self.dt)))
        if not 0 <= self.burn_in < self.t_max:
            raise ValueError("need 0 <= burn_in < t_max")
        if self.thin < 1 or self.noise_scale < 0:
            raise ValueError("thin must be >= 1 and noise_scale >= 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def burn_steps(self) -> int:
        return int(round(self.burn_in / self.dt))


@dataclass(frozen=True)
class ParticleState:
    t: float
    x: np.ndarray = field(repr=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1 or not np.all(np.isfinite(x)):
            raise ValueError("positions must be a finite 1-d vector")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.size


def rank_drifts(x: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """Drift per particle for positions x of shape (..., n)."""
    order = np.argsort(-x, axis=-1, kind="stable")
    drift = np.empty_like(x, dtype=float)
    np.put_along_axis(drift, order, np.broadcast_to(deltas, x.shape), axis=-1)
    return drift


def step(state: ParticleState, spec: DriftSpec, cfg: SimConfig, rng) -> ParticleState:
    if spec.n != state.n:
        raise ValueError("drift vector and state disagree on n")
    x = state.x + rank_drifts(state.x, spec.deltas) * cfg.dt
    if cfg.noise_scale > 0:
        z = _rng.as_generator(rng).standard_normal(state.n)
        x = x + cfg.noise_scale * np.sqrt(cfg.dt) * z
    return ParticleState(state.t + cfg.dt, x)


def default_initial_state(spec: DriftSpec) -> ParticleState:
    """Top particle at 0, gaps set to the stationary mean spacings 1/(2 alpha_j).

    Falls back to unit gaps where alpha_j <= 0.
    """
    alpha = alpha_vector(spec)
    gaps = np.where(alpha > 0, 1.0 / (2.0 * np.where(alpha > 0, alpha, 1.0)), 1.0)
    return ParticleState(0.0, -np.concatenate([[0.0], np.cumsum(gaps)]))


def _check_tight(spec):
    alpha = alpha_vector(spec)
    bad = np.nonzero(alpha <= 0)[0]
    if bad.size:
        err = ConditionViolated(int(bad[0]) + 1, float(alpha[bad[0]]))
        warnings.warn(f"{err}; spacings are not tight", NotTightWarning, stacklevel=3)


def _simulate(x0: np.ndarray, gens, spec: DriftSpec, cfg: SimConfig) -> np.ndarray:
    """Run P paths at once; returns spacings of shape (P, samples, n-1)."""
    x = np.array(x0, dtype=float)
    P, n = x.shape
    deltas = spec.deltas
    sq = cfg.noise_scale * np.sqrt(cfg.dt)
    total, burn, thin = cfg.n_steps, cfg.burn_steps, cfg.thin
    out = []
    s = 0
    while s < total:
        b = min(NOISE_BLOCK, total - s)
        if cfg.noise_scale > 0:
            z = np.stack([g.standard_normal((b, n)) for g in gens], axis=1)
        for k in range(b):
            x += rank_drifts(x, deltas) * cfg.dt
            if cfg.noise_scale > 0:
                x += sq * z[k]
            s += 1
            if s > burn and (s - burn) % thin == 0:
                xs = -np.sort(-x, axis=1)
                out.append(xs[:, :-1] - xs[:, 1:])
    if not out:
        return np.empty((P, 0, n - 1))
    return np.stack(out, axis=1)


def run_to_stationarity(spec: DriftSpec, cfg: SimConfig, init: ParticleState | None, rng) -> list[SpacingSample]:
    """Simulate one path to t_max and return the thinned post-burn-in spacings.

    A drift vector without a stationary law only triggers NotTightWarning;
    the run itself goes ahead.
    """
    _check_tight(spec)
    if init is None:
        init = default_initial_state(spec)
    y = _simulate(init.x[None, :], [_rng.as_generator(rng)], spec, cfg)[0]
    return [SpacingSample(row) for row in y]


def run_ensemble(spec: DriftSpec, cfg: SimConfig, paths: int, seed, init: ParticleState | None = None) -> np.ndarray:
    """Spacing samples for ``paths`` independent paths, shape (paths, samples, n-1).

    Path i uses the sub-stream (seed, i) and matches
    ``run_to_stationarity(spec, cfg, init, substream(seed, i))`` exactly.
    """
    _check_tight(spec)
    if init is None:
        init = default_initial_state(spec)
    gens = [_rng.substream(seed, i) for i in range(paths)]
    x0 = np.tile(init.x, (paths, 1))
    return _simulate(x0, gens, spec, cfg)
