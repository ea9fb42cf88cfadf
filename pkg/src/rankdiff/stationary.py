"""Exact draws from the stationary spacing law and the induced market weights.

Under the stationarity condition the spacings are independent exponentials,
spacing j having rate 2 alpha_j, so sampling needs no time discretization.
"""

from __future__ import annotations

import numpy as np

from . import rng as _rng
from .types import DriftSpec, SpacingSample, WeightSequence, require_stationary


def _exponentials(gen: np.random.Generator, rates: np.ndarray) -> np.ndarray:
    # U in (0, 1] keeps log finite
    u = 1.0 - gen.random(rates.shape)
    return -np.log(u) / rates


def sample_stationary_spacings(spec: DriftSpec, rng) -> SpacingSample:
    rates = 2.0 * require_stationary(spec)
    return SpacingSample(_exponentials(_rng.as_generator(rng), rates))


def log_weights_from_spacings(y: np.ndarray) -> np.ndarray:
    """Log market weights for spacing rows y of shape (..., n-1).

    The top particle is the reference point, so every exponent
    -sum_{j<i} y_j is <= 0 and the log-denominator is a log1p.
    """
    y = np.asarray(y, dtype=float)
    expo = np.zeros(y.shape[:-1] + (y.shape[-1] + 1,))
    expo[..., 1:] = -np.cumsum(y, axis=-1)
    log_den = np.log1p(np.exp(expo[..., 1:]).sum(axis=-1))
    return expo - log_den[..., None]


def weights_from_spacing_matrix(y: np.ndarray) -> np.ndarray:
    w = np.exp(log_weights_from_spacings(y))
    # exp of a nonincreasing vector is nonincreasing up to rounding in the
    # subtraction; enforce it so downstream checks are exact
    return np.minimum.accumulate(w, axis=-1)


def weights_from_spacings(s: SpacingSample) -> WeightSequence:
    return WeightSequence(weights_from_spacing_matrix(s.y))


def stationary_spacing_matrix(spec: DriftSpec, replicates: int, seed, threads=1) -> np.ndarray:
    """Spacings for ``replicates`` independent draws, one row per replicate.

    Row i is drawn from the sub-stream (seed, i), so any row is reproducible
    on its own and the matrix is identical for every thread count.
    """
    rates = 2.0 * require_stationary(spec)
    ss = _rng.as_seed_sequence(seed)
    out = np.empty((replicates, rates.size))

    def fill(block):
        start, stop = block
        for i in range(start, stop):
            out[i] = _exponentials(_rng.substream(ss, i), rates)

    _rng.ordered_map(fill, _rng.blocks(replicates), threads)
    return out


def stationary_weight_matrix(spec: DriftSpec, replicates: int, seed, threads=1) -> np.ndarray:
    return weights_from_spacing_matrix(stationary_spacing_matrix(spec, replicates, seed, threads))


def sample_stationary_weights(spec: DriftSpec, replicates: int, seed, threads=1) -> list[WeightSequence]:
    w = stationary_weight_matrix(spec, replicates, seed, threads)
    return [WeightSequence(row) for row in w]
