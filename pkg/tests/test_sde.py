import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from rankdiff import rng as rr
from rankdiff.sde import (NotTightWarning, ParticleState, SimConfig, default_initial_state, rank_drifts,
                          run_ensemble, run_to_stationarity, step)
from rankdiff.types import DriftSpec, atlas


def test_rank_drifts_assigns_by_rank():
    x = np.array([0.0, 2.0, 1.0])
    assert list(rank_drifts(x, np.array([10.0, 20.0, 30.0]))) == [30.0, 10.0, 20.0]


def test_ties_break_by_index():
    x = np.array([1.0, 1.0, 0.0])
    assert list(rank_drifts(x, np.array([-1.0, 0.0, 1.0]))) == [-1.0, 0.0, 1.0]


@given(arrays(float, st.integers(2, 15), elements=st.floats(-10, 10)))
def test_rank_drifts_is_a_permutation(x):
    deltas = np.arange(x.size, dtype=float)
    d = rank_drifts(x, deltas)
    assert sorted(d) == list(deltas)
    # higher particle never gets a larger rank index
    order = np.argsort(-x, kind="stable")
    assert list(d[order]) == list(deltas)


def test_noiseless_step_is_deterministic():
    spec = DriftSpec(np.array([-1.0, 1.0]))
    cfg = SimConfig(dt=0.1, t_max=1.0, noise_scale=0.0)
    s = step(ParticleState(0.0, [1.0, 0.0]), spec, cfg, rr.substream(0))
    assert np.allclose(s.x, [0.9, 0.1]) and s.t == pytest.approx(0.1)


def test_noiseless_particles_meet_and_stay_close():
    spec = DriftSpec(np.array([-1.0, 1.0]))
    cfg = SimConfig(dt=0.01, t_max=5.0, burn_in=4.0, thin=10, noise_scale=0.0)
    y = run_to_stationarity(spec, cfg, ParticleState(0.0, [1.0, -1.0]), 0)
    assert all(s.y[0] <= 2 * cfg.dt * 2 + 1e-12 for s in y)


def test_block_noise_equals_stepwise_noise():
    spec = atlas(4, 2.0)
    cfg = SimConfig(dt=0.01, t_max=25.0, burn_in=5.0, thin=50)
    init = default_initial_state(spec)
    fast = run_to_stationarity(spec, cfg, init, rr.substream(5))

    gen = rr.substream(5)
    state, slow = init, []
    # draws are consumed in blocks of NOISE_BLOCK rows; emulate that order
    from rankdiff.sde import NOISE_BLOCK
    s = 0
    while s < cfg.n_steps:
        b = min(NOISE_BLOCK, cfg.n_steps - s)
        z = gen.standard_normal((b, spec.n))
        for k in range(b):
            x = state.x + rank_drifts(state.x, spec.deltas) * cfg.dt + np.sqrt(cfg.dt) * z[k]
            state = ParticleState(state.t + cfg.dt, x)
            s += 1
            if s > cfg.burn_steps and (s - cfg.burn_steps) % cfg.thin == 0:
                slow.append(-np.diff(np.sort(x)[::-1]))
    assert len(fast) == len(slow) == 40
    assert np.allclose([f.y for f in fast], slow, rtol=0, atol=1e-12)


def test_step_uses_fresh_normal_per_call():
    spec = atlas(3, 1.0)
    cfg = SimConfig(dt=0.01, t_max=1.0)
    gen = rr.substream(1)
    ref = rr.substream(1).standard_normal(3)
    s = step(ParticleState(0.0, [0.0, -1.0, -2.0]), spec, cfg, gen)
    drift = rank_drifts(np.array([0.0, -1.0, -2.0]), spec.deltas) * 0.01
    assert np.allclose(s.x, np.array([0.0, -1.0, -2.0]) + drift + 0.1 * ref)


def test_ensemble_path_matches_single_run():
    spec = atlas(3, 3.0)
    cfg = SimConfig(dt=0.01, t_max=10.0, burn_in=2.0, thin=100)
    ens = run_ensemble(spec, cfg, 3, 42)
    single = run_to_stationarity(spec, cfg, None, rr.substream(42, 2))
    assert ens.shape == (3, 8, 2)
    assert np.allclose(ens[2], [s.y for s in single], atol=1e-12)


def test_not_tight_warns_but_runs():
    spec = DriftSpec(np.zeros(3))
    cfg = SimConfig(dt=0.1, t_max=2.0, burn_in=1.0, thin=5)
    with pytest.warns(NotTightWarning, match="alpha_k > 0"):
        out = run_to_stationarity(spec, cfg, None, 0)
    assert len(out) == 2


@pytest.mark.parametrize("kw", [dict(dt=0), dict(t_max=-1), dict(burn_in=500), dict(thin=0), dict(noise_scale=-1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SimConfig(**kw)


def test_config_defaults():
    cfg = SimConfig()
    assert cfg.burn_in == 100 and cfg.thin == 200 and cfg.n_steps == 80_000


def test_initial_state_uses_mean_spacings():
    spec = atlas(3, 3.0)  # alpha = (1, 2)
    assert np.allclose(default_initial_state(spec).x, [0.0, -0.5, -0.75])
