import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma, gammainc

from rankdiff.asymptotics import EtaParam, entropy_series, limit_dp, limit_entropy, max_weight_moment, psi
from rankdiff.errors import DomainError

etas = st.floats(0.005, 0.495)


def test_psi_matches_frozen_oracle(oracles):
    for r in oracles["psi"]:
        assert psi(r["eta"], r["t"], 1e-12) == pytest.approx(r["value"], rel=1e-12)


def test_psi_is_clean_under_warnings_as_errors():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for eta in (0.01, 0.25, 0.49):
            for t in (1e-3, 1.0, 1e2, 1e4):
                psi(eta, t, 1e-12)


@given(etas, st.floats(1e-3, 1e3))
def test_psi_closed_form(eta, t):
    a = 2 * eta
    closed = math.exp(-t) + t ** a * gamma(1 - a) * gammainc(1 - a, t)
    assert psi(eta, t) == pytest.approx(closed, rel=1e-9)


@given(etas, st.floats(0, 100), st.floats(0, 100))
def test_psi_is_increasing(eta, s, t):
    lo, hi = sorted((s, t))
    assert psi(eta, lo) <= psi(eta, hi) + 1e-9


def test_psi_at_zero():
    assert psi(0.3, 0.0) == 1.0
    with pytest.raises(ValueError):
        psi(0.3, -1.0)


def test_moments_match_frozen_oracle(oracles):
    for r in oracles["moment"]:
        assert abs(max_weight_moment(r["eta"], r["p"], 1e-8) - r["value"]) < 1e-8


@settings(max_examples=20)
@given(etas, st.floats(0.3, 5))
def test_moments_are_decreasing_in_p(eta, p):
    assert max_weight_moment(eta, p + 0.5) < max_weight_moment(eta, p)


def test_dp_matches_frozen_oracle(oracles):
    for r in oracles["dp"]:
        assert limit_dp(r["eta"], r["p"]) == pytest.approx(r["value"], rel=1e-13)


def test_dp_exact_values():
    assert abs(limit_dp(0.25, 2) - 0.5) < 1e-12
    # E D_1 = 1 for every eta
    assert limit_dp(0.1, 1) == pytest.approx(1.0, abs=1e-14)


@given(etas)
def test_dp2_is_one_minus_alpha(eta):
    assert limit_dp(eta, 2) == pytest.approx(1 - 2 * eta, rel=1e-12)


def test_dp_diverges_below_alpha():
    with pytest.raises(DomainError):
        limit_dp(0.25, 0.5)


def test_entropy_matches_frozen_oracle(oracles):
    for r in oracles["entropy"]:
        assert limit_entropy(r["eta"], validate=True) == pytest.approx(r["value"], rel=1e-12)


def test_entropy_quarter():
    assert abs(limit_entropy(0.25) - 2 * math.log(2)) < 1e-12


@given(etas)
def test_entropy_routes_agree(eta):
    assert abs(entropy_series(eta, 1e-12) - limit_entropy(eta)) < 1e-11 * max(1.0, limit_entropy(eta))


@pytest.mark.parametrize("eta", [0.0, 0.5, -0.1, 0.7, float("nan")])
def test_domain(eta):
    with pytest.raises(DomainError):
        EtaParam(eta)
    with pytest.raises(DomainError):
        limit_entropy(eta)
