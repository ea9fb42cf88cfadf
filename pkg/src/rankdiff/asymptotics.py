"""Large-n limits of market-weight functionals in the Poisson-Dirichlet phase.

All functions take eta in (0, 1/2); the limiting law is PD(2 eta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate
from scipy.special import digamma

from .errors import DomainError


@dataclass(frozen=True)
class EtaParam:
    eta: float

    def __post_init__(self):
        if not 0 < self.eta < 0.5:
            raise DomainError(f"eta must lie in (0, 1/2), got {self.eta}")

    @property
    def alpha(self) -> float:
        return 2.0 * self.eta


def _eta(eta) -> EtaParam:
    return eta if isinstance(eta, EtaParam) else EtaParam(float(eta))


def psi(eta, t: float, tol: float = 1e-10) -> float:
    """psi_{2 eta}(t) = 1 + 2 eta int_0^1 (1 - e^{-t x}) x^{-2 eta - 1} dx.

    The substitution x = u^{1/(1 - 2 eta)} turns the integrand into
    (1 - e^{-t x}) u^{-1/(1-2eta)} / (1 - 2 eta), which tends to
    t / (1 - 2 eta) at u = 0, so the quadrature sees no singularity.
    """
    a = _eta(eta).alpha
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 1.0
    power = 1.0 / (1.0 - a)

    def f(u):
        if u == 0.0:
            return t * power
        x = u ** power
        return -math.expm1(-t * x) / u ** power * power

    # the integrand bends near x = 1/t; a <= 1 only shrinks the quadrature
    # error, and epsrel keeps large-t requests above double precision
    knees = [u for u in (t ** -(1.0 - a), 10.0 * t ** -(1.0 - a)) if u < 1.0]
    val, _ = integrate.quad(
        f, 0.0, 1.0, points=knees or None, epsabs=tol / 2, epsrel=1e-13, limit=200
    )
    return 1.0 + a * val


def _tail_cutoff(p: float, budget: float) -> float:
    """T with 2 T^{p-1} e^{-T} / Gamma(p) <= budget and T >= 2(p - 1)."""
    T = max(50.0, p + 10.0 * math.sqrt(p), 2.0 * (p - 1.0))
    log_budget = math.log(budget)
    while math.log(2.0) + (p - 1.0) * math.log(T) - T - math.lgamma(p) > log_budget:
        T *= 1.5
    return T


def max_weight_moment(eta, p: float, tol: float = 1e-8) -> float:
    """lim E(mu_1^p) = (1/Gamma(p)) int_0^inf t^{p-1} e^{-t} / psi_{2 eta}(t) dt.

    Error budget: tol/2 to the inner psi evaluations (1/psi is 1-Lipschitz
    on psi >= 1 and the weight integrates to one), tol/10 to the truncated
    tail, the rest to the outer quadrature.
    """
    e = _eta(eta)
    if p <= 0:
        raise ValueError("p must be > 0")
    T = _tail_cutoff(p, tol / 10)
    inner = tol / 2

    def g(t):
        return math.exp(-t - math.lgamma(p)) / psi(e, t, inner)

    # weight='alg' integrates g(t) * t^(p-1) and absorbs the t -> 0 singularity
    val, _ = integrate.quad(
        g, 0.0, T, weight="alg", wvar=(p - 1.0, 0.0), epsabs=tol * 0.4, epsrel=0.0, limit=200
    )
    return val


def limit_dp(eta, p: float) -> float:
    """lim E D_p = Gamma(p - 2 eta) / (Gamma(p) Gamma(1 - 2 eta)) for p > 2 eta."""
    a = _eta(eta).alpha
    if p <= a:
        raise DomainError(f"E D_p diverges in the limit unless p > 2 eta = {a}")
    return math.exp(math.lgamma(p - a) - math.lgamma(p) - math.lgamma(1.0 - a))


def entropy_series(eta, tol: float = 1e-12) -> float:
    """2 eta sum_k 1/(k (k - 2 eta)) by direct summation plus an integral tail.

    Terms are f(k) = 2 eta / (k (k - 2 eta)), with antiderivative
    log((x - 2 eta) / x). The tail beyond K is estimated by the integral from
    K + 1/2 (midpoint rule), whose error is below max|f''| / 24 summed, i.e.
    roughly eta / (2 K^3); K is chosen to push that under tol.
    """
    a = _eta(eta).alpha
    K = max(16, int(math.ceil((a / (4.0 * tol)) ** (1.0 / 3.0))))
    total = math.fsum(a / (k * (k - a)) for k in range(1, K + 1))
    x = K + 0.5
    return total - math.log1p(-a / x)


def limit_entropy(eta, tol: float = 1e-12, validate: bool = False) -> float:
    """lim E S = 2 eta sum_{k>=1} 1/(k (k - 2 eta)) = digamma(1) - digamma(1 - 2 eta).

    With ``validate`` the direct series is evaluated too and the two routes
    must agree to ``tol``.
    """
    e = _eta(eta)
    val = float(digamma(1.0) - digamma(1.0 - e.alpha))
    if validate:
        other = entropy_series(e, tol / 2)
        if abs(val - other) > tol:
            raise ArithmeticError(f"entropy routes disagree: {val!r} vs {other!r}")
    return val
