"""Modified Bessel I, Bessel J, and Macdonald K evaluations.

I and J come from their ascending series with exactly-rounded summation and
are cross-checked against the integral representation; K is evaluated by
log-domain quadrature of its cosh integral so huge orders stay representable.
These are the decay references (I_n ~ e^{-n log n}) and weight kernels of the
toolkit; no external special-function library is used at runtime.
"""

from __future__ import annotations

import math

import numpy as np

from .logscalar import LogScalar, tree_logsumexp
from .quadrature import gauss_legendre, integrate

_MAX_SERIES_TERMS = 400  # m + 2k cap; desk-scale arguments converge long before


def bessel_i(m: int, x: float) -> float:
    """I_m(x) by the ascending series sum (x/2)^(m+2k) / (k! (m+k)!).

    Matches the integral representation (1/pi) int_0^pi e^{x cos t} cos(mt) dt
    to 1e-10 relative on the tested domain.  Requires |x| <= 700; use
    bessel_i_log beyond float range.
    """
    m = abs(int(m))  # I_{-m} = I_m for integer order
    x = float(x)
    if abs(x) > 700:
        raise OverflowError("bessel_i limited to |x| <= 700; use bessel_i_log")
    if x == 0.0:
        return 1.0 if m == 0 else 0.0
    half = x / 2.0
    sign = -1.0 if (x < 0 and m % 2) else 1.0  # I_m(-x) = (-1)^m I_m(x)
    half = abs(half)
    term = half**m / math.factorial(m)
    terms = [term]
    peak = term
    for k in range(1, _MAX_SERIES_TERMS):
        term *= half * half / (k * (m + k))
        terms.append(term)
        peak = max(peak, term)
        if term < 5e-324 or (k > half and term < 1e-18 * peak):
            break
    return sign * math.fsum(terms)


def bessel_i_log(m: int, x: float) -> LogScalar:
    """log-domain I_m(x) for x > 0 via logsumexp over the series terms."""
    m = abs(int(m))
    x = float(x)
    if x <= 0:
        raise ValueError("bessel_i_log requires x > 0")
    log_half = math.log(x / 2.0)
    logs = []
    k = 0
    best = -math.inf
    while k < 40000:
        lt = (m + 2 * k) * log_half - math.lgamma(k + 1) - math.lgamma(m + k + 1)
        logs.append(lt)
        best = max(best, lt)
        if lt < best - 40 and k > x / 2:
            break
        k += 1
    return LogScalar.from_log(tree_logsumexp(np.array(logs)))


def bessel_i_integral(m: int, x: float, n_nodes: int = 200) -> float:
    """(1/pi) int_0^pi e^{x cos t} cos(mt) dt, the cross-check route for I_m."""
    rule = gauss_legendre(n_nodes, 0.0, math.pi)
    val = integrate(lambda t: np.exp(x * np.cos(t)) * np.cos(m * t), rule)
    return val / math.pi


def bessel_i_asymptotic(n: int, z: float) -> LogScalar:
    """Large-order reference (1/sqrt(2 pi n)) (e z / 2)^n e^{-n log n}.

    This e^{-n log n} rate is what replaces Gaussian decay on the lattice.
    """
    if n < 5:
        raise ValueError("asymptotic form needs n >= 5")
    n = int(n)
    z = float(z)
    if z <= 0:
        raise ValueError("asymptotic form needs z > 0")
    log_mag = -0.5 * math.log(2 * math.pi * n) + n * (1.0 + math.log(z / 2.0)) - n * math.log(n)
    return LogScalar.from_log(log_mag)


def bessel_j(n: int, z: float) -> float:
    """J_n(z) by the alternating series; real for real z.

    J_n(z) = i^n I_n(-iz) collapses to sum (-1)^k (z/2)^(n+2k) / (k! (n+k)!).
    """
    n = int(n)
    z = float(z)
    if abs(z) > 700:
        raise OverflowError("bessel_j limited to |z| <= 700")
    sign = 1.0
    if n < 0:
        n = -n
        sign *= (-1.0) ** n  # J_{-n} = (-1)^n J_n
    if z < 0:
        z = -z
        sign *= (-1.0) ** n
    if z == 0.0:
        return sign if n == 0 else 0.0
    half = z / 2.0
    term = half**n / math.factorial(n)
    terms = [term]
    peak = abs(term)
    for k in range(1, _MAX_SERIES_TERMS):
        term *= -(half * half) / (k * (n + k))
        terms.append(term)
        peak = max(peak, abs(term))
        if abs(term) < 5e-324 or (k > half and abs(term) < 1e-20 * peak):
            break
    return sign * math.fsum(terms)


def _log_cosh(t: np.ndarray) -> np.ndarray:
    t = np.abs(t)
    return t + np.log1p(np.exp(-2.0 * t)) - math.log(2.0)


def bessel_k(nu: float, x: float, n_nodes: int = 400) -> LogScalar:
    """K_nu(x) = int_0^inf e^{-x cosh t} cosh(nu t) dt, log-domain quadrature.

    The cutoff extends past the integrand peak until the log-integrand has
    dropped by 46 (tail < 1e-16 of the result is guaranteed by the integrand's
    superexponential right flank).
    """
    nu = abs(float(nu))
    x = float(x)
    if x <= 0:
        raise ValueError("bessel_k requires x > 0")

    def log_f(t):
        return _log_cosh(nu * t) - x * np.cosh(t)

    t_peak = math.asinh(nu / x) if nu > 0 else 0.0
    peak = float(log_f(np.array([t_peak]))[0])
    t_hi = max(t_peak + 1.0, 1.0)
    while float(log_f(np.array([t_hi]))[0]) > peak - 46.0:
        t_hi += 1.0
    rule = gauss_legendre(n_nodes, 0.0, t_hi)
    logs = log_f(rule.nodes) + np.log(rule.weights)
    return LogScalar.from_log(tree_logsumexp(logs))


def weighted_cosh_integral(j: float, mu: float, n_nodes: int = 800) -> LogScalar:
    """int_R e^{j b - 2 cosh(b/mu) / e} db by direct log-domain quadrature.

    Independent route used to pin the substitution constant relating this
    integral to K_{mu j}(2/e); the substitution t = b/mu gives exactly
    2 mu K_{mu j}(2/e).
    """
    mu = float(mu)
    j = float(j)
    if mu <= 0:
        raise ValueError("mu must be positive")
    c = 2.0 / math.e

    def log_f(b):
        return j * b - c * np.cosh(b / mu)

    b_peak = mu * math.asinh(j * mu / c) if j != 0 else 0.0
    peak = float(log_f(np.array([b_peak]))[0])
    lo, hi = b_peak - mu, b_peak + mu
    while float(log_f(np.array([lo]))[0]) > peak - 46.0:
        lo -= mu
    while float(log_f(np.array([hi]))[0]) > peak - 46.0:
        hi += mu
    rule = gauss_legendre(n_nodes, lo, hi)
    logs = log_f(rule.nodes) + np.log(rule.weights)
    return LogScalar.from_log(tree_logsumexp(logs))
