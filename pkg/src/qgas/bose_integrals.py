"""Bose-Einstein integrals g_n(z) = sum_k z^k / k^n = Li_n(z) for 0 <= z <= 1.

Two independent evaluations are provided:

* :func:`bose_integral` sums the power series with exactly rounded
  summation (``math.fsum``) up to a tail bound.  Close to z = 1 the series
  converges too slowly, so it switches to the expansion in ``ln z``
  (valid for |ln z| < 2 pi) and uses ``zeta(n)`` at z = 1.
* :func:`bose_integral_quadrature` integrates the defining integral
  ``(1/Gamma(n)) int_0^inf x^{n-1} / (e^x / z - 1) dx`` numerically.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .errors import DomainError

TAIL_TOL = 1e-17
MAX_SERIES_TERMS = 200_000
# Beyond this z the log-expansion converges in a handful of terms.
LOG_EXPANSION_Z = 0.95
LOG_EXPANSION_TERMS = 60


def _check(order, z):
    if not order > 0:
        raise DomainError(f"order must be positive, got {order!r}")
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"Bose integral needs 0 <= z <= 1, got z={z!r}")
    if z == 1.0 and order <= 1.0:
        raise DomainError(f"g_{order}(1) diverges; need order > 1")


def series_terms_needed(order: float, z: float, tol: float = TAIL_TOL) -> int:
    """Smallest K with tail bound ``z^{K+1} / ((K+1)^n (1 - z)) <= tol``."""
    if z == 0.0:
        return 0
    K = 1
    while z ** (K + 1) / ((K + 1) ** order * (1.0 - z)) > tol:
        K *= 2
    lo, hi = K // 2, K
    while lo < hi:
        mid = (lo + hi) // 2
        if z ** (mid + 1) / ((mid + 1) ** order * (1.0 - z)) > tol:
            lo = mid + 1
        else:
            hi = mid
    return max(lo, 1)


def bose_series(order: float, z: float, tol: float = TAIL_TOL) -> float:
    """Truncated power series ``sum_{k<=K} z^k / k^order`` with compensated summation."""
    _check(order, z)
    if z == 0.0:
        return 0.0
    K = series_terms_needed(order, z, tol)
    if K > MAX_SERIES_TERMS:
        raise DomainError(f"series for z={z!r} needs {K} terms; use bose_integral")
    k = np.arange(1, K + 1, dtype=float)
    terms = np.exp(k * math.log(z) - order * np.log(k))
    return math.fsum(terms)


def bose_log_expansion(order: float, z: float, terms: int = LOG_EXPANSION_TERMS) -> float:
    """``Gamma(1-n) (-ln z)^{n-1} + sum_k zeta(n-k) (ln z)^k / k!`` for non-integer n."""
    _check(order, z)
    if float(order).is_integer():
        raise DomainError("log expansion implemented for non-integer order only")
    mu = math.log(z)
    out = [special.gamma(1.0 - order) * (-mu) ** (order - 1.0)] if mu != 0.0 else []
    fact = 1.0
    power = 1.0
    for k in range(terms):
        if k:
            fact *= k
            power *= mu
        out.append(special.zeta(order - k) * power / fact)
        if mu == 0.0:
            break
    return math.fsum(out)


def bose_integral(order: float, z: float) -> float:
    """g_order(z) for 0 <= z <= 1 (z = 1 needs order > 1)."""
    _check(order, z)
    if z == 1.0:
        return float(special.zeta(order))
    if z > LOG_EXPANSION_Z and not float(order).is_integer():
        return bose_log_expansion(order, z)
    return bose_series(order, z)


def fermi_integral(order: float, z: float) -> float:
    """f_order(z) = sum_k (-1)^{k+1} z^k / k^order via its alternating series, 0 <= z <= 1."""
    if not (0.0 <= z <= 1.0):
        raise DomainError(f"Fermi integral here needs 0 <= z <= 1, got z={z!r}")
    if z == 0.0:
        return 0.0
    if z == 1.0:
        return float((1.0 - 2.0 ** (1.0 - order)) * special.zeta(order))
    K = series_terms_needed(order, z) + 1
    k = np.arange(1, K + 1, dtype=float)
    signs = np.where(k % 2 == 1, 1.0, -1.0)
    return math.fsum(signs * np.exp(k * math.log(z) - order * np.log(k)))


def bose_integral_quadrature(order: float, z: float, epsabs: float = 1e-15,
                             epsrel: float = 1e-13) -> float:
    """g_order(z) from its integral definition.

    Substituting ``x = t^2`` turns the x -> 0 end into a regular endpoint
    for order >= 1/2, including z = 1.
    """
    _check(order, z)
    if z == 0.0:
        return 0.0
    a = -math.log(z)

    def integrand(t):
        if t == 0.0:
            # limit of 2 t^{2n-1} / expm1(t^2 + a)
            if a == 0.0 and order == 1.5:
                return 2.0
            return 0.0
        return 2.0 * t ** (2.0 * order - 1.0) / math.expm1(t * t + a)

    upper = math.sqrt(60.0 + 2.0 * order * math.log(60.0 + order))
    pieces = [0.0, 0.5, 1.0, 2.0, 4.0, upper]
    total = math.fsum(integrate.quad(integrand, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=200)[0]
                      for lo, hi in zip(pieces, pieces[1:]))
    return total / special.gamma(order)
