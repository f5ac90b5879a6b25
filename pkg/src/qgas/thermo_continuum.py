"""Ideal 3D gas of interpolating statistics in the continuum limit.

With ``z' = delta z^2`` and thermal wavelength ``lam``::

    PV/kT = (V/lam^3) [g_{5/2}(z) - 2^{-3/2} g_{5/2}(z')] + ln((1 - z')/(1 - z))
    N     = (V/lam^3) [g_{3/2}(z) - 2^{-1/2} g_{3/2}(z')] + z/(1 - z) - 2 z'/(1 - z')

The trailing pieces are the zero-momentum level's contribution.  Its sign
in the pressure matches ``ln Xi`` of the level, so ``N = z d(PV/kT)/dz``
holds for the ground-state pieces as well as the integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .bose_integrals import bose_integral
from .constants import REDUCED, Constants
from .errors import CondensationError, DomainError, QgasError

SQRT2 = math.sqrt(2.0)
INV_2_32 = 2.0**-1.5
INV_2_12 = 2.0**-0.5


def thermal_wavelength(mass: float, temperature: float, constants: Constants = REDUCED) -> float:
    """``h / sqrt(2 pi m k T)``; with reduced constants this is ``1/sqrt(2 pi m T)``."""
    if not (mass > 0 and temperature > 0):
        raise DomainError("mass and temperature must be positive")
    return constants.h / math.sqrt(2.0 * math.pi * mass * constants.k * temperature)


@dataclass(frozen=True)
class GasParams:
    """State of the continuum gas.

    Give exactly one of ``fugacity`` and ``n_target``.  ``volume=None``
    selects the thermodynamic limit, where the ground-state terms drop out.
    """

    mass: float
    temperature: float
    delta: float
    volume: float | None = None
    fugacity: float | None = None
    n_target: float | None = None
    constants: Constants = REDUCED

    def __post_init__(self):
        if not (self.mass > 0 and self.temperature > 0):
            raise DomainError("mass and temperature must be positive")
        if self.volume is not None and not self.volume > 0:
            raise DomainError("volume must be positive")
        if not 0.0 <= self.delta <= 1.0:
            raise DomainError(f"delta must lie in [0, 1], got {self.delta!r}")
        if (self.fugacity is None) == (self.n_target is None):
            raise ValueError("give exactly one of fugacity and n_target")
        if self.fugacity is not None and not 0.0 <= self.fugacity < 1.0:
            raise DomainError(f"fugacity must lie in [0, 1), got {self.fugacity!r}")
        if self.n_target is not None and not self.n_target > 0:
            raise DomainError("n_target must be positive")

    @property
    def wavelength(self) -> float:
        return thermal_wavelength(self.mass, self.temperature, self.constants)

    @property
    def v_over_lambda3(self) -> float | None:
        return None if self.volume is None else self.volume / self.wavelength**3

    @property
    def shifted_fugacity(self) -> float | None:
        return None if self.fugacity is None else self.delta * self.fugacity**2


@dataclass(frozen=True)
class EosPoint:
    """Equation-of-state values at one fugacity.

    ``n_lambda3`` is the realized ``N lam^3 / V``.  In the thermodynamic
    limit ``excited_number`` and ``ground_state_number`` are per ``V/lam^3``
    and the ground-state number is zero; with a finite volume they are
    particle counts.
    """

    fugacity: float
    n_lambda3: float
    pressure_ratio: float
    ground_state_number: float
    excited_number: float
    pv_over_kt: float


def excited_density(z: float, delta: float) -> float:
    """``g_{3/2}(z) - 2^{-1/2} g_{3/2}(delta z^2)``: excited-state ``n lam^3``."""
    return bose_integral(1.5, z) - INV_2_12 * bose_integral(1.5, delta * z * z)


def excited_pressure(z: float, delta: float) -> float:
    """``g_{5/2}(z) - 2^{-3/2} g_{5/2}(delta z^2)``: excited-state ``P lam^3 / kT``."""
    return bose_integral(2.5, z) - INV_2_32 * bose_integral(2.5, delta * z * z)


def ground_number(z: float, delta: float) -> float:
    """Mean occupation of the zero-energy level, ``z/(1-z) - 2z'/(1-z')``."""
    zp = delta * z * z
    return z / (1.0 - z) - 2.0 * zp / (1.0 - zp)


def ground_log_factor(z: float, delta: float) -> float:
    """``ln((1 - z')/(1 - z))``, the ground level's ``ln Xi``."""
    return math.log1p(-delta * z * z) - math.log1p(-z)


def _check_z(z, delta):
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")
    if not 0.0 <= z < 1.0:
        raise DomainError(f"fugacity must lie in [0, 1), got {z!r} (condensation boundary at z = 1)")


def eos_reduced(z: float, delta: float, v_over_lambda3: float | None = None) -> EosPoint:
    """Equation of state at fugacity ``z``.

    ``v_over_lambda3=None`` is the thermodynamic limit (ground-state terms
    dropped); otherwise the ground-state terms are kept.
    """
    _check_z(z, delta)
    exc_n = excited_density(z, delta)
    exc_p = excited_pressure(z, delta)
    if v_over_lambda3 is None:
        n_l3 = exc_n
        ratio = exc_p / exc_n if exc_n > 0 else 1.0
        return EosPoint(z, n_l3, ratio, 0.0, exc_n, exc_p)
    exc_count = v_over_lambda3 * exc_n
    gs = ground_number(z, delta)
    total = exc_count + gs
    pv = v_over_lambda3 * exc_p + ground_log_factor(z, delta)
    ratio = pv / total if total > 0 else 1.0
    return EosPoint(z, total / v_over_lambda3, ratio, gs, exc_count, pv)


def eos(params: GasParams) -> EosPoint:
    """Equation of state for ``params``; solves for the fugacity if needed."""
    v = params.v_over_lambda3
    if params.fugacity is not None:
        z = params.fugacity
    else:
        n_l3 = params.n_target * params.wavelength**3 / params.volume if v is not None else params.n_target
        z = solve_fugacity(n_l3, params.delta, include_ground_state=v is not None, v_over_lambda3=v)
    return eos_reduced(z, params.delta, v)


def critical_density(delta: float) -> float:
    """Excited-state ``n lam^3`` at z -> 1: ``zeta(3/2) - 2^{-1/2} g_{3/2}(delta)``."""
    return bose_integral(1.5, 1.0) - INV_2_12 * bose_integral(1.5, delta)


def solve_fugacity(n_lambda3: float, delta: float, include_ground_state: bool = False,
                   v_over_lambda3: float | None = None, tol: float = 1e-12) -> float:
    """Fugacity at which the density equation gives ``n_lambda3``.

    Raises
    ------
    CondensationError
        The target is not reachable with z < 1.  ``critical`` carries
        ``zeta(3/2) - 2^{-1/2} g_{3/2}(delta)`` (plus 1/2 per ``V/lam^3``
        at delta = 1 when the ground state is included).
    """
    if not n_lambda3 > 0:
        raise DomainError(f"n_lambda3 must be positive, got {n_lambda3!r}")
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")
    if include_ground_state and not (v_over_lambda3 and v_over_lambda3 > 0):
        raise DomainError("include_ground_state needs a positive v_over_lambda3")

    def density(z):
        n = excited_density(z, delta)
        if include_ground_state:
            n += ground_number(z, delta) / v_over_lambda3
        return n

    crit = critical_density(delta)
    if include_ground_state and delta == 1.0:
        crit += 0.5 / v_over_lambda3
    if n_lambda3 >= crit and not (include_ground_state and delta < 1.0):
        raise CondensationError(
            f"n_lambda3={n_lambda3} is at or beyond the z -> 1 limit {crit}", critical=crit)

    z_hi = 0.5
    while density(z_hi) < n_lambda3:
        z_hi = 0.5 * (1.0 + z_hi)
        if z_hi >= 1.0 - 1e-15:
            raise CondensationError(f"n_lambda3={n_lambda3} not reachable below z = 1", critical=crit)
    grid = np.linspace(0.0, z_hi, 9)
    vals = [density(z) for z in grid]
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise RuntimeError("density is not increasing on the fugacity bracket")
    z = brentq(lambda t: density(t) - n_lambda3, 0.0, z_hi,
               xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(density(z) - n_lambda3) > tol:
        raise RuntimeError(f"fugacity residual {abs(density(z) - n_lambda3)} above {tol}")
    return z


# ---------------------------------------------------------------------------
# virial expansion
# ---------------------------------------------------------------------------


ATTRACTION = "attraction"
REPULSION = "repulsion"
WEAK_ATTRACTION = "weak_attraction_third_order"


@dataclass(frozen=True)
class VirialCoefficients:
    """Coefficients of ``PV/NkT = 1 + a2 (n lam^3) + a3 (n lam^3)^2 + ...``."""

    a2: float
    a3: float
    regime: str


def classify_regime(a2: float, a3: float) -> str:
    if a2 < 0:
        return ATTRACTION
    if a2 > 0:
        return REPULSION
    if a3 < 0:
        return WEAK_ATTRACTION
    raise ValueError("a2 = 0 with a3 >= 0 has no statistical interpretation")


def virial_coefficients(delta: float) -> VirialCoefficients:
    """Second and third virial coefficients in closed form.

    ``a2 = (2 delta - 1) / 2^{5/2}``,
    ``a3 = (2 delta - 1)^2 / 8 - 2 / (9 sqrt 3)``.
    """
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")
    c = delta / SQRT2 - 1.0 / (2.0 * SQRT2)
    a2 = 0.5 * c
    a3 = c * c - 2.0 / (9.0 * math.sqrt(3.0))
    return VirialCoefficients(a2, a3, classify_regime(a2, a3))


def fugacity_expansion(delta: float, max_order: int) -> list[float]:
    """Cluster coefficients b_1..b_max_order of ``P lam^3 / kT = sum_l b_l z^l``.

    Read off the power series of ``g_{5/2}(z) - 2^{-3/2} g_{5/2}(delta z^2)``:
    every order gets ``1/l^{5/2}``; even orders ``l = 2k`` also get
    ``-2^{-3/2} delta^k / k^{5/2}``.
    """
    if not 1 <= max_order <= 8:
        raise ValueError("max_order must lie in [1, 8]")
    b = [1.0 / l**2.5 for l in range(1, max_order + 1)]
    for k in range(1, max_order // 2 + 1):
        # 1/(2k)^{5/2} - 2^{-3/2} delta^k / k^{5/2}, grouped so b_2 vanishes exactly at delta = 1/2
        b[2 * k - 1] = 2.0**-2.5 * (1.0 - 2.0 * delta**k) / k**2.5
    return b


def virial_from_cluster(b: Sequence[float]) -> list[float]:
    """Virial coefficients a_2..a_L from cluster coefficients b_1..b_L.

    Inverts ``n lam^3 = sum l b_l z^l`` for z as a power series in
    ``x = n lam^3``, substitutes into ``P lam^3/kT = sum b_l z^l`` and
    divides by x.  Requires ``b_1 = 1``.
    """
    b = np.asarray(b, dtype=float)
    L = b.size
    if L < 2 or b[0] != 1.0:
        raise ValueError("need b_1 = 1 and at least two coefficients")
    # power series stored as coefficient arrays indexed by power, truncated at L
    density = np.zeros(L + 1)
    pressure = np.zeros(L + 1)
    for l in range(1, L + 1):
        density[l] = l * b[l - 1]
        pressure[l] = b[l - 1]

    def mul(p, q):
        return np.convolve(p, q)[: L + 1]

    def compose(series, inner):
        out = np.zeros(L + 1)
        power = np.zeros(L + 1)
        power[0] = 1.0
        for l in range(1, L + 1):
            power = mul(power, inner)
            out += series[l] * power
        return out

    # fixed-point reversion: z = x - sum_{l>=2} l b_l z^l
    z = np.zeros(L + 1)
    z[1] = 1.0
    for _ in range(L):
        rest = compose(density, z)
        z = z - rest
        z[1] += 1.0
    p = compose(pressure, z)
    return list(p[2:])  # p/x = 1 + a2 x + ...; p[k] is the coefficient of x^k


def cluster_virial(delta: float, max_order: int = 3) -> list[float]:
    """Virial coefficients a_2.. re-derived from the fugacity expansion."""
    return virial_from_cluster(fugacity_expansion(delta, max_order))


# ---------------------------------------------------------------------------
# isotherms and virial fits
# ---------------------------------------------------------------------------


class IsothermRow(NamedTuple):
    index: int
    value: float
    point: EosPoint | None
    error: str | None
    critical: float | None


def isotherm(delta: float, values: Sequence[float], variable: str = "n_lambda3",
             v_over_lambda3: float | None = None) -> list[IsothermRow]:
    """One :class:`EosPoint` per grid value, in input order.

    ``variable`` is ``"n_lambda3"`` (solve for z at each density) or
    ``"fugacity"``.  Errors are stored in the row and the sweep continues.
    """
    if variable not in ("n_lambda3", "fugacity"):
        raise ValueError(f"unknown sweep variable {variable!r}")
    rows = []
    for k, value in enumerate(values):
        try:
            if variable == "fugacity":
                z = value
            else:
                z = solve_fugacity(value, delta, include_ground_state=v_over_lambda3 is not None,
                                   v_over_lambda3=v_over_lambda3)
            rows.append(IsothermRow(k, value, eos_reduced(z, delta, v_over_lambda3), None, None))
        except CondensationError as exc:
            rows.append(IsothermRow(k, value, None, str(exc), exc.critical))
        except QgasError as exc:
            rows.append(IsothermRow(k, value, None, str(exc), None))
    return rows


class VirialFit(NamedTuple):
    a2: float
    a3: float
    residual_rms: float
    n_points: int


def default_fit_grid() -> np.ndarray:
    return np.logspace(-4, -2, 41)


def fit_virial(delta: float, grid: Sequence[float] | None = None, degree: int = 3) -> VirialFit:
    """Fit ``(PV/NkT - 1)/(n lam^3)`` by a polynomial in ``n lam^3`` over a low-density isotherm.

    The constant and linear fit coefficients are a2 and a3.  The realized
    ``n lam^3`` of each point is used, so root-finder error does not enter
    the fit.
    """
    grid = default_fit_grid() if grid is None else np.asarray(grid, dtype=float)
    rows = isotherm(delta, grid)
    pts = [r.point for r in rows if r.point is not None]
    x = np.array([p.n_lambda3 for p in pts])
    y = np.array([(p.pressure_ratio - 1.0) / p.n_lambda3 for p in pts])
    coef = np.polynomial.polynomial.polyfit(x, y, degree)
    resid = y - np.polynomial.polynomial.polyval(x, coef)
    return VirialFit(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))), len(pts))
