"""Grand-canonical thermodynamics of the interpolating gas on a discrete spectrum.

All quantities are in reduced units with k_B = 1: energies and the
chemical potential share one unit and ``beta`` is its inverse.  Each level
contributes a factor ``(1 - delta z_i^2) / (1 - z_i)`` to the grand
partition function, raised to its degeneracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import CapacityError, DomainError
from .exchange_algebra import InternalState, grand_trace_orders


@dataclass(frozen=True)
class Spectrum:
    """Single-particle levels as ``(energy, degeneracy)`` pairs, ascending in energy."""

    levels: tuple[tuple[float, int], ...]

    def __post_init__(self):
        levels = tuple((float(e), int(g)) for e, g in self.levels)
        if not levels:
            raise ValueError("spectrum needs at least one level")
        for k, (e, g) in enumerate(levels):
            if not math.isfinite(e):
                raise ValueError(f"level {k}: energy {e!r} is not finite")
            if g < 1:
                raise ValueError(f"level {k}: degeneracy {g} must be >= 1")
        if any(a[0] > b[0] for a, b in zip(levels, levels[1:])):
            raise ValueError("levels must be sorted by ascending energy")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_energies(cls, energies: Sequence[float], degeneracies: Sequence[int] | None = None):
        if degeneracies is None:
            degeneracies = [1] * len(energies)
        if len(degeneracies) != len(energies):
            raise ValueError("energies and degeneracies differ in length")
        pairs = sorted(zip(energies, degeneracies), key=lambda p: p[0])
        return cls(tuple(pairs))

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for e, _ in self.levels])

    @property
    def degeneracies(self) -> np.ndarray:
        return np.array([g for _, g in self.levels], dtype=float)

    @property
    def e_min(self) -> float:
        return self.levels[0][0]

    @property
    def e_max(self) -> float:
        return self.levels[-1][0]

    def modes(self) -> list[float]:
        """Energies with degeneracies expanded into separate modes."""
        return [e for e, g in self.levels for _ in range(g)]

    def split(self, k: int) -> tuple["Spectrum", "Spectrum"]:
        return Spectrum(self.levels[:k]), Spectrum(self.levels[k:])


@dataclass(frozen=True)
class GrandPoint:
    beta: float
    mu: float
    delta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu!r}")
        if not (0.0 <= self.delta <= 1.0):
            raise DomainError(f"delta must lie in [0, 1], got {self.delta!r}")

    @property
    def state(self) -> InternalState:
        return InternalState(self.delta)


@dataclass(frozen=True)
class ThermoReport:
    log_partition: float
    omega: float
    pressure_volume: float
    total_number: float
    internal_energy: float
    entropy: float
    occupations: tuple[float, ...]


# ---------------------------------------------------------------------------
# occupation numbers
# ---------------------------------------------------------------------------


def occupation_reduced(x, delta):
    """Mean occupation of a level at ``x = beta (eps - mu)``; vectorized over ``x``.

    Equal to ``1/(e^x - 1) - 2 delta/(e^{2x} - delta)`` but evaluated as
    ``[(e^x - delta)^2 + delta (1 - delta)] / [(e^x - 1)(e^{2x} - delta)]``
    which has no cancellation.  At ``delta == 1`` the pole at ``x = 0``
    is removable and the Fermi-Dirac form is returned.  Poles give inf/nan;
    :func:`occupation` turns them into errors.
    """
    x = np.asarray(x, dtype=float)
    if delta == 1.0:
        return 0.5 * (1.0 - np.tanh(0.5 * x))
    if delta == 0.0:
        with np.errstate(divide="ignore"):
            out = 1.0 / np.expm1(x)
        return out if out.ndim else float(out)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        pos = x > 0
        # x > 0: divide numerator and denominator by e^{2x}
        xp = np.where(pos, x, 1.0)
        e1 = np.exp(-xp)
        num_p = (1.0 - delta * e1) ** 2 + delta * (1.0 - delta) * e1 * e1
        den_p = np.expm1(xp) * (1.0 - delta * e1 * e1)
        xn = np.where(pos, -1.0, x)
        ex = np.exp(xn)
        num_n = (ex - delta) ** 2 + delta * (1.0 - delta)
        den_n = np.expm1(xn) * (np.expm1(2.0 * xn) + (1.0 - delta))
        out = np.where(pos, num_p / den_p, num_n / den_n)
    return out if out.ndim else float(out)


def _pole_branch(x, delta):
    if delta == 1.0:
        return None
    if x == 0.0:
        return "pole at mu = eps"
    if delta > 0.0 and math.expm1(2.0 * x) + (1.0 - delta) == 0.0:
        return "pole at exp(2 beta (eps - mu)) = delta"
    return None


def occupation(epsilon: float, point: GrandPoint, level: int | None = None) -> float:
    """Mean occupation of a level of energy ``epsilon``.

    Raises
    ------
    DomainError
        At a divergence point: ``mu == epsilon`` (unless ``delta == 1``) or
        ``exp(2 beta (epsilon - mu)) == delta``.
    """
    x = point.beta * (epsilon - point.mu)
    branch = _pole_branch(x, point.delta)
    if branch is not None:
        where = f"level {level} (eps={epsilon!r})" if level is not None else f"eps={epsilon!r}"
        raise DomainError(f"occupation diverges at {where}: {branch}", level=level, branch="pole")
    return float(occupation_reduced(x, point.delta))


# ---------------------------------------------------------------------------
# partition function and reports
# ---------------------------------------------------------------------------


def _level_log_factor(x, delta):
    """ln[(1 - delta z^2)/(1 - z)] with z = e^{-x}, written to keep accuracy near x = 0."""
    if delta == 1.0:
        return math.log1p(math.exp(-x)) if x > -30 else -x + math.log1p(math.exp(x))
    one_minus_z = -math.expm1(-x)
    one_minus_dz2 = -math.expm1(-2.0 * x) + (1.0 - delta) * math.exp(-2.0 * x)
    return math.log(one_minus_dz2) - math.log(one_minus_z)


def _check_series_branch(spec, point):
    """Reject points where some level has z >= 1 and the trace diverges.

    At delta = 1 each level's trace is the finite sum 1 + z, so every mu
    is accepted.
    """
    if point.delta == 1.0:
        return
    for k, (e, _) in enumerate(spec.levels):
        if point.beta * (e - point.mu) <= 0.0:
            raise DomainError(
                f"level {k} (eps={e!r}): fugacity z = exp(beta (mu - eps)) >= 1; "
                "the occupancy series diverges there (analytic-continuation only)",
                level=k, branch="analytic-continuation")


def log_partition(spec: Spectrum, point: GrandPoint) -> float:
    """``sum_i g_i ln[(1 - delta z_i^2)/(1 - z_i)]`` with ``z_i = exp(beta (mu - eps_i))``."""
    _check_series_branch(spec, point)
    return math.fsum(g * _level_log_factor(point.beta * (e - point.mu), point.delta)
                     for e, g in spec.levels)


def report(spec: Spectrum, point: GrandPoint) -> ThermoReport:
    """Thermodynamic state functions at a grand-canonical point.

    ``omega = -ln Xi / beta``; ``entropy`` follows from
    ``omega = U - T S - mu N`` with k_B = 1.
    """
    ln_xi = log_partition(spec, point)
    occ = tuple(occupation(e, point, level=k) for k, (e, _) in enumerate(spec.levels))
    N = math.fsum(g * n for (_, g), n in zip(spec.levels, occ))
    U = math.fsum(g * e * n for (e, g), n in zip(spec.levels, occ))
    omega = -ln_xi / point.beta
    S = point.beta * (U - point.mu * N - omega)
    return ThermoReport(
        log_partition=ln_xi,
        omega=omega,
        pressure_volume=-omega,
        total_number=N,
        internal_energy=U,
        entropy=S,
        occupations=occ,
    )


def total_number(spec: Spectrum, point: GrandPoint) -> float:
    return math.fsum(g * occupation(e, point, level=k) for k, (e, g) in enumerate(spec.levels))


# ---------------------------------------------------------------------------
# admissible chemical potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MuDomain:
    """Chemical potentials at which every level has non-negative occupation.

    ``forbidden_bands`` holds one open interval per distinct level, empty
    bands omitted.  ``allowed`` is a sorted list of disjoint open intervals:
    the complement of the union of the closed bands, so band edges (which
    are poles) are excluded.
    """

    forbidden_bands: tuple[tuple[float, float], ...]
    allowed: tuple[tuple[float, float], ...]
    poles: tuple[float, ...]

    def contains(self, mu: float) -> bool:
        return any(lo < mu < hi for lo, hi in self.allowed)

    def closure_edges(self) -> list[float]:
        """Finite endpoints of the allowed set."""
        return sorted({v for iv in self.allowed for v in iv if math.isfinite(v)})


def band_width(beta: float, delta: float) -> float:
    """Width ``-ln(delta)/(2 beta)`` of each level's forbidden band."""
    if delta == 0.0:
        return math.inf
    return -math.log(delta) / (2.0 * beta)


def admissible_mu(spec: Spectrum, beta: float, delta: float) -> MuDomain:
    """Exact set of mu on which the occupation formula is non-negative for all levels.

    Level i has negative occupation exactly on ``(eps_i, eps_i - ln(delta)/(2 beta))``.
    For ``delta == 1`` there are no bands and no poles.
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    if not 0.0 <= delta <= 1.0:
        raise DomainError(f"delta must lie in [0, 1], got {delta!r}")
    energies = sorted({e for e, _ in spec.levels})
    if delta == 1.0:
        return MuDomain((), ((-math.inf, math.inf),), ())
    width = band_width(beta, delta)
    closed = [(e, e + width) for e in energies]
    merged = []
    for lo, hi in closed:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    allowed = []
    prev = -math.inf
    for lo, hi in merged:
        allowed.append((prev, lo))
        prev = hi
    if math.isfinite(prev):
        allowed.append((prev, math.inf))
    poles = sorted(set(energies) | ({e + width for e in energies} if math.isfinite(width) else set()))
    return MuDomain(
        forbidden_bands=tuple((lo, hi) for lo, hi in closed),
        allowed=tuple(allowed),
        poles=tuple(poles),
    )


# ---------------------------------------------------------------------------
# chemical-potential solver
# ---------------------------------------------------------------------------


def _number_at_gap(spec, beta, delta, gap):
    """Total number with ``mu = e_min - gap``; shifted energies keep full precision."""
    e0 = spec.e_min
    return math.fsum(g * float(occupation_reduced(beta * ((e - e0) + gap), delta))
                     for e, g in spec.levels)


def _assert_decreasing(f, lo, hi, samples=17):
    grid = np.linspace(lo, hi, samples)
    vals = [f(t) for t in grid]
    if any(b > a for a, b in zip(vals, vals[1:])):
        raise RuntimeError("particle number is not monotone on the bracket")


def solve_mu(spec: Spectrum, beta: float, delta: float, n_target: float,
             rtol: float = 1e-10) -> float:
    """Chemical potential giving total particle number ``n_target``.

    For ``delta < 1`` the search runs on ``mu < e_min``, where N(mu) rises
    from 0 to infinity.  At ``delta == 1`` every mu is admissible and N(mu)
    rises from 0 to ``sum g_i``.

    Raises
    ------
    CapacityError
        ``delta == 1`` and ``n_target >= sum g_i``.
    """
    if not n_target > 0:
        raise ValueError(f"n_target must be positive, got {n_target!r}")
    GrandPoint(beta, 0.0, delta)

    if delta == 1.0:
        cap = float(spec.degeneracies.sum())
        if n_target >= cap:
            raise CapacityError(f"n_target={n_target} exceeds the Fermi capacity {cap}", cap)

        def f(mu):
            return total_number(spec, GrandPoint(beta, mu, delta)) - n_target

        span = 1.0 / beta + (spec.e_max - spec.e_min)
        lo, hi = spec.e_min - span, spec.e_max + span
        while f(lo) > 0:
            lo -= span
            span *= 2
        span = 1.0 / beta + (spec.e_max - spec.e_min)
        while f(hi) < 0:
            hi += span
            span *= 2
        _assert_decreasing(lambda m: -f(m), lo, hi)
        mu = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
        residual = abs(f(mu))
    else:
        # solve in t = ln(e_min - mu)
        def f(t):
            return _number_at_gap(spec, beta, delta, math.exp(t)) - n_target

        t_hi = math.log(1.0 / beta)
        while f(t_hi) > 0:
            t_hi += 2.0
        t_lo = t_hi
        while f(t_lo) < 0:
            t_lo -= 2.0
            if t_lo < -700:
                raise CapacityError("target unreachable within floating-point range", math.inf)
        _assert_decreasing(lambda t: f(t), t_lo, t_hi)
        t = brentq(f, t_lo, t_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        residual = abs(f(t))
        mu = spec.e_min - math.exp(t)
    if residual > rtol * n_target:
        raise RuntimeError(f"solve_mu residual {residual} above {rtol * n_target}")
    return mu


# ---------------------------------------------------------------------------
# operator-exact vs factorized partition function
# ---------------------------------------------------------------------------


class TraceComparison(NamedTuple):
    abs_diff: float
    first_divergent_order: int | None
    order_gaps: np.ndarray


def compare_exact_factorized(spec: Spectrum, beta: float, mu: float, delta: float,
                             n_max: int) -> TraceComparison:
    """Compare the operator-exact and factorized grand traces by enumeration.

    Degenerate levels are expanded into separate modes.  ``order_gaps[k]``
    is the exact-minus-factorized contribution at total particle number k;
    ``first_divergent_order`` is the lowest k with a nonzero gap, or None.
    The two weightings agree bitwise on every configuration with at most
    one multiply occupied mode, so gaps below order 4 are exactly zero.
    """
    state = InternalState(delta)
    modes = spec.modes()
    exact = grand_trace_orders(modes, beta, mu, state, n_max, "operator_exact")
    fact = grand_trace_orders(modes, beta, mu, state, n_max, "factorized")
    gaps = exact - fact
    nonzero = np.flatnonzero(gaps)
    first = int(nonzero[0]) if nonzero.size else None
    return TraceComparison(abs(float(np.sum(exact)) - float(np.sum(fact))), first, gaps)
