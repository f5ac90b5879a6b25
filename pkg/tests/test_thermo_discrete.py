import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qgas import thermo_discrete as td
from qgas.errors import CapacityError, DomainError
from qgas.exchange_algebra import InternalState, grand_trace_exact


def series_occupation(x, delta, n_max=200):
    """Mean occupation from the weighted occupancy series: w(0)=w(1)=1, w(n>=2)=1-delta."""
    z = math.exp(-x)
    w = [1.0, 1.0] + [1.0 - delta] * (n_max - 1)
    num = math.fsum(n * w[n] * z**n for n in range(n_max + 1))
    den = math.fsum(w[n] * z**n for n in range(n_max + 1))
    return num / den


def point_at_x(x, delta, beta=1.0, eps=0.0):
    return td.GrandPoint(beta, eps - x / beta, delta)


# --- occupation --------------------------------------------------------------


def test_occupation_bose_limit():
    assert td.occupation(0.0, point_at_x(1.0, 0.0)) == pytest.approx(0.5819767068693264, abs=1e-15)


def test_occupation_fermi_limit():
    assert td.occupation(0.0, point_at_x(0.7, 1.0)) == pytest.approx(0.3318122278318339, abs=1e-15)


def test_occupation_interpolating_matches_series_oracle():
    oracle = series_occupation(0.5, 0.5)
    assert oracle == pytest.approx(1.0906947354156701, abs=1e-13)
    assert td.occupation(0.0, point_at_x(0.5, 0.5)) == pytest.approx(oracle, abs=1e-13)


@pytest.mark.parametrize("x", [0.05, 0.3, 1.0, 2.5, 7.0])
@pytest.mark.parametrize("delta", [0.1, 0.37, 0.5, 0.9])
def test_occupation_against_series(x, delta):
    assert td.occupation_reduced(x, delta) == pytest.approx(series_occupation(x, delta, 4000), rel=1e-12)


def test_occupation_direct_formula():
    for x in (-3.0, -0.2, 0.4, 3.0, 40.0):
        for delta in (0.2, 0.8):
            direct = 1 / math.expm1(x) - 2 * delta / (math.exp(2 * x) - delta)
            assert td.occupation_reduced(x, delta) == pytest.approx(direct, rel=1e-12)


def test_occupation_large_x_no_overflow():
    assert td.occupation_reduced(800.0, 0.3) == 0.0
    assert td.occupation_reduced(50.0, 0.3) == pytest.approx(math.exp(-50.0), rel=1e-12)


def test_occupation_poles_raise():
    with pytest.raises(DomainError) as err:
        td.occupation(1.0, td.GrandPoint(1.0, 1.0, 0.5), level=3)
    assert err.value.level == 3
    # exp(2x) = delta at x = ln(delta)/2
    delta = 0.25
    x = 0.5 * math.log(delta)
    with pytest.raises(DomainError):
        td.occupation(0.0, td.GrandPoint(1.0, -x, delta))


def test_fermi_pole_removable():
    assert td.occupation(0.0, td.GrandPoint(2.0, 0.0, 1.0)) == 0.5


def test_occupation_vectorized():
    xs = np.linspace(0.1, 5.0, 7)
    vals = td.occupation_reduced(xs, 0.4)
    assert vals.shape == xs.shape
    assert vals == pytest.approx([td.occupation_reduced(float(x), 0.4) for x in xs])


def test_occupation_decreasing_in_delta_with_endpoints():
    xs = np.linspace(0.05, 8.0, 40)
    ds = np.linspace(0.0, 1.0, 21)
    grid = np.array([[td.occupation_reduced(float(x), float(d)) for d in ds] for x in xs])
    assert np.all(np.diff(grid, axis=1) < 0)
    np.testing.assert_allclose(grid[:, 0], 1 / np.expm1(xs), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(grid[:, -1], 1 / (np.exp(xs) + 1), rtol=1e-12, atol=1e-12)


def test_discriminant_lemma():
    xs = np.linspace(-10, 10, 401)
    for d in np.linspace(0, 1, 51):
        assert np.all(np.exp(2 * xs) - 2 * d * np.exp(xs) + d >= -1e-15)


# --- partition function -----------------------------------------------------


def test_log_partition_single_level():
    spec = td.Spectrum(((0.0, 1),))
    point = td.GrandPoint(1.0, -math.log(2.0), 0.5)
    assert td.log_partition(spec, point) == pytest.approx(0.5596157879354227, abs=1e-15)


def test_log_partition_bose_limit():
    spec = td.Spectrum(((0.0, 2), (0.8, 1), (1.7, 3)))
    point = td.GrandPoint(1.4, -0.3, 0.0)
    z = [math.exp(point.beta * (point.mu - e)) for e, _ in spec.levels]
    expected = sum(-g * math.log(1 - zi) for (_, g), zi in zip(spec.levels, z))
    assert td.log_partition(spec, point) == pytest.approx(expected, rel=1e-14)


def test_log_partition_matches_enumeration():
    # beta eps = (0.5, 1.0), beta mu = 0  ->  z = (0.6065, 0.3679)
    spec = td.Spectrum(((0.5, 1), (1.0, 1)))
    point = td.GrandPoint(1.0, 0.0, 0.25)
    trace = grand_trace_exact([0.5, 1.0], 1.0, 0.0, InternalState(0.25), 80, "factorized")
    assert math.exp(td.log_partition(spec, point)) == pytest.approx(trace, abs=1e-12)


def test_log_partition_rejects_divergent_branch():
    spec = td.Spectrum(((0.0, 1), (1.0, 1)))
    with pytest.raises(DomainError) as err:
        td.log_partition(spec, td.GrandPoint(1.0, 0.5, 0.5))
    assert err.value.branch == "analytic-continuation"
    assert err.value.level == 0


def test_log_partition_fermi_any_mu():
    spec = td.Spectrum(((0.0, 1), (1.0, 2)))
    point = td.GrandPoint(1.0, 0.5, 1.0)
    expected = math.log1p(math.exp(0.5)) + 2 * math.log1p(math.exp(-0.5))
    assert td.log_partition(spec, point) == pytest.approx(expected, rel=1e-15)


# --- spectrum ------------------------------------------------------------------


def test_spectrum_validation():
    with pytest.raises(ValueError):
        td.Spectrum(((1.0, 1), (0.0, 1)))
    with pytest.raises(ValueError):
        td.Spectrum(((0.0, 0),))
    with pytest.raises(ValueError):
        td.Spectrum(((math.inf, 1),))
    s = td.Spectrum.from_energies([1.0, 0.0], [2, 1])
    assert s.levels == ((0.0, 1), (1.0, 2))
    assert s.modes() == [0.0, 1.0, 1.0]


# --- admissible mu ---------------------------------------------------------------


def test_admissible_fermi_has_no_bands():
    spec = td.Spectrum(((0.0, 1), (1.0, 1)))
    dom = td.admissible_mu(spec, 1.0, 1.0)
    assert dom.forbidden_bands == ()
    assert dom.allowed == ((-math.inf, math.inf),)
    assert dom.contains(0.5)


def test_admissible_bose_is_below_ground_level():
    spec = td.Spectrum(((0.3, 1), (1.0, 1)))
    dom = td.admissible_mu(spec, 2.0, 0.0)
    assert dom.allowed == ((-math.inf, 0.3),)
    assert dom.contains(0.29) and not dom.contains(0.3) and not dom.contains(5.0)


def test_admissible_two_levels_example():
    spec = td.Spectrum(((0.0, 1), (1.0, 1)))
    dom = td.admissible_mu(spec, 1.0, math.exp(-2.0))
    assert dom.forbidden_bands == pytest.approx([(0.0, 1.0), (1.0, 2.0)])
    assert len(dom.allowed) == 2
    assert dom.allowed[0] == (-math.inf, 0.0)
    assert dom.allowed[1][0] == pytest.approx(2.0) and dom.allowed[1][1] == math.inf


def sign_scan(spec, beta, delta, mus):
    negative = []
    for mu in mus:
        p = td.GrandPoint(beta, float(mu), delta)
        try:
            occ = [td.occupation(e, p) for e, _ in spec.levels]
        except DomainError:
            negative.append(True)
            continue
        negative.append(min(occ) < 0)
    return np.array(negative)


@pytest.mark.parametrize("delta", [0.05, 0.3, 0.7])
def test_sign_scan_matches_bands(delta):
    spec = td.Spectrum(((0.0, 1), (0.4, 2), (2.5, 1)))
    beta = 1.5
    mus = np.linspace(-2.0, 6.0, 1601)
    dom = td.admissible_mu(spec, beta, delta)
    neg = sign_scan(spec, beta, delta, mus)
    predicted = np.array([not dom.contains(float(m)) for m in mus])
    np.testing.assert_array_equal(neg, predicted)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=5),
    st.floats(0.1, 5.0),
    st.floats(0.0, 1.0),
    st.floats(-20, 20, allow_nan=False),
)
def test_occupation_nonnegative_on_admissible_set(energies, beta, delta, mu):
    spec = td.Spectrum.from_energies(energies)
    dom = td.admissible_mu(spec, beta, delta)
    assume(dom.contains(mu))
    p = td.GrandPoint(beta, mu, delta)
    for e, _ in spec.levels:
        x = beta * (e - mu)
        assume(abs(x) > 1e-9 and abs(math.expm1(2 * x) + 1 - delta) > 1e-9)
        assert td.occupation(e, p) >= 0.0


# --- reports ---------------------------------------------------------------


SPEC = td.Spectrum(((0.0, 1), (0.35, 2), (1.1, 1), (2.0, 3)))


def bose_report(spec, beta, mu):
    ln_xi = n = u = 0.0
    for e, g in spec.levels:
        z = math.exp(beta * (mu - e))
        ln_xi += -g * math.log(1 - z)
        n += g * z / (1 - z)
        u += g * e * z / (1 - z)
    omega = -ln_xi / beta
    return ln_xi, omega, n, u, beta * (u - mu * n - omega)


def test_report_bose_limit():
    beta, mu = 1.3, -0.4
    rep = td.report(SPEC, td.GrandPoint(beta, mu, 0.0))
    ln_xi, omega, n, u, s = bose_report(SPEC, beta, mu)
    assert rep.log_partition == pytest.approx(ln_xi, abs=1e-12)
    assert rep.omega == pytest.approx(omega, abs=1e-12)
    assert rep.pressure_volume == pytest.approx(-omega, abs=1e-12)
    assert rep.total_number == pytest.approx(n, abs=1e-12)
    assert rep.internal_energy == pytest.approx(u, abs=1e-12)
    assert rep.entropy == pytest.approx(s, abs=1e-12)


def ln_xi_at(spec, beta, z, delta):
    """ln Xi with fugacity z held fixed (mu = ln z / beta)."""
    return td.log_partition(spec, td.GrandPoint(beta, math.log(z) / beta, delta))


@pytest.mark.parametrize("delta", [0.0, 0.3, 0.5, 0.9, 1.0])
def test_number_and_energy_by_finite_differences(delta):
    beta, mu = 0.9, -0.25
    z = math.exp(beta * mu)
    rep = td.report(SPEC, td.GrandPoint(beta, mu, delta))
    h = 1e-6 * z
    n_fd = z * (ln_xi_at(SPEC, beta, z + h, delta) - ln_xi_at(SPEC, beta, z - h, delta)) / (2 * h)
    assert n_fd == pytest.approx(rep.total_number, rel=1e-6)
    hb = 1e-6 * beta
    u_fd = -(ln_xi_at(SPEC, beta + hb, z, delta) - ln_xi_at(SPEC, beta - hb, z, delta)) / (2 * hb)
    assert u_fd == pytest.approx(rep.internal_energy, rel=1e-6)


def test_euler_relation_and_additivity():
    point = td.GrandPoint(1.7, -0.2, 0.45)
    rep = td.report(SPEC, point)
    T = 1 / point.beta
    assert rep.omega == pytest.approx(rep.internal_energy - T * rep.entropy - point.mu * rep.total_number,
                                      abs=1e-10)
    left, right = SPEC.split(2)
    a, b = td.report(left, point), td.report(right, point)
    assert a.log_partition + b.log_partition == pytest.approx(rep.log_partition, rel=1e-15)
    assert a.total_number + b.total_number == pytest.approx(rep.total_number, rel=1e-15)
    assert a.internal_energy + b.internal_energy == pytest.approx(rep.internal_energy, rel=1e-15)
    assert a.occupations + b.occupations == rep.occupations


# --- solve_mu -----------------------------------------------------------------


def test_solve_mu_bose_single_level():
    spec = td.Spectrum(((1.0, 1),))
    mu = td.solve_mu(spec, 1.0, 0.0, 1.0)
    assert mu == pytest.approx(1.0 - math.log(2.0), abs=1e-12)
    assert mu == pytest.approx(0.3068528194400547, abs=1e-12)


def test_solve_mu_fermi_symmetric_point():
    spec = td.Spectrum(((0.0, 1), (1.0, 1)))
    assert td.solve_mu(spec, 1.0, 1.0, 1.0) == pytest.approx(0.5, abs=1e-12)


def test_solve_mu_interpolating_residual():
    spec = td.Spectrum(((0.0, 1), (0.5, 1), (1.0, 1)))
    mu = td.solve_mu(spec, 2.0, 0.5, 1.2)
    assert mu < 0.0
    n = td.total_number(spec, td.GrandPoint(2.0, mu, 0.5))
    assert abs(n - 1.2) <= 1e-10 * 1.2


@pytest.mark.parametrize("target", [1e-6, 0.01, 1.0, 50.0, 1e4])
def test_solve_mu_wide_range(target):
    spec = td.Spectrum(((1.5, 2), (2.0, 1), (3.0, 4)))
    mu = td.solve_mu(spec, 1.2, 0.3, target)
    assert mu < 1.5
    assert abs(td.total_number(spec, td.GrandPoint(1.2, mu, 0.3)) - target) <= 1e-9 * target


def test_solve_mu_fermi_capacity():
    spec = td.Spectrum(((0.0, 1), (1.0, 2)))
    with pytest.raises(CapacityError) as err:
        td.solve_mu(spec, 1.0, 1.0, 3.0)
    assert err.value.supremum == 3.0


# --- operator-exact vs factorized --------------------------------------------


def test_compare_bose_and_fermi_limits_agree():
    spec = td.Spectrum(((0.0, 1), (0.5, 1)))
    for delta in (0.0, 1.0):
        cmp_ = td.compare_exact_factorized(spec, 1.0, -0.4, delta, 8)
        assert cmp_.abs_diff == 0.0
        assert cmp_.first_divergent_order is None


@pytest.mark.parametrize("delta", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("energies", [(0.0, 0.5), (0.1, 0.4, 0.9)])
def test_first_divergent_order_is_four(delta, energies):
    spec = td.Spectrum.from_energies(list(energies))
    beta, mu = 1.5, -0.3
    cmp_ = td.compare_exact_factorized(spec, beta, mu, delta, 6)
    assert cmp_.first_divergent_order == 4
    expected = delta * (1 - delta) * sum(
        math.exp(-2 * beta * (a + b - 2 * mu))
        for i, a in enumerate(energies) for b in energies[i + 1:])
    assert cmp_.order_gaps[4] == pytest.approx(expected, rel=1e-12)
    assert cmp_.abs_diff > 0
