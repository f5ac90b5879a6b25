import math

import numpy as np
import pytest

from qgas import thermo_continuum as tc
from qgas.bose_integrals import bose_integral, fermi_integral
from qgas.constants import SI
from qgas.errors import CondensationError, DomainError

DELTAS = [0.0, 0.25, 0.5, 0.75, 1.0]


# --- thermal wavelength --------------------------------------------------------


def test_wavelength_reduced_unit():
    assert tc.thermal_wavelength(1.0, 1 / (2 * math.pi)) == pytest.approx(1.0, rel=1e-15)


def test_wavelength_helium():
    lam = tc.thermal_wavelength(6.6465e-27, 4.2, SI)
    assert lam == pytest.approx(4.26e-10, rel=1e-3)
    assert lam == pytest.approx(4.2579769309731645e-10, rel=1e-12)


def test_wavelength_scaling():
    assert tc.thermal_wavelength(2.0, 3.0) / tc.thermal_wavelength(2.0, 6.0) == pytest.approx(math.sqrt(2))
    with pytest.raises(DomainError):
        tc.thermal_wavelength(-1.0, 1.0)


# --- equation of state ------------------------------------------------------


def ideal_bose(z, v):
    n = v * bose_integral(1.5, z) + z / (1 - z)
    pv = v * bose_integral(2.5, z) - math.log1p(-z)
    return n, pv


def ideal_fermi(z, v):
    # ground level of a Fermi gas: occupation z/(1+z), ln Xi = ln(1+z)
    n = v * fermi_integral(1.5, z) + z / (1 + z)
    pv = v * fermi_integral(2.5, z) + math.log1p(z)
    return n, pv


@pytest.mark.parametrize("z", [0.01, 0.2, 0.5, 0.8, 0.95])
def test_eos_bose_limit(z):
    v = 37.0
    pt = tc.eos_reduced(z, 0.0, v)
    n, pv = ideal_bose(z, v)
    assert pt.n_lambda3 * v == pytest.approx(n, abs=1e-10)
    assert pt.pv_over_kt == pytest.approx(pv, abs=1e-10)
    assert pt.ground_state_number == pytest.approx(z / (1 - z), abs=1e-14)


@pytest.mark.parametrize("z", [0.01, 0.2, 0.5, 0.8, 0.95])
def test_eos_fermi_limit(z):
    v = 37.0
    pt = tc.eos_reduced(z, 1.0, v)
    n, pv = ideal_fermi(z, v)
    assert pt.n_lambda3 * v == pytest.approx(n, abs=1e-10)
    assert pt.pv_over_kt == pytest.approx(pv, abs=1e-10)


def test_eos_thermodynamic_limit_drops_ground_state():
    pt = tc.eos_reduced(0.3, 0.4)
    assert pt.ground_state_number == 0.0
    assert pt.n_lambda3 == pytest.approx(tc.excited_density(0.3, 0.4))
    assert pt.pressure_ratio == pytest.approx(tc.excited_pressure(0.3, 0.4) / tc.excited_density(0.3, 0.4))


@pytest.mark.parametrize("delta", DELTAS)
def test_ground_state_number_is_log_derivative(delta):
    z, h = 0.4, 1e-6
    fd = z * (tc.ground_log_factor(z + h, delta) - tc.ground_log_factor(z - h, delta)) / (2 * h)
    assert fd == pytest.approx(tc.ground_number(z, delta), rel=1e-8)


def test_pressure_ratio_bose_example():
    z = tc.solve_fugacity(0.1, 0.0)
    pt = tc.eos_reduced(z, 0.0)
    assert pt.pressure_ratio == pytest.approx(0.98229, abs=1e-5)
    series = 1 - 0.1767767 * 0.1 - 0.0033005 * 0.01
    assert pt.pressure_ratio == pytest.approx(series, abs=1e-5)


def test_fermi_small_z_repulsive():
    for z in (1e-3, 0.01, 0.1):
        assert tc.eos_reduced(z, 1.0).pressure_ratio > 1.0


def test_eos_domain():
    with pytest.raises(DomainError):
        tc.eos_reduced(1.0, 0.5)
    with pytest.raises(DomainError):
        tc.eos_reduced(0.5, 1.5)


def test_gas_params():
    p = tc.GasParams(1.0, 1 / (2 * math.pi), 0.5, volume=1000.0, fugacity=0.3)
    assert p.v_over_lambda3 == pytest.approx(1000.0)
    assert p.shifted_fugacity == pytest.approx(0.045)
    assert tc.eos(p) == tc.eos_reduced(0.3, 0.5, p.v_over_lambda3)
    with pytest.raises(ValueError):
        tc.GasParams(1.0, 1.0, 0.5)
    q = tc.GasParams(1.0, 1 / (2 * math.pi), 0.5, volume=1000.0, n_target=50.0)
    assert tc.eos(q).n_lambda3 * 1000.0 == pytest.approx(50.0, rel=1e-10)


# --- solve_fugacity --------------------------------------------------------------


def test_solve_fugacity_bose_example():
    z = tc.solve_fugacity(0.1, 0.0)
    assert z == pytest.approx(0.0965, abs=1e-4)
    assert bose_integral(1.5, z) == pytest.approx(0.1, abs=1e-12)


def test_solve_fugacity_fermi_example():
    z = tc.solve_fugacity(0.1, 1.0)
    assert abs(bose_integral(1.5, z) - 2**-0.5 * bose_integral(1.5, z * z) - 0.1) <= 1e-12


@pytest.mark.parametrize("delta", DELTAS)
def test_classical_limit(delta):
    for n in (1e-8, 1e-6):
        assert tc.solve_fugacity(n, delta) == pytest.approx(n, rel=10 * n)


@pytest.mark.parametrize("delta", DELTAS)
@pytest.mark.parametrize("n", [1e-4, 0.05, 0.5])
def test_round_trip(delta, n):
    z = tc.solve_fugacity(n, delta)
    assert tc.eos_reduced(z, delta).n_lambda3 == pytest.approx(n, rel=1e-10)


def test_round_trip_with_ground_state():
    v = 50.0
    for delta in (0.0, 0.5, 1.0):
        z = tc.solve_fugacity(0.3, delta, include_ground_state=True, v_over_lambda3=v)
        assert tc.eos_reduced(z, delta, v).n_lambda3 == pytest.approx(0.3, rel=1e-10)


def test_condensation_signal():
    with pytest.raises(CondensationError) as err:
        tc.solve_fugacity(3.0, 0.0)
    assert err.value.critical == pytest.approx(2.612375348685488, rel=1e-14)
    with pytest.raises(CondensationError) as err:
        tc.solve_fugacity(1.0, 1.0)
    assert err.value.critical == pytest.approx(0.7651470246254077, rel=1e-13)
    assert tc.critical_density(0.3) == pytest.approx(
        bose_integral(1.5, 1.0) - 2**-0.5 * bose_integral(1.5, 0.3))


def test_ground_state_lifts_condensation_for_bose():
    # with a finite volume the ground level absorbs any density below z -> 1
    z = tc.solve_fugacity(5.0, 0.0, include_ground_state=True, v_over_lambda3=100.0)
    assert 0.99 < z < 1.0


# --- virial coefficients ----------------------------------------------------------


def test_virial_examples():
    v0 = tc.virial_coefficients(0.0)
    assert v0.a2 == pytest.approx(-0.1767767, abs=1e-7)
    assert v0.a3 == pytest.approx(-0.0033000598, abs=1e-9)
    assert v0.regime == tc.ATTRACTION
    v1 = tc.virial_coefficients(1.0)
    assert v1.a2 == pytest.approx(0.1767767, abs=1e-7)
    assert v1.a3 == pytest.approx(-0.0033000598, abs=1e-9)
    assert v1.regime == tc.REPULSION
    vh = tc.virial_coefficients(0.5)
    assert vh.a2 == 0.0
    assert vh.a3 == pytest.approx(-2 / (9 * math.sqrt(3)), abs=1e-15)
    assert vh.a3 == pytest.approx(-0.1283001, abs=1e-7)
    assert vh.regime == tc.WEAK_ATTRACTION


@pytest.mark.parametrize("delta", np.linspace(0, 1, 21))
def test_closed_forms(delta):
    v = tc.virial_coefficients(float(delta))
    assert v.a2 == pytest.approx((2 * delta - 1) / 2**2.5, abs=1e-15)
    assert v.a3 == pytest.approx((2 * delta - 1) ** 2 / 8 - 2 / (9 * math.sqrt(3)), abs=1e-15)


def test_cluster_coefficients():
    for delta in (0.0, 0.3, 0.5, 1.0):
        b = tc.fugacity_expansion(delta, 4)
        assert b[0] == 1.0
        assert b[1] == pytest.approx((1 - 2 * delta) / 2**2.5, abs=1e-16)
        assert b[2] == pytest.approx(0.0641500299099584, abs=1e-15)
        assert b[3] == pytest.approx(1 / 32 - delta**2 / 16, abs=1e-16)
    assert tc.fugacity_expansion(0.5, 2)[1] == 0.0
    with pytest.raises(ValueError):
        tc.fugacity_expansion(0.5, 9)


def test_cluster_coefficients_are_series_coefficients():
    delta, z = 0.37, 1e-3
    b = tc.fugacity_expansion(delta, 8)
    poly = math.fsum(bl * z ** (l + 1) for l, bl in enumerate(b))
    assert poly == pytest.approx(tc.excited_pressure(z, delta), rel=1e-15)


@pytest.mark.parametrize("delta", np.linspace(0, 1, 41))
def test_cluster_mapping_reproduces_closed_forms(delta):
    a2, a3 = tc.cluster_virial(float(delta), 3)
    v = tc.virial_coefficients(float(delta))
    assert abs(a2 - v.a2) <= 1e-12
    assert abs(a3 - v.a3) <= 1e-12
    b = tc.fugacity_expansion(float(delta), 3)
    assert a2 == pytest.approx(-b[1], abs=1e-15)
    assert a3 == pytest.approx(4 * b[1] ** 2 - 2 * b[2], abs=1e-15)


def test_fourth_order_reversion():
    # a4 = -20 b2^3 + 18 b2 b3 - 3 b4 from direct series inversion
    for delta in (0.0, 0.3, 1.0):
        _, b2, b3, b4 = tc.fugacity_expansion(delta, 4)
        a = tc.cluster_virial(delta, 4)
        assert a[2] == pytest.approx(-20 * b2**3 + 18 * b2 * b3 - 3 * b4, abs=1e-15)
    assert tc.cluster_virial(0.0, 4)[2] == pytest.approx(-1.1128932846653e-4, rel=1e-10)


def test_virial_from_cluster_rejects_bad_input():
    with pytest.raises(ValueError):
        tc.virial_from_cluster([2.0, 0.1])


# --- isotherms and fits --------------------------------------------------------------


def test_isotherm_signs():
    grid = np.logspace(-4, -1, 15)
    for delta, sign in ((0.0, -1), (1.0, 1)):
        rows = tc.isotherm(delta, grid)
        assert [r.index for r in rows] == list(range(len(grid)))
        assert all(np.sign(r.point.pressure_ratio - 1) == sign for r in rows)


def test_isotherm_records_errors_and_continues():
    rows = tc.isotherm(0.0, [0.1, 5.0, 0.2])
    assert rows[0].point is not None and rows[2].point is not None
    assert rows[1].point is None
    assert rows[1].critical == pytest.approx(2.612375348685488)
    with pytest.raises(ValueError):
        tc.isotherm(0.0, [0.1], variable="pressure")


def test_isotherm_fugacity_grid():
    rows = tc.isotherm(0.5, [0.1, 0.2], variable="fugacity")
    assert rows[1].point.fugacity == 0.2


@pytest.mark.parametrize("delta", DELTAS)
def test_fit_virial(delta):
    fit = tc.fit_virial(delta)
    v = tc.virial_coefficients(delta)
    assert fit.n_points == 41
    assert abs(fit.a2 - v.a2) <= 1e-6
    assert abs(fit.a3 - v.a3) <= 1e-3


def test_half_delta_sweep_has_no_linear_term():
    fit = tc.fit_virial(0.5)
    assert abs(fit.a2) < 1e-8
    assert fit.a3 < 0
