from math import pi, sqrt

import numpy as np
import pytest

from strainsense.errors import RegimeError, StepError
from strainsense.transmon import (
    TransmonParams,
    charge_spectrum_exact,
    frequency_approx,
    josephson_energy,
    qubit_frequency_nominal,
    strain_susceptibility,
)

TWO_PI = 2 * pi

# reference parameter point: E_J/E_C = 50, beta = 100
REF = TransmonParams(e_c=TWO_PI * 0.25e9, e_j0=TWO_PI * 12.5e9, beta=100.0)

# frozen oracle: exact omega01/2pi at the reference point, charge cutoff 30
OMEGA01_REF_HZ = 4735479731.0792

# frozen oracle: |exact - closed form|/exact over E_J/E_C
APPROX_DEVIATIONS = {
    20: 8.160136e-3,
    50: 3.066272e-3,
    100: 1.436429e-3,
    200: 6.878486e-4,
}

# pre-registered numeric-vs-analytic susceptibility deviation at E_J/E_C = 50,
# asserted with a 2x margin
CHI_DEVIATION_MARGIN = 0.1064266


def _params(ratio: float, **kw) -> TransmonParams:
    e_c = TWO_PI * 0.25e9
    return TransmonParams(e_c=e_c, e_j0=ratio * e_c, beta=100.0, **kw)


def test_josephson_energy_linear_in_strain():
    eps = 3e-4
    assert josephson_energy(REF, eps) == pytest.approx(
        REF.e_j0 * (1 + REF.beta * eps), rel=1e-15
    )


def test_omega01_frozen_reference_value():
    spec = charge_spectrum_exact(REF)
    assert spec.omega01 / TWO_PI == pytest.approx(OMEGA01_REF_HZ, rel=1e-12)


def test_eigenvalues_sorted_no_degeneracies_at_reference():
    spec = charge_spectrum_exact(REF, k=5)
    assert np.all(np.diff(spec.eigenvalues) > 0)
    assert spec.degenerate_pairs == ()


def test_cutoff_convergence():
    """cutoff 30 agrees with a much larger basis to machine precision."""
    small = charge_spectrum_exact(REF).omega01
    big = charge_spectrum_exact(
        TransmonParams(e_c=REF.e_c, e_j0=REF.e_j0, beta=REF.beta, charge_cutoff=60)
    ).omega01
    assert abs(small - big) / big < 1e-12


def test_closed_form_frequency():
    omega = qubit_frequency_nominal(REF)
    assert omega == pytest.approx(sqrt(8 * REF.e_c * REF.e_j0) - REF.e_c, rel=1e-15)
    # at E_J/E_C = 50: omega_q0/2pi = (sqrt(8*0.25*12.5) - 0.25) GHz = 4.75 GHz
    assert omega / TWO_PI == pytest.approx(4.75e9, rel=1e-12)


@pytest.mark.parametrize("ratio,expected", sorted(APPROX_DEVIATIONS.items()))
def test_exact_vs_closed_form_deviation_frozen(ratio, expected):
    p = _params(ratio)
    exact = charge_spectrum_exact(p).omega01
    approx = qubit_frequency_nominal(p)
    assert abs(exact - approx) / exact == pytest.approx(expected, rel=1e-4)


def test_closed_form_error_decreases_with_ratio():
    devs = []
    for ratio in (20, 50, 100, 200):
        p = _params(ratio)
        exact = charge_spectrum_exact(p).omega01
        devs.append(abs(exact - qubit_frequency_nominal(p)) / exact)
    assert all(a > b for a, b in zip(devs, devs[1:]))


def test_charge_offset_insensitivity():
    """Charge dispersion at E_J/E_C = 50 stays below 5e-6 relative."""
    w0 = charge_spectrum_exact(_params(50, n_g=0.0)).omega01
    w_half = charge_spectrum_exact(_params(50, n_g=0.5)).omega01
    assert abs(w0 - w_half) / w0 < 5e-6


def test_strain_shifts_frequency_up_for_positive_beta():
    w0 = charge_spectrum_exact(REF, eps=0.0).omega01
    w1 = charge_spectrum_exact(REF, eps=1e-4).omega01
    assert w1 > w0


def test_susceptibility_numeric_vs_analytic_margin():
    chi_a = strain_susceptibility(REF, mode="analytic")
    chi_n = strain_susceptibility(REF, mode="numeric")
    assert chi_a == pytest.approx(0.5 * qubit_frequency_nominal(REF) * REF.beta)
    assert abs(chi_a - chi_n) / abs(chi_n) < CHI_DEVIATION_MARGIN


def test_susceptibility_numeric_step_guard():
    with pytest.raises(StepError):
        strain_susceptibility(REF, mode="numeric", h=1.0)
    with pytest.raises(StepError):
        strain_susceptibility(REF, mode="numeric", h=1e-10)


def test_susceptibility_unknown_mode():
    with pytest.raises(ValueError):
        strain_susceptibility(REF, mode="secant")


def test_analytic_forms_refuse_outside_transmon_regime():
    p = _params(10)
    assert not p.in_transmon_regime
    with pytest.raises(RegimeError):
        frequency_approx(p, 0.0)
    with pytest.raises(RegimeError):
        strain_susceptibility(p, mode="analytic")
    # the exact diagonalization has no such restriction
    assert charge_spectrum_exact(p).omega01 > 0


def test_frequency_approx_linearization():
    eps = 2e-5
    approx = frequency_approx(REF, eps)
    # linearized = omega_q0 + (omega_q0/2) beta eps
    w0 = qubit_frequency_nominal(REF)
    assert approx.linearized == pytest.approx(w0 * (1 + 0.5 * REF.beta * eps), rel=1e-14)
    # the two forms differ by E_C*beta*eps/2 at leading order, because the
    # true slope goes with the plasma frequency omega_q0 + E_C rather than
    # omega_q0 -- the same mismatch the susceptibility comparison measures
    assert approx.nonlinear - approx.linearized == pytest.approx(
        0.5 * REF.e_c * REF.beta * eps, rel=0.1
    )


def test_params_validation():
    with pytest.raises(Exception):
        TransmonParams(e_c=-1.0, e_j0=10.0, beta=1.0)
    with pytest.raises(Exception):
        TransmonParams(e_c=1.0, e_j0=10.0, beta=1.0, charge_cutoff=2)
