"""Strain-dependent transmon spectra in the charge basis.

The qubit Hamiltonian is ``H = 4 E_C (n̂ − n_g)² − E_J(ε) cos φ̂`` with the
junction energy linearized in strain, ``E_J(ε) = E_J⁰ (1 + β ε)``. In the
charge basis ``cos φ̂`` acts as nearest-neighbor hopping, so ``H`` is a real
symmetric tridiagonal matrix over ``n ∈ [−n_c, +n_c]``: diagonal
``4 E_C (n − n_g)²`` and off-diagonal ``−E_J/2``. Diagonalizing it is exact
up to the charge cutoff, which a built-in convergence guard checks on every
call.

All energies are angular frequencies (rad/s with ħ = 1); divide by 2π for
laboratory Hz.

The closed-form transmon approximation ``ω_q ≈ √(8 E_C E_J(ε)) − E_C``
and its strain linearization ``ω_q⁰ + χ_ε ε`` with ``χ_ε ≈ (ω_q⁰/2) β``
are provided alongside the exact spectrum so their error can be measured
rather than assumed. Note the analytic susceptibility is systematically low
by ≈ E_C/ω_p (the exact derivative follows the plasma frequency
``ω_p = √(8 E_C E_J)``, not ω_q⁰).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import CutoffError, ModelRangeError, RegimeError, StepError

#: minimum E_J/E_C ratio for the closed-form transmon approximation
TRANSMON_REGIME_RATIO = 20.0

#: relative ω01 change under cutoff → cutoff+5 that flags non-convergence
CONVERGENCE_TOL = 1e-9


@dataclass(frozen=True)
class TransmonParams:
    """Charging/Josephson energies and the strain coupling of one transmon.

    Parameters
    ----------
    e_c:
        Charging energy E_C as an angular frequency (rad/s).
    e_j0:
        Zero-strain Josephson energy E_J⁰ (rad/s).
    beta:
        Dimensionless strain coefficient of the junction, E_J(ε) = E_J⁰(1+βε).
    n_g:
        Dimensionless offset charge.
    charge_cutoff:
        Charge basis spans n ∈ [−charge_cutoff, +charge_cutoff].
    """

    e_c: float
    e_j0: float
    beta: float
    n_g: float = 0.0
    charge_cutoff: int = 30

    def __post_init__(self) -> None:
        if self.e_c <= 0 or self.e_j0 <= 0:
            raise ModelRangeError("e_c and e_j0 must be positive")
        if self.charge_cutoff < 10:
            raise CutoffError(f"charge_cutoff must be >= 10, got {self.charge_cutoff}")

    @property
    def ej_over_ec(self) -> float:
        return self.e_j0 / self.e_c

    @property
    def in_transmon_regime(self) -> bool:
        """True when E_J⁰/E_C is large enough for the closed-form spectrum."""
        return self.ej_over_ec >= TRANSMON_REGIME_RATIO


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest levels of the charge-basis Hamiltonian.

    ``eigenvalues`` are strictly sorted ascending; near-ties (relative gap
    below 1e−12) are reported in ``degenerate_pairs`` rather than silently
    broken.
    """

    omega01: float
    omega12: float
    eigenvalues: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = field(default=())


class ApproxFrequency(NamedTuple):
    """Both forms of the closed-form qubit frequency; the caller selects."""

    nonlinear: float  # √(8 E_C E_J(ε)) − E_C
    linearized: float  # ω_q⁰ + χ_ε ε


def josephson_energy(params: TransmonParams, eps: float) -> float:
    """Strain-modulated Josephson energy ``E_J⁰ (1 + β ε)`` in rad/s.

    Raises
    ------
    ModelRangeError
        If ``|β ε| ≥ 1``: the linearized junction model would reach or
        cross zero energy, outside its validity range.
    """
    if abs(params.beta * eps) >= 1.0:
        raise ModelRangeError(
            f"|beta*eps| = {abs(params.beta * eps):.4g} >= 1 is outside the "
            "linearized junction model"
        )
    return params.e_j0 * (1.0 + params.beta * eps)


def _charge_levels(params: TransmonParams, eps: float, k: int, cutoff: int) -> np.ndarray:
    """Lowest ``k`` eigenvalues of the tridiagonal charge-basis Hamiltonian."""
    ej = josephson_energy(params, eps)
    n = np.arange(-cutoff, cutoff + 1)
    diag = 4.0 * params.e_c * (n - params.n_g) ** 2
    off = np.full(2 * cutoff, -ej / 2.0)
    return eigh_tridiagonal(
        diag, off, eigvals_only=True, select="i", select_range=(0, k - 1)
    )


def charge_spectrum_exact(params: TransmonParams, eps: float = 0.0, k: int = 4) -> SpectrumResult:
    """Exact lowest-``k`` transmon spectrum by charge-basis diagonalization.

    Runs a convergence guard on every call: ω01 recomputed with the charge
    cutoff enlarged by 5 must agree to ``CONVERGENCE_TOL`` relative.

    Parameters
    ----------
    params, eps:
        Transmon parameters and the strain at which to evaluate.
    k:
        Number of levels to return; 3 ≤ k ≤ 2·charge_cutoff − 3 (the top
        levels of the truncated basis are truncation-polluted).

    Raises
    ------
    CutoffError
        For an unconverged cutoff or a level request into the polluted
        upper range.
    """
    if k < 3:
        raise CutoffError("need at least 3 levels for omega01/omega12")
    if k > 2 * params.charge_cutoff - 3:
        raise CutoffError(
            f"k = {k} reaches truncation-polluted levels at charge_cutoff = "
            f"{params.charge_cutoff}"
        )
    levels = _charge_levels(params, eps, k, params.charge_cutoff)
    omega01 = float(levels[1] - levels[0])
    check = _charge_levels(params, eps, 2, params.charge_cutoff + 5)
    omega01_check = float(check[1] - check[0])
    if abs(omega01_check - omega01) > CONVERGENCE_TOL * abs(omega01):
        raise CutoffError(
            f"omega01 moved by {abs(omega01_check - omega01) / abs(omega01):.3g} "
            f"relative under cutoff {params.charge_cutoff} -> +5; enlarge the basis"
        )
    gaps = np.diff(levels)
    scale = np.maximum(np.abs(levels[:-1]), np.abs(levels[1:]))
    scale = np.maximum(scale, np.finfo(float).tiny)
    degenerate = tuple(
        (int(i), int(i + 1)) for i in np.nonzero(gaps < 1e-12 * scale)[0]
    )
    return SpectrumResult(
        omega01=omega01,
        omega12=float(levels[2] - levels[1]),
        eigenvalues=levels,
        degenerate_pairs=degenerate,
    )


def qubit_frequency_nominal(params: TransmonParams) -> float:
    """Zero-strain closed-form qubit frequency ``ω_q⁰ = √(8 E_C E_J⁰) − E_C``."""
    return sqrt(8.0 * params.e_c * params.e_j0) - params.e_c


def frequency_approx(params: TransmonParams, eps: float) -> ApproxFrequency:
    """Closed-form qubit frequency at strain ε, in both forms.

    Returns the non-linearized value ``√(8 E_C E_J(ε)) − E_C`` and the
    linearized value ``ω_q⁰ + χ_ε ε`` (with the analytic susceptibility);
    they differ at O(ε²).

    Raises
    ------
    RegimeError
        Outside the transmon regime E_J⁰/E_C ≥ 20, where the closed form
        is meaningless.
    """
    if not params.in_transmon_regime:
        raise RegimeError(
            f"E_J0/E_C = {params.ej_over_ec:.3g} < {TRANSMON_REGIME_RATIO:g}; "
            "closed-form transmon frequency not applicable"
        )
    nonlinear = sqrt(8.0 * params.e_c * josephson_energy(params, eps)) - params.e_c
    omega_q0 = qubit_frequency_nominal(params)
    chi = 0.5 * omega_q0 * params.beta
    return ApproxFrequency(nonlinear=nonlinear, linearized=omega_q0 + chi * eps)


def strain_susceptibility(
    params: TransmonParams, mode: str = "analytic", h: float = 1e-6
) -> float:
    """Strain susceptibility ``χ_ε = dω01/dε`` in rad/s per unit strain.

    ``mode="analytic"`` evaluates the closed form ``(ω_q⁰/2) β`` (requires
    the transmon regime). ``mode="numeric"`` takes a central difference of
    the exact charge-basis ω01 and has no regime restriction; the step must
    lie in [1e−9, 1e−3] strain so the difference is neither noise- nor
    curvature-dominated.
    """
    if mode == "analytic":
        if not params.in_transmon_regime:
            raise RegimeError(
                f"E_J0/E_C = {params.ej_over_ec:.3g} < {TRANSMON_REGIME_RATIO:g}; "
                "analytic susceptibility not applicable"
            )
        return 0.5 * qubit_frequency_nominal(params) * params.beta
    if mode == "numeric":
        if not 1e-9 <= h <= 1e-3:
            raise StepError(f"finite-difference step h = {h:.3g} outside [1e-9, 1e-3]")
        up = charge_spectrum_exact(params, eps=+h, k=3).omega01
        dn = charge_spectrum_exact(params, eps=-h, k=3).omega01
        return (up - dn) / (2.0 * h)
    raise ValueError(f"unknown susceptibility mode {mode!r}")
