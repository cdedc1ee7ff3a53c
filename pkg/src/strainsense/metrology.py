"""Sensitivity formulas, quantum Fisher information, and quantum limits.

Two QFI normalizations coexist on purpose, and the distinction matters:

- `qfi_generator_variance` / `qfi_finite_difference` treat the parameter
  family ``U(ε) = exp(−i g₁ ε τ · J_z⊗P)``, i.e. generator
  ``Ĝ = g₁τ·J_z⊗P`` (the collective-spin operator is written S_z or J_z
  in different conventions; it is the same operator). This gives
  ``F_Q = (g₁τ)² N² ⟨P²⟩`` for GHZ ⊗ vacuum.
- The interferometric protocol itself applies ``exp(−i·2g(ε)τ·J_z⊗P)``,
  whose ε-generator carries the extra factor 2, making the attainable
  information ``protocol_qfi = 4×`` the above. The Cramér–Rao bound built
  from it, ``1/(√2·g₁τN·√ν)``, is exactly saturated by ideal homodyne
  readout at vacuum noise σ_X = 1/√2 — which is the consistency check
  `sensitivity_report` enforces.

Both values are reported; pick the one matching the generator you mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import inf, sqrt
from typing import Optional

import numpy as np

from .dynamics import (
    CouplingParams,
    JointState,
    QubitRegister,
    ghz_state,
    joint_inner,
    product_state,
)
from .errors import (
    DegenerateEstimatorError,
    ModelRangeError,
    StepError,
    UnidentifiableParameterError,
)
from .homodyne import per_root_hz
from .phase_space import (
    FockSpace,
    ResonatorState,
    conditional_displacement,
    moments,
    required_cutoff,
    vacuum_state,
)

#: admissible finite-difference steps for the overlap-route QFI (strain units)
QFI_STEP_RANGE = (1e-8, 1e-2)

#: Richardson residual above which the step is rejected as too coarse
QFI_STEP_RESIDUAL_TOL = 1e-4


def sensitivity_single(sigma_x: float, cp: CouplingParams) -> float:
    """Single-shot, single-qubit strain uncertainty ``σ_X/(g₁τ)``."""
    slope = cp.g1 * cp.tau
    if slope == 0.0:
        raise DegenerateEstimatorError("g1*tau = 0: no strain signal")
    return sigma_x / abs(slope)


def sensitivity_ghz(sigma_x: float, cp: CouplingParams, n: int) -> float:
    """GHZ-enhanced single-shot uncertainty ``σ_X/(g₁τN)`` — exactly 1/N
    of the single-qubit value."""
    if n < 1:
        raise ModelRangeError(f"need n >= 1, got {n}")
    return sensitivity_single(sigma_x, cp) / n


@dataclass(frozen=True)
class QfiResult:
    """Quantum Fisher information about ε, by two independent routes.

    ``qfi_variance_route`` is ``4·Var(Ĝ)`` from exact state moments;
    ``qfi_overlap_route`` differentiates the state family numerically.
    ``crb_single_shot`` is the one-shot Cramér–Rao bound 1/√F_Q from the
    variance route. All per the bare generator ``Ĝ = g₁τ·J_z⊗P`` (see
    module docstring for the protocol-true 4× variant).
    """

    qfi_variance_route: float
    qfi_overlap_route: float
    generator_mean: float
    generator_second_moment: float
    crb_single_shot: float


def _generator_moments(
    register: QubitRegister, resonator: ResonatorState, cp: CouplingParams
) -> tuple[float, float]:
    """(⟨Ĝ⟩, ⟨Ĝ²⟩) for Ĝ = g₁τ·J_z⊗P on a product state."""
    jz, jz2 = register.jz_moments()
    res = moments(resonator)
    gt = cp.g1 * cp.tau
    return gt * jz * res.mean_p, gt * gt * jz2 * res.mean_p_sq


def _displaced_family(
    base: JointState, c: float
) -> JointState:
    """Apply exp(−i·c·J_z⊗P): branch with eigenvalue m displaced by θ = c·m."""
    mvals = base.register.jz_values()
    cache: dict[float, np.ndarray] = {}
    branches = []
    for m, branch in zip(mvals, base.branches):
        theta = c * float(m)
        u = cache.get(theta)
        if u is None:
            u = conditional_displacement(theta, branch.space, method="closed_form")
            cache[theta] = u
        amps = u @ branch.amplitudes
        branches.append(ResonatorState(amps / np.linalg.norm(amps), branch.space))
    return JointState(base.register, branches)


def qfi_finite_difference(
    register: QubitRegister,
    resonator: ResonatorState,
    cp: CouplingParams,
    eps0: float = 0.0,
    h: Optional[float] = None,
) -> float:
    """Overlap-route QFI: numerically differentiate |ψ(ε)⟩ at ``eps0``.

    Builds |ψ(eps0 ± h)⟩ by exact branch displacement under
    ``U(ε) = exp(−i g₁(ε−eps0)τ·J_z⊗P)``, forms the central-difference
    derivative, and evaluates ``4[⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²]``, Richardson-
    extrapolated over {h, h/2}.

    The default step ``1e−4/(g₁τN)`` keeps the per-branch phase increments
    uniform across N and far below 1; an explicit ``h`` must lie in
    `QFI_STEP_RANGE`.

    Raises
    ------
    StepError
        For steps outside the admissible range, or when the Richardson
        residual exceeds `QFI_STEP_RESIDUAL_TOL` (step too coarse for the
        curvature).
    """
    gt = cp.g1 * cp.tau
    if gt == 0.0:
        return 0.0
    if h is None:
        h = 1e-4 / (abs(gt) * max(register.n_qubits, 1))
        h = min(max(h, QFI_STEP_RANGE[0]), QFI_STEP_RANGE[1])
    elif not QFI_STEP_RANGE[0] <= h <= QFI_STEP_RANGE[1]:
        raise StepError(
            f"finite-difference step h = {h:.3g} outside "
            f"[{QFI_STEP_RANGE[0]:g}, {QFI_STEP_RANGE[1]:g}]"
        )
    base = product_state(register, resonator)

    def fisher(step: float) -> float:
        plus = _displaced_family(base, gt * step)
        minus = _displaced_family(base, -gt * step)
        pp = joint_inner(plus, plus).real
        mm = joint_inner(minus, minus).real
        pm = joint_inner(plus, minus)
        d_norm_sq = (pp + mm - 2.0 * pm.real) / (4.0 * step * step)
        zp = joint_inner(base, plus)
        zm = joint_inner(base, minus)
        overlap_term = abs((zp - zm) / (2.0 * step)) ** 2
        return 4.0 * (d_norm_sq - overlap_term)

    f_h = fisher(h)
    f_h2 = fisher(h / 2.0)
    richardson = (4.0 * f_h2 - f_h) / 3.0
    residual = abs(f_h2 - f_h) / max(abs(richardson), np.finfo(float).tiny)
    if residual > QFI_STEP_RESIDUAL_TOL:
        raise StepError(
            f"Richardson residual {residual:.3g} exceeds "
            f"{QFI_STEP_RESIDUAL_TOL:g}; reduce the step h = {h:.3g}"
        )
    return float(richardson)


def qfi_generator_variance(
    register: QubitRegister, resonator: ResonatorState, cp: CouplingParams
) -> QfiResult:
    """Variance-route QFI ``4(g₁τ)²(⟨J_z²⟩⟨P²⟩ − ⟨J_z⟩²⟨P⟩²)`` from exact
    moments of the product input state, cross-filled with the overlap route.

    Note the product-moment form cannot distinguish states with equal
    moment combinations — e.g. GHZ and |0⟩^⊗N share it whenever ⟨P⟩ = 0,
    although only GHZ supports the interferometric readout. Both routes
    agree on this (it is a property of the generator's variance, not an
    implementation artifact); the readout asymmetry lives in `dynamics`,
    not here.
    """
    g_mean, g_sq = _generator_moments(register, resonator, cp)
    variance = g_sq - g_mean * g_mean
    qfi_var = 4.0 * variance
    qfi_fd = qfi_finite_difference(register, resonator, cp)
    return QfiResult(
        qfi_variance_route=qfi_var,
        qfi_overlap_route=qfi_fd,
        generator_mean=g_mean,
        generator_second_moment=g_sq,
        crb_single_shot=(1.0 / sqrt(qfi_var)) if qfi_var > 0 else inf,
    )


def protocol_qfi(
    register: QubitRegister, resonator: ResonatorState, cp: CouplingParams
) -> float:
    """QFI of the protocol-true family ``exp(−i·2g(ε)τ·J_z⊗P)``.

    The ε-generator is ``2g₁τ·J_z⊗P``; the factor 2 quadruples the
    variance-route value. This is the information the physical sequence
    actually makes available, and the bound it implies is saturated by
    homodyne readout at σ_X = 1/√2.
    """
    g_mean, g_sq = _generator_moments(register, resonator, cp)
    return 16.0 * (g_sq - g_mean * g_mean)


def cramer_rao_bound(qfi: float, nu: float = 1.0) -> float:
    """Cramér–Rao lower bound ``1/√(ν·F_Q)`` on any unbiased estimator.

    Raises
    ------
    UnidentifiableParameterError
        If the Fisher information vanishes: no measurement can resolve ε.
    """
    if qfi < 0:
        raise ModelRangeError(f"negative QFI {qfi!r}")
    if qfi == 0.0:
        raise UnidentifiableParameterError("F_Q = 0: parameter unidentifiable")
    if nu < 1:
        raise ModelRangeError(f"need nu >= 1 repetitions, got {nu}")
    return 1.0 / sqrt(nu * qfi)


def ghz_crb_closed_form(cp: CouplingParams, n: int, nu: float = 1.0) -> float:
    """Closed-form protocol bound for GHZ ⊗ vacuum: ``1/(√2·g₁τN·√ν)``
    (vacuum ⟨P²⟩ = 1/2)."""
    gt = abs(cp.g1 * cp.tau)
    if gt == 0.0:
        raise UnidentifiableParameterError("g1*tau = 0: parameter unidentifiable")
    return 1.0 / (gt * n * sqrt(2.0 * nu))


def scaling_curves(
    n_max: int, normalize: bool = True, delta_eps_single: Optional[float] = None
) -> dict[str, np.ndarray]:
    """SQL (1/√N) and HL (1/N) sensitivity-scaling columns for N = 1…n_max.

    Normalized columns equal 1 at N = 1; physical columns (present when
    ``delta_eps_single`` is given) multiply them by the single-qubit
    uncertainty.
    """
    if n_max < 2:
        raise ModelRangeError(f"need n_max >= 2, got {n_max}")
    n = np.arange(1, n_max + 1, dtype=float)
    sql = 1.0 / np.sqrt(n)
    hl = 1.0 / n
    if not normalize and delta_eps_single is None:
        raise ModelRangeError("un-normalized curves need delta_eps_single")
    out: dict[str, np.ndarray] = {"n": n, "sql_normalized": sql, "hl_normalized": hl}
    if delta_eps_single is not None:
        out["sql_physical"] = sql * delta_eps_single
        out["hl_physical"] = hl * delta_eps_single
    return out


@dataclass(frozen=True)
class SensitivityReport:
    """End-to-end sensitivity summary for one parameter set.

    ``qfi``/``crb`` use the protocol-true generator (see module docstring),
    so ``crb ≤ delta_eps_ghz/√ν`` holds for any σ_X ≥ 1/√2, with equality
    at vacuum noise. Every input is echoed with a unit annotation and a
    provenance label rather than as a bare number.
    """

    delta_eps_single: float
    delta_eps_ghz: float
    delta_eps_per_root_hz: float
    qfi: float
    crb: float
    inputs: dict = field(default_factory=dict)


def sensitivity_report(
    cp: CouplingParams, sigma_x: float, n: int, nu: float
) -> SensitivityReport:
    """Assemble the sensitivity chain σ_X/(g₁τ) → /N → /√ν with bounds.

    The QFI is evaluated on an actual GHZ ⊗ vacuum state (smallest safe
    Fock space) rather than from the closed form, so the report exercises
    the same code path the tests validate.
    """
    if nu <= 0:
        raise ModelRangeError(f"nu must be positive, got {nu}")
    single = sensitivity_single(sigma_x, cp)
    ghz = sensitivity_ghz(sigma_x, cp, n)
    space = FockSpace(required_cutoff(0.0))
    qfi = protocol_qfi(ghz_state(n), vacuum_state(space), cp)
    crb = cramer_rao_bound(qfi, nu)
    inputs = {
        "g0": {"value": cp.g0, "unit": "rad_s", "provenance": "config"},
        "omega_q0": {"value": cp.omega_q0, "unit": "rad_s", "provenance": "config"},
        "omega_r": {"value": cp.omega_r, "unit": "rad_s", "provenance": "config"},
        "chi_eps": {
            "value": cp.chi_eps,
            "unit": "rad_s_per_strain",
            "provenance": "config",
        },
        "g1": {"value": cp.g1, "unit": "rad_s_per_strain", "provenance": "derived"},
        "tau": {"value": cp.tau, "unit": "s", "provenance": "config"},
        "sigma_x": {"value": sigma_x, "unit": "dimensionless", "provenance": "config"},
        "n_qubits": {"value": n, "unit": "count", "provenance": "config"},
        "nu": {"value": nu, "unit": "shots_per_s", "provenance": "config"},
    }
    return SensitivityReport(
        delta_eps_single=single,
        delta_eps_ghz=ghz,
        delta_eps_per_root_hz=per_root_hz(ghz, nu),
        qfi=qfi,
        crb=crb,
        inputs=inputs,
    )
