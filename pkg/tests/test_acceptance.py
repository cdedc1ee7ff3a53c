"""End-to-end acceptance gate.

Eight criteria, one test each, every one printing a single PASS/FAIL line
straight to the terminal (bypassing capture) so a full run leaves an
auditable checklist. Tolerances are stated inline; randomized checks derive
everything from master seed 7 so reruns are bit-for-bit comparable.
"""

import time
from dataclasses import replace

import numpy as np

from strainsense.audit import run_reproduce_audit
from strainsense.config import preset_config
from strainsense.dynamics import (
    CouplingParams,
    QubitRegister,
    evolve_joint,
    ghz_state,
    joint_moments,
    mean_x_shift_analytic,
    product_state,
    ramsey_sequence,
)
from strainsense.metrology import qfi_generator_variance
from strainsense.phase_space import (
    FockSpace,
    coherent_state,
    overlap,
    vacuum_state,
)
from strainsense.sweeps import run_estimation_experiment, run_g1_contour, run_scaling_sweep
from strainsense.transmon import TransmonParams, strain_susceptibility

MASTER_SEED = 7

UNIT_SLOPE_CP = CouplingParams(
    g0=1.0, omega_q0=50.0, omega_r=200.0, chi_eps=100.0, tau=1.0
)


def _verdict(capsys, k: int, label: str, ok: bool, detail: str) -> None:
    line = f"[acceptance] criterion {k} ({label}): {'PASS' if ok else 'FAIL'} - {detail}"
    with capsys.disabled():
        print(line)
    assert ok, line


def test_criterion_1_conditional_displacement_mean_shift(capsys):
    """Exact joint evolution reproduces the analytic <X> shift 2 g(eps) tau <Jz>
    for randomized qubit superpositions, coherent resonators, and couplings."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(MASTER_SEED)
    space = FockSpace(60)
    worst = 0.0
    for _ in range(50):
        raw = rng.normal(size=4)
        amps = (raw[:2] + 1j * raw[2:]).astype(complex)
        amps /= np.linalg.norm(amps)
        register = QubitRegister(1, "exact", amps)
        alpha = rng.uniform(0.0, 1.2) * np.exp(2j * np.pi * rng.uniform())
        g = rng.uniform(0.05, 2.0)
        eps = rng.uniform(-0.5, 0.5)
        cp = CouplingParams(g0=g, omega_q0=100.0, omega_r=300.0, chi_eps=1.0, tau=1.0)
        before = product_state(register, coherent_state(alpha, space))
        after = evolve_joint(before, cp, eps)
        shift = joint_moments(after).mean_x - joint_moments(before).mean_x
        predicted = mean_x_shift_analytic(cp, eps, joint_moments(before).jz_mean)
        worst = max(worst, abs(shift - predicted))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 5.0
    _verdict(
        capsys, 1, "mean-shift calibration", ok,
        f"max |error| = {worst:.2e} over 50 random draws "
        f"(tol 1e-08), {elapsed:.2f} s",
    )


def test_criterion_2_branch_structure(capsys):
    """GHZ evolution produces coherent branches at +/- g*tau*N/sqrt(2), and the
    two-branch representation agrees with the exact 2^N one."""
    n, g = 4, 0.2
    cp = CouplingParams(g0=g, omega_q0=50.0, omega_r=500.0, chi_eps=1.0, tau=1.0)
    space = FockSpace(30)
    two = evolve_joint(product_state(ghz_state(n), vacuum_state(space)), cp, 0.0)
    alpha = g * n / np.sqrt(2.0)  # theta = 2*g*tau*(N/2)
    fid_up = abs(overlap(two.branches[0], coherent_state(alpha, space))) ** 2
    fid_dn = abs(overlap(two.branches[1], coherent_state(-alpha, space))) ** 2

    exact_reg = ghz_state(n).to_exact()
    exact = evolve_joint(product_state(exact_reg, vacuum_state(space)), cp, 0.0)
    m2, me = joint_moments(two), joint_moments(exact)
    moment_gap = max(
        abs(m2.mean_x - me.mean_x),
        abs(m2.jz_mean - me.jz_mean),
        abs(m2.jz2_mean - me.jz2_mean),
    )
    ok = min(fid_up, fid_dn) >= 1.0 - 1e-8 and moment_gap < 1e-9
    _verdict(
        capsys, 2, "branch structure", ok,
        f"branch fidelities ({fid_up:.10f}, {fid_dn:.10f}) >= 1-1e-08; "
        f"two-branch vs exact moment gap {moment_gap:.2e} (tol 1e-09)",
    )


def test_criterion_3_qfi_routes_and_scaling(capsys):
    """Variance-route and overlap-route QFI agree to 1e-6 and grow as N^2."""
    t0 = time.perf_counter()
    space = FockSpace(15)
    vac = vacuum_state(space)
    results = {}
    for n in (1, 2, 4, 6):
        res = qfi_generator_variance(ghz_state(n), vac, UNIT_SLOPE_CP)
        results[n] = res
    route_gap = max(
        abs(r.qfi_overlap_route - r.qfi_variance_route) / r.qfi_variance_route
        for r in results.values()
    )
    base = results[1].qfi_variance_route
    scaling_gap = max(
        abs(results[n].qfi_variance_route / base - n * n) / (n * n)
        for n in (2, 4, 6)
    )
    elapsed = time.perf_counter() - t0
    ok = route_gap < 1e-6 and scaling_gap < 1e-9 and elapsed < 10.0
    _verdict(
        capsys, 3, "QFI routes and N^2 scaling", ok,
        f"route agreement {route_gap:.2e} (tol 1e-06), "
        f"N^2 deviation {scaling_gap:.2e} (tol 1e-09), {elapsed:.2f} s",
    )


def test_criterion_4_estimator_calibration(capsys, monkeypatch):
    """200 independent estimates at 1e4 shots each are unbiased and match the
    analytic spread within 10%, for N = 1 and the N = 10 GHZ register."""
    monkeypatch.delenv("STRAINSENSE_WORKERS", raising=False)
    t0 = time.perf_counter()
    details = []
    ok = True
    for n_qubits in (1, 10):
        cfg = preset_config("per_strain", n_qubits=n_qubits)
        cfg = replace(
            cfg,
            replicates=200,
            homodyne=replace(cfg.homodyne, seed=MASTER_SEED),
        )
        out = run_estimation_experiment(cfg)
        agg = out["aggregate"]
        analytic = agg["expected_std_per_estimate"]["value"]
        bias_se = abs(agg["eps_hat_mean"]["value"]) / (analytic / np.sqrt(200))
        ratio = agg["eps_hat_std"]["value"] / analytic
        ok = ok and bias_se <= 4.0 and abs(ratio - 1.0) <= 0.10
        details.append(
            f"N={n_qubits}: bias {bias_se:.2f} SE (<=4), "
            f"std ratio {ratio:.4f} (within 10%)"
        )
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    _verdict(
        capsys, 4, "end-to-end estimator", ok,
        "; ".join(details) + f", {elapsed:.1f} s",
    )


def test_criterion_5_scaling_and_contour_outputs(capsys):
    """Sweep outputs carry exact 1/sqrt(N) and 1/N columns and the contour
    marks the nominal design point at g1/2pi = 2.5e5 Hz/strain."""
    cfg = preset_config("per_strain")
    _, rows = run_scaling_sweep(cfg, n_max=100)
    table = [r for r in rows]
    n = np.array([r[0] for r in table], dtype=float)
    sql = np.array([r[3] for r in table], dtype=float)
    hl = np.array([r[4] for r in table], dtype=float)
    sql_slope = np.polyfit(np.log(n), np.log(sql), 1)[0]
    hl_slope = np.polyfit(np.log(n), np.log(hl), 1)[0]

    _, crows = run_g1_contour(cfg)
    nominal = [r for r in crows if r[3] == "nominal_design_point"]
    g1_err = abs(nominal[0][2] - 2.5e5) / 2.5e5 if nominal else np.inf
    ok = (
        abs(sql_slope + 0.5) < 1e-9
        and abs(hl_slope + 1.0) < 1e-9
        and len(nominal) == 1
        and g1_err < 1e-12
    )
    _verdict(
        capsys, 5, "scaling and contour outputs", ok,
        f"log-log slopes {sql_slope:+.12f}/{hl_slope:+.12f} "
        f"(tol 1e-09 about -0.5/-1.0), nominal g1 relative error {g1_err:.1e}",
    )


def test_criterion_6_susceptibility_cross_validation(capsys):
    """Analytic chi_eps stays within 11% of the numeric derivative across
    E_J/E_C = 20..200, with the gap shrinking as the regime deepens."""
    t0 = time.perf_counter()
    e_c = 2 * np.pi * 0.25e9
    devs = []
    for ratio in (20, 50, 100, 200):
        tp = TransmonParams(e_c=e_c, e_j0=ratio * e_c, beta=100.0)
        analytic = strain_susceptibility(tp, mode="analytic")
        numeric = strain_susceptibility(tp, mode="numeric")
        devs.append(abs(analytic - numeric) / abs(numeric))
    elapsed = time.perf_counter() - t0
    monotone = all(a > b for a, b in zip(devs, devs[1:]))
    ok = monotone and max(devs) < 0.1064266 and elapsed < 5.0
    _verdict(
        capsys, 6, "susceptibility cross-validation", ok,
        f"relative deviations {[f'{d:.4f}' for d in devs]} "
        f"(max < 0.1064, monotone decreasing), {elapsed:.2f} s",
    )


def test_criterion_7_numerical_audit(capsys):
    """The audit recomputes every published figure under both unit readings,
    reports discrepancy factors, and its internal chain closes exactly."""
    rep = run_reproduce_audit()
    structural = len(rep.steps) == 15 and all(
        s.quoted
        and s.per_strain.discrepancy_factor.value > 0
        and s.per_microstrain.discrepancy_factor.value > 0
        for s in rep.steps
    )
    closure = max(row.residual.value for row in rep.identities)
    flagged = any(
        not s.per_strain.match or not s.per_microstrain.match for s in rep.steps
    )
    ok = structural and closure <= 1e-12 and flagged
    _verdict(
        capsys, 7, "numerical audit", ok,
        f"15/15 figures recomputed under both readings, chain residual "
        f"{closure:.2e} (tol 1e-12), inconsistencies flagged: {flagged}",
    )


def test_criterion_8_ramsey_interferometry(capsys):
    """Vacuum-resonator Ramsey shows the damped (not phase-shifted) fringe with
    the predicted visibility, and a momentum-carrying resonator restores a
    phase linear in <P> and N."""
    n = 2
    space = FockSpace(40)
    worst_dev = worst_vis = 0.0
    for gtau in (0.01, 0.05, 0.1):
        cp = CouplingParams(
            g0=gtau, omega_q0=50.0, omega_r=500.0, chi_eps=1.0, tau=1.0
        )
        res = ramsey_sequence(n, cp, 0.0, vacuum_state(space))
        expected_dev = abs(-np.exp(-((gtau) ** 2)) - n * gtau)
        worst_dev = max(worst_dev, abs(res.deviation - expected_dev))
        worst_vis = max(worst_vis, abs(res.visibility - np.exp(-(gtau**2))))

    gtau = 0.05
    cp = CouplingParams(g0=gtau, omega_q0=50.0, omega_r=500.0, chi_eps=1.0, tau=1.0)
    p_values = np.array([0.5, 1.0, 2.0])
    phases = np.array(
        [
            ramsey_sequence(
                n, cp, 0.0, coherent_state(1j * p0 / np.sqrt(2.0), space)
            ).interference_phase
            for p0 in p_values
        ]
    )
    slope, intercept = np.polyfit(p_values, phases, 1)
    slope_err = abs(slope - 2 * gtau * n) / (2 * gtau * n)
    ok = (
        worst_dev < 1e-9
        and worst_vis < 1e-9
        and slope_err < 0.05
        and abs(intercept) < 1e-6
    )
    _verdict(
        capsys, 8, "Ramsey interferometry", ok,
        f"vacuum deviation error {worst_dev:.2e}, visibility error "
        f"{worst_vis:.2e} (tol 1e-09), phase slope error {slope_err:.2e} "
        f"(tol 5e-02)",
    )
