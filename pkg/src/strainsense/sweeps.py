"""Batch runs: scaling curves, coupling-gradient contours, MC estimation.

All three entry points take a `RunConfig` and return plain data (header +
row iterator for tabular output, a nested dict for the estimation report)
so the CLI owns formatting. Sweep grids are streamed rather than
materialized; a resource guard rejects grids above 1e7 points before any
allocation happens.

Monte Carlo replicates are independent tasks: replicate ``k`` always uses
the seed ``derive_seed(base_seed, k)`` and its own counter stream, so the
result is bit-identical whether replicates run sequentially or across a
process pool (``STRAINSENSE_WORKERS``).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from math import pi, sqrt
from typing import Iterator

import numpy as np

from .config import RunConfig, SweepAxis
from .dynamics import (
    all_zero_state,
    coupling_rate,
    evolve_joint,
    ghz_state,
    mean_x_shift_analytic,
    product_state,
)
from .errors import ConfigError, ResourceGuardError
from .homodyne import (
    EstimationResult,
    derive_seed,
    estimate_strain,
    per_root_hz,
    sample_shots,
)
from .metrology import (
    ghz_crb_closed_form,
    protocol_qfi,
    qfi_finite_difference,
    qfi_generator_variance,
    scaling_curves,
    sensitivity_report,
    sensitivity_single,
)
from .phase_space import FockSpace, moments, required_cutoff, vacuum_state

MAX_SWEEP_POINTS = 10_000_000
#: largest Fock cutoff the in-report exact cross-check will attempt
FOCK_CHECK_CUTOFF_LIMIT = 4096

SCALING_HEADER = [
    "n_qubits__count",
    "sql_normalized__dimensionless",
    "hl_normalized__dimensionless",
    "sql_physical__strain",
    "hl_physical__strain",
    "marker",
]

CONTOUR_HEADER = [
    "g0_over_2pi__hz",
    "chi_eps_over_2pi__hz_per_strain",
    "g1_over_2pi__hz_per_strain",
    "marker",
]


def _q(value, unit: str) -> dict:
    """Unit-tagged numeric leaf; reports never contain bare numbers."""
    return {"value": value, "unit": unit}


def run_scaling_sweep(cfg: RunConfig, n_max: int = 100):
    """Sensitivity-scaling table for N = 1…n_max.

    Normalized columns are the pure 1/√N and 1/N laws (both equal 1 at
    N = 1); physical columns multiply them by the config's single-qubit
    per-shot uncertainty σ_X/(g₁τ). The N = 10 row carries a marker so
    plots can highlight the headline operating point.
    """
    n_max = int(n_max)
    if n_max > MAX_SWEEP_POINTS:
        raise ResourceGuardError(
            f"scaling sweep of {n_max} points exceeds the {MAX_SWEEP_POINTS} budget"
        )
    single = sensitivity_single(cfg.homodyne.sigma_x, cfg.coupling)
    curves = scaling_curves(n_max, delta_eps_single=single)

    def rows() -> Iterator[list]:
        for i in range(n_max):
            n = int(curves["n"][i])
            yield [
                n,
                float(curves["sql_normalized"][i]),
                float(curves["hl_normalized"][i]),
                float(curves["sql_physical"][i]),
                float(curves["hl_physical"][i]),
                "nominal_n10" if n == 10 else "",
            ]

    return SCALING_HEADER, rows()


def _default_axis(name: str, lo_hz: float, hi_hz: float) -> SweepAxis:
    return SweepAxis(
        name=name, min=2 * pi * lo_hz, max=2 * pi * hi_hz, points=101, scale="log"
    )


def _axis_grid(ax: SweepAxis) -> np.ndarray:
    if ax.scale == "log":
        return np.geomspace(ax.min, ax.max, ax.points)
    return np.linspace(ax.min, ax.max, ax.points)


def run_g1_contour(cfg: RunConfig):
    """Long-format g₁ = g₀χ_ε/(2ω_q⁰) grid over (g₀, χ_ε).

    Axes come from ``cfg.sweep`` when present, else the defaults:
    g₀/2π ∈ [10, 200] MHz and χ_ε/2π ∈ [10, 500] MHz per strain, both
    101-point log grids. Rows are emitted g₀-major. After the grid, one
    marker row per named comparison point: the config's own coupling
    point ("nominal_design_point") plus any ``sweep.fixed.markers``.
    """
    axes = {ax.name: ax for ax in (cfg.sweep.axes if cfg.sweep else ())}
    g0_ax = axes.get("g0", _default_axis("g0", 10e6, 200e6))
    chi_ax = axes.get("chi_eps", _default_axis("chi_eps", 10e6, 500e6))
    n_points = g0_ax.points * chi_ax.points
    if n_points > MAX_SWEEP_POINTS:
        raise ResourceGuardError(
            f"contour grid of {n_points} points exceeds the "
            f"{MAX_SWEEP_POINTS} budget; reduce axis points"
        )
    omega_q0 = cfg.coupling.omega_q0
    g0_grid = _axis_grid(g0_ax)
    chi_grid = _axis_grid(chi_ax)

    markers = [
        {
            "name": "nominal_design_point",
            "g0": cfg.coupling.g0,
            "chi_eps": cfg.coupling.chi_eps,
        }
    ]
    if cfg.sweep is not None:
        markers.extend(cfg.sweep.fixed.get("markers", []))

    two_pi = 2 * pi

    def rows() -> Iterator[list]:
        for g0 in g0_grid:
            g1_row = g0 * chi_grid / (2.0 * omega_q0)
            for chi, g1 in zip(chi_grid, g1_row):
                yield [g0 / two_pi, chi / two_pi, g1 / two_pi, ""]
        for mk in markers:
            g1 = mk["g0"] * mk["chi_eps"] / (2.0 * omega_q0)
            yield [mk["g0"] / two_pi, mk["chi_eps"] / two_pi, g1 / two_pi, mk["name"]]

    return CONTOUR_HEADER, rows()


def _one_replicate(args) -> tuple[int, EstimationResult]:
    """Run replicate ``k`` with its derived seed (process-pool safe)."""
    k, mean_x, model, cp, n, state_kind = args
    rep_model = replace(model, seed=derive_seed(model.seed, k))
    samples = sample_shots(mean_x, rep_model)
    return k, estimate_strain(samples, cp, n, state_kind=state_kind)


def _worker_count() -> int:
    raw = os.environ.get("STRAINSENSE_WORKERS", "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError as exc:
        raise ConfigError(
            f"STRAINSENSE_WORKERS must be a positive integer, got {raw!r}"
        ) from exc
    if workers < 1:
        raise ConfigError(f"STRAINSENSE_WORKERS must be >= 1, got {workers}")
    return workers


def _fock_cross_check(cfg: RunConfig) -> dict:
    """Exact single-qubit check of the calibrated signal mean.

    Evolves |0⟩ ⊗ |vac⟩ through the actual Fock-space machinery and
    compares the occupied branch's ⟨X⟩ to the analytic calibration
    g(ε)τ the estimator is built on. Skipped (with a note) when the
    required displacement exceeds a tractable cutoff.
    """
    cp, eps = cfg.coupling, cfg.true_eps
    theta = coupling_rate(cp, eps) * cp.tau  # single qubit: m = +1/2 branch
    alpha = abs(theta) / sqrt(2.0)
    cutoff = required_cutoff(alpha)
    if cutoff > FOCK_CHECK_CUTOFF_LIMIT:
        return {
            "status": f"skipped: needs Fock cutoff {cutoff} > "
            f"{FOCK_CHECK_CUTOFF_LIMIT}",
            "mean_x_exact": None,
            "abs_error": None,
        }
    space = FockSpace(cutoff)
    joint = product_state(all_zero_state(1), vacuum_state(space))
    evolved = evolve_joint(joint, cp, eps)
    exact = moments(evolved.branches[0]).mean_x
    return {
        "status": "ok",
        "mean_x_exact": _q(exact, "x_quadrature"),
        "abs_error": _q(abs(exact - theta), "x_quadrature"),
    }


def run_estimation_experiment(cfg: RunConfig) -> dict:
    """Simulate homodyne records and invert them to strain estimates.

    The record mean follows the calibrated model (single qubit: g(ε)τ;
    GHZ: g(ε)τN, the m = +N/2 branch). Each replicate draws
    ``cfg.homodyne.shots`` samples under its derived seed and runs the
    linear estimator; replicates are merged in index order, so output is
    independent of worker count. The report bundles the estimates, their
    spread against the analytic expectation, the sensitivity chain, and
    both QFI routes. Every numeric leaf carries a unit tag.
    """
    cp, model = cfg.coupling, cfg.homodyne
    kind, n, eps = cfg.state_kind, cfg.n_qubits, cfg.true_eps
    scale = float(n) if kind == "ghz" else 1.0
    jz_mean = 0.5 * scale
    mean_truth = mean_x_shift_analytic(cp, eps, jz_mean)

    tasks = [(k, mean_truth, model, cp, n, kind) for k in range(cfg.replicates)]
    workers = min(_worker_count(), cfg.replicates)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = sorted(pool.map(_one_replicate, tasks), key=lambda r: r[0])
    else:
        results = [_one_replicate(t) for t in tasks]

    eps_hats = np.array([est.eps_hat for _, est in results])
    expected_std = sensitivity_single(model.sigma_x, cp) / (scale * sqrt(model.shots))
    report = sensitivity_report(cp, model.sigma_x, n, cfg.nu)

    register = ghz_state(n) if kind == "ghz" else all_zero_state(1)
    space = FockSpace(required_cutoff(0.0))
    vac = vacuum_state(space)
    qfi = qfi_generator_variance(register, vac, cp)
    qfi_protocol = protocol_qfi(register, vac, cp)
    qfi_fd = qfi_finite_difference(register, vac, cp, eps0=eps)

    out = {
        "experiment": {
            "state_kind": kind,
            "n_qubits": _q(n, "count"),
            "true_eps": _q(eps, "strain"),
            "shots_per_estimate": _q(model.shots, "count"),
            "replicates": _q(cfg.replicates, "count"),
            "base_seed": _q(model.seed, "count"),
            "sigma_x": _q(model.sigma_x, "dimensionless"),
            "mean_x_model": _q(mean_truth, "x_quadrature"),
            "fock_cross_check": _fock_cross_check(cfg),
        },
        "estimates": [
            {
                "replicate": _q(k, "count"),
                "eps_hat": _q(est.eps_hat, "strain"),
                "std_error": (
                    _q(est.std_error, "strain") if est.std_error is not None else None
                ),
                "sample_mean_x": _q(est.sample_mean_x, "x_quadrature"),
                "shots_used": _q(est.shots_used, "count"),
            }
            for k, est in results
        ],
        "aggregate": {
            "eps_hat_mean": _q(float(eps_hats.mean()), "strain"),
            "eps_hat_std": (
                _q(float(eps_hats.std(ddof=1)), "strain")
                if cfg.replicates >= 2
                else None
            ),
            "expected_std_per_estimate": _q(expected_std, "strain"),
            "bias": _q(float(eps_hats.mean()) - eps, "strain"),
        },
        "sensitivity": {
            "delta_eps_single_shot": _q(report.delta_eps_single, "strain"),
            "delta_eps_ghz_shot": _q(report.delta_eps_ghz, "strain"),
            "delta_eps_per_root_hz": _q(
                report.delta_eps_per_root_hz, "strain_per_sqrt_hz"
            ),
            "nu": _q(cfg.nu, "shots_per_s"),
            "inputs": report.inputs,
        },
        "qfi": {
            "variance_route": _q(qfi.qfi_variance_route, "per_strain_squared"),
            "overlap_route": _q(qfi_fd, "per_strain_squared"),
            "protocol": _q(qfi_protocol, "per_strain_squared"),
            "crb_single_shot": _q(qfi.crb_single_shot, "strain"),
            "crb_protocol_per_root_hz": _q(
                per_root_hz(
                    ghz_crb_closed_form(cp, n if kind == "ghz" else 1), cfg.nu
                ),
                "strain_per_sqrt_hz",
            ),
        },
    }
    return out
