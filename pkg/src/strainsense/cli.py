"""Command-line interface.

Subcommands::

    strainsense audit      reproduce the published sensitivity chain
    strainsense scaling    SQL/HL sensitivity-scaling table
    strainsense contour    g1 = g0*chi_eps/(2*omega_q0) grid
    strainsense estimate   Monte Carlo homodyne estimation experiment
    strainsense transmon   charge-basis spectrum and strain susceptibility
    strainsense qfi        quantum Fisher information and CRBs

Common flags: ``--config`` (TOML/JSON file; otherwise the built-in preset),
``--seed`` (override the homodyne seed), ``--out`` (file instead of
stdout), ``--format`` (csv or json), ``--units`` (preset susceptibility
reading; config files declare their own units).

Exit codes: 0 success, 2 configuration/usage error, 3 numeric guard
tripped, 1 I/O failure.

JSON output is key-sorted and carries a provenance block (config SHA-256,
package version, command). CSV floats use 9 significant digits; numeric
column names carry a ``__unit`` suffix.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager
from dataclasses import replace
from math import pi

from . import __version__
from .audit import report_to_csv_rows, report_to_dict, run_reproduce_audit
from .config import RunConfig, config_hash, load_config, preset_config
from .dynamics import all_zero_state, ghz_state
from .errors import EXIT_OK, ConfigError, StrainSenseError
from .metrology import (
    cramer_rao_bound,
    ghz_crb_closed_form,
    protocol_qfi,
    qfi_generator_variance,
)
from .phase_space import FockSpace, required_cutoff, vacuum_state
from .sweeps import run_estimation_experiment, run_g1_contour, run_scaling_sweep
from .transmon import charge_spectrum_exact, frequency_approx, strain_susceptibility

TWO_PI = 2 * pi


def _q(value, unit: str) -> dict:
    return {"value": value, "unit": unit}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strainsense",
        description="Simulation and analysis of dispersive strain sensing "
        "with strain-coupled superconducting qubits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--seed", type=int, help="override the homodyne base seed")
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), help="output format")
        p.add_argument(
            "--units",
            choices=("per-strain", "per-microstrain"),
            help="susceptibility reading for the built-in preset "
            "(config files declare their own units)",
        )

    p = sub.add_parser("audit", help="reproduce the published sensitivity chain")
    common(p)

    p = sub.add_parser("scaling", help="SQL/HL sensitivity-scaling table")
    common(p)
    p.add_argument("--n-max", type=int, help="largest qubit number (default 100)")

    p = sub.add_parser("contour", help="coupling-gradient contour grid")
    common(p)

    p = sub.add_parser("estimate", help="Monte Carlo estimation experiment")
    common(p)
    p.add_argument("--replicates", type=int, help="override the replicate count")

    p = sub.add_parser("transmon", help="charge-basis spectrum and susceptibility")
    common(p)
    p.add_argument("--eps", type=float, default=0.0, help="strain value (default 0)")
    p.add_argument(
        "--fd-step",
        type=float,
        default=1e-6,
        help="central-difference strain step for the numeric susceptibility",
    )

    p = sub.add_parser("qfi", help="quantum Fisher information and CRBs")
    common(p)
    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config:
        if args.units:
            raise ConfigError(
                "--units applies to the built-in preset only; "
                "config files declare units in their [units] section"
            )
        cfg = load_config(args.config)
    else:
        units = (args.units or "per-strain").replace("-", "_")
        cfg = preset_config(strain_units=units)
    if args.seed is not None:
        cfg = replace(cfg, homodyne=replace(cfg.homodyne, seed=args.seed))
    return cfg


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return f"{v:.8e}"
    return str(v)


def _flatten(obj, path: str, rows: list) -> None:
    """Depth-first (path, value, unit, note) rows from a report dict."""
    if isinstance(obj, dict):
        keys = set(obj)
        if "value" in keys and "unit" in keys and keys <= {"value", "unit", "provenance"}:
            note = obj.get("provenance", "")
            v = obj["value"]
            if isinstance(v, (list, tuple)):
                v = ";".join(_format_cell(x) for x in v)
            else:
                v = _format_cell(v)
            rows.append([path, v, obj["unit"], note])
            return
        for k in sorted(obj):
            _flatten(obj[k], f"{path}.{k}" if path else str(k), rows)
        return
    if isinstance(obj, (list, tuple)):
        for i, item in enumerate(obj):
            _flatten(item, f"{path}[{i}]", rows)
        return
    rows.append([path, _format_cell(obj), "", ""])


@contextmanager
def _open_out(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def _emit(args: argparse.Namespace, cfg: RunConfig, payload, default_format: str) -> None:
    fmt = args.format or (
        cfg.output_format if args.config else default_format
    )
    out_path = args.out or cfg.output_path
    provenance = {
        "command": args.command,
        "config_sha256": config_hash(cfg),
        "package_version": __version__,
    }
    kind = payload[0]
    with _open_out(out_path) as f:
        if fmt == "csv":
            writer = csv.writer(f, lineterminator="\n")
            if kind == "table":
                _, header, rows = payload
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_format_cell(c) for c in row])
            else:
                _, obj = payload
                rows: list = []
                _flatten(obj, "", rows)
                writer.writerow(["field", "value", "unit", "note"])
                writer.writerows(rows)
        else:
            if kind == "table":
                _, header, rows = payload
                obj = {
                    "columns": header,
                    "rows": [list(r) for r in rows],
                    "provenance": provenance,
                }
            else:
                _, obj = payload
                obj = dict(obj)
                obj["provenance"] = provenance
            json.dump(obj, f, sort_keys=True, indent=2)
            f.write("\n")


def _cmd_audit(cfg: RunConfig, args, fmt: str):
    report = run_reproduce_audit()
    if fmt == "csv":
        header, rows = report_to_csv_rows(report)
        return ("table", header, rows)
    return ("dict", report_to_dict(report))


def _cmd_scaling(cfg: RunConfig, args, fmt: str):
    n_max = args.n_max
    if n_max is None and cfg.sweep is not None:
        for ax in cfg.sweep.axes:
            if ax.name == "n_qubits":
                n_max = int(ax.max)
    header, rows = run_scaling_sweep(cfg, n_max if n_max is not None else 100)
    return ("table", header, rows)


def _cmd_contour(cfg: RunConfig, args, fmt: str):
    header, rows = run_g1_contour(cfg)
    return ("table", header, rows)


def _cmd_estimate(cfg: RunConfig, args, fmt: str):
    if args.replicates is not None:
        cfg = replace(cfg, replicates=args.replicates)
    return ("dict", run_estimation_experiment(cfg))


def _cmd_transmon(cfg: RunConfig, args, fmt: str):
    tp = cfg.transmon
    if tp is None:
        raise ConfigError("transmon report needs a [transmon] config section")
    spectrum = charge_spectrum_exact(tp, eps=args.eps)
    approx = frequency_approx(tp, args.eps)
    chi_analytic = strain_susceptibility(tp, mode="analytic")
    chi_numeric = strain_susceptibility(tp, mode="numeric", h=args.fd_step)
    report = {
        "eps": _q(args.eps, "strain"),
        "e_c_over_2pi": _q(tp.e_c / TWO_PI, "hz"),
        "e_j0_over_2pi": _q(tp.e_j0 / TWO_PI, "hz"),
        "ej_over_ec": _q(tp.ej_over_ec, "dimensionless"),
        "beta": _q(tp.beta, "per_strain"),
        "n_g": _q(tp.n_g, "cooper_pairs"),
        "in_transmon_regime": _q(tp.in_transmon_regime, "boolean"),
        "omega01_exact_over_2pi": _q(spectrum.omega01 / TWO_PI, "hz"),
        "omega12_exact_over_2pi": _q(spectrum.omega12 / TWO_PI, "hz"),
        "anharmonicity_over_2pi": _q(
            (spectrum.omega12 - spectrum.omega01) / TWO_PI, "hz"
        ),
        "levels_over_2pi": _q(
            [e / TWO_PI for e in spectrum.eigenvalues.tolist()], "hz"
        ),
        "degenerate_pairs": [
            _q(list(pair), "index") for pair in spectrum.degenerate_pairs
        ],
        "omega01_closed_form_over_2pi": _q(approx.nonlinear / TWO_PI, "hz"),
        "omega01_linearized_over_2pi": _q(approx.linearized / TWO_PI, "hz"),
        "chi_eps_analytic_over_2pi": _q(chi_analytic / TWO_PI, "hz_per_strain"),
        "chi_eps_numeric_over_2pi": _q(chi_numeric / TWO_PI, "hz_per_strain"),
        "chi_rel_deviation": _q(
            abs(chi_analytic - chi_numeric) / abs(chi_numeric), "dimensionless"
        ),
    }
    return ("dict", report)


def _cmd_qfi(cfg: RunConfig, args, fmt: str):
    cp = cfg.coupling
    n = cfg.n_qubits if cfg.state_kind == "ghz" else 1
    register = ghz_state(n) if cfg.state_kind == "ghz" else all_zero_state(1)
    vac = vacuum_state(FockSpace(required_cutoff(0.0)))
    result = qfi_generator_variance(register, vac, cp)
    protocol = protocol_qfi(register, vac, cp)
    report = {
        "state_kind": cfg.state_kind,
        "n_qubits": _q(n, "count"),
        "generator_mean": _q(result.generator_mean, "dimensionless"),
        "generator_second_moment": _q(result.generator_second_moment, "dimensionless"),
        "qfi_variance_route": _q(result.qfi_variance_route, "per_strain_squared"),
        "qfi_overlap_route": _q(result.qfi_overlap_route, "per_strain_squared"),
        "qfi_protocol": _q(protocol, "per_strain_squared"),
        "crb_single_shot": _q(result.crb_single_shot, "strain"),
        "crb_protocol_single_shot": _q(cramer_rao_bound(protocol), "strain"),
        "crb_protocol_nu_shots": _q(cramer_rao_bound(protocol, cfg.nu), "strain"),
        "nu": _q(cfg.nu, "shots_per_s"),
    }
    if cfg.state_kind == "ghz":
        report["crb_ghz_closed_form"] = _q(ghz_crb_closed_form(cp, n), "strain")
    return ("dict", report)


_HANDLERS = {
    "audit": (_cmd_audit, "json"),
    "scaling": (_cmd_scaling, "csv"),
    "contour": (_cmd_contour, "csv"),
    "estimate": (_cmd_estimate, "json"),
    "transmon": (_cmd_transmon, "json"),
    "qfi": (_cmd_qfi, "json"),
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message
        return int(exc.code or 0)
    try:
        handler, default_format = _HANDLERS[args.command]
        cfg = _resolve_config(args)
        fmt = args.format or (cfg.output_format if args.config else default_format)
        payload = handler(cfg, args, fmt)
        _emit(args, cfg, payload, default_format)
        return EXIT_OK
    except StrainSenseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
