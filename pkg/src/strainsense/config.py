"""Run configuration: TOML/JSON parsing, unit handling, canonical round-trip.

Config files (TOML or JSON, same schema) must declare their units
explicitly in a ``[units]`` section: ``frequency`` is ``"hz_over_2pi"``
(laboratory Hz, multiplied by 2π on load) or ``"rad_s"``; ``strain`` is
``"per_strain"`` or ``"per_microstrain"`` (per-µstrain susceptibilities are
scaled by 1e6 on load). Everything is stored internally as rad/s and
per-unit-strain; `to_dict` serializes back in canonical internal units, so
parse → serialize → parse is exact.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import pi
from pathlib import Path
from typing import Optional

try:
    import tomllib  # Python 3.11+
except ImportError:  # pragma: no cover - Python 3.10 fallback
    import tomli as tomllib

from .dynamics import CouplingParams
from .errors import ConfigError
from .homodyne import HomodyneModel
from .transmon import TransmonParams

FREQUENCY_UNITS = ("hz_over_2pi", "rad_s")
STRAIN_UNITS = ("per_strain", "per_microstrain")
OUTPUT_FORMATS = ("csv", "json")
STATE_KINDS = ("single", "ghz")
AXIS_SCALES = ("linear", "log")

#: sweepable axis names and whether they carry frequency/strain units
SWEEP_AXES = {"g0": ("frequency",), "chi_eps": ("frequency", "strain"), "n_qubits": ()}


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.name not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.name!r}")
        if self.points < 2:
            raise ConfigError(f"axis {self.name!r} needs points >= 2")
        if not self.max > self.min:
            raise ConfigError(f"axis {self.name!r} needs max > min")
        if self.scale not in AXIS_SCALES:
            raise ConfigError(f"axis scale must be one of {AXIS_SCALES}")
        if self.scale == "log" and self.min <= 0:
            raise ConfigError(f"log axis {self.name!r} needs min > 0")


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[SweepAxis, ...]
    fixed: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.axes:
            raise ConfigError("sweep needs at least one axis")


@dataclass(frozen=True)
class RunConfig:
    coupling: CouplingParams
    homodyne: HomodyneModel
    n_qubits: int
    nu: float
    true_eps: float = 0.0
    replicates: int = 1
    state_kind: str = "single"
    transmon: Optional[TransmonParams] = None
    sweep: Optional[SweepSpec] = None
    output_path: Optional[str] = None
    output_format: str = "json"

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ConfigError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.nu <= 0:
            raise ConfigError(f"nu must be positive, got {self.nu}")
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if self.state_kind not in STATE_KINDS:
            raise ConfigError(f"state_kind must be one of {STATE_KINDS}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output_format must be one of {OUTPUT_FORMATS}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing {where}.{key}")
    return section[key]


def _check_keys(section: dict, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{where}]: {sorted(unknown)}")


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return float(value)


def from_dict(raw: dict) -> RunConfig:
    """Build a validated RunConfig from a parsed TOML/JSON document."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table/object")
    _check_keys(
        raw, {"units", "coupling", "homodyne", "run", "transmon", "sweep"}, "<root>"
    )
    units = _require(raw, "units", "<root>")
    _check_keys(units, {"frequency", "strain"}, "units")
    freq_unit = _require(units, "frequency", "units")
    strain_unit = _require(units, "strain", "units")
    if freq_unit not in FREQUENCY_UNITS:
        raise ConfigError(f"units.frequency must be one of {FREQUENCY_UNITS}")
    if strain_unit not in STRAIN_UNITS:
        raise ConfigError(f"units.strain must be one of {STRAIN_UNITS}")
    f = 2.0 * pi if freq_unit == "hz_over_2pi" else 1.0
    s = 1e6 if strain_unit == "per_microstrain" else 1.0

    coupling_raw = _require(raw, "coupling", "<root>")
    _check_keys(
        coupling_raw, {"g0", "omega_q0", "omega_r", "chi_eps", "tau", "g1"}, "coupling"
    )
    try:
        coupling = CouplingParams(
            g0=f * _number(_require(coupling_raw, "g0", "coupling"), "coupling.g0"),
            omega_q0=f
            * _number(_require(coupling_raw, "omega_q0", "coupling"), "coupling.omega_q0"),
            omega_r=f
            * _number(_require(coupling_raw, "omega_r", "coupling"), "coupling.omega_r"),
            chi_eps=f
            * s
            * _number(_require(coupling_raw, "chi_eps", "coupling"), "coupling.chi_eps"),
            tau=_number(_require(coupling_raw, "tau", "coupling"), "coupling.tau"),
            g1=(
                f * s * _number(coupling_raw["g1"], "coupling.g1")
                if "g1" in coupling_raw
                else None
            ),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid [coupling]: {exc}") from exc

    homodyne_raw = _require(raw, "homodyne", "<root>")
    _check_keys(homodyne_raw, {"sigma_x", "seed", "shots"}, "homodyne")
    try:
        homodyne = HomodyneModel(
            sigma_x=_number(_require(homodyne_raw, "sigma_x", "homodyne"), "sigma_x"),
            seed=int(_require(homodyne_raw, "seed", "homodyne")),
            shots=int(_require(homodyne_raw, "shots", "homodyne")),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid [homodyne]: {exc}") from exc

    transmon = None
    if "transmon" in raw:
        t = raw["transmon"]
        _check_keys(t, {"e_c", "e_j0", "beta", "n_g", "charge_cutoff"}, "transmon")
        try:
            transmon = TransmonParams(
                e_c=f * _number(_require(t, "e_c", "transmon"), "transmon.e_c"),
                e_j0=f * _number(_require(t, "e_j0", "transmon"), "transmon.e_j0"),
                beta=_number(_require(t, "beta", "transmon"), "transmon.beta"),
                n_g=_number(t.get("n_g", 0.0), "transmon.n_g"),
                charge_cutoff=int(t.get("charge_cutoff", 30)),
            )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"invalid [transmon]: {exc}") from exc

    sweep = None
    if "sweep" in raw:
        sw = raw["sweep"]
        _check_keys(sw, {"axes", "fixed"}, "sweep")
        axes = []
        for i, ax in enumerate(sw.get("axes", [])):
            _check_keys(ax, {"name", "min", "max", "points", "scale"}, f"sweep.axes[{i}]")
            name = _require(ax, "name", f"sweep.axes[{i}]")
            if name not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {name!r}")
            conv = 1.0
            if "frequency" in SWEEP_AXES[name]:
                conv *= f
            if "strain" in SWEEP_AXES[name]:
                conv *= s
            axes.append(
                SweepAxis(
                    name=name,
                    min=conv * _number(_require(ax, "min", "sweep"), "sweep min"),
                    max=conv * _number(_require(ax, "max", "sweep"), "sweep max"),
                    points=int(_require(ax, "points", "sweep")),
                    scale=ax.get("scale", "linear"),
                )
            )
        fixed = dict(sw.get("fixed", {}))
        # named comparison points overlaid on contour output; converted to
        # internal units like everything else
        if "markers" in fixed:
            markers = []
            for j, mk in enumerate(fixed["markers"]):
                where = f"sweep.fixed.markers[{j}]"
                _check_keys(mk, {"name", "g0", "chi_eps"}, where)
                markers.append(
                    {
                        "name": str(_require(mk, "name", where)),
                        "g0": f * _number(_require(mk, "g0", where), f"{where}.g0"),
                        "chi_eps": f
                        * s
                        * _number(_require(mk, "chi_eps", where), f"{where}.chi_eps"),
                    }
                )
            fixed["markers"] = markers
        sweep = SweepSpec(axes=tuple(axes), fixed=fixed)

    run = raw.get("run", {})
    _check_keys(
        run,
        {
            "n_qubits",
            "nu",
            "true_eps",
            "replicates",
            "state_kind",
            "output_path",
            "output_format",
        },
        "run",
    )
    n_qubits = int(run.get("n_qubits", 1))
    return RunConfig(
        coupling=coupling,
        homodyne=homodyne,
        n_qubits=n_qubits,
        nu=_number(run.get("nu", 1e5), "run.nu"),
        true_eps=_number(run.get("true_eps", 0.0), "run.true_eps"),
        replicates=int(run.get("replicates", 1)),
        state_kind=run.get("state_kind", "single" if n_qubits == 1 else "ghz"),
        transmon=transmon,
        sweep=sweep,
        output_path=run.get("output_path"),
        output_format=run.get("output_format", "json"),
    )


def load_config(path: str | Path) -> RunConfig:
    """Parse a TOML (.toml) or JSON (.json) config file."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        if p.suffix == ".toml":
            raw = tomllib.loads(p.read_text())
        elif p.suffix == ".json":
            raw = json.loads(p.read_text())
        else:
            raise ConfigError(f"config must be .toml or .json, got {p.suffix!r}")
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"cannot parse {p}: {exc}") from exc
    return from_dict(raw)


def to_dict(cfg: RunConfig) -> dict:
    """Canonical dict form in internal units (rad_s, per_strain)."""
    out: dict = {
        "units": {"frequency": "rad_s", "strain": "per_strain"},
        "coupling": {
            "g0": cfg.coupling.g0,
            "omega_q0": cfg.coupling.omega_q0,
            "omega_r": cfg.coupling.omega_r,
            "chi_eps": cfg.coupling.chi_eps,
            "g1": cfg.coupling.g1,
            "tau": cfg.coupling.tau,
        },
        "homodyne": {
            "sigma_x": cfg.homodyne.sigma_x,
            "seed": cfg.homodyne.seed,
            "shots": cfg.homodyne.shots,
        },
        "run": {
            "n_qubits": cfg.n_qubits,
            "nu": cfg.nu,
            "true_eps": cfg.true_eps,
            "replicates": cfg.replicates,
            "state_kind": cfg.state_kind,
            "output_format": cfg.output_format,
        },
    }
    if cfg.output_path is not None:
        out["run"]["output_path"] = cfg.output_path
    if cfg.transmon is not None:
        out["transmon"] = {
            "e_c": cfg.transmon.e_c,
            "e_j0": cfg.transmon.e_j0,
            "beta": cfg.transmon.beta,
            "n_g": cfg.transmon.n_g,
            "charge_cutoff": cfg.transmon.charge_cutoff,
        }
    if cfg.sweep is not None:
        out["sweep"] = {
            "axes": [
                {
                    "name": ax.name,
                    "min": ax.min,
                    "max": ax.max,
                    "points": ax.points,
                    "scale": ax.scale,
                }
                for ax in cfg.sweep.axes
            ],
            "fixed": dict(cfg.sweep.fixed),
        }
    return out


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical JSON form; the provenance anchor."""
    blob = json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def preset_config(
    strain_units: str = "per_strain",
    seed: int = 20260817,
    shots: int = 10_000,
    n_qubits: int = 10,
) -> RunConfig:
    """The package's reference parameter set.

    ω_q⁰/2π = 5 GHz, χ_ε/2π = 50 MHz per strain unit, g₀/2π = 50 MHz,
    τ = 100 ns, σ_X = 1, ν = 1e5 shots/s; ω_r/2π = 7 GHz (a typical
    readout resonator, comfortably dispersive); transmon block at
    E_J/E_C = 50 (E_C/2π = 0.25 GHz, E_J⁰/2π = 12.5 GHz, β = 100).

    ``strain_units`` selects how the susceptibility is interpreted
    ("per_strain" or "per_microstrain"); everything downstream follows.
    """
    if strain_units not in STRAIN_UNITS:
        raise ConfigError(f"strain_units must be one of {STRAIN_UNITS}")
    raw = {
        "units": {"frequency": "hz_over_2pi", "strain": strain_units},
        "coupling": {
            "g0": 50e6,
            "omega_q0": 5e9,
            "omega_r": 7e9,
            "chi_eps": 50e6,
            "tau": 100e-9,
        },
        "homodyne": {"sigma_x": 1.0, "seed": seed, "shots": shots},
        "transmon": {
            "e_c": 0.25e9,
            "e_j0": 12.5e9,
            "beta": 100.0,
            "n_g": 0.0,
            "charge_cutoff": 30,
        },
        "run": {
            "n_qubits": n_qubits,
            "nu": 1e5,
            "true_eps": 0.0,
            "replicates": 1,
            "state_kind": "ghz" if n_qubits > 1 else "single",
            "output_format": "json",
        },
    }
    return from_dict(raw)
