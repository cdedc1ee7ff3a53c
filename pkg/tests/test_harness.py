import json
import re
from pathlib import Path

import pytest

from strainsense import __version__
from strainsense.audit import Quantity, report_to_dict, run_reproduce_audit
from strainsense.cli import main
from strainsense.config import (
    config_hash,
    from_dict,
    load_config,
    preset_config,
    to_dict,
)
from strainsense.errors import ConfigError

FLOAT_CELL = re.compile(r"^-?\d\.\d{8}e[+-]\d{2,3}$")

TOML_DOC = """\
[units]
frequency = "hz_over_2pi"
strain = "per_microstrain"

[coupling]
g0 = 50e6
omega_q0 = 5e9
omega_r = 7e9
chi_eps = 50.0
tau = 100e-9

[homodyne]
sigma_x = 1.0
seed = 7
shots = 200

[transmon]
e_c = 0.25e9
e_j0 = 12.5e9
beta = 100.0

[run]
n_qubits = 4
nu = 1e5
state_kind = "ghz"
replicates = 3

[[sweep.axes]]
name = "g0"
min = 10e6
max = 200e6
points = 11
scale = "log"

[[sweep.axes]]
name = "chi_eps"
min = 10.0
max = 500.0
points = 7
scale = "log"

[sweep.fixed]
markers = [{name = "nominal_design_point", g0 = 50e6, chi_eps = 50.0}]
"""

JSON_DOC = {
    "units": {"frequency": "hz_over_2pi", "strain": "per_microstrain"},
    "coupling": {
        "g0": 50e6,
        "omega_q0": 5e9,
        "omega_r": 7e9,
        "chi_eps": 50.0,
        "tau": 100e-9,
    },
    "homodyne": {"sigma_x": 1.0, "seed": 7, "shots": 200},
    "transmon": {"e_c": 0.25e9, "e_j0": 12.5e9, "beta": 100.0},
    "run": {"n_qubits": 4, "nu": 1e5, "state_kind": "ghz", "replicates": 3},
    "sweep": {
        "axes": [
            {"name": "g0", "min": 10e6, "max": 200e6, "points": 11, "scale": "log"},
            {"name": "chi_eps", "min": 10.0, "max": 500.0, "points": 7, "scale": "log"},
        ],
        "fixed": {
            "markers": [
                {"name": "nominal_design_point", "g0": 50e6, "chi_eps": 50.0}
            ]
        },
    },
}


# ---------------------------------------------------------------- config


def test_toml_and_json_parse_to_same_config(tmp_path):
    t = tmp_path / "run.toml"
    t.write_text(TOML_DOC)
    j = tmp_path / "run.json"
    j.write_text(json.dumps(JSON_DOC))
    a, b = load_config(t), load_config(j)
    assert a == b
    assert config_hash(a) == config_hash(b)


def test_round_trip_through_canonical_dict(tmp_path):
    j = tmp_path / "run.json"
    j.write_text(json.dumps(JSON_DOC))
    cfg = load_config(j)
    assert from_dict(to_dict(cfg)) == cfg
    assert config_hash(from_dict(to_dict(cfg))) == config_hash(cfg)


def test_hash_tracks_parameters():
    a = preset_config(shots=10_000)
    b = preset_config(shots=10_001)
    assert config_hash(a) != config_hash(b)
    assert config_hash(a) == config_hash(preset_config(shots=10_000))


def test_microstrain_interpretation_scales_susceptibility():
    per_strain = preset_config("per_strain")
    per_micro = preset_config("per_microstrain")
    assert per_micro.coupling.chi_eps == pytest.approx(
        1e6 * per_strain.coupling.chi_eps, rel=1e-15
    )
    assert per_micro.coupling.omega_q0 == per_strain.coupling.omega_q0


def test_unknown_keys_rejected():
    doc = json.loads(json.dumps(JSON_DOC))
    doc["coupling"]["bogus"] = 1.0
    with pytest.raises(ConfigError, match="bogus"):
        from_dict(doc)
    doc = json.loads(json.dumps(JSON_DOC))
    doc["extra_section"] = {}
    with pytest.raises(ConfigError):
        from_dict(doc)


def test_units_section_is_mandatory():
    doc = json.loads(json.dumps(JSON_DOC))
    del doc["units"]
    with pytest.raises(ConfigError, match="units"):
        from_dict(doc)
    doc = json.loads(json.dumps(JSON_DOC))
    doc["units"]["frequency"] = "ghz"
    with pytest.raises(ConfigError):
        from_dict(doc)


def test_marker_keys_validated():
    doc = json.loads(json.dumps(JSON_DOC))
    doc["sweep"]["fixed"]["markers"][0]["surprise"] = 1
    with pytest.raises(ConfigError, match="surprise"):
        from_dict(doc)


# ------------------------------------------------------------------- cli


def _fast_estimate_doc(**run_overrides):
    run = {
        "n_qubits": 2,
        "nu": 1e5,
        "state_kind": "ghz",
        "replicates": 3,
        "true_eps": 0.0,
    }
    run.update(run_overrides)
    return {
        "units": {"frequency": "hz_over_2pi", "strain": "per_strain"},
        "coupling": {
            "g0": 50e6,
            "omega_q0": 5e9,
            "omega_r": 7e9,
            "chi_eps": 50e6,
            "tau": 1e-9,
        },
        "homodyne": {"sigma_x": 1.0, "seed": 11, "shots": 500},
        "run": run,
    }


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_scaling_csv_shape(tmp_path):
    out = tmp_path / "scaling.csv"
    assert main(["scaling", "--n-max", "12", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == (
        "n_qubits__count,sql_normalized__dimensionless,"
        "hl_normalized__dimensionless,sql_physical__strain,"
        "hl_physical__strain,marker"
    )
    assert len(lines) == 13
    first = lines[1].split(",")
    assert first[0] == "1"
    assert first[3] == "6.36619772e+00"
    for cell in first[1:5]:
        assert FLOAT_CELL.match(cell), cell
    marked = [ln for ln in lines[1:] if ln.endswith("nominal_n10")]
    assert len(marked) == 1 and marked[0].startswith("10,")


def test_scaling_n_max_from_sweep_axis(tmp_path):
    doc = _fast_estimate_doc()
    doc["sweep"] = {
        "axes": [{"name": "n_qubits", "min": 1, "max": 17, "points": 17}]
    }
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(doc))
    out = tmp_path / "scaling.csv"
    # with --config the config's output_format becomes the default, so ask
    # for csv explicitly
    rc = main(["scaling", "--config", str(cfgp), "--format", "csv", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 18  # header + N = 1..17
    assert lines[-1].startswith("17,")


def test_contour_nominal_marker(tmp_path):
    out = tmp_path / "contour.csv"
    assert main(["contour", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == (
        "g0_over_2pi__hz,chi_eps_over_2pi__hz_per_strain,"
        "g1_over_2pi__hz_per_strain,marker"
    )
    nominal = [ln for ln in lines if ln.endswith("nominal_design_point")]
    assert len(nominal) == 1
    cells = nominal[0].split(",")
    assert cells[0] == "5.00000000e+07"
    assert cells[2] == "2.50000000e+05"


def test_exit_codes(tmp_path):
    assert main(["estimate", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["scaling", "--n-max", "20000001"]) == 3
    assert main(["transmon", "--fd-step", "1.0"]) == 3
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(_fast_estimate_doc()))
    assert main(["estimate", "--config", str(cfgp), "--units", "per-strain"]) == 2


def test_contour_resource_guard(tmp_path):
    doc = _fast_estimate_doc()
    doc["sweep"] = {
        "axes": [
            {"name": "g0", "min": 1e6, "max": 1e8, "points": 4000, "scale": "log"},
            {
                "name": "chi_eps",
                "min": 1e6,
                "max": 1e8,
                "points": 4000,
                "scale": "log",
            },
        ]
    }
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(doc))
    assert main(["contour", "--config", str(cfgp)]) == 3


def test_estimate_json_structure_and_units(tmp_path):
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(_fast_estimate_doc()))
    out = tmp_path / "est.json"
    assert main(["estimate", "--config", str(cfgp), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    prov = doc["provenance"]
    assert set(prov) == {"command", "config_sha256", "package_version"}
    assert prov["package_version"] == __version__
    assert "estimate" in prov["command"]
    assert prov["config_sha256"] == config_hash(load_config(cfgp))
    assert len(doc["estimates"]) == 3
    assert doc["experiment"]["fock_cross_check"]["status"] == "ok"

    def walk(node, path):
        if isinstance(node, dict):
            if "value" in node and set(node) <= {"value", "unit", "provenance"}:
                assert isinstance(node["unit"], str) and node["unit"], path
                return
            for key, sub in node.items():
                walk(sub, f"{path}.{key}")
        elif isinstance(node, (list, tuple)):
            for i, sub in enumerate(node):
                walk(sub, f"{path}[{i}]")
        elif isinstance(node, bool) or node is None or isinstance(node, str):
            return
        else:
            # a bare number outside a {value, unit} wrapper is a bug
            raise AssertionError(f"untagged numeric leaf at {path}: {node!r}")

    body = {k: v for k, v in doc.items() if k != "provenance"}
    walk(body, "<root>")


def test_estimate_reruns_are_byte_identical(tmp_path):
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(_fast_estimate_doc()))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["estimate", "--config", str(cfgp), "--out", str(a)]) == 0
    assert main(["estimate", "--config", str(cfgp), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_worker_count_does_not_change_output(tmp_path, monkeypatch):
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(_fast_estimate_doc(replicates=5)))
    seq, par = tmp_path / "seq.json", tmp_path / "par.json"
    monkeypatch.delenv("STRAINSENSE_WORKERS", raising=False)
    assert main(["estimate", "--config", str(cfgp), "--out", str(seq)]) == 0
    monkeypatch.setenv("STRAINSENSE_WORKERS", "2")
    assert main(["estimate", "--config", str(cfgp), "--out", str(par)]) == 0
    assert seq.read_bytes() == par.read_bytes()


def test_bad_worker_env_rejected(tmp_path, monkeypatch):
    cfgp = tmp_path / "cfg.json"
    cfgp.write_text(json.dumps(_fast_estimate_doc()))
    monkeypatch.setenv("STRAINSENSE_WORKERS", "many")
    assert main(["estimate", "--config", str(cfgp)]) == 2


def test_transmon_json(tmp_path):
    out = tmp_path / "t.json"
    assert main(["transmon", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["ej_over_ec"]["value"] == pytest.approx(50.0)
    assert doc["omega01_exact_over_2pi"]["value"] == pytest.approx(
        4735479731.0792, rel=1e-9
    )
    assert doc["omega01_exact_over_2pi"]["unit"] == "hz"
    assert doc["chi_rel_deviation"]["value"] == pytest.approx(0.0532133, rel=1e-4)
    assert doc["in_transmon_regime"]["value"] is True


def test_qfi_json(tmp_path):
    out = tmp_path / "q.json"
    assert main(["qfi", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    var = doc["qfi_variance_route"]["value"]
    assert doc["qfi_protocol"]["value"] == pytest.approx(4 * var, rel=1e-12)
    assert doc["qfi_overlap_route"]["value"] == pytest.approx(var, rel=1e-6)
    assert doc["crb_ghz_closed_form"]["value"] == pytest.approx(
        doc["crb_protocol_single_shot"]["value"], rel=1e-12
    )


# ----------------------------------------------------------------- audit


def test_audit_covers_every_published_figure():
    rep = run_reproduce_audit()
    names = [s.step for s in rep.steps]
    assert names == [
        "omega_q0",
        "chi_eps",
        "g0",
        "tau",
        "sigma_x",
        "nu",
        "n_qubits",
        "g1_over_2pi",
        "g1_angular",
        "delta_eps_shot",
        "delta_eps_shot_microstrain_alias",
        "per_root_hz_number",
        "per_root_hz_label",
        "ghz_n10_per_root_hz",
        "chi_eps_from_beta",
    ]
    for step in rep.steps:
        assert step.quoted and isinstance(step.quoted, str)
        assert step.per_strain is not None and step.per_microstrain is not None
    for row in rep.identities:
        assert row.residual.value <= 1e-12
    assert "no single unit reading reproduces" in rep.verdict


def test_audit_flags_the_unit_inconsistency():
    rep = run_reproduce_audit()
    by_name = {s.step: s for s in rep.steps}
    # the quoted susceptibility is consistent only as a per-strain figure ...
    chi = by_name["chi_eps"]
    assert chi.per_strain.match and not chi.per_microstrain.match
    assert chi.per_microstrain.discrepancy_factor.value == pytest.approx(
        1e6, rel=1e-9
    )
    # ... while the printed slope reproduces only under per-microstrain
    g1 = by_name["g1_over_2pi"]
    assert not g1.per_strain.match
    assert g1.per_microstrain.match
    assert g1.per_strain.discrepancy_factor.value == pytest.approx(1e-6, rel=1e-9)
    # the per-shot figure follows under neither reading (~1e3 off both ways)
    chain = by_name["delta_eps_shot"]
    assert not chain.per_strain.match
    assert not chain.per_microstrain.match
    assert chain.per_strain.discrepancy_factor.value == pytest.approx(
        994.7, rel=1e-3
    )
    # and the junction figure is off by ~5e3 under either reading
    beta = by_name["chi_eps_from_beta"]
    assert not beta.per_strain.match and not beta.per_microstrain.match
    assert beta.per_strain.discrepancy_factor.value == pytest.approx(5000.0, rel=0.01)


def test_audit_json_tags_every_number(tmp_path):
    doc = report_to_dict(run_reproduce_audit())
    assert len(doc["steps"]) == 15
    assert len(doc["identities"]) == 4

    def walk(node, path):
        if isinstance(node, dict):
            if "value" in node and set(node) == {"value", "unit"}:
                return
            for key, sub in node.items():
                walk(sub, f"{path}.{key}")
        elif isinstance(node, list):
            for i, sub in enumerate(node):
                walk(sub, f"{path}[{i}]")
        elif isinstance(node, bool) or node is None or isinstance(node, str):
            return
        else:
            raise AssertionError(f"untagged numeric leaf at {path}: {node!r}")

    walk(doc, "<root>")


def test_audit_csv(tmp_path):
    out = tmp_path / "audit.csv"
    assert main(["audit", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("kind,step,interpretation,quoted")
    step_rows = [ln for ln in lines[1:] if ln.startswith("step,")]
    identity_rows = [ln for ln in lines[1:] if ln.startswith("identity,")]
    assert len(step_rows) == 30  # both interpretations of all 15 figures
    assert len(identity_rows) == 4


def test_quantity_refuses_bare_numbers():
    with pytest.raises(ConfigError, match="bare number"):
        Quantity(1.0, "")
    assert Quantity(2.5, "strain").value == 2.5
