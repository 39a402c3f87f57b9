"""Config handling and the command-line entry points."""

import numpy as np
import pytest

from slowlight.background import ExponentialOffField, SampledField, TanhRampField
from slowlight.cli import (
    _as_complex,
    build_field,
    build_scenario,
    load_config,
    main,
)
from slowlight.errors import ValidationError

BASE_CONFIG = """\
physical:
  nu0: 2.0
  delta: 0.0
  c: 1.0
spectral:
  lambda: [0.0, -1.0]
field:
  variant: exponential_off
  omega0: 0.6
  alpha: 4.0
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "scenario.yaml"
    path.write_text(BASE_CONFIG)
    return path


def test_load_config_rejects_bad_yaml(tmp_path):
    p = tmp_path / "broken.yaml"
    p.write_text("physical: [unclosed\n")
    with pytest.raises(ValidationError):
        load_config(p)
    p.write_text("- just\n- a list\n")
    with pytest.raises(ValidationError):
        load_config(p)
    with pytest.raises(ValidationError):
        load_config(tmp_path / "missing.yaml")


def test_as_complex_forms():
    assert _as_complex([1.0, -2.0], "x") == 1.0 - 2.0j
    assert _as_complex({"re": 0.5, "im": 0.25}, "x") == 0.5 + 0.25j
    assert _as_complex(3, "x") == 3.0 + 0.0j
    with pytest.raises(ValidationError):
        _as_complex([1.0], "x")
    with pytest.raises(ValidationError):
        _as_complex("nope", "x")


def test_build_field_variants(tmp_path):
    assert isinstance(
        build_field({"variant": "exponential_off", "omega0": 0.6, "alpha": 2.0},
                    tmp_path),
        ExponentialOffField)
    assert isinstance(
        build_field({"variant": "tanh_ramp", "omega0": 0.6, "alpha": 1.0},
                    tmp_path),
        TanhRampField)
    with pytest.raises(ValidationError):
        build_field({"variant": "quintic", "omega0": 0.6}, tmp_path)
    with pytest.raises(ValidationError):
        build_field({"omega0": 0.6}, tmp_path)


def test_build_field_sampled(tmp_path):
    ref = ExponentialOffField(0.6, 2.0)
    taus = np.linspace(-12.0, 30.0, 30001)
    rows = "\n".join(f"{t:.8e},{v.real:.8e},{v.imag:.8e}"
                     for t, v in zip(taus, ref(taus)))
    data = tmp_path / "field.csv"
    data.write_text("# tau, re, im\n" + rows + "\n")
    field = build_field(
        {"variant": "sampled", "path": "field.csv", "omega0": 0.6}, tmp_path)
    assert isinstance(field, SampledField)
    assert field(0.5) == pytest.approx(ref(0.5), abs=1e-6)


def test_build_scenario_defaults(config_path):
    cfg = load_config(config_path)
    scenario = build_scenario(cfg, base_dir=config_path.parent)
    assert scenario.params.nu0 == 2.0
    assert scenario.spectral.lam == -1j
    assert scenario.method == "picard"
    assert scenario.grid.contains(0.0)
    assert len(scenario.config_hash) == 16


def test_config_hash_tracks_content(config_path):
    cfg = load_config(config_path)
    base = build_scenario(cfg, base_dir=config_path.parent).config_hash
    again = build_scenario(cfg, base_dir=config_path.parent).config_hash
    assert base == again
    cfg2 = load_config(config_path)
    cfg2["field"]["alpha"] = 8.0
    other = build_scenario(cfg2, base_dir=config_path.parent).config_hash
    assert other != base


def test_main_trajectory(tmp_path, config_path, capsys):
    out = tmp_path / "results"
    code = main(["trajectory", "--config", str(config_path),
                 "--out", str(out)])
    assert code == 0
    table = (out / "trajectory.csv").read_text().splitlines()
    meta = [l for l in table if l.startswith("#")]
    assert any("command = trajectory" in l for l in meta)
    header = next(l for l in table if not l.startswith("#"))
    assert header.split(",") == ["tau", "zeta_peak", "x", "t", "vg_ratio"]
    body = [l for l in table if not l.startswith("#")][1:]
    first = dict(zip(header.split(","), map(float, body[0].split(","))))
    assert first["vg_ratio"] == pytest.approx(1.0 / 11.0, rel=1e-9)


def test_main_stop_values_match_library(tmp_path, config_path, capsys):
    from slowlight.dynamics import stop_report

    out = tmp_path / "results"
    code = main(["stop", "--config", str(config_path), "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "stopping_distance" in printed

    cfg = load_config(config_path)
    scenario = build_scenario(cfg, base_dir=config_path.parent)
    rep = stop_report(scenario.solve(), scenario.params)

    table = (out / "stop.csv").read_text().splitlines()
    header = next(l for l in table if not l.startswith("#")).split(",")
    row = next(l for l in table if not l.startswith("#") and l != ",".join(header))
    values = dict(zip(header, map(float, row.split(","))))
    assert values["stopping_distance"] == pytest.approx(rep.stopping_distance,
                                                        rel=1e-12)
    assert values["relative_distance"] == pytest.approx(rep.relative_distance,
                                                        rel=1e-12)


def test_main_simulate_deterministic(tmp_path, config_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["simulate", "--config", str(config_path),
                     "--out", str(out)]) == 0
        outs.append((out / "simulate.csv").read_bytes())
    assert outs[0] == outs[1]


def test_main_verify_runs_clean(tmp_path, config_path, capsys):
    out = tmp_path / "results"
    code = main(["verify", "--config", str(config_path), "--out", str(out)])
    printed = capsys.readouterr().out
    assert code == 0, printed
    assert (out / "verify.csv").exists()
    assert "order" in printed


def test_main_verify_fails_on_absurd_threshold(tmp_path, config_path, capsys):
    out = tmp_path / "results"
    code = main(["verify", "--config", str(config_path), "--out", str(out),
                 "--tol", "1e-14"])
    assert code == 3
    assert (out / "verify.csv").exists()


def test_main_sweep_alpha(tmp_path, config_path, capsys):
    out = tmp_path / "results"
    code = main(["sweep", "--config", str(config_path), "--out", str(out),
                 "--param", "alpha", "--values", "2,8"])
    assert code == 0
    table = (out / "sweep.csv").read_text().splitlines()
    body = [l for l in table if not l.startswith("#")]
    assert body[0].startswith("alpha,")
    assert len(body) == 3
    rel = [float(l.split(",")[2]) for l in body[1:]]
    # Slower switch-off means more extra travel.
    assert rel[0] > rel[1] > 0.0


def test_main_sweep_rejects_unknown_parameter(config_path, capsys):
    code = main(["sweep", "--config", str(config_path),
                 "--param", "nu0", "--values", "1,2"])
    assert code == 1


def test_main_reports_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("physical:\n  nu0: -3\nspectral:\n  lambda: [0, -1]\n"
                   "field:\n  variant: constant\n  omega0: 0.6\n")
    code = main(["stop", "--config", str(bad)])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_main_divergence_exit_code(tmp_path, capsys):
    cfg = tmp_path / "hard.yaml"
    cfg.write_text(BASE_CONFIG + "solver:\n  method: picard\n  max_iter: 1\n")
    code = main(["stop", "--config", str(cfg)])
    assert code == 2
    assert "diverged" in capsys.readouterr().err
