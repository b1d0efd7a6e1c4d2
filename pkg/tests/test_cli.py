import csv
import io
import json

import numpy as np
import pytest

from otto_squeeze import cli, model, thermo

BASE = 'preset = "fig1"\ntau_h = 0.2\ntau_dri = 5e-4\n'

# column order of sweep CSVs; changing it breaks downstream readers
GOLDEN_HEADER = (
    "r,regime,n_t0,n_t2,xi,zeta_ch,zeta_hc,w_tot_avg,q_h_avg,q_c_avg,w_trls,w_fri,w_coh,w_deph,"
    "w_var,power,rel_power_fluct,eta_th,eta_otto,eta_c_gen,beta_h_eff,coherence_t2,kl_t2,tau_cyc,"
    "omega_c,hbar,w_tot_avg_scaled,q_h_avg_scaled,q_c_avg_scaled,w_trls_scaled,w_fri_scaled,"
    "w_coh_scaled,w_deph_scaled,w_var_scaled,power_scaled,tau_cyc_scaled,beta_h_eff_scaled"
)


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_preset_expansion():
    spec = cli.parse_config(BASE)
    assert spec.base == model.fig1()
    assert spec.mode == "simulate" and spec.validation_level == "fast"


def test_round_trip():
    text = BASE + 'r = 0.4\nsweep_axis = "tau_h"\nsweep_start = 0.1\nsweep_stop = 5.0\nsweep_points = 7\nsweep_log = true\nseed = 9\n'
    spec = cli.parse_config(text, mode="sweep")
    again = cli.parse_config(cli.serialize(spec))
    assert again == spec


@pytest.mark.parametrize("text, key", [
    ('preset = "fig1"\ntau_dri = 1e-3\n', "tau_h"),
    (BASE + "colour = 3\n", "colour"),
    (BASE + 'r = "big"\n', "r"),
    (BASE + 'preset = "fig9"\n', None),
    (BASE + "[extra]\na = 1\n", "extra"),
    (BASE + 'mode = "sweep"\n', "sweep_axis"),
    (BASE + 'validation_level = "paranoid"\n', "validation_level"),
])
def test_schema_errors_name_the_key(text, key):
    with pytest.raises(cli.SchemaError) as err:
        cli.parse_config(text)
    if key:
        assert err.value.key == key


@pytest.mark.parametrize("extra", [
    "omega_c = 20000.0\n",
    "beta_h = 1.0\n",
    "r = -0.5\n",
    'sweep_axis = "r"\nsweep_start = 0.0\nsweep_stop = 1.0\nsweep_points = 1\n',
    'sweep_axis = "tau_h"\nsweep_start = 0.0\nsweep_stop = 1.0\nsweep_points = 3\n',
])
def test_range_errors(extra):
    with pytest.raises(model.RangeError):
        cli.parse_config(BASE + extra)


def test_sweep_csv(tmp_path):
    out = tmp_path / "s.csv"
    cfg = write(tmp_path, BASE + 'sweep_axis = "r"\nsweep_start = 0.0\nsweep_stop = 1.0\nsweep_points = 6\n')
    assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == GOLDEN_HEADER
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 6
    eta = [float(r["eta_th"]) for r in rows]
    assert all(b >= a for a, b in zip(eta, eta[1:]))
    # 17 significant digits reproduce the float exactly
    rep = thermo.simulate(model.fig1())
    assert float(rows[0]["eta_th"]) == rep.eta_th


def test_sweep_output_is_deterministic(tmp_path, monkeypatch):
    cfg = write(tmp_path, BASE + 'sweep_axis = "tau_dri"\nsweep_start = 1e-4\nsweep_stop = 1e-2\nsweep_points = 5\nsweep_log = true\n')
    outs = []
    for threads in ("1", "3"):
        monkeypatch.setenv("OTTO_THREADS", threads)
        out = tmp_path / f"s{threads}.csv"
        assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_simulate_json(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["simulate", "--config", write(tmp_path, BASE), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["report"]["regime"] == "engine"
    assert data["config"]["tau_h"] == 0.2
    assert set(data["report"]) == set(thermo.ThermoReport.field_names())


def test_ldf_and_histogram(tmp_path):
    cfg = write(tmp_path, 'preset = "fig1"\ntau_h = 5.0\ntau_dri = 1e-3\neta_points = 50\nmc_cycles = 20000\n')
    out = tmp_path / "l.csv"
    assert cli.main(["ldf", "--config", cfg, "--out", str(out)]) == 0
    rows = np.loadtxt(out, delimiter=",", skiprows=1)
    assert out.read_text().startswith("eta,j_value\n") and rows.shape == (50, 2)
    assert rows[:, 1].min() >= -1e-12
    out = tmp_path / "h.csv"
    assert cli.main(["histogram", "--config", cfg, "--out", str(out), "--seed", "5"]) == 0
    first = out.read_bytes()
    assert cli.main(["histogram", "--config", cfg, "--out", str(out), "--seed", "5"]) == 0
    assert out.read_bytes() == first
    table = np.genfromtxt(out, delimiter=",", names=True)
    assert table["probability"].sum() == pytest.approx(1.0)
    assert table["mc_probability"].sum() == pytest.approx(1.0)


@pytest.mark.parametrize("text, code", [
    ('preset = "fig1"\ntau_dri = 1e-3\n', 2),
    (BASE + "omega_h = 10.0\n", 3),
    ('preset = "fig1"\ntau_dri = 5e-4\ntau_h = 1e-6\nregime_error = true\n', 5),
])
def test_exit_codes(tmp_path, text, code):
    assert cli.main(["simulate", "--config", write(tmp_path, text)]) == code


def test_numerical_failure_exit_code(tmp_path, monkeypatch):
    from otto_squeeze import dynamics

    def fail(*a, **k):
        raise dynamics.NoConvergence("forced")

    monkeypatch.setattr(dynamics, "solve_limit_cycle", fail)
    assert cli.main(["simulate", "--config", write(tmp_path, BASE)]) == 4


def test_check_flag(tmp_path, capsys):
    assert cli.main(["simulate", "--check", "--config", write(tmp_path, BASE)]) == 0
    assert "check ok: complete positivity" in capsys.readouterr().err


def test_dephased_long_stroke_matches_plain(tmp_path):
    a = cli.parse_config('preset = "fig1"\ntau_h = 30.0\ntau_dri = 5e-4\n')
    b = cli.parse_config('preset = "fig1"\ntau_h = 30.0\ntau_dri = 5e-4\ndephase_after_hot = true\n')
    ra, rb = thermo.simulate(a.base), thermo.simulate(b.base)
    assert rb.w_tot_avg == pytest.approx(ra.w_tot_avg, rel=1e-8)
