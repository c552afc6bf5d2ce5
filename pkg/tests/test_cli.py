import re

import pytest

from tfpilots.cli import main
from tfpilots.config import (KEYS, ConfigError, apply_values, config_values, format_config,
                             parse_config_text, resolve_config)
from tfpilots.grid import energy, load_grid, parse_grid
from tfpilots.scenario import desk_preset


# -- config ---------------------------------------------------------------

def test_unknown_key_named():
    with pytest.raises(ConfigError, match="channel.bogus"):
        parse_config_text("channel.bogus=1\n", "f.cfg")


def test_bad_value_names_key():
    with pytest.raises(ConfigError, match="grid.delay_bins"):
        resolve_config("desk", overrides={"grid.delay_bins": "many"})


def test_comments_and_blank_lines():
    vals = parse_config_text("# hi\n\nchannel.beta = 1e4  # decay\n")
    assert vals == {"channel.beta": "1e4"}


def test_resolution_order(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("sweep.trials=7\nsweep.seed=3\n")
    cfg = resolve_config("desk", p, {"sweep.seed": "9"})
    assert cfg.trials_per_point == 7 and cfg.master_seed == 9
    assert cfg.beta is not None and cfg.alpha is not None


def test_echo_roundtrip(tmp_path):
    cfg = resolve_config("paper", overrides={"pilot.family": "stacked", "sweep.kappa": "0.2,0.7"})
    p = tmp_path / "echo.cfg"
    p.write_text(format_config(cfg))
    again = resolve_config("desk", p)
    assert again == cfg
    assert set(config_values(cfg)) == set(KEYS)


def test_speed_matched_rate_key():
    cfg = resolve_config("paper", overrides={"scenario.angular_rate": "match_speed"})
    assert cfg.angular_rate == pytest.approx(200 / 3.6 / 3500)


def test_pilot_dimension_change_resets_roots():
    cfg = apply_values(desk_preset(), {"pilot.family": "stacked", "pilot.m": "3"}).resolved()
    assert cfg.pilot.roots == (1, 2, 3)


# -- subcommands ----------------------------------------------------------

def test_gen_pilot_separable(tmp_path, capsys):
    out = tmp_path / "p.grid"
    assert main(["gen-pilot", "--family", "separable", "--m", "17", "--n", "17", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "energy=1.000000000" in lines
    g = load_grid(out)
    assert g.shape == (17, 17)
    assert energy(g) == pytest.approx(1.0, abs=1e-8)


def test_gen_pilot_rejects_even_length(tmp_path, capsys):
    assert main(["gen-pilot", "--family", "zc1d", "--l", "16", "--r", "3", "--out", str(tmp_path / "p")]) == 2
    assert "L must be odd" in capsys.readouterr().err


def test_gen_pilot_stacked_echoes_roots(tmp_path, capsys):
    assert main(["gen-pilot", "--family", "stacked", "--m", "3", "--n", "7", "--out", str(tmp_path / "p")]) == 0
    assert "roots=1,2,3" in capsys.readouterr().out.splitlines()


def _report(capsys):
    out = {}
    for line in capsys.readouterr().out.splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


def test_acf_linear_peak(tmp_path, capsys):
    out = tmp_path / "acf.dat"
    assert main(["acf", "--family", "separable", "--m", "17", "--n", "17", "--out", str(out)]) == 0
    rep = _report(capsys)
    assert float(rep["peak"]) == pytest.approx(1.0, abs=1e-9)
    blocks = out.read_text().strip().split("\n\n")
    assert len(blocks) == 33
    assert parse_grid((tmp_path / "acf.grid").read_text()).shape == (33, 33)


def test_acf_twisted_stacked_vs_separable(tmp_path, capsys):
    args = ["acf", "--twisted", "--m", "17", "--n", "17", "--preset", "paper", "--out", str(tmp_path / "a.dat")]
    main(args + ["--family", "separable"])
    sep = _report(capsys)
    main(args + ["--family", "stacked"])
    stk = _report(capsys)
    assert float(stk["max_sidelobe_delay_axis"]) < float(sep["max_sidelobe_delay_axis"])
    spread = "2,13,8,11,15,5,6,9,1,10,3,14,12,7,4,16,18"
    main(args + ["--family", "stacked", "--roots", spread])
    stk = _report(capsys)
    assert float(stk["max_sidelobe"].split()[0]) < float(sep["max_sidelobe"].split()[0])


def test_caf_false_peaks(tmp_path, capsys):
    assert main(["caf", "--l", "17", "--out", str(tmp_path / "caf.dat")]) == 0
    rep = _report(capsys)
    assert float(rep["peak"]) == pytest.approx(1.0)
    assert float(rep["max_sidelobe"].split()[0]) > 0.5


def test_acf_caf_flag_matches_caf(tmp_path, capsys):
    main(["acf", "--caf", "--family", "zc1d", "--l", "17", "--out", str(tmp_path / "a.dat")])
    main(["caf", "--l", "17", "--out", str(tmp_path / "b.dat")])
    assert (tmp_path / "a.dat").read_text() == (tmp_path / "b.dat").read_text()


def test_caf_needs_1d_pilot(tmp_path):
    assert main(["acf", "--caf", "--family", "separable", "--out", str(tmp_path / "a.dat")]) == 2


def test_dump_channel_and_estimate(tmp_path, capsys):
    ch = tmp_path / "h.grid"
    assert main(["dump-channel", "--kappa", "1", "--seed", "4", "--out", str(ch)]) == 0
    rep = _report(capsys)
    l0, k0 = (int(v) for v in rep["los_index"].split(","))
    H = load_grid(ch)
    assert H.row_range == (-40, 40) and H.col_range == (0, 39)
    assert main(["estimate", "--channel", str(ch)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "l_hat,k_hat,nu_hat_hz,tau_hat_s,peak"
    fields = lines[1].split(",")
    assert (int(fields[0]), int(fields[1])) == (l0, k0)
    assert float(fields[4]) == pytest.approx(1.0, abs=1e-6)


def test_estimate_from_received(tmp_path, capsys):
    from tfpilots.channel import apply_channel
    from tfpilots.grid import delta, format_grid
    from tfpilots.zc import separable_zc
    X = separable_zc(11, 7, delta_f=37.5, delta_t=1e-6)
    Y = apply_channel(delta(-3, 12, 0.5j), X, alpha=3.75e-5)
    (tmp_path / "x.grid").write_text(format_grid(X))
    (tmp_path / "y.grid").write_text(format_grid(Y))
    assert main(["estimate", "--pilot", str(tmp_path / "x.grid"), "--received", str(tmp_path / "y.grid")]) == 0
    line = capsys.readouterr().out.splitlines()[1]
    assert line.startswith("-3,12,-112.5,1.2e-05,")


def test_truth_outside_grid_exit_code(tmp_path):
    assert main(["dump-channel", "--tau", "1e-3", "--out", str(tmp_path / "h")]) == 3
    assert main(["sweep", "--set", "grid.delay_bins=10", "--out", str(tmp_path / "s.csv")]) == 3


def test_config_error_exit_code(tmp_path):
    assert main(["gen-pilot", "--set", "foo.bar=1", "--out", str(tmp_path / "p")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("sweep.trials=3\nnot_a_key=4\n")
    assert main(["sweep", "--config", str(bad), "--out", str(tmp_path / "s.csv")]) == 2


def test_sweep_byte_identical_and_sidecar(tmp_path):
    common = ["sweep", "--seed", "42", "--trials", "4", "--kappa", "0.2,0.6,1.0", "--snr", "0,5"]
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert main(common + ["--out", str(a)]) == 0
    assert main(common + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    # re-feeding the echoed config reproduces the run
    assert main(["sweep", "--config", str(a) + ".config", "--out", str(c)]) == 0
    assert a.read_bytes() == c.read_bytes()
    rows = a.read_text().splitlines()
    assert rows[0] == "pilot,kappa,snr_db,trials,nmse_tau,nmse_nu"
    kappas = {}
    for r in rows[1:]:
        p, k, s = r.split(",")[:3]
        kappas.setdefault((p, s), []).append(float(k))
    assert len(kappas) == 6
    assert all(sorted(v) == [0.2, 0.6, 1.0] for v in kappas.values())


def test_paper_preset_header(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["sweep", "--preset", "paper", "--trials", "1", "--kappa", "1", "--snr", "5",
                 "--families", "separable", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "pilot,kappa,snr_db,trials,nmse_tau,nmse_nu"


def test_no_temp_files_left(tmp_path):
    main(["gen-pilot", "--out", str(tmp_path / "p.grid")])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["p.grid"]


def test_echo_config_flag(tmp_path):
    echo = tmp_path / "e.cfg"
    main(["gen-pilot", "--family", "stacked", "--out", str(tmp_path / "p"), "--echo-config", str(echo)])
    text = echo.read_text()
    assert "pilot.family=stacked" in text
    assert "pilot.roots=1,2,3,4,5,6,8,9,10,11,12" in text


def test_numbers_use_dot_and_nine_digits(tmp_path):
    out = tmp_path / "p.grid"
    main(["gen-pilot", "--family", "separable", "--m", "3", "--n", "3", "--out", str(out)])
    body = "\n".join(out.read_text().splitlines()[1:])
    mantissas = re.findall(r"(\d+(?:\.\d+)?)(?:e[-+]\d+)?", body)
    assert mantissas
    for m in mantissas:
        assert len(m.replace(".", "").lstrip("0")) <= 9
