import pytest

from qoembac.cli import main
from qoembac.scenario import ScenarioError, load_scenarios, parse_scenarios

STATE_HEADER = "session_id,x_bps,p,x_min,x_max\n"
TABLE_CSV = "c_l_mbps,n,beta\n22,15,.96\n24,17,.95\n30,21,.94\n36,26,.87\n39,29,.84\n40,30,.83\n"


@pytest.fixture
def three(tmp_path):
    p = tmp_path / "state.csv"
    p.write_text(STATE_HEADER + "".join(f"{i},2e6,1,0,4e6\n" for i in range(3)))
    return p


def test_admit_worked_example(three, capsys):
    assert main(["admit", "--state", str(three), "--xnew", "2e6", "--cl", "15e6",
                 "--policy", "ProIBMAC", "--beta", "0.5"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "accept"
    assert out[1].startswith("Pro-IAAR=12 Mbps")
    assert "beta=0.5" in out


def test_admit_reject(three, capsys):
    assert main(["admit", "--state", str(three), "--xnew", "2e6", "--cl", "13e6",
                 "--policy", "ProIBMAC", "--beta", "0.5"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "reject"


def test_admit_empty_state(tmp_path, capsys):
    p = tmp_path / "empty.csv"
    p.write_text(STATE_HEADER)
    assert main(["admit", "--state", str(p), "--xnew", "2e6", "--cl", "22e6",
                 "--policy", "ProIBMAC", "--preset", "MAD_CIF"]) == 0
    assert capsys.readouterr().out.startswith("accept")


def test_admit_cbac_prints_calr(three, capsys):
    assert main(["admit", "--state", str(three), "--xnew", "2e6", "--cl", "8e6", "--policy", "CBAC"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("accept") and "CalR=6 Mbps" in out


@pytest.mark.parametrize("body", ["a,b\n1,2\n", STATE_HEADER + "1,abc,1,0,1\n", STATE_HEADER + "1,5,1,0,1\n"])
def test_admit_malformed_csv(tmp_path, body, capsys):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    assert main(["admit", "--state", str(p), "--xnew", "1", "--cl", "10", "--policy", "CBAC"]) == 2
    assert "error" in capsys.readouterr().err


def test_admit_needs_beta(three):
    assert main(["admit", "--state", str(three), "--xnew", "1", "--cl", "10", "--policy", "ProIBMAC"]) == 2


def test_fit_table(tmp_path, capsys):
    p = tmp_path / "pts.csv"
    p.write_text(TABLE_CSV)
    assert main(["fit", str(p), "--preset", "MAD_CIF", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "model,alpha,delta,r_squared,adj_r_squared,rmse,n_points"
    fitted = out[1].split(",")
    assert fitted[0] == "fitted"
    assert float(fitted[1]) == pytest.approx(-0.62, abs=0.005)
    assert float(fitted[2]) == pytest.approx(0.92, abs=0.005)
    assert out[2].startswith("MAD_CIF,-0.5429,0.9689")
    assert (tmp_path / "o" / "fit.csv").read_text().splitlines() == out


def test_fit_noiseless(tmp_path, capsys):
    p = tmp_path / "pts.csv"
    p.write_text("c_l_mbps,n,beta\n" + "".join(f"{c},{n},{-0.5 + c / n}\n" for c, n in [(20, 30), (30, 40), (40, 60)]))
    assert main(["fit", str(p)]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert float(row[1]) == pytest.approx(-0.5) and float(row[2]) == pytest.approx(1.0)
    assert float(row[5]) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("body", ["c_l_mbps,n,beta\n22,15,0.96\n", "c_l_mbps,n,beta\n20,10,.5\n40,20,.6\n"])
def test_fit_bad_input_exit_2(tmp_path, body):
    p = tmp_path / "pts.csv"
    p.write_text(body)
    assert main(["fit", str(p)]) == 2


def test_usage_error_exit_2(capsys):
    assert main(["admit"]) == 2
    assert main([]) == 2


def test_trace_synth_and_inspect(tmp_path, capsys):
    out = tmp_path / "t.txt"
    assert main(["trace", "synth", "--mean", "1e6", "--burstiness", "1", "--duration", "10",
                 "--seed", "7", "-o", str(out)]) == 0
    assert main(["trace", "inspect", str(out)]) == 0
    text = capsys.readouterr().out
    assert "frames=300" in text and "I=10 P=290" in text
    bad = tmp_path / "bad.txt"
    bad.write_text("5 X 100\n")
    assert main(["trace", "inspect", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


SCEN = """
[trace cbr]
synth = yes
mean_bitrate = 1e6
burstiness = 2
duration = 5
seed = 4

[small]
traces = cbr
c_l = 5e6, 8e6
policies = CBAC, ProIBMAC
beta = MAD_CIF, 0.8
duration = 15
seed = 2
"""


def test_simulate_bundle(tmp_path, capsys):
    p = tmp_path / "s.ini"
    p.write_text(SCEN)
    assert main(["simulate", str(p), "--out", str(tmp_path / "out"), "--packets-csv", "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    d = tmp_path / "out" / "small"
    for name in ("summary.csv", "admissions.csv", "rates.csv", "qoe.csv", "delay_cdf.csv", "packets.csv"):
        assert (d / name).exists()
    rows = (d / "summary.csv").read_text().splitlines()
    # two capacities x (CBAC + ProIBMAC with two betas)
    assert len(rows) == 1 + 2 * 3
    assert rows[0].startswith("run,c_l_mbps,policy,beta,admitted")


def test_simulate_env_default_out(tmp_path, monkeypatch):
    p = tmp_path / "s.ini"
    p.write_text(SCEN)
    monkeypatch.setenv("QOEMBAC_OUT", str(tmp_path / "envout"))
    assert main(["simulate", str(p), "--quiet"]) == 0
    assert (tmp_path / "envout" / "small" / "summary.csv").exists()


def test_simulate_missing_trace_exit_2(tmp_path, capsys):
    p = tmp_path / "s.ini"
    p.write_text("[trace t]\nfile = traces/missing.txt\n\n[x]\ntraces = t\nc_l = 1e6\n")
    assert main(["simulate", str(p), "--out", str(tmp_path)]) == 2
    assert "missing.txt" in capsys.readouterr().err


def test_simulate_missing_file_exit_2(tmp_path):
    assert main(["simulate", str(tmp_path / "nope.ini")]) == 2


@pytest.mark.parametrize("text", [
    "[x]\ntraces = t\nc_l = 1e6\n",
    "[trace t]\nsynth = mad_like\n",
    "[trace t]\nsynth = mad_like\n[x]\ntraces = t\n",
    "[trace t]\nsynth = mad_like\n[x]\ntraces = t\nc_l = 1e6\nbeta = 1.5\n",
    "[trace t]\nsynth = yes\nmean_bitrate = 1e6\n[x]\ntraces = t\nc_l = 1e6\n",
    "[trace t]\nsynth = mad_like\n[x]\ntraces = t\nc_l = 1e6\npolicies = FOO\n",
])
def test_scenario_errors(text):
    with pytest.raises(ScenarioError):
        parse_scenarios(text)


def test_scenario_file_trace_relative(tmp_path):
    (tmp_path / "traces").mkdir()
    (tmp_path / "traces" / "a.txt").write_text("0 I 1000\n1 P 500\n")
    (tmp_path / "s.ini").write_text("[trace a]\nfile = traces/a.txt\n[x]\ntraces = a\nc_l = 1e6\npolicies = none\n")
    (scen,) = load_scenarios(tmp_path / "s.ini", seed=9)
    assert scen.runs[0].config.seed == 9
    assert len(scen.runs[0].config.traces["a"]) == 2
