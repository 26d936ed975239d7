import csv
import io

import numpy as np
import pytest

from consensus_bounds.cli import main
from consensus_bounds.netgraph import load_network


@pytest.fixture
def files(tmp_path):
    net = tmp_path / "net.txt"
    assert main(["gen-network", "--n", "9", "--seed", "2", "--out", str(net)]) == 0
    x0 = tmp_path / "x0.txt"
    np.savetxt(x0, np.random.default_rng(5).uniform(0.1, 0.9, 9))
    return tmp_path, str(net), str(x0)


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_gen_network_to_stdout(capsys):
    assert main(["gen-network", "--n", "5", "--m", "2", "--seed", "1"]) == 0
    assert capsys.readouterr().out.startswith("n 5\n")


def test_centrality(files, capsys):
    _, net, _ = files
    assert main(["centrality", "--net", net]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0] == ["agent", "nu"] and len(out) == 10
    assert abs(sum(float(r[1]) for r in out[1:]) - 1) <= 1e-12


def test_simulate_trace(files, capsys):
    _, net, x0 = files
    assert main(["simulate", "--net", net, "--x0", x0, "--tol", "1e-6"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0][:3] == ["step", "x_1", "x_2"]
    assert out[0][-4:] == ["theta_under", "theta_over", "flag_low", "flag_high"]
    assert len(out[0]) == 1 + 9 + 4
    assert [int(r[0]) for r in out[1:4]] == [0, 1, 2]


def test_bounds(files, capsys):
    _, net, x0 = files
    assert main(["bounds", "--net", net, "--x0", x0]) == 0
    head = capsys.readouterr().out.split("\n\n")[0]
    table = rows(head)
    lo, hi, gap, cgap = map(float, table[1])
    assert lo <= hi and abs(gap - (hi - lo)) <= 1e-15 and cgap >= gap


@pytest.mark.parametrize("strategy", ["cor1", "baseline", "brute"])
def test_allocate_then_evaluate(files, capsys, strategy):
    tmp, net, x0 = files
    assert main(["allocate", "--net", net, "--x0", x0, "--nb", "2", "--strategy", strategy]) == 0
    text = capsys.readouterr().out
    plan = tmp / "plan.csv"
    plan.write_text(text)
    u = [float(r[1]) for r in rows(text.split("\n", 1)[1])[1:]]
    assert sorted(u)[-2:] == [0.2, 0.2] and sum(u) == pytest.approx(0.4)
    assert main(["evaluate", "--net", net, "--x0", x0, "--nb", "2", "--plan", str(plan),
                 "--trials", "3"]) == 0
    out = rows(capsys.readouterr().out)
    rec = dict(zip(out[0], out[1]))
    assert int(rec["trials"]) == 3
    assert float(rec["alpha_min"]) == pytest.approx(float(text.split("predicted_bound=")[1].split()[0]))


def test_evaluate_rejects_overspent_plan(files, capsys):
    tmp, net, x0 = files
    plan = tmp / "plan.csv"
    plan.write_text("agent,u\n0,0.2\n1,0.2\n2,0.2\n")
    assert main(["evaluate", "--net", net, "--x0", x0, "--nb", "2", "--plan", str(plan)]) == 2


def test_scenario_campaign(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("n_max=25\n")
    out = tmp_path / "run"
    assert main(["scenario2", "--trials", "3", "--seed", "1", "--out-dir", str(out),
                 "--config", str(cfg)]) == 0
    assert (out / "trials.csv").exists() and (out / "summary.csv").exists()
    summary = dict(r for r in rows(capsys.readouterr().out) if len(r) == 2)
    assert summary["trials"] == "3" and summary["failed"] == "0"
    assert "gamma_model=uniform" in (out / "config.txt").read_text()


def test_missing_file_exit_code(capsys):
    assert main(["centrality", "--net", "/nonexistent/net.txt"]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_network_file(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("n 2\n0 1 2.0\n1 0 1\n")
    assert main(["centrality", "--net", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_round_trip_of_generated_network(files):
    _, net, _ = files
    assert load_network(net).n == 9
