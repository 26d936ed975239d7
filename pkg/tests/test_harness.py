import numpy as np
import pytest

from consensus_bounds.harness import (CampaignStats, ScenarioConfig, bounds_trial, preset,
                                      run_bounds_scenario, run_control_large, run_control_small,
                                      sample_x0_beta, sample_x0_uniform, stream)
from consensus_bounds.netgraph import load_network


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(trials=0)
    with pytest.raises(ValueError):
        ScenarioConfig(x0_lo=0.5, x0_hi=0.5)
    with pytest.raises(ValueError):
        ScenarioConfig(x0_lo=-0.1)
    with pytest.raises(ValueError):
        ScenarioConfig(omega_low=0.3, omega_high=0.2)
    with pytest.raises(ValueError):
        ScenarioConfig(formulation="dual")
    with pytest.raises(ValueError):
        preset("scenario9")


def test_grid_has_thirteen_points():
    g = ScenarioConfig().grid()
    assert g.size == 13 and g[0] == 0.5 and g[-1] == 3.5
    assert np.allclose(np.diff(g), 0.25)


def test_config_file_round_trip(tmp_path):
    cfg = preset("scenario3", trials=17, seed=4)
    path = tmp_path / "cfg.txt"
    path.write_text(cfg.to_text())
    assert ScenarioConfig.from_file(path) == cfg


def test_config_file_overlays(tmp_path):
    path = tmp_path / "cfg.txt"
    path.write_text("# comment\ntrials = 5\nexact_ucap=false\n\n")
    cfg = ScenarioConfig.from_file(path, base={"n_b": 4}, seed=9)
    assert (cfg.trials, cfg.exact_ucap, cfg.n_b, cfg.seed) == (5, False, 4, 9)


@pytest.mark.parametrize("body", ["trials\n", "colour=red\n", "exact_ucap=maybe\n"])
def test_config_file_errors(tmp_path, body):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(ValueError):
        ScenarioConfig.from_file(path)


def test_uniform_sampler():
    with pytest.raises(ValueError):
        sample_x0_uniform(3, 0.5, 0.5, stream(0, 1))
    x = sample_x0_uniform(100_000, 0.1, 0.9, stream(0, 1))
    assert x.min() >= 0.1 and x.max() < 0.9
    sigma = 0.8 / np.sqrt(12) / np.sqrt(x.size)
    assert abs(x.mean() - 0.5) <= 3 * sigma
    assert np.array_equal(x, sample_x0_uniform(100_000, 0.1, 0.9, stream(0, 1)))


def test_beta_sampler():
    x = sample_x0_beta(100_000, 2, 5, 0.1, 0.9, stream(3, 1))
    var = 2 * 5 / (7 ** 2 * 8) * 0.8 ** 2
    assert abs(x.mean() - (0.1 + 0.8 * 2 / 7)) <= 3 * np.sqrt(var / x.size)
    flat = sample_x0_beta(100_000, 1, 1, 0.1, 0.9, stream(3, 2))
    assert abs(np.mean(flat) - 0.5) <= 3 * 0.8 / np.sqrt(12 * flat.size)
    assert np.array_equal(x, sample_x0_beta(100_000, 2, 5, 0.1, 0.9, stream(3, 1)))
    with pytest.raises(ValueError):
        sample_x0_beta(3, 0, 1, 0.1, 0.9, stream(0, 0))


def test_degenerate_gain_interval_gives_zero_gap():
    cfg = preset("scenario1", trials=1, omega_low=0.2, omega_high=0.2)
    row = bounds_trial(cfg, 0)
    assert not row.get("error")
    assert row["gap"] <= 1e-10


def test_trials_are_independent_of_order():
    cfg = preset("scenario2", trials=4, n_max=30)
    direct = bounds_trial(cfg, 3)
    batch = run_bounds_scenario(cfg).rows[3]
    assert direct == batch


def test_bounds_campaign_files_and_reload(tmp_path):
    cfg = preset("scenario1", trials=6, n_max=40)
    stats = run_bounds_scenario(cfg, tmp_path)
    assert (tmp_path / "config.txt").exists()
    again = CampaignStats.load(tmp_path)
    assert again.summary == pytest.approx(stats.summary, nan_ok=True)
    assert again.summary["trials"] == 6
    rate = stats.summary["containment_rate_assumption"]
    assert np.isnan(rate) or rate == 1.0


def test_tampered_summary_is_detected(tmp_path):
    run_bounds_scenario(preset("scenario1", trials=3, n_max=20), tmp_path)
    path = tmp_path / "summary.csv"
    lines = path.read_text().splitlines()
    lines = [("mean_gap,0.5" if line.startswith("mean_gap,") else line) for line in lines]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ValueError, match="mean_gap"):
        CampaignStats.load(tmp_path)
    CampaignStats.load(tmp_path, check=False)


def test_bounds_campaign_is_byte_identical(tmp_path):
    cfg = preset("scenario3", trials=5, n_max=30, seed=11)
    run_bounds_scenario(cfg, tmp_path / "a")
    run_bounds_scenario(cfg, tmp_path / "b", workers=2)
    assert (tmp_path / "a/trials.csv").read_bytes() == (tmp_path / "b/trials.csv").read_bytes()


def test_control_small_campaign(tmp_path):
    cfg = preset("control-small", trials=3)
    stats = run_control_small(cfg, tmp_path)
    s = stats.summary
    assert s["failed"] == 0 and s["brute_dominates_rate"] == 1.0
    assert s["ratio_brute"] == 1.0
    assert load_network(tmp_path / "network.txt").n == 12
    rerun = run_control_small(cfg, tmp_path / "again")
    assert rerun.trials_csv() == stats.trials_csv()


def test_control_large_campaign_on_a_reduced_grid():
    cfg = preset("control-large", n_min=60, n_max=60, n_b=5, beta_grid="1:2:1", realized_tol=1e-5)
    stats = run_control_large(cfg)
    assert len(stats.rows) == 4
    assert stats.summary["failed"] == 0
    assert stats.summary["realized_cells"] == 4
    for r in stats.rows:
        assert r["bound_diff"] == pytest.approx(r["bound_cor1"] - r["bound_base"])


def test_control_campaigns_require_raise_target():
    with pytest.raises(ValueError):
        run_control_small(preset("control-small", trials=1, d=0))
