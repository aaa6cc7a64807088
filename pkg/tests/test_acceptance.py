from pathlib import Path

import pytest

from eprlab.runner import EXIT_PASS, load_experiment, run_experiment


CONFIGS = Path(__file__).resolve().parent.parent / "configs"

pytestmark = pytest.mark.slow


def run_shipped(name, out_dir, **flags):
    config = load_experiment(path=str(CONFIGS / name), flags={"out_dir": str(out_dir), **flags})
    return run_experiment(config)


def test_rotated_ou_estimates(tmp_path):
    result = run_shipped("estimate_rotated_ou.toml", tmp_path)
    assert result.exit_code == EXIT_PASS, result.reports
    report = result.reports["estimate"]
    assert abs(report["R_hat"] - 2.0) <= 3.0 * report["R_se"]
    assert abs(report["R_hat"] - 2.0) <= 0.04
    assert abs(report["delta_hat"] - 8.0) <= 0.8
    assert abs(report["batch_means"]["delta_hat"] - report["delta_hat"]) <= 0.15 * report["delta_hat"]


@pytest.mark.parametrize(
    "name",
    [
        "clt.toml",
        "mdp.toml",
        "lil.toml",
        "martingale.toml",
        "coupling.toml",
        "harnack.toml",
        "ibp_free.toml",
        "ibp_rotated_ou.toml",
        "moments.toml",
    ],
)
def test_shipped_experiment_passes(tmp_path, name):
    result = run_shipped(name, tmp_path)
    assert result.exit_code == EXIT_PASS, result.reports


def test_shipped_simulation_is_reproducible(tmp_path):
    first = run_shipped("simulate_reversible.toml", tmp_path / "one", workers=1)
    second = run_shipped("simulate_reversible.toml", tmp_path / "four", workers=4)
    assert first.exit_code == second.exit_code == EXIT_PASS
    for filename in ("samples.csv", "horizons.tsv", "report.json"):
        assert (Path(first.out_dir) / filename).read_bytes() == (Path(second.out_dir) / filename).read_bytes()
