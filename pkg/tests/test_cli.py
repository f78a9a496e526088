import json

import pytest

from plknn import ExperimentConfig, ModelConfig
from plknn.cli import EXIT_FAILED, EXIT_OK, main
from plknn.experiments import read_report_csv


@pytest.fixture()
def model_config_file(tmp_path):
    cfg = ModelConfig(n_agents=25, n_alternatives=40, dim=1, box=1.0, seed=3)
    path = tmp_path / "model.json"
    path.write_text(cfg.to_json())
    return path


@pytest.fixture()
def experiment_config_file(tmp_path):
    cfg = ExperimentConfig(
        model=ModelConfig(n_agents=30, n_alternatives=80, dim=1, box=5.0, seed=3),
        k_grid=(3, 6),
        pair_sample_size=40,
        dims=(1, 2),
        replicate_seeds=(0,),
    )
    path = tmp_path / "experiment.json"
    path.write_text(cfg.to_json())
    return path


def test_simulate(tmp_path, model_config_file, capsys):
    out = tmp_path / "out"
    code = main(["simulate", "--config", str(model_config_file), "--out", str(out)])
    assert code == EXIT_OK
    header = (out / "rankings.csv").read_text().splitlines()[0]
    assert header == "n=25,m=40,seed=3"
    assert (out / "agents.csv").exists()
    assert (out / "alternatives.csv").exists()


def test_knn_by_index_and_coords(model_config_file, capsys):
    code = main(
        ["knn", "--method", "kt_knn", "--query", "4", "--k", "3",
         "--config", str(model_config_file)]
    )
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "kt_knn"
    assert payload["query"] == 4
    assert len(payload["members"]) == 3
    code = main(
        ["knn", "--method", "oracle", "--coords", "0.42", "--k", "5",
         "--config", str(model_config_file)]
    )
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["query"] == 25  # planted after the sampled agents
    assert len(payload["members"]) == 5


def test_knn_threshold_mode(model_config_file, capsys):
    code = main(
        ["knn", "--method", "global_knn", "--query", "1", "--eps", "0.4",
         "--config", str(model_config_file)]
    )
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["selector"] == {"mode": "threshold", "eps": 0.4}


def test_knn_argument_errors(model_config_file, capsys):
    assert main(
        ["knn", "--method", "kt_knn", "--query", "1",
         "--config", str(model_config_file)]
    ) == EXIT_FAILED
    assert main(
        ["knn", "--method", "kt_knn", "--query", "1", "--k", "2", "--eps", "0.1",
         "--config", str(model_config_file)]
    ) == EXIT_FAILED
    assert main(
        ["knn", "--method", "kt_knn", "--k", "2", "--config", str(model_config_file)]
    ) == EXIT_FAILED
    assert main(
        ["knn", "--method", "oracle", "--coords", "0.1,0.2", "--k", "2",
         "--config", str(model_config_file)]
    ) == EXIT_FAILED


def test_alt_sim(model_config_file, capsys):
    code = main(
        ["alt-sim", "--query", "2", "--ell", "1.5", "--config", str(model_config_file)]
    )
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["query"] == 2
    assert 2 in payload["candidates"]
    assert "half_stats" in payload and "final" in payload and "clusters" in payload


def test_alt_sim_high_dim_is_candidates_only(tmp_path, capsys):
    cfg = ModelConfig(n_agents=20, n_alternatives=15, dim=2, box=1.0, seed=1)
    path = tmp_path / "m.json"
    path.write_text(cfg.to_json())
    assert main(["alt-sim", "--query", "0", "--ell", "1.0", "--config", str(path)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert "final" not in payload
    assert "note" in payload


def test_verify_example_one(tmp_path, capsys):
    out = tmp_path / "verify"
    code = main(["verify", "example-1", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert (out / "example-1.json").exists()
    curve = (out / "example-1_expected_kt.csv").read_text().splitlines()
    assert curve[0] == "x,value,stderr"
    assert len(curve) > 100


def test_verify_item_bounds(tmp_path, capsys):
    out = tmp_path / "verify"
    code = main(["verify", "item-bounds", "--out", str(out), "--seed", "0"])
    assert code == EXIT_OK
    assert (out / "item-bounds.json").exists()


def test_experiment_subcommands(tmp_path, experiment_config_file):
    out = tmp_path / "exp"
    assert main(
        ["experiment", "fig1a", "--config", str(experiment_config_file), "--out", str(out)]
    ) == EXIT_OK
    report = read_report_csv(out / "fig1a.csv")
    assert {r.method for r in report.rows} == {"kt_knn", "global_knn", "oracle"}
    assert main(
        ["experiment", "fig1b", "--config", str(experiment_config_file),
         "--out", str(out), "--k", "4"]
    ) == EXIT_OK
    assert (out / "fig1b.csv").exists()
    assert main(
        ["experiment", "fig1c", "--config", str(experiment_config_file), "--out", str(out)]
    ) == EXIT_OK
    rows = read_report_csv(out / "fig1c.csv").rows
    assert {r.dim for r in rows} == {1, 2}


def test_missing_config_is_an_error(tmp_path):
    assert main(
        ["knn", "--method", "oracle", "--query", "0", "--k", "1",
         "--config", str(tmp_path / "nope.json")]
    ) == EXIT_FAILED


def test_verify_exit_code_mapping():
    from plknn.cli import EXIT_INCONCLUSIVE, verify_exit_code
    from plknn.theory import ClaimReport, VerifyReport

    def rep(*statuses):
        return VerifyReport(
            target="t",
            claims=tuple(ClaimReport(name=f"c{i}", status=s) for i, s in enumerate(statuses)),
        )

    assert verify_exit_code(rep("pass", "pass")) == EXIT_OK
    assert verify_exit_code(rep("pass", "inconclusive")) == EXIT_INCONCLUSIVE
    assert verify_exit_code(rep("fail", "inconclusive")) == EXIT_FAILED
    assert verify_exit_code(rep("pass", "fail")) == EXIT_FAILED
