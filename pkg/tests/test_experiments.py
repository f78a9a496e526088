import numpy as np
import pytest

from plknn import (
    ExperimentConfig,
    ModelConfig,
    read_report_csv,
    run_dim_sweep,
    run_error_vs_k,
    run_error_vs_position,
    write_report_csv,
)
from plknn.experiments import CSV_HEADER


def _tiny_config(seed=0, **overrides):
    model = ModelConfig(n_agents=40, n_alternatives=120, dim=1, box=5.0, seed=seed)
    defaults = dict(
        model=model,
        k_grid=(3, 8),
        pair_sample_size=60,
        replicate_seeds=(0, 1),
    )
    defaults.update(overrides)
    return ExperimentConfig(**defaults)


def test_config_validation_and_roundtrip():
    cfg = _tiny_config()
    cfg.validate()
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    with pytest.raises(ValueError):
        _tiny_config(k_grid=(8, 3)).validate()
    with pytest.raises(ValueError):
        _tiny_config(methods=("kt_knn", "bogus")).validate()
    with pytest.raises(ValueError):
        _tiny_config(pair_sample_size=0).validate()
    with pytest.raises(ValueError):
        _tiny_config(replicate_seeds=()).validate()


def test_config_hash_sensitivity():
    assert _tiny_config().config_hash() == _tiny_config().config_hash()
    changed = _tiny_config(pair_sample_size=61)
    assert changed.config_hash() != _tiny_config().config_hash()


def test_error_vs_k_rows_and_determinism(tmp_path):
    cfg = _tiny_config()
    report = run_error_vs_k(cfg)
    assert len(report.rows) == 3 * 2 * 2  # methods x k x seeds
    for row in report.rows:
        assert 0.0 <= row.error_mean <= 1.0
        assert row.neighbor_dist_mean >= 0.0
        row.validate()
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_report_csv(report, p1)
    write_report_csv(run_error_vs_k(cfg), p2)
    assert p1.read_bytes() == p2.read_bytes()
    loaded = read_report_csv(p1)
    assert loaded.config_hash == report.config_hash
    assert len(loaded.rows) == len(report.rows)
    for got, want in zip(loaded.rows, report.rows):
        assert (got.method, got.k, got.dim, got.seed, got.query_bin) == (
            want.method, want.k, want.dim, want.seed, want.query_bin,
        )
        assert got.error_mean == pytest.approx(want.error_mean, rel=1e-9)
        assert got.neighbor_dist_mean == pytest.approx(want.neighbor_dist_mean, rel=1e-9)


def test_error_vs_k_parallel_matches_serial(tmp_path):
    cfg = _tiny_config()
    serial = run_error_vs_k(cfg, n_jobs=1)
    threaded = run_error_vs_k(cfg, n_jobs=4)
    p1, p2 = tmp_path / "serial.csv", tmp_path / "threads.csv"
    write_report_csv(serial, p1)
    write_report_csv(threaded, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_csv_schema_and_hash_column(tmp_path):
    cfg = _tiny_config()
    report = run_error_vs_k(cfg)
    path = tmp_path / "report.csv"
    write_report_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[0].split(",")[:8] == [
        "method", "k", "dim", "seed", "query_bin",
        "error_mean", "error_stderr", "neighbor_dist_mean",
    ]
    for line in lines[1:]:
        assert line.split(",")[-1] == report.config_hash


def test_merge_refuses_mismatched_configs():
    r1 = run_error_vs_k(_tiny_config())
    r2 = run_error_vs_k(_tiny_config(pair_sample_size=61))
    with pytest.raises(ValueError):
        r1.merge(r2)
    merged = r1.merge(run_error_vs_k(_tiny_config()))
    assert len(merged.rows) == 2 * len(r1.rows)


def test_read_report_rejects_mixed_hashes(tmp_path):
    row = "kt_knn,3,1,0,,0.1,0.01,0.5,"
    path = tmp_path / "bad.csv"
    path.write_text(CSV_HEADER + "\n" + row + "aaa\n" + row + "bbb\n")
    with pytest.raises(ValueError):
        read_report_csv(path)


def test_oracle_never_worse_at_every_k():
    report = run_error_vs_k(_tiny_config(pair_sample_size=300))
    by = {(r.method, r.k, r.seed): r.error_mean for r in report.rows}
    for k in (3, 8):
        for seed in (0, 1):
            assert by[("oracle", k, seed)] <= by[("kt_knn", k, seed)] + 0.02


def test_error_vs_position_bins():
    model = ModelConfig(n_agents=200, n_alternatives=800, dim=1, box=5.0, seed=0)
    cfg = ExperimentConfig(
        model=model, k_grid=(40,), pair_sample_size=400, replicate_seeds=(0,)
    )
    report = run_error_vs_position(cfg, k=40)
    curves = {}
    for method in ("kt_knn", "global_knn", "oracle"):
        errs = {r.query_bin: r.error_mean for r in report.rows if r.method == method}
        assert all(0 <= b < 40 for b in errs)
        curves[method] = np.array([errs.get(b, np.nan) for b in range(40)])
    # oracle is the envelope on average; the rank-distance baseline both
    # peaks higher and peaks away from corners and center
    assert np.nanmean(curves["oracle"]) <= np.nanmean(curves["global_knn"])
    assert np.nanmean(curves["global_knn"]) < np.nanmean(curves["kt_knn"])
    assert np.nanmax(curves["kt_knn"]) > np.nanmax(curves["global_knn"]) + 0.02
    peak = int(np.nanargmax(curves["kt_knn"]))
    assert peak not in set(range(4)) | set(range(36, 40))
    assert peak not in set(range(17, 23))
    with pytest.raises(ValueError):
        run_error_vs_position(
            ExperimentConfig(
                model=ModelConfig(n_agents=30, n_alternatives=20, dim=2, box=1.0, seed=0),
                k_grid=(3,),
                replicate_seeds=(0,),
            ),
            k=3,
        )


def test_dim_sweep_ordering_and_scaling():
    model = ModelConfig(n_agents=200, n_alternatives=800, dim=1, box=5.0, seed=0)
    cfg = ExperimentConfig(
        model=model, k_grid=(40,), pair_sample_size=50, dims=(1, 2, 3), replicate_seeds=(0,)
    )
    report = run_dim_sweep(cfg)
    dist = {(r.method, r.dim): r.neighbor_dist_mean for r in report.rows}
    for d in (1, 2, 3):
        assert dist[("oracle", d)] <= dist[("global_knn", d)] < dist[("kt_knn", d)]
        # the box edge is normalized to 5/sqrt(d); distances stay within the
        # (constant) diameter while growing with dimension at fixed n
        assert dist[("oracle", d)] < 5.0
    assert dist[("oracle", 1)] < dist[("oracle", 2)] < dist[("oracle", 3)]
    for row in report.rows:
        assert row.error_mean is None


def test_dim_sweep_consistent_with_error_run_bookkeeping():
    model = ModelConfig(n_agents=60, n_alternatives=150, dim=1, box=5.0, seed=0)
    cfg = ExperimentConfig(
        model=model, k_grid=(5,), pair_sample_size=20, dims=(1,), replicate_seeds=(0,)
    )
    sweep = {(r.method,): r.neighbor_dist_mean for r in run_dim_sweep(cfg).rows}
    errk = {(r.method,): r.neighbor_dist_mean for r in run_error_vs_k(cfg).rows}
    for key, value in sweep.items():
        assert value == pytest.approx(errk[key], rel=1e-12)
