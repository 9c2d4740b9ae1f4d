import logging
import math
import os
import time

import orjson
import pytest
from rich.logging import RichHandler

from src.exceptions import Diverged, InsufficientScales
from src.repository.artifacts import read_json, read_points_csv
from src.repository.configs import list_configs, load_config
from src.schemas import Estimator, ExperimentConfig, OutputKind, Verdict
from src.services import harness
from src.services.harness import (
    CLASSICAL,
    EXTENDED,
    build_system,
    case_study,
    run_experiment,
    run_suite,
    seed_sweep,
    suite_row,
    with_seed,
)

from conftest import CONFIG_DIR


def _write(path, payload) -> str:
    path.write_bytes(orjson.dumps(payload))
    return str(path)


def test_run_writes_requested_artifacts(tmp_path, small_config):
    cfg = ExperimentConfig.model_validate(small_config)
    result = run_experiment(cfg, tmp_path)
    folder = tmp_path / "small_sierpinski"
    for name in ("config.json", "points.csv", "density.ppm", "scatter.ppm", "boxcount.csv",
                 "boxcount_loglog.csv", "dimension.json", "stability.json"):
        assert (folder / name).is_file(), name
    assert not (folder / "correlation.csv").exists()
    assert result.n_points == 19900
    assert len(read_points_csv(folder / "points.csv")) == 19900
    assert 1.4 < result.dimension_estimates[Estimator.box].value < 1.75
    assert result.stability.verdict is Verdict.contractive
    assert read_json(folder / "stability.json")["verdict"] == "ContractiveOnAverage"


def test_run_is_reproducible(tmp_path, small_config):
    small_config["outputs"] = ["points"]
    cfg = ExperimentConfig.model_validate(small_config)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    first = (tmp_path / "a" / "small_sierpinski" / "points.csv").read_bytes()
    assert first == (tmp_path / "b" / "small_sierpinski" / "points.csv").read_bytes()


def test_all_estimators(tmp_path, small_config):
    small_config["outputs"] = ["boxdim", "infodim", "corrdim"]
    result = run_experiment(ExperimentConfig.model_validate(small_config), tmp_path)
    assert set(result.dimension_estimates) == {Estimator.box, Estimator.information, Estimator.correlation}
    assert set(read_json(tmp_path / "small_sierpinski" / "dimension.json")) == {"box", "information", "correlation"}


def test_divergence_names_the_config(tmp_path, diverging_config):
    with pytest.raises(Diverged) as exc_info:
        run_experiment(ExperimentConfig.model_validate(diverging_config), tmp_path)
    assert exc_info.value.config == "runaway"
    assert exc_info.value.step == 2
    assert "runaway" in exc_info.value.detail


def test_dirichlet_system_is_seed_determined(small_config):
    del small_config["probs"]
    small_config["dirichlet_alphas"] = [1.0, 2.0, 3.0]
    cfg = ExperimentConfig.model_validate(small_config)
    assert build_system(cfg).probs == build_system(cfg).probs
    assert build_system(cfg).probs != build_system(with_seed(cfg, 8)).probs
    assert math.fsum(build_system(cfg).probs.p) == pytest.approx(1.0, abs=1e-12)


def test_with_seed():
    cfg = ExperimentConfig(name="x", map_ids=["f1"], probs=[1.0], seed=3)
    assert with_seed(cfg, None) is cfg
    assert with_seed(cfg, 9).seed == 9
    assert cfg.seed == 3


def test_suite_keeps_going_after_failure(tmp_path, small_config, diverging_config):
    configs = tmp_path / "configs"
    configs.mkdir()
    small_config["outputs"] = ["boxdim"]
    _write(configs / "a_good.json", small_config)
    _write(configs / "b_runaway.json", diverging_config)

    rows = run_suite(configs, tmp_path / "out", workers=1)
    assert [row.name for row in rows] == ["small_sierpinski", "b_runaway"]
    assert not rows[0].failed
    assert rows[1].failed
    assert "diverged" in rows[1].error
    summary = (tmp_path / "out" / "summary.csv").read_text().splitlines()
    assert len(summary) == 3
    assert "FAILED" in summary[2]


def test_empty_suite_writes_header_only(tmp_path):
    (tmp_path / "configs").mkdir()
    assert run_suite(tmp_path / "configs", tmp_path / "out", workers=1) == []
    assert len((tmp_path / "out" / "summary.csv").read_text().splitlines()) == 1


def test_bundled_spiral_rotation_system():
    sys = build_system(load_config(os.path.join(CONFIG_DIR, "spiral_rotation.json")))
    assert sys.ids == ["f3", "f7", "f11"]
    assert sys.probs.p == (0.4, 0.3, 0.3)


def test_suite_row_reports_bad_config(tmp_path):
    path = _write(tmp_path / "broken.json", {"name": "broken", "map_ids": ["nope"], "probs": [1.0]})
    row = suite_row(path, tmp_path / "out")
    assert row.failed
    assert row.name == "broken"


def test_suite_row_reports_numeric_failure(tmp_path, small_config, monkeypatch):
    path = _write(tmp_path / "a.json", small_config)

    def overflow(cfg, out_dir):
        raise FloatingPointError("overflow encountered in multiply")

    monkeypatch.setattr(harness, "run_experiment", overflow)
    row = suite_row(path, tmp_path / "out")
    assert row.failed
    assert row.name == "a"
    assert row.error == "FloatingPointError: overflow encountered in multiply"


def test_worker_logging_matches_parent():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    try:
        harness._init_worker(logging.WARNING)
        assert root.level == logging.WARNING
        assert any(isinstance(h, RichHandler) for h in root.handlers)
    finally:
        root.handlers[:] = handlers
        root.setLevel(level)


def test_seed_sweep(small_config):
    report = seed_sweep(ExperimentConfig.model_validate(small_config), [1, 2, 3])
    assert report.seeds == [1, 2, 3]
    assert len(report.values) == 3
    assert len(report.r_squared) == 3
    assert report.spread == pytest.approx(max(report.values) - min(report.values))
    assert report.spread < 0.1


def test_case_study_artifacts(tmp_path):
    report = case_study(tmp_path, seed=42, iterations=20000, burn_in=100)
    assert report.similarity_dim == pytest.approx(math.log(3) / math.log(2), abs=1e-12)
    assert report.delta == pytest.approx(report.extended_dim - report.classical_dim)
    for name in ("comparison_scatter.ppm", "comparison_density.ppm", "report.json"):
        assert (tmp_path / name).is_file()
    assert (tmp_path / CLASSICAL / "points.csv").is_file()
    assert (tmp_path / EXTENDED / "points.csv").is_file()


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3, 42])
def test_case_study_full_size(tmp_path, seed):
    report = case_study(tmp_path, seed=seed)
    assert report.classical_dim == pytest.approx(math.log(3) / math.log(2), abs=0.05)
    assert report.extended_dim == pytest.approx(1.787, abs=0.10)
    assert report.delta > 0


def test_case_study_without_box_fit(tmp_path):
    with pytest.raises(InsufficientScales) as exc_info:
        case_study(tmp_path, seed=1, iterations=150, burn_in=100)
    assert CLASSICAL in exc_info.value.detail


@pytest.mark.slow
def test_bundled_suite(tmp_path):
    rows = run_suite(CONFIG_DIR, tmp_path)
    assert len(rows) == 8
    for row in rows:
        assert not row.failed, row.error
        assert 1.0 < row.box_dim < 2.0, row.name
        assert row.r_squared >= 0.97, row.name


@pytest.mark.slow
def test_bundled_suite_runtime(tmp_path):
    started = time.perf_counter()
    rows = run_suite(CONFIG_DIR, tmp_path)
    assert time.perf_counter() - started < 60.0
    assert not any(row.failed for row in rows)


@pytest.mark.slow
@pytest.mark.parametrize("path", list_configs(CONFIG_DIR), ids=lambda p: p.stem)
def test_bundled_experiment_seed_stability(path):
    report = seed_sweep(load_config(path), [1, 2, 3, 4, 5])
    assert report.max_deviation <= 0.03, report.values
    assert min(report.r_squared) >= 0.97, report.r_squared
