import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from src.conf.config import settings
from src.conf.logging import setup_logging
from src.core.models import PointCloud, ProbabilityVector, RnifsSystem
from src.core.rng import Xoshiro256StarStar
from src.exceptions import Diverged, InsufficientScales, RnifsError
from src.repository import artifacts
from src.repository.configs import config_digest, list_configs, load_config, write_config
from src.repository.maps import lookup
from src.schemas import (CaseStudyReport, DimensionEstimate, Estimator, ExperimentConfig, ExperimentResult,
                         OutputKind, SuiteRow, SweepReport)
from src.services import dimension, render
from src.services.stability import stability_report
from src.services.system import dirichlet_probabilities, generate_orbit


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

CLASSICAL = "classical_sierpinski"
EXTENDED = "rnifs_extension"


def build_system(cfg: ExperimentConfig) -> RnifsSystem:
    """
    Resolve a config into a system. Dirichlet weights are drawn from a jumped copy
    of the config's stream so they never share draws with the orbit.

    :param cfg: The experiment config.
    :type cfg: ExperimentConfig
    :return: The system.
    :rtype: RnifsSystem
    """
    maps = [lookup(map_id) for map_id in cfg.map_ids]
    if cfg.probs is not None:
        probs = ProbabilityVector(tuple(cfg.probs))
    else:
        probs = dirichlet_probabilities(cfg.dirichlet_alphas, Xoshiro256StarStar(cfg.seed).jumped())
    return RnifsSystem(tuple(maps), probs)


def with_seed(cfg: ExperimentConfig, seed: Optional[int]) -> ExperimentConfig:
    return cfg if seed is None else cfg.model_copy(update={"seed": seed})


def _orbit(cfg: ExperimentConfig, sys: RnifsSystem, digest: str) -> PointCloud:
    try:
        return generate_orbit(sys, cfg.x0, cfg.iterations, cfg.burn_in, cfg.seed, digest)
    except Diverged as exc:
        raise Diverged(exc.step, exc.point, cfg.name) from None


def _estimate(label: str, compute) -> Optional[DimensionEstimate]:
    try:
        return compute()
    except InsufficientScales as exc:
        logger.warning("%s skipped: %s", label, exc.detail)
        return None


def run_experiment(cfg: ExperimentConfig, out_dir: PathLike) -> ExperimentResult:
    """
    Generate the orbit of one config and write the requested artifacts to ``out_dir/<name>/``.

    :param cfg: The experiment config.
    :type cfg: ExperimentConfig
    :param out_dir: Parent output directory.
    :type out_dir: str | Path
    :return: Estimates, stability report and the written paths.
    :rtype: ExperimentResult
    """
    started = time.perf_counter()
    digest = config_digest(cfg)
    folder = Path(out_dir) / cfg.name
    sys = build_system(cfg)
    cloud = _orbit(cfg, sys, digest)
    outputs = set(cfg.outputs)
    written: list[Path] = [write_config(cfg, folder / "config.json")]
    estimates: dict[Estimator, DimensionEstimate] = {}

    if OutputKind.points in outputs:
        written.append(artifacts.write_points_csv(cloud, folder / "points.csv"))
    if OutputKind.density in outputs:
        grid = render.density_grid(cloud)
        written.append(render.write_density_image(grid, folder / "density.ppm"))
    if OutputKind.scatter in outputs:
        written.append(render.write_scatter_image(cloud, settings.scatter_size, settings.scatter_size, folder / "scatter.ppm"))

    if OutputKind.boxdim in outputs:
        series = dimension.box_counts(cloud)
        written.append(artifacts.write_series_csv(series, folder / "boxcount.csv"))
        fit = _estimate(f"{cfg.name}: box dimension", lambda: dimension.fit_dimension(series))
        if fit:
            estimates[Estimator.box] = fit
            written.append(render.write_loglog_csv(series, fit, folder / "boxcount_loglog.csv"))
    if OutputKind.infodim in outputs:
        series = dimension.entropy_series(cloud)
        written.append(artifacts.write_series_csv(series, folder / "information.csv"))
        fit = _estimate(f"{cfg.name}: information dimension", lambda: dimension.fit_information(series))
        if fit:
            estimates[Estimator.information] = fit
    if OutputKind.corrdim in outputs:
        series = dimension.correlation_series(cloud, seed=cfg.seed)
        written.append(artifacts.write_series_csv(series, folder / "correlation.csv"))
        fit = _estimate(f"{cfg.name}: correlation dimension", lambda: dimension.fit_correlation(series))
        if fit:
            estimates[Estimator.correlation] = fit
    if estimates:
        written.append(artifacts.write_json({k.value: v.model_dump(mode="json") for k, v in estimates.items()},
                                            folder / "dimension.json"))

    report = None
    if OutputKind.stability in outputs:
        try:
            report = stability_report(sys, seed=cfg.seed, x0=cfg.x0, burn_in=cfg.burn_in)
        except Diverged as exc:
            raise Diverged(exc.step, exc.point, cfg.name) from None
        written.append(artifacts.write_json(report, folder / "stability.json"))

    result = ExperimentResult(
        name=cfg.name,
        config_digest=digest,
        n_points=len(cloud),
        probs=list(sys.probs.p),
        dimension_estimates=estimates,
        stability=report,
        artifact_paths=[str(p) for p in written],
        wall_time=time.perf_counter() - started,
    )
    box = estimates.get(Estimator.box)
    logger.info("Experiment %s done in %.2fs: box dim %s, verdict %s", cfg.name, result.wall_time,
                f"{box.value:.4f}" if box else "n/a", report.verdict.value if report else "n/a")
    return result


def suite_row(path: PathLike, out_dir: PathLike, seed: Optional[int] = None) -> SuiteRow:
    """
    Run one config file and summarize it; failures become rows instead of exceptions.
    """
    path = Path(path)
    started = time.perf_counter()
    try:
        cfg = with_seed(load_config(path), seed)
        result = run_experiment(cfg, out_dir)
    except RnifsError as exc:
        logger.warning("Experiment %s failed: %s", path.stem, exc.detail)
        return SuiteRow(name=path.stem, wall_time=time.perf_counter() - started, error=exc.detail)
    except (ArithmeticError, ValueError) as exc:
        # numpy and scipy failures become error rows as well
        logger.exception("Experiment %s failed unexpectedly", path.stem)
        return SuiteRow(name=path.stem, wall_time=time.perf_counter() - started, error=f"{type(exc).__name__}: {exc}")

    box = result.dimension_estimates.get(Estimator.box)
    return SuiteRow(
        name=result.name,
        box_dim=box.value if box else None,
        r_squared=box.r_squared if box else None,
        lyapunov=result.stability.lyapunov_estimate if result.stability else None,
        verdict=result.stability.verdict if result.stability else None,
        wall_time=result.wall_time,
    )


def _init_worker(level: int) -> None:
    setup_logging()
    logging.getLogger().setLevel(level)


def run_suite(config_dir: PathLike, out_dir: PathLike, workers: Optional[int] = None,
              seed: Optional[int] = None) -> list[SuiteRow]:
    """
    Run every ``*.json`` config of a directory and write ``out_dir/summary.csv``.

    :param config_dir: Directory of configs, run in sorted file order.
    :type config_dir: str | Path
    :param out_dir: Output directory.
    :type out_dir: str | Path
    :param workers: Worker processes; 1 runs in-process.
    :type workers: int, optional
    :param seed: Seed overriding every config's own.
    :type seed: int, optional
    :return: One row per config, failures included.
    :rtype: list[SuiteRow]
    """
    workers = settings.workers if workers is None else workers
    paths = list_configs(config_dir)
    if workers > 1 and len(paths) > 1:
        level = logging.getLogger().getEffectiveLevel()
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(level,)) as pool:
            rows = list(pool.map(suite_row, paths, [out_dir] * len(paths), [seed] * len(paths)))
    else:
        rows = [suite_row(p, out_dir, seed) for p in paths]

    summary = artifacts.write_summary_csv(rows, Path(out_dir) / "summary.csv")
    failed = sum(row.failed for row in rows)
    logger.info("Suite finished: %d experiments, %d failed, summary at %s", len(rows), failed, summary)
    return rows


def seed_sweep(cfg: ExperimentConfig, seeds: Sequence[int]) -> SweepReport:
    """
    Box dimension of the same config under several seeds.

    :param cfg: The experiment config.
    :type cfg: ExperimentConfig
    :param seeds: Seeds to run.
    :type seeds: Sequence[int]
    :return: Per-seed values and fit R², their mean and their max - min spread.
    :rtype: SweepReport
    """
    fits = []
    for seed in seeds:
        seeded = with_seed(cfg, seed)
        cloud = _orbit(seeded, build_system(seeded), config_digest(seeded))
        fits.append(dimension.fit_dimension(dimension.box_counts(cloud)))
    values = [fit.value for fit in fits]
    report = SweepReport(
        name=cfg.name,
        seeds=list(seeds),
        values=values,
        r_squared=[fit.r_squared for fit in fits],
        mean=float(np.mean(values)),
        spread=float(np.ptp(values)),
    )
    logger.info("Seed sweep of %s: mean %.4f, spread %.4f over %d seeds", cfg.name, report.mean, report.spread, len(seeds))
    return report


def case_study_configs(seed: Optional[int] = None, iterations: Optional[int] = None,
                       burn_in: Optional[int] = None) -> tuple[ExperimentConfig, ExperimentConfig]:
    common = dict(
        iterations=settings.case_study_iterations if iterations is None else iterations,
        burn_in=settings.case_study_burn_in if burn_in is None else burn_in,
        seed=settings.case_study_seed if seed is None else seed,
        outputs=[OutputKind.points, OutputKind.density, OutputKind.scatter, OutputKind.boxdim, OutputKind.stability],
    )
    classical = ExperimentConfig(name=CLASSICAL, map_ids=["sier1", "sier2", "sier3"], probs=[1 / 3] * 3, **common)
    extended = ExperimentConfig(name=EXTENDED, map_ids=["sier1", "sier2", "sier3", "sier_nl"], probs=[0.25] * 4, **common)
    return classical, extended


def _box_value(result: ExperimentResult) -> float:
    box = result.dimension_estimates.get(Estimator.box)
    if box is None:
        raise InsufficientScales(f"Case-study arm {result.name} has no box-dimension fit")
    return box.value


def case_study(out_dir: PathLike, seed: Optional[int] = None, iterations: Optional[int] = None,
               burn_in: Optional[int] = None) -> CaseStudyReport:
    """
    Classical Sierpinski system against its extension by the nonlinear map, side by side.

    :param out_dir: Output directory.
    :type out_dir: str | Path
    :param seed: Seed of both arms.
    :type seed: int, optional
    :param iterations: Steps per arm.
    :type iterations: int, optional
    :param burn_in: Discarded steps per arm.
    :type burn_in: int, optional
    :return: Both box dimensions, their difference and the similarity bound of the classical arm.
    :rtype: CaseStudyReport
    """
    out_dir = Path(out_dir)
    classical_cfg, extended_cfg = case_study_configs(seed, iterations, burn_in)
    classical = run_experiment(classical_cfg, out_dir)
    extended = run_experiment(extended_cfg, out_dir)

    paths = [
        render.write_side_by_side([out_dir / CLASSICAL / "scatter.ppm", out_dir / EXTENDED / "scatter.ppm"],
                                  out_dir / "comparison_scatter.ppm"),
        render.write_side_by_side([out_dir / CLASSICAL / "density.ppm", out_dir / EXTENDED / "density.ppm"],
                                  out_dir / "comparison_density.ppm"),
    ]
    classical_dim = _box_value(classical)
    extended_dim = _box_value(extended)
    report = CaseStudyReport(
        classical_dim=classical_dim,
        extended_dim=extended_dim,
        delta=extended_dim - classical_dim,
        similarity_dim=dimension.similarity_bound(ProbabilityVector.uniform(3), [0.5, 0.5, 0.5]),
        classical_verdict=classical.stability.verdict,
        extended_verdict=extended.stability.verdict,
        artifact_paths=[str(p) for p in paths] + classical.artifact_paths + extended.artifact_paths,
    )
    report_path = artifacts.write_json(report, out_dir / "report.json")
    report.artifact_paths.append(str(report_path))
    logger.info("Case study: classical %.4f, extended %.4f, delta %+.4f", classical_dim, extended_dim, report.delta)
    return report
