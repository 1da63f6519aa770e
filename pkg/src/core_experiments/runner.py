"""Run validated experiment configs and aggregate their rows.

Every `(q, T, seed)` cell draws from its own stream
`RngStream(base_seed).child(q_index, T_index, seed)`, so the output depends
only on the config and never on the thread count.
"""

import logging
import os
import time
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from core_experiments.models.experiment_config import ExperimentConfig
from core_experiments.models.result_row import GridRow, PartitionRow, ResultRow, SummaryRow
from qpaths.ais_engine import run_ais, run_bdmc
from qpaths.entity.path import QPath, Schedule
from qpaths.entity.sampling import RngStream
from qpaths.errors import PreconditionError
from qpaths.paths import estimate_partition, log_density_at

logger = logging.getLogger(__name__)


def resolve_threads(threads: int | None) -> int:
    """`0` or `None` means one worker per CPU."""
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise PreconditionError(f"threads must be non-negative, got {threads}")
    return threads


@dataclass(frozen=True)
class _Cell:
    q_index: int
    t_index: int
    seed: int
    path: QPath
    schedule: Schedule


def build_paths(config: ExperimentConfig) -> list[QPath]:
    base = config.endpoints.base.to_handle()
    target = config.endpoints.target.to_handle()
    return [QPath(base=base, target=target, q=q) for q in config.q_values]


def cell_stream(config: ExperimentConfig, q_index: int, t_index: int, seed: int) -> RngStream:
    return RngStream(config.base_seed).child(q_index, t_index, seed)


def _run_cell(config: ExperimentConfig, cell: _Cell) -> ResultRow:
    cfg = config.hmc.to_config()
    stream = cell_stream(config, cell.q_index, cell.t_index, cell.seed)
    started = time.perf_counter()
    if config.mode == "ais":
        result = run_ais(cell.path, cell.schedule, cfg, config.n_chains, stream, block_size=config.block_size)
        row = ResultRow(
            mode="ais",
            q=cell.path.q,
            T=cell.schedule.T,
            seed=cell.seed,
            log_lower=result.log_ratio_estimate,
            z_estimate=result.z_estimate,
            ess=result.ess,
            n_invalid=result.n_invalid,
        )
    else:
        bounds = run_bdmc(cell.path, cell.schedule, cfg, config.n_chains, stream, block_size=config.block_size)
        row = ResultRow(
            mode="bdmc",
            q=cell.path.q,
            T=cell.schedule.T,
            seed=cell.seed,
            log_lower=bounds.lower,
            log_upper=bounds.upper,
            z_estimate=bounds.forward.z_estimate,
            ess=bounds.forward.ess,
            n_invalid=bounds.forward.n_invalid + bounds.reverse.n_invalid,
        )
    wall_ms = (time.perf_counter() - started) * 1000.0
    return row.model_copy(update={"wall_ms": wall_ms})


def run_experiment(config: ExperimentConfig, threads: int | None = 1) -> list[ResultRow] | list[GridRow] | list[PartitionRow]:
    """Run every cell of `config` and return its rows in canonical order.

    AIS and BDMC rows carry their measured `wall_ms`; writers decide whether
    to keep it.
    """
    if config.mode == "density-grid":
        return run_density_grid(config)
    if config.mode == "partition-mc":
        return run_partition(config)

    paths = build_paths(config)
    schedules = config.schedule.schedules()
    cells = [
        _Cell(q_index, t_index, seed, path, schedule)
        for q_index, path in enumerate(paths)
        for t_index, schedule in enumerate(schedules)
        for seed in range(config.n_seeds)
    ]
    workers = resolve_threads(threads)
    logger.info(
        "Experiment '%s' (%s): %d cells, %d chains each, %d worker(s)",
        config.name, config.mode, len(cells), config.n_chains, workers,
    )

    if workers == 1:
        rows = [_run_cell(config, cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda cell: _run_cell(config, cell), cells))
    return sorted(rows, key=lambda row: row.sort_key())


def run_density_grid(config: ExperimentConfig) -> list[GridRow]:
    """Path log-densities on the configured 1-d grid for every q and beta."""
    points = config.grid.points()
    family = config.endpoints.family
    rows = []
    for path in build_paths(config):
        for beta in config.grid.betas():
            values = np.asarray(log_density_at(path, float(beta), points)).reshape(-1)
            rows.extend(
                GridRow(family=family, q=path.q, beta=float(beta), z=float(z), log_density=float(value))
                for z, value in zip(points, values, strict=True)
            )
    logger.info("Density grid '%s': %d rows", config.name, len(rows))
    return sorted(rows, key=lambda row: row.sort_key())


def run_partition(config: ExperimentConfig) -> list[PartitionRow]:
    """Monte Carlo normalizer estimates of the path density at `partition.beta`."""
    beta = config.partition.beta
    rows = []
    for q_index, path in enumerate(build_paths(config)):
        for seed in range(config.n_seeds):
            rng = cell_stream(config, q_index, 0, seed).generator()
            estimate = estimate_partition(path, beta, config.partition.n_samples, rng)
            rows.append(
                PartitionRow(
                    q=path.q,
                    beta=beta,
                    seed=seed,
                    log_z=estimate.log_z,
                    std_error=estimate.std_error,
                    n_samples=estimate.n_samples,
                )
            )
    return sorted(rows, key=lambda row: row.sort_key())


def aggregate(rows: Sequence[ResultRow], z_true: float | None = None) -> list[SummaryRow]:
    """Seed statistics of `z_estimate` per `(q, T)`; std needs two or more seeds."""
    modes = {row.mode for row in rows}
    if len(modes) > 1:
        raise PreconditionError(f"Cannot aggregate mixed modes {sorted(modes)}")

    groups: dict[tuple[float, int], list[ResultRow]] = defaultdict(list)
    for row in rows:
        groups[(row.q, row.T)].append(row)

    summary = []
    for (q, T), group in sorted(groups.items()):  # noqa: N806
        estimates = np.array([row.z_estimate for row in group])
        lowers = np.array([row.log_lower for row in group])
        mean = float(np.mean(estimates))
        uppers = [row.log_upper for row in group if row.log_upper is not None]
        mean_upper = float(np.mean(uppers)) if len(uppers) == len(group) else None
        mean_lower = float(np.mean(lowers))
        summary.append(
            SummaryRow(
                mode=group[0].mode,
                q=q,
                T=T,
                n_seeds=len(group),
                mean=mean,
                std=float(np.std(estimates, ddof=1)) if len(group) >= 2 else None,
                abs_error=abs(mean - z_true) if z_true is not None else None,
                mean_lower=mean_lower,
                mean_upper=mean_upper,
                mean_gap=None if mean_upper is None else mean_upper - mean_lower,
            )
        )
    return summary
