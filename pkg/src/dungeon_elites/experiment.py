"""Batch experiment harness: repeated seeded runs, per-cell aggregates, and
convergence curves.

Runs are independent (one seed each, derived from a master seed) and may
execute in a process pool capped by DUNGEON_ELITES_THREADS. Reports are a
pure fold over the per-run results, so the same master seed yields the
same report.
"""

from __future__ import annotations

import csv
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

from .archive import COLS, ROWS
from .evolution import EvolutionConfig, run
from .fitness import GenerationGoals
from .levels import cell_label


@dataclass
class RunResult:
    seed: int
    occupied: int
    generations: int
    cell_totals: list[Optional[float]]  # row-major final elites
    # per generation: (best, mean, worst)
    convergence: list[tuple[float, float, float]]
    error: Optional[str] = None


@dataclass
class CellStats:
    mean: float
    std: float
    occupancy_rate: float
    samples: int


@dataclass
class ExperimentReport:
    label: str
    runs: int
    failed: list[int] = field(default_factory=list)
    cells: list[list[Optional[CellStats]]] = field(default_factory=list)
    # rows: generation -> (best, best_se, mean, mean_se, worst, worst_se, n)
    convergence: list[tuple] = field(default_factory=list)
    host: str = ""

    def row_mean(self, row: int) -> float:
        """Mean elite fitness over the occupied cells of one leniency row."""
        values = [c.mean for c in self.cells[row] if c is not None]
        if not values:
            raise ValueError(f"leniency row {row} never occupied")
        return sum(values) / len(values)


def derive_seed(master_seed: int, set_index: int, run_index: int) -> int:
    # fixed arithmetic so reports are reproducible across hosts
    return master_seed + 1_000_003 * set_index + run_index


def _execute(args: tuple[GenerationGoals, EvolutionConfig]) -> RunResult:
    goals, config = args
    try:
        archive, log = run(goals, config)
    except Exception as exc:  # failed runs are reported, not fatal
        return RunResult(seed=config.rng_seed, occupied=0, generations=0,
                         cell_totals=[None] * (ROWS * COLS), convergence=[],
                         error=f"{type(exc).__name__}: {exc}")
    return RunResult(
        seed=config.rng_seed,
        occupied=archive.occupied_count(),
        generations=log.entries[-1].generation,
        cell_totals=log.entries[-1].cell_totals,
        convergence=[(e.best, e.mean, e.worst) for e in log.entries[1:]],
    )


def max_workers() -> int:
    env = os.environ.get("DUNGEON_ELITES_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_set(goals: GenerationGoals, runs: int, base_config: EvolutionConfig,
            master_seed: int, set_index: int = 0,
            workers: Optional[int] = None) -> list[RunResult]:
    configs = [replace(base_config,
                       rng_seed=derive_seed(master_seed, set_index, i))
               for i in range(runs)]
    jobs = [(goals, config) for config in configs]
    n_workers = workers if workers is not None else max_workers()
    if n_workers <= 1:
        return [_execute(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_execute, jobs))


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def aggregate(label: str, results: list[RunResult]) -> ExperimentReport:
    ok = [r for r in results if r.error is None]
    report = ExperimentReport(
        label=label,
        runs=len(results),
        failed=[r.seed for r in results if r.error is not None],
        host=f"{platform.node()} {platform.machine()} python{platform.python_version()}",
    )
    report.cells = []
    for row in range(ROWS):
        stats_row: list[Optional[CellStats]] = []
        for col in range(COLS):
            idx = row * COLS + col
            totals = [r.cell_totals[idx] for r in ok
                      if r.cell_totals[idx] is not None]
            if not totals:
                stats_row.append(None)
                continue
            mean, std = _mean_std(totals)
            stats_row.append(CellStats(mean=mean, std=std,
                                       occupancy_rate=len(totals) / max(len(ok), 1),
                                       samples=len(totals)))
        report.cells.append(stats_row)

    max_gens = max((len(r.convergence) for r in ok), default=0)
    for gen in range(max_gens):
        per_run = [r.convergence[gen] for r in ok if gen < len(r.convergence)]
        columns = []
        for i in range(3):
            mean, std = _mean_std([entry[i] for entry in per_run])
            se = std / math.sqrt(len(per_run)) if per_run else 0.0
            columns.extend((mean, se))
        report.convergence.append((gen + 1, *columns, len(per_run)))
    return report


def write_cell_csv(report: ExperimentReport, path: str) -> None:
    """Table-style per-cell aggregate: rows L1-L5, columns E1-E5."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow([""] + [f"E{c + 1}" for c in range(COLS)])
        for row in range(ROWS):
            cells = []
            for col in range(COLS):
                stats = report.cells[row][col]
                cells.append("" if stats is None
                             else f"{stats.mean:.2f}±{stats.std:.2f}")
            writer.writerow([f"L{row + 1}"] + cells)


def write_occupancy_csv(report: ExperimentReport, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["cell", "occupancy_rate", "samples"])
        for row in range(ROWS):
            for col in range(COLS):
                stats = report.cells[row][col]
                writer.writerow([cell_label(row, col),
                                 0.0 if stats is None else round(stats.occupancy_rate, 4),
                                 0 if stats is None else stats.samples])


def write_convergence_csv(report: ExperimentReport, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["generation", "best", "best_se", "mean", "mean_se",
                         "worst", "worst_se", "runs"])
        for row in report.convergence:
            writer.writerow([row[0]] + [f"{v:.6f}" for v in row[1:7]] + [row[7]])


def summary_table(report: ExperimentReport) -> str:
    lines = [f"parameter set {report.label}: {report.runs} runs, "
             f"{len(report.failed)} failed ({report.host})"]
    header = "     " + "".join(f"{f'E{c + 1}':>14}" for c in range(COLS))
    lines.append(header)
    for row in range(ROWS):
        cells = []
        for col in range(COLS):
            stats = report.cells[row][col]
            cells.append("     --       " if stats is None
                         else f"{stats.mean:6.2f}±{stats.std:<5.2f} ")
        lines.append(f"L{row + 1}   " + "".join(cells))
    return "\n".join(lines) + "\n"
