"""
Created on 2026-10-19

@author: wf
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy
from basemkit.profiler import Profiler
from tqdm import tqdm

from omnisim.actuators import WindingFault
from omnisim.allocation import AllocationRankError
from omnisim.flight_log import LogRecord, MetricsSummary, write_csv
from omnisim.scenario import ScenarioConfig
from omnisim.sim_context import SimState, simulate_step
from omnisim.vehicle import rotor_geometry

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """
    result of a single scenario run
    """

    config: ScenarioConfig
    records: List[LogRecord] = field(default_factory=list)
    metrics: MetricsSummary = field(default_factory=MetricsSummary)
    csv_path: Optional[str] = None
    metrics_path: Optional[str] = None
    error: Optional[BaseException] = None

    @property
    def name(self) -> str:
        return self.config.name or "scenario"

    def as_row(self) -> dict:
        row = {"scenario": self.name}
        row.update(self.metrics.as_dict())
        row["status"] = "❌ " + self.metrics.failure if self.metrics.failed else "✅"
        return row


class SimRunner:
    """
    runs a scenario tick by tick and collects the flight log
    """

    def __init__(self, config: ScenarioConfig, progress: bool = False, profile: bool = False):
        """
        constructor

        Args:
            config: the scenario to run
            progress: show a tqdm progress bar
            profile: time the run with a Profiler
        """
        self.config = config
        self.progress = progress
        self.profile = profile

    def run(self) -> Tuple[List[LogRecord], MetricsSummary]:
        """
        Run the scenario for its full duration.

        A winding fault or a rank deficient allocation ends the run early;
        the records up to the fault are kept and the metrics carry the
        failure.

        Returns:
            the log records of all control ticks and the metrics summary
        """
        config = self.config
        params = config.params
        geometry = rotor_geometry(params)
        trajectory = config.get_trajectory()
        profiler = Profiler(f"run {config.name or 'scenario'}", profile=self.profile)
        sim = SimState.initial(
            params,
            config.initial_setpoint(),
            gains=config.gains,
            geometry=geometry,
            epsilon_axis=math.radians(config.epsilon_axis_deg),
            seed=config.seed,
            preposition_idle=config.preposition_idle,
            realign_tolerance=math.radians(config.realign_tolerance_deg),
        )
        records: List[LogRecord] = []
        failure = None
        ticks = range(config.tick_count)
        if self.progress:
            ticks = tqdm(ticks, desc=config.name or "scenario", unit="tick")
        for k in ticks:
            # tick time from the index to keep the schedule free of drift
            sim.time = k * config.dt_ctrl
            setpoint = trajectory.setpoint(sim.time)
            try:
                sim, record = simulate_step(
                    sim,
                    setpoint,
                    config.gains,
                    params,
                    config.dt_ctrl,
                    config.dt_phys,
                    disturbance=config.disturbance,
                    instant_actuators=config.instant_actuators,
                )
            except (WindingFault, AllocationRankError) as ex:
                failure = f"{type(ex).__name__} at t={sim.time:.3f}s: {ex}"
                logger.error(failure)
                break
            records.append(record)
            if not numpy.all(numpy.isfinite(sim.body.as_vector())):
                failure = f"non finite state at t={sim.time:.3f}s"
                logger.error(failure)
                break
        metrics = MetricsSummary.of_records(records, trajectory.setpoint, config.dt_ctrl)
        metrics.failure = failure
        profiler.time(f" {len(records)} ticks")
        return records, metrics


def run(config: ScenarioConfig, progress: bool = False) -> Tuple[List[LogRecord], MetricsSummary]:
    """
    run the given scenario
    """
    runner = SimRunner(config, progress=progress)
    records, metrics = runner.run()
    return records, metrics


def write_outputs(
    records: List[LogRecord],
    metrics: MetricsSummary,
    csv_path: str,
    metrics_path: str,
) -> None:
    """
    write the CSV flight log and the metrics file

    Raises:
        RuntimeError: naming the file that could not be written
    """
    for path in (csv_path, metrics_path):
        folder = os.path.dirname(path)
        try:
            if folder:
                os.makedirs(folder, exist_ok=True)
        except OSError as ex:
            raise RuntimeError(f"can't create output directory {folder}: {ex}") from ex
    try:
        write_csv(records, csv_path)
    except OSError as ex:
        raise RuntimeError(f"can't write flight log {csv_path}: {ex}") from ex
    try:
        with open(metrics_path, "w", encoding="utf-8") as metrics_file:
            metrics_file.write(metrics.to_text())
    except OSError as ex:
        raise RuntimeError(f"can't write metrics {metrics_path}: {ex}") from ex
    logger.info("wrote %d records to %s and metrics to %s", len(records), csv_path, metrics_path)


def run_and_write(
    config: ScenarioConfig, out_dir: str, progress: bool = False, profile: bool = False
) -> RunResult:
    """
    run the scenario and write its outputs to the given directory
    """
    runner = SimRunner(config, progress=progress, profile=profile)
    records, metrics = runner.run()
    result = RunResult(
        config=config,
        records=records,
        metrics=metrics,
        csv_path=os.path.join(out_dir, config.csv_name),
        metrics_path=os.path.join(out_dir, config.metrics_name),
    )
    write_outputs(records, metrics, result.csv_path, result.metrics_path)
    return result


def run_batch(
    configs: List[ScenarioConfig],
    out_dir: str,
    max_workers: Optional[int] = None,
    progress: bool = False,
) -> List[RunResult]:
    """
    Run several scenarios in a thread pool.

    Each run writes to its own subdirectory of out_dir named after the
    scenario (with the batch index as prefix to keep duplicates apart).

    Args:
        configs: the scenarios
        out_dir: the base output directory
        max_workers: the size of the thread pool (default: executor default)
        progress: show a progress bar over the runs

    Returns:
        the results in the order of the configs
    """
    results: List[Optional[RunResult]] = [None] * len(configs)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {}
        for index, config in enumerate(configs):
            run_dir = os.path.join(out_dir, f"{index:02d}_{config.name or 'scenario'}")
            future = executor.submit(run_and_write, config, run_dir)
            futures[future] = index
        with tqdm(total=len(configs), desc="batch", unit="run", disable=not progress) as pbar:
            for future in as_completed(futures):
                index = futures[future]
                try:
                    results[index] = future.result()
                except Exception as ex:
                    logger.error("run %d failed: %s", index, ex)
                    metrics = MetricsSummary(failure=str(ex))
                    results[index] = RunResult(config=configs[index], metrics=metrics, error=ex)
                failed = sum(1 for r in results if r is not None and r.metrics.failed)
                pbar.set_postfix_str("✅" if failed == 0 else f"❌ {failed}")
                pbar.update(1)
    return results
