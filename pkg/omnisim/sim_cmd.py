"""
Created on 2026-10-19

@author: wf
"""

import argparse
import logging
import math
import os
import sys
from argparse import ArgumentParser, Namespace
from typing import List, Optional

from basemkit.base_cmd import BaseCmd
from basemkit.profiler import Profiler
from tabulate import tabulate

from omnisim.allocation import AllocationRankError
from omnisim.scenario import (
    BUILTIN_SCENARIOS,
    ConfigError,
    ConfigParser,
    ScenarioConfig,
    builtin_scenario,
    load_config,
)
from omnisim.sim_runner import RunResult, run_and_write, run_batch
from omnisim.spatial import quat_to_euler_zxy
from omnisim.version import Version

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_FAULT = 2


class OmniSimCmd(BaseCmd):
    """
    Command-line interface of the omnidirectional tiltrotor simulator.

    Provides commands for:
    - run: simulate one or more scenarios and write flight log and metrics
    - list-scenarios: show the built-in maneuvers
    """

    def __init__(self, args: argparse.Namespace):
        """
        Initialize the simulator command-line interface.

        Args:
            args: Parsed command-line arguments
        """
        super().__init__(Version())
        self.args = args
        self.results: List[RunResult] = []
        level_name = os.environ.get("OMNISIM_LOG_LEVEL", "WARNING").upper()
        logging.basicConfig(
            level=getattr(logging, level_name, logging.WARNING),
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )

    def add_arguments(self, parser: ArgumentParser) -> ArgumentParser:
        """
        Add simulator arguments to the argument parser.

        Args:
            parser: ArgumentParser to add arguments to

        Returns:
            The modified ArgumentParser
        """
        super().add_arguments(parser)
        parser.add_argument(
            "command",
            nargs="?",
            choices=["run", "list-scenarios"],
            default="run",
            help="Command to execute (default: %(default)s)",
        )
        parser.add_argument(
            "--config",
            action="append",
            default=[],
            metavar="YAML",
            help="scenario configuration file - may be repeated with --batch",
        )
        parser.add_argument(
            "--scenario",
            action="append",
            default=[],
            choices=list(BUILTIN_SCENARIOS),
            help="built-in scenario - may be repeated with --batch",
        )
        parser.add_argument(
            "--out-dir",
            default=None,
            help="directory for flight log and metrics (default: config out_dir or current directory)",
        )
        parser.add_argument("--seed", type=int, default=None, help="override the seed")
        parser.add_argument(
            "--duration", type=float, default=None, help="override the duration [s]"
        )
        parser.add_argument(
            "--dt-phys", type=float, default=None, help="override the physics step [s]"
        )
        parser.add_argument(
            "--dt-ctrl", type=float, default=None, help="override the control period [s]"
        )
        parser.add_argument(
            "--batch",
            action="store_true",
            help="run all given scenarios in a thread pool with one output directory per run",
        )
        parser.add_argument(
            "--max-workers",
            type=int,
            default=None,
            help="Maximum number of worker threads for --batch",
        )
        parser.add_argument(
            "--progress",
            action="store_true",
            help="Show progress bar",
        )
        parser.add_argument(
            "--format",
            default="simple",
            metavar="FMT",
            help="tabulate table format of the summary (default: %(default)s)",
        )
        return parser

    def handle_args(self, args: Namespace) -> bool:
        """
        Handle the command-line arguments and execute the requested command.

        Args:
            args: Parsed command-line arguments

        Returns:
            True if handled

        Raises:
            SystemExit: with code 1 on configuration errors and 2 on runtime faults
        """
        handled = super().handle_args(args)
        if getattr(args, "debug", False):
            logging.getLogger().setLevel(logging.DEBUG)
        command_handlers = {
            "run": self.run_scenarios,
            "list-scenarios": self.list_scenarios,
        }
        command = getattr(args, "command", None) or "run"
        handler = command_handlers.get(command)
        if handler:
            exit_code = handler()
            handled = True
            if exit_code:
                raise SystemExit(exit_code)
        else:
            print(f"unknown command {command}")
        return handled

    def list_scenarios(self) -> int:
        """
        show the built-in scenarios
        """
        rows = []
        for name, (_generator, description) in BUILTIN_SCENARIOS.items():
            config = builtin_scenario(name)
            rows.append(
                {
                    "scenario": name,
                    "duration [s]": config.duration,
                    "segments": len(config.trajectory),
                    "description": description,
                }
            )
        print(tabulate(rows, headers="keys", tablefmt=self.args.format))
        return 0

    def apply_overrides(self, config: ScenarioConfig) -> ScenarioConfig:
        """
        apply the command line overrides and revalidate
        """
        overrides = {
            "seed": self.args.seed,
            "duration": self.args.duration,
            "dt_phys": self.args.dt_phys,
            "dt_ctrl": self.args.dt_ctrl,
        }
        for key, value in overrides.items():
            if value is not None:
                setattr(config, key, value)
        ConfigParser().validate(config)
        return config

    def get_configs(self) -> List[ScenarioConfig]:
        configs = [load_config(path) for path in self.args.config]
        configs.extend(builtin_scenario(name) for name in self.args.scenario)
        if not configs:
            configs = [builtin_scenario("hover")]
        configs = [self.apply_overrides(config) for config in configs]
        return configs

    def run_scenarios(self) -> int:
        """
        run the configured scenarios

        Returns:
            the exit code
        """
        try:
            configs = self.get_configs()
        except ConfigError as ex:
            print(f"❌ configuration error: {ex}")
            return EXIT_CONFIG_ERROR
        except OSError as ex:
            print(f"❌ can't read configuration: {ex}")
            return EXIT_CONFIG_ERROR
        if len(configs) > 1 and not self.args.batch:
            print("❌ configuration error: several scenarios need --batch")
            return EXIT_CONFIG_ERROR
        profile = bool(getattr(self.args, "debug", False) or getattr(self.args, "verbose", False))
        profiler = Profiler("run", profile=profile)
        try:
            if self.args.batch:
                out_dir = self.args.out_dir or "."
                self.results = run_batch(
                    configs,
                    out_dir,
                    max_workers=self.args.max_workers,
                    progress=self.args.progress,
                )
            else:
                config = configs[0]
                out_dir = self.args.out_dir or config.out_dir or "."
                self.results = [
                    run_and_write(config, out_dir, progress=self.args.progress, profile=profile)
                ]
        except (RuntimeError, AllocationRankError) as ex:
            print(f"❌ {ex}")
            return EXIT_RUNTIME_FAULT
        self.show_summary()
        failed = [result for result in self.results if result.metrics.failed]
        msg = " ✅ Ok" if not failed else f" ❌ {len(failed)} failed"
        profiler.time(msg)
        exit_code = EXIT_RUNTIME_FAULT if failed else 0
        return exit_code

    def show_summary(self) -> None:
        """
        show the metrics and the final attitude of each run
        """
        rows = []
        for result in self.results:
            row = result.as_row()
            if result.records:
                yaw, roll, pitch = quat_to_euler_zxy(result.records[-1].q)
                row["yaw°"] = round(math.degrees(yaw), 2)
                row["roll°"] = round(math.degrees(roll), 2)
                row["pitch°"] = round(math.degrees(pitch), 2)
            rows.append(row)
        print(tabulate(rows, headers="keys", tablefmt=self.args.format, floatfmt=".4g"))


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point of the omnisim command-line tool.

    Args:
        argv: Command-line arguments (defaults to sys.argv if None)

    Returns:
        Exit code (0 for success, non-zero for failure)
    """
    cmd = OmniSimCmd(args=None)
    exit_code = cmd.run(argv)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
