"""
Created on 2026-10-19

@author: wf
"""

import argparse
import math
import os
import tempfile

from basemkit.basetest import Basetest

from omnisim.allocation import static_allocation_matrix, RotorMask
from omnisim.flight_log import CSV_HEADER, METRICS_KEYS, MetricsSummary, read_csv
from omnisim.rotor_wrench import matrix_rank
from omnisim.scenario import builtin_scenario, parse_config
from omnisim.sim_cmd import OmniSimCmd, main
from omnisim.sim_runner import run, run_and_write, run_batch, write_outputs
from omnisim.vehicle import default_params, rotor_geometry


class TestSimRunner(Basetest):
    """
    test complete scenario runs, the flight log and the command line
    """

    def setUp(self, debug=False, profile=True):
        Basetest.setUp(self, debug=debug, profile=profile)
        self.tmp_dir = tempfile.mkdtemp(prefix="omnisim_")

    def get_args(self, command: str = "run", **kwargs) -> argparse.Namespace:
        """
        get CLI arguments for testing
        """
        args = argparse.Namespace(
            command=command,
            config=[],
            scenario=[],
            out_dir=self.tmp_dir,
            seed=None,
            duration=None,
            dt_phys=None,
            dt_ctrl=None,
            batch=False,
            max_workers=None,
            progress=False,
            format="simple",
            debug=self.debug,
            verbose=self.debug,
            quiet=False,
            about=False,
            force=False,
        )
        for key, value in kwargs.items():
            setattr(args, key, value)
        return args

    def test_hover(self):
        """
        the hover scenario holds the setpoint
        """
        config = builtin_scenario("hover")
        records, metrics = run(config)
        self.assertEqual(config.tick_count, len(records))
        self.assertFalse(metrics.failed)
        self.assertLess(metrics.pos_rmse_m, 1e-3)
        self.assertEqual(0, metrics.mask_switches)
        self.assertEqual(0, metrics.sat_steps)
        n_hover = config.params.hover_speed()
        for n in records[-1].n:
            self.assertAlmostEqual(1.0, n / n_hover, delta=1e-3)

    def test_determinism(self):
        """
        the same config and seed write byte identical logs
        """
        text = "scenario: roll90_hover\nduration: 2.0\nseed: 11\n"
        contents = []
        for index in range(2):
            out_dir = os.path.join(self.tmp_dir, f"run{index}")
            result = run_and_write(parse_config(text), out_dir)
            with open(result.csv_path, "rb") as csv_file:
                contents.append(csv_file.read())
        self.assertEqual(contents[0], contents[1])

    def test_csv_metrics(self):
        """
        the metrics can be recomputed from the CSV log
        """
        config = parse_config("scenario: tilted_translation\nduration: 4.0\n")
        records, metrics = run(config)
        csv_path = os.path.join(self.tmp_dir, "log", "flight.csv")
        metrics_path = os.path.join(self.tmp_dir, "log", "metrics.txt")
        write_outputs(records, metrics, csv_path, metrics_path)
        with open(csv_path) as csv_file:
            header = csv_file.readline().strip().split(",")
        self.assertEqual(CSV_HEADER, header)
        self.assertEqual(len(records), len(read_csv(csv_path)))
        trajectory = config.get_trajectory()
        recomputed = MetricsSummary.of_csv(csv_path, trajectory.setpoint, config.dt_ctrl)
        self.assertEqual(metrics.as_dict(), recomputed.as_dict())
        with open(metrics_path) as metrics_file:
            text = metrics_file.read()
        keys = [line.split("=")[0].strip() for line in text.splitlines()]
        self.assertEqual(METRICS_KEYS, keys[: len(METRICS_KEYS)])
        self.assertEqual(metrics.as_dict(), MetricsSummary.of_text(text).as_dict())

    def test_flip_y(self):
        """
        the vehicle flips upside down and back while holding its position
        """
        config = builtin_scenario("flip_y")
        records, metrics = run(config)
        if self.debug:
            print(metrics.to_text())
        self.assertFalse(metrics.failed)
        self.assertLess(metrics.final_att_err_rad, math.radians(2.0))
        self.assertLess(metrics.final_pos_err_m, 0.1)
        self.assertGreaterEqual(metrics.mask_switches, 2)
        self.assertEqual(0, metrics.mask_switches % 2)
        self.assertLessEqual(metrics.max_tilt_rate, config.params.omega_alpha_max + 1e-12)
        self.assertGreater(metrics.max_pos_dev_m, 0.0)
        self.assertIn(4, {record.mask for record in records})

    def test_roll90_hover(self):
        """
        at 90° the vertical arm pair is excluded and the hover is kept
        under disturbance noise
        """
        config = builtin_scenario("roll90_hover")
        records, metrics = run(config)
        self.assertFalse(metrics.failed)
        mask = RotorMask.excluding((1, 4))
        params = default_params()
        a_static = static_allocation_matrix(params, rotor_geometry(params), mask)
        self.assertEqual(6, matrix_rank(a_static))
        hover_records = [record for record in records if record.t >= 5.0]
        self.assertGreaterEqual(hover_records[-1].t - hover_records[0].t, 9.9)
        for record in hover_records:
            self.assertEqual(4, record.mask)
            self.assertLess(record.n[0], 1e-6)
            self.assertLess(record.n[3], 1e-6)
        trajectory = config.get_trajectory()
        hover_metrics = MetricsSummary.of_records(hover_records, trajectory.setpoint, config.dt_ctrl)
        self.assertLess(hover_metrics.pos_rmse_m, 0.2)

    def test_winding_failure(self):
        """
        a fault ends the run with a partial log and failure metrics
        """
        config = parse_config(
            """
duration: 3.0
params.winding_limit: 0.05
initial_position: [0, 0, 1]
trajectory:
  - {t0: 0.0, t1: 3.0, kind: hold, position: [0.0, 0.0, 1.0], axis: [1, 0, 0], angle_deg: 40}
"""
        )
        records, metrics = run(config)
        self.assertTrue(metrics.failed)
        self.assertIn("WindingFault", metrics.failure)
        self.assertLess(len(records), config.tick_count)
        self.assertIn("failed = true", metrics.to_text())

    def test_batch(self):
        configs = [
            parse_config("scenario: hover\nduration: 1.0\n"),
            parse_config("scenario: flip_y\nduration: 1.0\n"),
        ]
        results = run_batch(configs, self.tmp_dir, max_workers=2)
        self.assertEqual(["hover", "flip_y"], [result.name for result in results])
        for result in results:
            self.assertTrue(os.path.isfile(result.csv_path))
            self.assertTrue(os.path.isfile(result.metrics_path))
            self.assertFalse(result.metrics.failed)

    def test_cmd_run(self):
        """
        run a built-in scenario from the command line
        """
        args = self.get_args(scenario=["hover"], duration=1.0)
        cmd = OmniSimCmd(args)
        cmd.handle_args(args)
        self.assertEqual(1, len(cmd.results))
        self.assertTrue(os.path.isfile(os.path.join(self.tmp_dir, "flight.csv")))
        self.assertTrue(os.path.isfile(os.path.join(self.tmp_dir, "metrics.txt")))

    def test_cmd_list_scenarios(self):
        args = self.get_args(command="list-scenarios")
        cmd = OmniSimCmd(args)
        self.assertTrue(cmd.handle_args(args))

    def test_cmd_exit_codes(self):
        """
        configuration errors exit with 1 and runtime faults with 2
        """
        bad_path = os.path.join(self.tmp_dir, "bad.yaml")
        with open(bad_path, "w") as yaml_file:
            yaml_file.write("duration: 1.0\nbogus: true\n")
        fault_path = os.path.join(self.tmp_dir, "fault.yaml")
        with open(fault_path, "w") as yaml_file:
            yaml_file.write(
                "duration: 2.0\nparams.winding_limit: 0.05\ninitial_angle_deg: 40\ninitial_axis: [1, 0, 0]\n"
            )
        cases = [
            (self.get_args(config=[bad_path]), 1),
            (self.get_args(config=[os.path.join(self.tmp_dir, "missing.yaml")]), 1),
            (self.get_args(scenario=["hover"], dt_ctrl=0.0025), 1),
            (self.get_args(scenario=["hover", "flip_y"]), 1),
            (self.get_args(config=[fault_path], out_dir=os.path.join(self.tmp_dir, "fault")), 2),
        ]
        for args, exit_code in cases:
            with self.subTest(args=args):
                cmd = OmniSimCmd(args)
                with self.assertRaises(SystemExit) as context:
                    cmd.handle_args(args)
                self.assertEqual(exit_code, context.exception.code)

    def test_main(self):
        """
        the console entry point parses the command line and returns the exit code
        """
        out_dir = os.path.join(self.tmp_dir, "main")
        exit_code = main(["run", "--scenario", "hover", "--duration", "0.5", "--out-dir", out_dir])
        self.assertEqual(0, exit_code)
        self.assertTrue(os.path.isfile(os.path.join(out_dir, "flight.csv")))
        self.assertEqual(0, main(["list-scenarios"]))
        bad_path = os.path.join(self.tmp_dir, "bad_main.yaml")
        with open(bad_path, "w") as yaml_file:
            yaml_file.write("duration: -1\n")
        self.assertEqual(1, main(["--config", bad_path, "--out-dir", out_dir]))
        with self.assertRaises(SystemExit):
            OmniSimCmd(args=None).parse_args(["--scenario", "loop"])
