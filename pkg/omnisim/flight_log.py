"""
Created on 2026-10-19

@author: wf

Flight log records, the CSV log format and the metrics summary.
"""

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional

import numpy

from omnisim.spatial import UnitQuaternion, quat_angle_between

CSV_HEADER = (
    ["t", "px", "py", "pz", "qw", "qx", "qy", "qz", "wx", "wy", "wz"]
    + [f"a{i}" for i in range(1, 7)]
    + [f"n{i}" for i in range(1, 7)]
    + ["Fcx", "Fcy", "Fcz", "Mcx", "Mcy", "Mcz"]
    + ["Frx", "Fry", "Frz", "Mrx", "Mry", "Mrz"]
    + ["mask"]
    + [f"sat{i}" for i in range(1, 7)]
)

METRICS_KEYS = [
    "pos_rmse_m",
    "att_rmse_rad",
    "max_tilt_rate",
    "sat_steps",
    "mask_switches",
    "final_pos_err_m",
    "final_att_err_rad",
]


@dataclass
class LogRecord:
    """
    the logged state of one control tick
    """

    t: float
    p: numpy.ndarray
    q: UnitQuaternion
    omega: numpy.ndarray
    alpha: numpy.ndarray
    n: numpy.ndarray
    wrench_cmd: numpy.ndarray
    wrench_real: numpy.ndarray
    mask: int
    saturated: numpy.ndarray

    def to_row(self) -> List[str]:
        """
        the CSV row - floats in round trip exact repr notation
        """
        values = (
            [self.t]
            + list(self.p)
            + list(self.q.as_array())
            + list(self.omega)
            + list(self.alpha)
            + list(self.n)
            + list(self.wrench_cmd)
            + list(self.wrench_real)
        )
        row = [repr(float(value)) for value in values]
        row.append(str(int(self.mask)))
        row.extend(str(int(bool(flag))) for flag in self.saturated)
        return row

    @classmethod
    def of_row(cls, row: List[str]) -> "LogRecord":
        values = [float(value) for value in row[:35]]
        record = cls(
            t=values[0],
            p=numpy.array(values[1:4]),
            # no renormalization - keep the logged values bit exact
            q=UnitQuaternion(*values[4:8]),
            omega=numpy.array(values[8:11]),
            alpha=numpy.array(values[11:17]),
            n=numpy.array(values[17:23]),
            wrench_cmd=numpy.array(values[23:29]),
            wrench_real=numpy.array(values[29:35]),
            mask=int(row[35]),
            saturated=numpy.array([int(flag) for flag in row[36:42]], dtype=bool),
        )
        return record


def write_csv(records: Iterable[LogRecord], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.to_row())


def read_csv(path: str) -> List[LogRecord]:
    """
    read the records of a CSV flight log
    """
    with open(path, newline="", encoding="utf-8") as csv_file:
        reader = csv.reader(csv_file)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        records = [LogRecord.of_row(row) for row in reader]
    return records


@dataclass
class MetricsSummary:
    """
    tracking quality of a scenario run
    """

    pos_rmse_m: float = 0.0
    att_rmse_rad: float = 0.0
    max_tilt_rate: float = 0.0
    sat_steps: int = 0
    mask_switches: int = 0
    final_pos_err_m: float = 0.0
    final_att_err_rad: float = 0.0
    max_pos_dev_m: float = 0.0
    failure: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.failure is not None

    @classmethod
    def of_records(
        cls, records: List[LogRecord], setpoint_fn: Callable, dt_ctrl: float
    ) -> "MetricsSummary":
        """
        compute the metrics of the given records

        Args:
            records: the logged control ticks
            setpoint_fn: the setpoint as function of time
            dt_ctrl: the control period [s]
        """
        metrics = cls()
        if not records:
            return metrics
        pos_sq = 0.0
        att_sq = 0.0
        pos_err = 0.0
        att_err = 0.0
        for k, record in enumerate(records):
            sp = setpoint_fn(record.t)
            pos_err = float(numpy.linalg.norm(sp.p_des - record.p))
            att_err = quat_angle_between(sp.q_des, record.q)
            pos_sq += pos_err * pos_err
            att_sq += att_err * att_err
            metrics.max_pos_dev_m = max(metrics.max_pos_dev_m, pos_err)
            if any(record.saturated):
                metrics.sat_steps += 1
            if k > 0:
                previous = records[k - 1]
                if record.mask != previous.mask:
                    metrics.mask_switches += 1
                rate = float(numpy.max(numpy.abs(record.alpha - previous.alpha))) / dt_ctrl
                metrics.max_tilt_rate = max(metrics.max_tilt_rate, rate)
        count = len(records)
        metrics.pos_rmse_m = math.sqrt(pos_sq / count)
        metrics.att_rmse_rad = math.sqrt(att_sq / count)
        metrics.final_pos_err_m = pos_err
        metrics.final_att_err_rad = att_err
        return metrics

    @classmethod
    def of_csv(cls, path: str, setpoint_fn: Callable, dt_ctrl: float) -> "MetricsSummary":
        """
        recompute the metrics from a CSV flight log
        """
        metrics = cls.of_records(read_csv(path), setpoint_fn, dt_ctrl)
        return metrics

    def as_dict(self) -> dict:
        d = {key: getattr(self, key) for key in METRICS_KEYS}
        d["max_pos_dev_m"] = self.max_pos_dev_m
        return d

    def to_text(self) -> str:
        """
        key = value text of the metrics
        """
        lines = []
        for key, value in self.as_dict().items():
            text = repr(float(value)) if isinstance(value, float) else str(value)
            lines.append(f"{key} = {text}")
        if self.failed:
            lines.append("failed = true")
            lines.append(f"failure = {self.failure}")
        text = "\n".join(lines) + "\n"
        return text

    @classmethod
    def of_text(cls, text: str) -> "MetricsSummary":
        metrics = cls()
        for line in text.splitlines():
            if "=" not in line:
                continue
            key, value = (part.strip() for part in line.split("=", 1))
            if key in ("sat_steps", "mask_switches"):
                setattr(metrics, key, int(value))
            elif key == "failure":
                metrics.failure = value
            elif hasattr(metrics, key) and key != "failed":
                setattr(metrics, key, float(value))
        return metrics
