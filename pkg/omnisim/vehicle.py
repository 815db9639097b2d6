"""
Created on 2026-10-19

@author: wf
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy
from basemkit.yamlable import lod_storable

# spin direction of the rotors 1..6
SPIN_SIGNS = (1, -1, 1, -1, -1, 1)
# rotor pairs on a common arm axis (1-based)
OPPOSITE_PAIRS = ((1, 4), (2, 5), (3, 6))


@lod_storable
class VehicleParams:
    """
    physical parameters of the tiltrotor hexacopter

    only m, max_thrust and omega_alpha_max are measured values of the
    prototype - all other defaults are plausible choices
    """

    m: float = 3.2  # mass [kg]
    J: List[List[float]] = field(
        default_factory=lambda: [[0.03, 0.0, 0.0], [0.0, 0.03, 0.0], [0.0, 0.0, 0.05]]
    )  # inertia [kg m²] in the body frame
    r_off: List[float] = field(
        default_factory=lambda: [0.0, 0.0, 0.0]
    )  # center of mass offset [m]
    l: float = 0.3  # arm length [m]
    n_max: float = 1100.0  # max rotor speed [rad/s]
    n_min: float = 0.0  # min rotor speed [rad/s]
    max_thrust: float = 13.7  # thrust per rotor at n_max [N]
    mu: Optional[float] = None  # lift coefficient [N s²], default max_thrust/n_max²
    drag_ratio: float = 0.016  # kappa/mu [m]
    kappa: Optional[float] = None  # drag torque coefficient [N m s²]
    tau_n: float = 0.05  # rotor speed time constant [s]
    tau_alpha: float = 0.15  # tilt time constant [s]
    omega_alpha_max: float = 7.85  # max tilt rate [rad/s]
    winding_limit: float = 4 * math.pi  # cable winding limit of the tilt [rad]
    g: float = 9.81  # gravity [m/s²]

    def __post_init__(self):
        """
        make sure we set defaults
        """
        if self.mu is None and self.n_max > 0:
            self.mu = self.max_thrust / (self.n_max * self.n_max)
        if self.kappa is None and self.mu is not None:
            self.kappa = self.drag_ratio * self.mu

    @property
    def inertia(self) -> numpy.ndarray:
        return numpy.array(self.J, dtype=float)

    @property
    def inertia_inv(self) -> numpy.ndarray:
        return numpy.linalg.inv(self.inertia)

    @property
    def offset(self) -> numpy.ndarray:
        return numpy.array(self.r_off, dtype=float)

    def hover_speed(self) -> float:
        """
        rotor speed [rad/s] for level hover with six equally loaded rotors
        """
        n_hover = math.sqrt(self.m * self.g / (6.0 * self.mu))
        return n_hover

    def problems(self, path: str = "params") -> List[Tuple[str, str]]:
        """
        check my invariants

        Args:
            path: the dotted key path prefix for the messages

        Returns:
            list of (key path, message) tuples - empty if valid
        """
        problems = []

        def positive(name: str):
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value <= 0:
                problems.append((f"{path}.{name}", f"must be > 0 but is {value}"))

        for name in [
            "m",
            "mu",
            "kappa",
            "l",
            "tau_n",
            "tau_alpha",
            "omega_alpha_max",
            "n_max",
            "g",
            "winding_limit",
        ]:
            positive(name)
        if not (0 <= self.n_min < self.n_max):
            problems.append(
                (f"{path}.n_min", f"must satisfy 0 <= n_min < n_max but is {self.n_min}")
            )
        rows = [len(row) for row in self.J]
        if rows != [3, 3, 3]:
            problems.append((f"{path}.J", f"must be 3x3 but has rows of length {rows}"))
        elif not numpy.allclose(self.inertia, self.inertia.T):
            problems.append((f"{path}.J", "must be symmetric"))
        elif numpy.min(numpy.linalg.eigvalsh(self.inertia)) <= 0:
            problems.append((f"{path}.J", "must be positive definite"))
        if len(self.r_off) != 3:
            problems.append((f"{path}.r_off", "must have 3 components"))
        return problems

    def validate(self, path: str = "params") -> "VehicleParams":
        """
        raise a ValueError for the first violated invariant
        """
        problems = self.problems(path)
        if problems:
            key, msg = problems[0]
            raise ValueError(f"{key}: {msg}")
        return self


def default_params() -> VehicleParams:
    """
    get the default parameters of the prototype
    """
    params = VehicleParams()
    return params


@dataclass(frozen=True)
class RotorGeometry:
    """
    placement of the six rotor units on a circle in the body plane
    """

    azimuths: numpy.ndarray  # [rad]
    positions: numpy.ndarray  # 6x3 rotor positions r_i [m]
    tilt_axes: numpy.ndarray  # 6x3 outward unit arm axes a_i
    tangents: numpy.ndarray  # 6x3 unit tangential axes t_i = e_z x a_i
    spin_signs: numpy.ndarray  # c_i

    @property
    def count(self) -> int:
        return len(self.azimuths)

    def opposite(self, i: int) -> int:
        """
        get the 1-based index of the rotor on the same arm axis as rotor i
        """
        for a, b in OPPOSITE_PAIRS:
            if i == a:
                return b
            if i == b:
                return a
        raise ValueError(f"invalid rotor index {i}")


def rotor_geometry(params: VehicleParams) -> RotorGeometry:
    """
    evenly spaced rotors with rotor 1 on the body x axis
    """
    azimuths = numpy.radians(numpy.arange(6) * 60.0)
    cos_phi = numpy.cos(azimuths)
    sin_phi = numpy.sin(azimuths)
    zeros = numpy.zeros(6)
    tilt_axes = numpy.column_stack([cos_phi, sin_phi, zeros])
    tangents = numpy.column_stack([-sin_phi, cos_phi, zeros])
    geometry = RotorGeometry(
        azimuths=azimuths,
        positions=params.l * tilt_axes,
        tilt_axes=tilt_axes,
        tangents=tangents,
        spin_signs=numpy.array(SPIN_SIGNS, dtype=float),
    )
    return geometry
