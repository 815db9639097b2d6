"""
Created on 2026-10-19

@author: wf

Rotor aerodynamics: map rotor speeds and tilt angles to the wrench
acting on the center of gravity.
"""

from dataclasses import dataclass, field

import numpy

from omnisim.spatial import rotation_about_axis, vec3
from omnisim.vehicle import RotorGeometry, VehicleParams

E_X = vec3(1.0, 0.0, 0.0)
E_Z = vec3(0.0, 0.0, 1.0)


@dataclass
class Wrench:
    """
    force [N] and moment [N m] in the body frame
    """

    F: numpy.ndarray = field(default_factory=vec3)
    M: numpy.ndarray = field(default_factory=vec3)

    @classmethod
    def of_vector(cls, vector) -> "Wrench":
        """
        create a wrench from the 6-vector (Fx, Fy, Fz, Mx, My, Mz)
        """
        vector = numpy.asarray(vector, dtype=float)
        wrench = cls(F=vector[:3].copy(), M=vector[3:].copy())
        return wrench

    def as_vector(self) -> numpy.ndarray:
        return numpy.concatenate([self.F, self.M])

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(F=self.F + other.F, M=self.M + other.M)

    def is_finite(self) -> bool:
        return bool(numpy.all(numpy.isfinite(self.as_vector())))


def _check_speed(n) -> None:
    if numpy.any(numpy.asarray(n) < 0):
        raise ValueError(f"rotor speed must not be negative: {n}")


def rotor_thrust(n: float, mu: float) -> float:
    """
    thrust [N] of a rotor spinning at n [rad/s]
    """
    _check_speed(n)
    return mu * n * n


def rotor_drag_torque(n: float, kappa: float) -> float:
    """
    reaction torque [N m] of a rotor spinning at n [rad/s]
    """
    _check_speed(n)
    return kappa * n * n


def rotor_frame_rotation(geometry: RotorGeometry, i: int, alpha: float) -> numpy.ndarray:
    """
    Get R_BRi, the rotation of rotor frame i into the body frame.

    The rotor frame x axis points outward along the arm, the tilt is a
    right-hand rotation about that axis.

    Args:
        geometry: the rotor placement
        i: 1-based rotor index
        alpha: tilt angle [rad]

    Returns:
        numpy.ndarray: 3x3 rotation matrix
    """
    if not 1 <= i <= geometry.count:
        raise ValueError(f"rotor index {i} out of range 1..{geometry.count}")
    azimuth = rotation_about_axis(E_Z, float(geometry.azimuths[i - 1]))
    r_bri = azimuth @ rotation_about_axis(E_X, alpha)
    return r_bri


def body_wrench(actuators, params: VehicleParams, geometry: RotorGeometry) -> Wrench:
    """
    Sum the rotor forces, drag torques and thrust moments in the body frame.

    Args:
        actuators: anything with rotor speeds n and tilt angles alpha
        params: vehicle parameters
        geometry: rotor placement

    Returns:
        Wrench: the resulting body wrench
    """
    n = numpy.asarray(actuators.n, dtype=float)
    _check_speed(n)
    force = vec3()
    moment = vec3()
    for i in range(geometry.count):
        r_bri = rotor_frame_rotation(geometry, i + 1, float(actuators.alpha[i]))
        n_sq = n[i] * n[i]
        f_i = r_bri @ (-params.mu * n_sq * E_Z)
        tau_i = r_bri @ (-geometry.spin_signs[i] * params.kappa * n_sq * E_Z)
        force += f_i
        moment += tau_i + numpy.cross(geometry.positions[i], f_i)
    wrench = Wrench(F=force, M=moment)
    return wrench


@dataclass
class _UnitRotor:
    """
    a single rotor at unit squared speed
    """

    n: numpy.ndarray
    alpha: numpy.ndarray


def allocation_matrix(alpha, params: VehicleParams, geometry: RotorGeometry) -> numpy.ndarray:
    """
    Get the configuration dependent allocation matrix A(α).

    Column i is the wrench of rotor i alone with n_i² = 1 so that
    A(α)·(n_1², ..., n_6²) is the body wrench.

    Args:
        alpha: six tilt angles [rad]
        params: vehicle parameters
        geometry: rotor placement

    Returns:
        numpy.ndarray: 6x6 matrix, rows Fx Fy Fz Mx My Mz
    """
    alpha = numpy.asarray(alpha, dtype=float)
    a = numpy.zeros((6, geometry.count))
    for i in range(geometry.count):
        n = numpy.zeros(geometry.count)
        n[i] = 1.0
        a[:, i] = body_wrench(_UnitRotor(n=n, alpha=alpha), params, geometry).as_vector()
    return a


def matrix_rank(a: numpy.ndarray, rcond: float = 1e-10) -> int:
    """
    numerical rank with a singular value cutoff relative to the largest one
    """
    s = numpy.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    rank = int(numpy.sum(s > rcond * s[0]))
    return rank


def allocation_rank(alpha, params: VehicleParams, geometry: RotorGeometry) -> int:
    """
    rank of A(α) - below 6 in singular configurations such as all α = 0
    """
    rank = matrix_rank(allocation_matrix(alpha, params, geometry))
    return rank
