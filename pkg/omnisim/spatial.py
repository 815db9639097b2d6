"""
Created on 2026-10-19

@author: wf

Frames, quaternions and rotations.

Conventions: Hamilton product, scalar first storage. The attitude
quaternion describes the body frame (z down) relative to the level
frame, which is the z-up inertial frame turned by 180° about x.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy

# rotation from the level frame (z down) to the inertial frame (z up)
R_IL = numpy.diag([1.0, -1.0, -1.0])

UNIT_TOLERANCE = 1e-9


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> numpy.ndarray:
    """
    create a three component vector
    """
    v = numpy.array([x, y, z], dtype=float)
    return v


def skew(v: numpy.ndarray) -> numpy.ndarray:
    """
    get the cross product matrix of the given vector
    """
    x, y, z = v
    m = numpy.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return m


@dataclass(frozen=True)
class UnitQuaternion:
    """
    a rotation as unit quaternion w + x i + y j + z k
    """

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def of_array(cls, a) -> "UnitQuaternion":
        """
        create a normalized quaternion from the four values w, x, y, z

        Args:
            a: sequence of four floats

        Returns:
            UnitQuaternion: the normalized quaternion
        """
        arr = numpy.asarray(a, dtype=float)
        norm = numpy.linalg.norm(arr)
        if not numpy.isfinite(norm) or norm == 0.0:
            raise ValueError(f"can not normalize quaternion {a}")
        arr = arr / norm
        q = cls(float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))
        return q

    @property
    def v(self) -> numpy.ndarray:
        """
        the vector part
        """
        return vec3(self.x, self.y, self.z)

    def as_array(self) -> numpy.ndarray:
        return numpy.array([self.w, self.x, self.y, self.z])

    def norm(self) -> float:
        return float(numpy.linalg.norm(self.as_array()))

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: "UnitQuaternion") -> "UnitQuaternion":
        return quat_multiply(self, other)

    def conjugate(self) -> "UnitQuaternion":
        return quat_conjugate(self)

    def rotation(self) -> numpy.ndarray:
        return quat_to_rotation(self)

    def rotate(self, v: numpy.ndarray) -> numpy.ndarray:
        """
        rotate the given vector from the body into the level frame
        """
        rotated = quat_to_rotation(self) @ v
        return rotated


def hamilton(a: numpy.ndarray, b: numpy.ndarray) -> numpy.ndarray:
    """
    Hamilton product of two raw (w, x, y, z) arrays without normalization
    """
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    product = numpy.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )
    return product


def quat_multiply(a: UnitQuaternion, b: UnitQuaternion) -> UnitQuaternion:
    """
    Hamilton product a ⊗ b, renormalized
    """
    q = UnitQuaternion.of_array(hamilton(a.as_array(), b.as_array()))
    return q


def quat_conjugate(q: UnitQuaternion) -> UnitQuaternion:
    return UnitQuaternion(q.w, -q.x, -q.y, -q.z)


def quat_to_rotation(q: UnitQuaternion) -> numpy.ndarray:
    """
    Convert the quaternion to the rotation matrix that maps body vectors
    into the reference frame.

    Args:
        q: the unit quaternion

    Returns:
        numpy.ndarray: 3x3 orthonormal matrix
    """
    w, x, y, z = q.w, q.x, q.y, q.z
    r = numpy.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )
    return r


def body_to_inertial(q: UnitQuaternion) -> numpy.ndarray:
    """
    get R_IB, the rotation of body vectors into the z-up inertial frame
    """
    r_ib = R_IL @ quat_to_rotation(q)
    return r_ib


def quat_exp(rotvec: numpy.ndarray) -> UnitQuaternion:
    """
    exponential map of a rotation vector (axis * angle)
    """
    angle = float(numpy.linalg.norm(rotvec))
    half = 0.5 * angle
    if angle < 1e-12:
        # second order expansion of sin(half)/angle
        s = 0.5 - angle * angle / 48.0
    else:
        s = math.sin(half) / angle
    q = UnitQuaternion.of_array(
        [math.cos(half), s * rotvec[0], s * rotvec[1], s * rotvec[2]]
    )
    return q


def quat_log(q: UnitQuaternion) -> numpy.ndarray:
    """
    rotation vector of the given quaternion with angle in [0, π]
    """
    if q.w < 0:
        q = -q
    vnorm = float(numpy.linalg.norm(q.v))
    if vnorm < 1e-15:
        return vec3()
    angle = 2.0 * math.atan2(vnorm, q.w)
    rotvec = q.v * (angle / vnorm)
    return rotvec


def quat_from_axis_angle(axis, angle: float) -> UnitQuaternion:
    """
    quaternion rotating by angle [rad] about the given unit axis
    """
    axis = _unit_axis(axis)
    q = quat_exp(axis * angle)
    return q


def quat_integrate(
    q: UnitQuaternion, omega_body: numpy.ndarray, dt: float
) -> UnitQuaternion:
    """
    Advance the attitude by a constant body rate using the exponential map.

    Args:
        q: attitude
        omega_body: body rate [rad/s]
        dt: time step [s], must be positive

    Returns:
        UnitQuaternion: q ⊗ exp(ω dt)
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive but is {dt}")
    dq = quat_exp(numpy.asarray(omega_body, dtype=float) * dt)
    q_next = quat_multiply(q, dq)
    return q_next


def quat_angle_between(a: UnitQuaternion, b: UnitQuaternion) -> float:
    """
    geodesic angle [rad] of the rotation between a and b
    """
    err = quat_multiply(a, quat_conjugate(b))
    w = min(1.0, abs(err.w))
    angle = 2.0 * math.acos(w)
    return angle


def quat_interpolate(a: UnitQuaternion, b: UnitQuaternion, s: float) -> UnitQuaternion:
    """
    rotate from a towards b at constant angular rate, s in [0, 1]
    """
    delta = quat_multiply(quat_conjugate(a), b)
    q = quat_multiply(a, quat_exp(quat_log(delta) * s))
    return q


def quat_to_euler_zxy(q: UnitQuaternion) -> Tuple[float, float, float]:
    """
    intrinsic z-x-y Euler angles (yaw, roll, pitch) in radians

    R = Rz(yaw) Rx(roll) Ry(pitch); used for display only
    """
    r = quat_to_rotation(q)
    roll = math.asin(max(-1.0, min(1.0, r[2, 1])))
    yaw = math.atan2(-r[0, 1], r[1, 1])
    pitch = math.atan2(-r[2, 0], r[2, 2])
    return yaw, roll, pitch


def _unit_axis(axis) -> numpy.ndarray:
    axis = numpy.asarray(axis, dtype=float)
    norm = numpy.linalg.norm(axis)
    if abs(norm - 1.0) > UNIT_TOLERANCE:
        raise ValueError(f"axis {axis} is not a unit vector (norm {norm})")
    return axis


def rotation_about_axis(axis, angle: float) -> numpy.ndarray:
    """
    Rodrigues rotation matrix for a right-hand rotation about a unit axis.

    Args:
        axis: unit vector, |‖axis‖ - 1| <= 1e-9
        angle: rotation angle [rad]

    Returns:
        numpy.ndarray: 3x3 rotation matrix
    """
    axis = _unit_axis(axis)
    k = skew(axis)
    r = numpy.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)
    return r
