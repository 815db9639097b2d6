"""
Created on 2026-10-19

@author: wf

Linear minimum norm control allocation.

Each rotor force is split into a vertical part F_v = μn²cos α and a
lateral part F_l = μn²sin α. In these variables the wrench is a static
linear function of the 12-vector F_dec which is inverted with the
Moore-Penrose pseudo-inverse.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

import numpy

from omnisim.rotor_wrench import Wrench
from omnisim.spatial import UnitQuaternion, body_to_inertial
from omnisim.vehicle import OPPOSITE_PAIRS, RotorGeometry, VehicleParams

logger = logging.getLogger(__name__)

# singular value cutoff relative to the largest singular value
RCOND = 1e-10


class AllocationRankError(ValueError):
    """
    the static allocation matrix of a mask does not have full rank 6
    """


@dataclass(frozen=True)
class RotorMask:
    """
    the set of active rotors (1-based) - excluded rotors come in
    opposite pairs
    """

    active: FrozenSet[int] = frozenset(range(1, 7))

    def __post_init__(self):
        active = frozenset(self.active)
        object.__setattr__(self, "active", active)
        if not active <= frozenset(range(1, 7)):
            raise ValueError(f"invalid rotor indices in mask {sorted(active)}")
        if len(active) not in (4, 6):
            raise ValueError(f"mask must have 4 or 6 rotors but has {len(active)}")
        for a, b in OPPOSITE_PAIRS:
            if (a in active) != (b in active):
                raise ValueError(
                    f"mask {sorted(active)} excludes rotor {a if b in active else b} without its opposite"
                )

    @classmethod
    def full(cls) -> "RotorMask":
        return cls()

    @classmethod
    def excluding(cls, pair: Iterable[int]) -> "RotorMask":
        mask = cls(active=frozenset(range(1, 7)) - frozenset(pair))
        return mask

    @property
    def indices(self) -> Tuple[int, ...]:
        """
        sorted 1-based active rotor indices
        """
        return tuple(sorted(self.active))

    @property
    def size(self) -> int:
        return len(self.active)

    @property
    def excluded(self) -> Tuple[int, ...]:
        return tuple(i for i in range(1, 7) if i not in self.active)


@dataclass
class DecomposedForces:
    """
    the 12-vector (F_v1, F_l1, ..., F_v6, F_l6) of vertical and lateral
    rotor forces [N]
    """

    values: numpy.ndarray = field(default_factory=lambda: numpy.zeros(12))

    @property
    def vertical(self) -> numpy.ndarray:
        return self.values[0::2]

    @property
    def lateral(self) -> numpy.ndarray:
        return self.values[1::2]

    def norm(self) -> float:
        return float(numpy.linalg.norm(self.values))


@dataclass
class ActuatorCommand:
    """
    desired rotor speeds [rad/s] and tilt angles [rad]
    """

    n_des: numpy.ndarray
    alpha_des: numpy.ndarray
    saturated: numpy.ndarray = field(default_factory=lambda: numpy.zeros(6, dtype=bool))
    mask: RotorMask = field(default_factory=RotorMask.full)

    @property
    def any_saturated(self) -> bool:
        return bool(numpy.any(self.saturated))

    # ActuatorState compatible view for body_wrench
    @property
    def n(self) -> numpy.ndarray:
        return self.n_des

    @property
    def alpha(self) -> numpy.ndarray:
        return self.alpha_des


def decompose(n: float, alpha: float, mu: float) -> Tuple[float, float]:
    """
    split the thrust of a rotor into its vertical and lateral component
    """
    thrust = mu * n * n
    return thrust * math.cos(alpha), thrust * math.sin(alpha)


def decompose_stack(n, alpha, mu: float) -> DecomposedForces:
    """
    decompose all six rotors into F_dec
    """
    values = numpy.empty(12)
    for i in range(6):
        values[2 * i], values[2 * i + 1] = decompose(float(n[i]), float(alpha[i]), mu)
    return DecomposedForces(values=values)


def static_allocation_matrix(
    params: VehicleParams, geometry: RotorGeometry, mask: Optional[RotorMask] = None
) -> numpy.ndarray:
    """
    Get the tilt independent allocation matrix A_static with
    (F, M) = A_static · F_dec.

    Vertical column of rotor i: force -e_z, moment l·t_i - (κ/μ)c_i·e_z.
    Lateral column of rotor i: force t_i, moment l·e_z + (κ/μ)c_i·t_i.

    Args:
        params: vehicle parameters
        geometry: rotor placement
        mask: active rotors (default: all six)

    Returns:
        numpy.ndarray: 6 x 2k matrix for the k active rotors
    """
    if mask is None:
        mask = RotorMask.full()
    elif not isinstance(mask, RotorMask):
        mask = RotorMask(active=frozenset(mask))
    ratio = params.kappa / params.mu
    e_z = numpy.array([0.0, 0.0, 1.0])
    columns = []
    for i in mask.indices:
        t = geometry.tangents[i - 1]
        c = geometry.spin_signs[i - 1]
        vertical = numpy.concatenate([-e_z, params.l * t - ratio * c * e_z])
        lateral = numpy.concatenate([t, params.l * e_z + ratio * c * t])
        columns.extend([vertical, lateral])
    a_static = numpy.column_stack(columns)
    return a_static


def pseudo_inverse(a: numpy.ndarray, rcond: float = RCOND) -> Tuple[numpy.ndarray, int]:
    """
    Moore-Penrose pseudo-inverse via the singular value decomposition

    Args:
        a: the matrix to invert
        rcond: cutoff relative to the largest singular value

    Returns:
        the pseudo-inverse and the numerical rank
    """
    u, s, vt = numpy.linalg.svd(a, full_matrices=False)
    cutoff = rcond * s[0] if s.size else 0.0
    keep = s > cutoff
    rank = int(numpy.sum(keep))
    s_inv = numpy.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    pinv = (vt.T * s_inv) @ u.T
    return pinv, rank


def unwrap_tilt(alpha: float, alpha_prev: float, limit: float = 4 * math.pi) -> float:
    """
    get the angle equivalent to alpha (modulo 2π) that is closest to
    alpha_prev and within ±limit
    """
    two_pi = 2.0 * math.pi
    k0 = round((alpha_prev - alpha) / two_pi)
    best = alpha
    best_distance = math.inf
    for k in (k0 - 1, k0, k0 + 1):
        candidate = alpha + k * two_pi
        if abs(candidate) > limit:
            continue
        distance = abs(candidate - alpha_prev)
        if distance < best_distance:
            best, best_distance = candidate, distance
    return best


def verify_norm_identity(f_dec, n, mu: float) -> bool:
    """
    check ‖F_dec‖² = μ² Σ n_i⁴ with relative tolerance 1e-9
    """
    values = f_dec.values if isinstance(f_dec, DecomposedForces) else numpy.asarray(f_dec)
    lhs = float(values @ values)
    n = numpy.asarray(n, dtype=float)
    rhs = mu * mu * float(numpy.sum(n**4))
    ok = abs(lhs - rhs) < 1e-9 * max(1.0, lhs)
    return ok


def tilt_travel(command: ActuatorCommand, alpha_prev) -> float:
    """
    the largest tilt change [rad] of the active rotors from the previous command
    """
    indices = [i - 1 for i in command.mask.indices]
    delta = numpy.abs(command.alpha_des[indices] - numpy.asarray(alpha_prev, dtype=float)[indices])
    travel = float(numpy.max(delta))
    return travel


def arm_verticality(q: UnitQuaternion, geometry: RotorGeometry) -> Dict[Tuple[int, int], float]:
    """
    angle [rad] between each arm axis and the inertial vertical

    Returns:
        dict of opposite rotor pair to angle from vertical
    """
    r_ib = body_to_inertial(q)
    angles = {}
    for pair in OPPOSITE_PAIRS:
        axis = r_ib @ geometry.tilt_axes[pair[0] - 1]
        angles[pair] = math.acos(min(1.0, abs(float(axis[2]))))
    return angles


def select_mask(
    q: UnitQuaternion, geometry: RotorGeometry, epsilon_axis: float = math.radians(2.0)
) -> RotorMask:
    """
    Exclude the rotor pair whose arm is (nearly) vertical.

    The thrust of rotors tilting about a vertical axis can not oppose
    gravity. Only the pair closest to vertical is excluded.

    Args:
        q: the (commanded) attitude
        geometry: rotor placement
        epsilon_axis: threshold angle [rad] from vertical

    Returns:
        RotorMask: full mask or a mask of four rotors
    """
    angles = arm_verticality(q, geometry)
    pair, angle = min(angles.items(), key=lambda item: item[1])
    if angle < epsilon_axis:
        mask = RotorMask.excluding(pair)
    else:
        mask = RotorMask.full()
    return mask


class Allocator:
    """
    the per vehicle allocation context

    caches the pseudo-inverse for each mask and remembers the
    previous tilt command for unwrapping

    With preposition_idle the excluded rotors are not parked at their
    last tilt but follow the tilt the full six rotor solution would give
    them, at zero speed. The mask then only returns to six rotors once the
    realized tilt of the idle pair is within realign_tolerance of that
    target.
    """

    def __init__(
        self,
        params: VehicleParams,
        geometry: RotorGeometry,
        epsilon_axis: float = math.radians(2.0),
        alpha_prev=None,
        preposition_idle: bool = False,
        realign_tolerance: float = math.radians(6.0),
    ):
        self.params = params
        self.geometry = geometry
        self.epsilon_axis = epsilon_axis
        self.preposition_idle = preposition_idle
        self.realign_tolerance = realign_tolerance
        self.alpha_prev = (
            numpy.zeros(6) if alpha_prev is None else numpy.array(alpha_prev, dtype=float)
        )
        self.mask = RotorMask.full()
        self.pinv_cache: Dict[RotorMask, numpy.ndarray] = {}

    def copy(self) -> "Allocator":
        allocator = Allocator(
            self.params,
            self.geometry,
            self.epsilon_axis,
            alpha_prev=self.alpha_prev,
            preposition_idle=self.preposition_idle,
            realign_tolerance=self.realign_tolerance,
        )
        allocator.mask = self.mask
        allocator.pinv_cache = self.pinv_cache
        return allocator

    def pinv(self, mask: RotorMask) -> numpy.ndarray:
        """
        get the pseudo-inverse of the static allocation matrix of the mask
        """
        pinv = self.pinv_cache.get(mask)
        if pinv is None:
            a_static = static_allocation_matrix(self.params, self.geometry, mask)
            pinv, rank = pseudo_inverse(a_static)
            if rank < 6:
                raise AllocationRankError(
                    f"static allocation matrix for rotors {mask.indices} has rank {rank} < 6"
                )
            self.pinv_cache[mask] = pinv
        return pinv

    def idle_misalignment(self, alpha) -> float:
        """
        the largest distance [rad] of the realized tilt of the excluded
        rotors from their commanded tilt
        """
        idle = [i - 1 for i in self.mask.excluded]
        if not idle:
            return 0.0
        alpha = numpy.asarray(alpha, dtype=float)
        misalignment = float(numpy.max(numpy.abs(alpha[idle] - self.alpha_prev[idle])))
        return misalignment

    def select_mask(self, q: UnitQuaternion, alpha=None) -> RotorMask:
        """
        select the mask for the attitude q

        Args:
            q: the commanded attitude
            alpha: the realized tilt angles - needed for the return to
                six rotors when prepositioning idle rotors
        """
        mask = select_mask(q, self.geometry, self.epsilon_axis)
        if (
            self.preposition_idle
            and alpha is not None
            and mask.size == 6
            and self.mask.size == 4
        ):
            misalignment = self.idle_misalignment(alpha)
            if misalignment > self.realign_tolerance:
                logger.debug(
                    "keeping rotors %s idle - tilt %.3f rad off", self.mask.excluded, misalignment
                )
                mask = self.mask
        if mask != self.mask:
            logger.info(
                "allocation mask switch %s -> %s", self.mask.indices, mask.indices
            )
        return mask

    def allocate(
        self, wrench_des: Wrench, mask: Optional[RotorMask] = None
    ) -> Tuple[DecomposedForces, ActuatorCommand]:
        """
        Allocate the desired wrench to rotor speeds and tilt angles.

        Args:
            wrench_des: desired body wrench
            mask: active rotors (default: the current mask)

        Returns:
            the minimum norm F_dec and the actuator command
        """
        if mask is None:
            mask = self.mask
        params = self.params
        pinv = self.pinv(mask)
        f_active = pinv @ wrench_des.as_vector()
        values = numpy.zeros(12)
        n_des = numpy.zeros(6)
        alpha_prev = self.alpha_prev.copy()
        alpha_des = self.alpha_prev.copy()
        saturated = numpy.zeros(6, dtype=bool)
        for k, i in enumerate(mask.indices):
            f_v = f_active[2 * k]
            f_l = f_active[2 * k + 1]
            values[2 * (i - 1)] = f_v
            values[2 * (i - 1) + 1] = f_l
            n_sq = math.sqrt(f_v * f_v + f_l * f_l) / params.mu
            n = math.sqrt(n_sq)
            if n > params.n_max:
                logger.debug("rotor %d speed %.1f clamped to %.1f", i, n, params.n_max)
                n = params.n_max
                saturated[i - 1] = True
            n_des[i - 1] = n
            alpha_des[i - 1] = unwrap_tilt(
                math.atan2(f_l, f_v), self.alpha_prev[i - 1], params.winding_limit
            )
        if self.preposition_idle and mask.excluded:
            # idle targets stay within one turn, an unloaded rotor may swing the long way
            f_full = self.pinv(RotorMask.full()) @ wrench_des.as_vector()
            for i in mask.excluded:
                alpha_des[i - 1] = unwrap_tilt(
                    math.atan2(f_full[2 * i - 1], f_full[2 * i - 2]),
                    self.alpha_prev[i - 1],
                    min(math.pi, params.winding_limit),
                )
        self.alpha_prev = alpha_des.copy()
        self.mask = mask
        command = ActuatorCommand(
            n_des=n_des, alpha_des=alpha_des, saturated=saturated, mask=mask
        )
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("tilt travel %.4f rad", tilt_travel(command, alpha_prev))
        return DecomposedForces(values=values), command


def allocate(
    wrench_des: Wrench,
    params: VehicleParams,
    geometry: RotorGeometry,
    mask: Optional[RotorMask] = None,
    alpha_prev=None,
) -> Tuple[DecomposedForces, ActuatorCommand]:
    """
    stateless allocation with a fresh context
    """
    allocator = Allocator(params, geometry, alpha_prev=alpha_prev)
    return allocator.allocate(wrench_des, mask=mask)
