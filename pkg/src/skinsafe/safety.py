"""Power-and-force-limiting math (mass-spring-mass transient contact model),
force-to-sensitivity quantization and the four per-pad threshold policies
with their 25 Hz update contract."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dynamics import effective_mass, joint_space_inertia, moving_mass_up_to
from .kinematics import JointState, RobotModel, fk_arrays, _point_jacobian_from_fk
from .skin import BodyPart, SkinPad

THRESHOLD_RATE_HZ = 25.0
UPDATE_PERIOD = 1.0 / THRESHOLD_RATE_HZ
# Below this pad speed the velocity direction is undefined; the force is
# evaluated with the literal (near-zero) speed, which lands at the least
# sensitive level.  Quasi-static pressing is outside the transient model.
_SPEED_EPS = 1e-4


class SafetyError(ValueError):
    pass


@dataclass(frozen=True)
class PflParams:
    """Transient-contact model constants.

    k is the spring constant of the struck body region [N/m], F_limit and
    F_mid the quantization boundaries [N], m_H the struck body-part mass
    [kg] and v_cmd the nominal task speed [m/s].
    """

    k: float = 75000.0
    F_limit: float = 280.0
    F_mid: float = 140.0
    m_H: float = 5.6
    v_cmd: float = 0.5

    def __post_init__(self):
        if min(self.k, self.F_limit, self.F_mid, self.m_H, self.v_cmd) <= 0:
            raise SafetyError("all PFL parameters must be strictly positive")
        if not self.F_mid < self.F_limit:
            raise SafetyError("F_mid must be below F_limit")


class PolicyKind(Enum):
    UNIFORM = "UNIFORM"
    BODY_PARTS = "BODY_PARTS"
    LINK_VELOCITY = "LINK_VELOCITY"
    EFFECTIVE_MASS = "EFFECTIVE_MASS"

    @property
    def is_dynamic(self) -> bool:
        return self in (PolicyKind.LINK_VELOCITY, PolicyKind.EFFECTIVE_MASS)


@dataclass(frozen=True)
class ThresholdAssignment:
    """Latched per-pad sensitivity levels (0 most sensitive .. 2 least)."""

    levels: dict[int, int]
    timestamp: float
    policy: PolicyKind

    def level_of(self, pad_id: int) -> int:
        return self.levels[pad_id]


def pfl_max_force(v: float, k: float, m_R: float, m_H: float) -> float:
    """Maximal transient-contact force of the mass-spring-mass model:
    F = v * sqrt(k) / sqrt(1/m_R + 1/m_H).  Linear in v, monotone in the
    masses."""
    if k <= 0 or m_R <= 0 or m_H <= 0:
        raise SafetyError("k, m_R and m_H must be strictly positive")
    if v < 0:
        raise SafetyError("v is a speed magnitude and must be >= 0")
    return v * math.sqrt(k) / math.sqrt(1.0 / m_R + 1.0 / m_H)


def pfl_max_velocity(F_max: float, k: float, m_R: float, m_H: float) -> float:
    """Maximal speed keeping transient-contact force below F_max; exact
    algebraic inverse of :func:`pfl_max_force` in v."""
    if k <= 0 or m_R <= 0 or m_H <= 0:
        raise SafetyError("k, m_R and m_H must be strictly positive")
    if F_max < 0:
        raise SafetyError("F_max must be >= 0")
    return F_max / math.sqrt(k) * math.sqrt(1.0 / m_R + 1.0 / m_H)


def force_to_threshold(F: float, params: PflParams = PflParams()) -> int:
    """Quantize a predicted contact force to a sensitivity level:
    0 if F >= F_limit, 1 if F_mid <= F < F_limit, 2 below F_mid."""
    if F < 0:
        raise SafetyError("force must be >= 0")
    if F >= params.F_limit:
        return 0
    if F >= params.F_mid:
        return 1
    return 2


_BODY_PART_LEVELS = {BodyPart.HAND: 0, BodyPart.LOWER: 0, BodyPart.UPPER: 1}


def pad_world_velocity(model: RobotModel, state: JointState, pad: SkinPad,
                       _fk=None) -> np.ndarray:
    """World linear velocity of a pad's center point."""
    Rs, ts = _fk if _fk is not None else fk_arrays(model, state.q)
    J = _point_jacobian_from_fk(model, Rs, ts, pad.link, pad.center)
    return J[:3] @ state.qdot


def compute_thresholds(policy: PolicyKind, model: RobotModel,
                       state: JointState, pads: list[SkinPad],
                       params: PflParams = PflParams()) -> ThresholdAssignment:
    """Produce the per-pad sensitivity assignment for one 25 Hz update.

    UNIFORM: every pad at the most sensitive level.
    BODY_PARTS: hand and lower arm most sensitive, upper arm medium;
    state-independent.
    LINK_VELOCITY: predicted force per pad from its center-point speed with
    m_R = half the moving mass up to the pad's link.
    EFFECTIVE_MASS: same force model but m_R is the directional effective
    mass along the pad's velocity; unbounded directions fall back to the
    total chain mass (most conservative).
    """
    levels: dict[int, int] = {}
    if policy is PolicyKind.UNIFORM:
        levels = {pad.id: 0 for pad in pads}
    elif policy is PolicyKind.BODY_PARTS:
        levels = {pad.id: _BODY_PART_LEVELS[pad.body_part] for pad in pads}
    else:
        fk = fk_arrays(model, state.q)
        Minv = None
        if policy is PolicyKind.EFFECTIVE_MASS:
            M = joint_space_inertia(model, state.q).M
            Minv = np.linalg.inv(M)
        for pad in pads:
            Rs, ts = fk
            J = _point_jacobian_from_fk(model, Rs, ts, pad.link, pad.center)
            v_vec = J[:3] @ state.qdot
            speed = float(np.linalg.norm(v_vec))
            if policy is PolicyKind.LINK_VELOCITY:
                m_R = 0.5 * moving_mass_up_to(model, pad.link)
            else:
                if speed < _SPEED_EPS:
                    # Direction undefined; the literal force is ~0 anyway.
                    levels[pad.id] = force_to_threshold(
                        pfl_max_force(speed, params.k, model.total_mass, params.m_H),
                        params)
                    continue
                u = v_vec / speed
                lam_v_inv = J[:3] @ (Minv @ J[:3].T)
                mobility = float(u @ lam_v_inv @ u)
                m_R = (1.0 / mobility) if mobility > 1e-9 else model.total_mass
            F = pfl_max_force(speed, params.k, m_R, params.m_H)
            levels[pad.id] = force_to_threshold(F, params)
    return ThresholdAssignment(levels=levels, timestamp=state.time, policy=policy)


class ThresholdScheduler:
    """Accumulator timer for the 40 ms threshold-update cadence.

    Fires exactly once per period of simulated time with no drift: the
    accumulator subtracts the period on firing, never resets to zero.  The
    initial assignment before the first firing is the caller's job.
    """

    def __init__(self, period: float = UPDATE_PERIOD):
        if period <= 0:
            raise SafetyError("period must be > 0")
        self.period = period
        self._acc = 0.0

    def tick(self, dt: float) -> bool:
        self._acc += dt
        if self._acc >= self.period - 1e-12:
            self._acc -= self.period
            return True
        return False
