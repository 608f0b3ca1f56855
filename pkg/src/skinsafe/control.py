"""Velocity-mode task execution and collision reactions.

The task is four straight Cartesian segments tracked with resolved motion
rate control through the tool Jacobian.  Reactions: STOP zeroes every joint
until the contact clears; AVOID retracts the contacted link opposite the
pad's world normal (latched at detection) with zero commanded rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kinematics import (JointState, RobotModel, fk_arrays,
                         _point_jacobian_from_fk, pseudoinverse)
from .skin import SkinPad


class ControlError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSegment:
    """Straight Cartesian segment in the robot base frame."""

    direction: np.ndarray
    length: float
    speed: float = 0.5

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if n == 0:
            raise ControlError("segment direction must be nonzero")
        object.__setattr__(self, "direction", d / n)
        if self.length <= 0 or self.speed <= 0:
            raise ControlError("segment length and speed must be > 0")

    @property
    def duration(self) -> float:
        return self.length / self.speed


class ReactionPolicy(Enum):
    STOP = "STOP"
    AVOID = "AVOID"


@dataclass(frozen=True)
class VelocityCommand:
    """Joint velocity command; clamped flags joints hitting their limits."""

    qdot_cmd: np.ndarray
    time: float
    clamped: bool = False


DEFAULT_SEGMENT_LENGTHS = (0.4, 0.25, 0.25, 0.4)
_SEGMENT_DIRECTIONS = ((0.0, 1.0, 0.0), (0.0, 0.0, -1.0),
                       (0.0, 0.0, 1.0), (-1.0, 0.0, 0.0))

# Ramp-up to nominal speed at segment start / resume [s].
SPEED_RAMP = 0.1
# Position tolerance on a segment endpoint before switching [m].
ENDPOINT_TOL = 1e-3


def task_plan(lengths=DEFAULT_SEGMENT_LENGTHS, speed: float = 0.5) -> list[TaskSegment]:
    """The pick-and-place motion: +y, -z, +z, -x in the base frame."""
    if len(lengths) != 4:
        raise ControlError("the task has exactly four segments")
    return [TaskSegment(d, l, speed) for d, l in zip(_SEGMENT_DIRECTIONS, lengths)]


def clamp_to_limits(model: RobotModel, qdot: np.ndarray) -> tuple[np.ndarray, bool]:
    limits = np.array([j.velocity_limit for j in model.joints])
    clipped = np.clip(qdot, -limits, limits)
    return clipped, bool((clipped != qdot).any())


def rrmc_track(model: RobotModel, state: JointState, xdot) -> VelocityCommand:
    """Joint velocities realizing a desired 6D tool velocity via the
    Moore-Penrose pseudoinverse of the tool Jacobian (least squares near
    singularities)."""
    xdot = np.asarray(xdot, dtype=float).reshape(6)
    if not np.isfinite(xdot).all():
        raise ControlError("target velocity must be finite")
    Rs, ts = fk_arrays(model, state.q)
    J = _point_jacobian_from_fk(model, Rs, ts, model.n - 1, model.tool.translation)
    qdot = pseudoinverse(J) @ xdot
    qdot, clamped = clamp_to_limits(model, qdot)
    return VelocityCommand(qdot, state.time, clamped)


def stop_reaction(state: JointState) -> VelocityCommand:
    """Zero velocity to every joint."""
    return VelocityCommand(np.zeros_like(state.q), state.time)


def avoid_reaction(model: RobotModel, state: JointState, pad: SkinPad,
                   retract_dir: np.ndarray, speed: float = 0.5) -> VelocityCommand:
    """Retract the contacted link: linear velocity opposite the latched
    contact direction, zero rotation, through the pad link's Jacobian
    pseudoinverse.  Joints distal to the pad's link receive zero command."""
    retract_dir = np.asarray(retract_dir, dtype=float).reshape(3)
    xdot = np.concatenate([-retract_dir * speed, np.zeros(3)])
    Rs, ts = fk_arrays(model, state.q)
    J = _point_jacobian_from_fk(model, Rs, ts, pad.link, pad.center)
    qdot = pseudoinverse(J) @ xdot
    qdot, clamped = clamp_to_limits(model, qdot)
    return VelocityCommand(qdot, state.time, clamped)


class TaskController:
    """State machine driving the four-segment task with reaction handling.

    Segment endpoints are absolute base-frame positions fixed at attach
    time; after a reaction the controller re-plans a straight line from the
    current tool position to the interrupted segment's endpoint.
    """

    TASK = "TASK"
    STOPPED = "STOPPED"
    RETREAT = "RETREAT"
    DONE = "DONE"

    def __init__(self, model: RobotModel, plan: list[TaskSegment],
                 retract_hold: float = 0.0, retract_speed: float = 0.5):
        self.model = model
        self.plan = plan
        self.retract_hold = retract_hold
        self.retract_speed = retract_speed
        self.state = self.TASK
        self.segment_index = 0
        self.segment_entry_time = 0.0
        self.endpoints: list[np.ndarray] = []
        self._ramp_start = 0.0
        self._retract_dir: np.ndarray | None = None
        self._retract_pad: SkinPad | None = None
        self._hold_until = 0.0

    def attach(self, q0: np.ndarray, t0: float = 0.0):
        """Fix segment endpoints from the starting tool position."""
        Rs, ts = fk_arrays(self.model, q0)
        p = Rs[-1] @ self.model.tool.translation + ts[-1]
        self.endpoints = []
        for seg in self.plan:
            p = p + seg.direction * seg.length
            self.endpoints.append(p.copy())
        self.segment_entry_time = t0
        self._ramp_start = t0

    def tool_position(self, q: np.ndarray) -> np.ndarray:
        Rs, ts = fk_arrays(self.model, q)
        return Rs[-1] @ self.model.tool.translation + ts[-1]

    def on_detection(self, reaction: ReactionPolicy, pad: SkinPad,
                     world_normal: np.ndarray):
        if self.state == self.DONE:
            return
        if reaction is ReactionPolicy.STOP:
            self.state = self.STOPPED
        else:
            self.state = self.RETREAT
            self._retract_pad = pad
            # Latched for the whole retreat.
            self._retract_dir = np.asarray(world_normal, dtype=float).copy()

    def on_contact_cleared(self, t: float):
        if self.state == self.STOPPED:
            self._resume(t)
        elif self.state == self.RETREAT:
            self._hold_until = t + self.retract_hold
            if self.retract_hold == 0.0:
                self._resume(t)

    def _resume(self, t: float):
        self.state = self.TASK
        self._ramp_start = t
        self._retract_dir = None
        self._retract_pad = None

    def command(self, state: JointState, contact_active: bool) -> VelocityCommand:
        t = state.time
        if self.state == self.DONE:
            return VelocityCommand(np.zeros(self.model.n), t)
        if self.state == self.STOPPED:
            return stop_reaction(state)
        if self.state == self.RETREAT:
            if not contact_active and t >= self._hold_until:
                self._resume(t)
            else:
                return avoid_reaction(self.model, state, self._retract_pad,
                                      self._retract_dir, self.retract_speed)
        # TASK: straight line to the current segment endpoint.  One FK pass
        # feeds both the position error and the tool Jacobian.
        Rs, ts = fk_arrays(self.model, state.q)
        p = Rs[-1] @ self.model.tool.translation + ts[-1]
        target = self.endpoints[self.segment_index]
        err = target - p
        dist = float(np.linalg.norm(err))
        while dist < ENDPOINT_TOL:
            self.segment_index += 1
            self.segment_entry_time = t
            self._ramp_start = t
            if self.segment_index >= len(self.plan):
                self.state = self.DONE
                return VelocityCommand(np.zeros(self.model.n), t)
            target = self.endpoints[self.segment_index]
            err = target - p
            dist = float(np.linalg.norm(err))
        seg = self.plan[self.segment_index]
        ramp = min(1.0, max(0.0, (t - self._ramp_start)) / SPEED_RAMP) if SPEED_RAMP > 0 else 1.0
        # Slow down proportionally near the endpoint so it is not overshot.
        speed = min(seg.speed * ramp, dist / 0.05)
        xdot = np.concatenate([err / dist * speed, np.zeros(3)])
        J = _point_jacobian_from_fk(self.model, Rs, ts, self.model.n - 1,
                                    self.model.tool.translation)
        qdot = pseudoinverse(J) @ xdot
        qdot, clamped = clamp_to_limits(self.model, qdot)
        return VelocityCommand(qdot, t, clamped)

    @property
    def done(self) -> bool:
        return self.state == self.DONE
