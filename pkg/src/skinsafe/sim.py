"""Deterministic fixed-step world: integrates joint velocity commands,
schedules the 25 Hz threshold updates and 30 Hz skin sampling, and injects
one transient contact per run.

Step order: threshold update (if due), skin sampling + detection (if due),
reaction state machine, controller command, explicit Euler integration,
tick log.  Identical (config, seed, scenario) always produce identical
logs; real-time pacing only slows the wall clock.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .control import (ReactionPolicy, TaskController, task_plan,
                      DEFAULT_SEGMENT_LENGTHS)
from .kinematics import JointState, RobotModel, fk_arrays, _point_jacobian_from_fk
from .safety import (PflParams, PolicyKind, ThresholdAssignment,
                     ThresholdScheduler, compute_thresholds, pfl_max_force,
                     UPDATE_PERIOD)
from .dynamics import moving_mass_up_to
from .skin import (BodyPart, PressureSample, SkinPad, TriggerTable,
                   SAMPLE_PERIOD, detect, pressure_from_contact)


class SimError(ValueError):
    pass


class RunAborted(RuntimeError):
    """A run that violated a hard constraint; carries the diagnostic."""


class DwellRule(Enum):
    FIXED_MAX = "FIXED_MAX"
    UNTIL_DETECTED = "UNTIL_DETECTED"


@dataclass
class ContactEvent:
    """One injected transient contact and its detection outcome."""

    pad_id: int
    onset: float
    effort: float
    dwell: DwellRule
    max_dwell: float = 1.0
    detection_time: float | None = None
    end_time: float | None = None

    def active(self, t: float) -> bool:
        if t < self.onset:
            return False
        return self.end_time is None or t < self.end_time


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.002
    seed: int = 0
    real_time_paced: bool = False
    max_time: float = 60.0

    def __post_init__(self):
        if self.dt <= 0:
            raise SimError("dt must be > 0")


# Collision axes examined by the experiment matrix (segment they target).
AXIS_TO_SEGMENT = {"+y": 0, "-z": 1, "-x": 3}


@dataclass(frozen=True)
class Scenario:
    """One experiment run description."""

    policy: PolicyKind
    reaction: ReactionPolicy
    body_part: BodyPart | None = None
    axis: str | None = None
    effort: float = 0.8
    onset_frac: float = 0.4
    onset_jitter: float = 0.05
    segment_lengths: tuple = DEFAULT_SEGMENT_LENGTHS
    speed: float = 0.5
    retract_hold: float = 0.0

    def __post_init__(self):
        if self.axis is not None and self.axis not in AXIS_TO_SEGMENT:
            raise SimError(f"unknown collision axis {self.axis!r}")
        if not 0.0 <= self.effort <= 1.0:
            raise SimError("contact effort must lie in [0, 1]")


# Start configuration for the shipped task (elbow-up, tool in front of the
# base with room for the +y / -z / +z / -x sweep).
DEFAULT_Q0 = (0.0, -1.2, 1.9, -2.3, -1.57, 0.0)


class PeriodicTimer:
    """Accumulator timer: fires once per period of simulated time, no drift
    (the accumulator subtracts the period on firing, never resets)."""

    def __init__(self, period: float):
        if period <= 0:
            raise SimError("period must be > 0")
        self.period = period
        self._acc = 0.0

    def tick(self, dt: float) -> bool:
        self._acc += dt
        if self._acc >= self.period - 1e-12:
            self._acc -= self.period
            return True
        return False


def select_pad(pads: list[SkinPad], body_part: BodyPart, model: RobotModel,
               state: JointState) -> SkinPad:
    """Pad of the given part whose motion is most parallel to the tool's.

    Deterministic tie-break by lowest pad id (pads are kept id-sorted).
    """
    part_pads = [p for p in pads if p.body_part == body_part]
    if not part_pads:
        raise SimError(f"no pads on body part {body_part}")
    Rs, ts = fk_arrays(model, state.q)
    J_ee = _point_jacobian_from_fk(model, Rs, ts, model.n - 1,
                                   model.tool.translation)
    v_ee = J_ee[:3] @ state.qdot
    n_ee = np.linalg.norm(v_ee)
    dir_ee = v_ee / n_ee if n_ee > 1e-9 else np.zeros(3)
    best, best_dot = part_pads[0], -np.inf
    for pad in part_pads:
        J = _point_jacobian_from_fk(model, Rs, ts, pad.link, pad.center)
        v = J[:3] @ state.qdot
        nv = np.linalg.norm(v)
        d = float(v @ dir_ee / nv) if nv > 1e-9 else -np.inf
        if d > best_dot + 1e-12:
            best, best_dot = pad, d
    return best


@dataclass
class TickLog:
    """Per-step log arrays (filled when keep_ticks is set)."""

    time: list = field(default_factory=list)
    q: list = field(default_factory=list)
    qdot: list = field(default_factory=list)
    levels: list = field(default_factory=list)
    pressures: list = field(default_factory=list)
    contact_active: list = field(default_factory=list)
    reaction_state: list = field(default_factory=list)
    ee_position: list = field(default_factory=list)


@dataclass
class RunResult:
    scenario: Scenario
    seed: int
    reacted: bool
    pad_id: int | None
    onset_time: float | None
    detection_time: float | None
    task_time: float
    avoid_distance: float
    level_at_pad: int | None
    estimated_force: float | None
    level_counts: tuple[int, int, int]
    peak_part_speed: dict[str, float]
    clamp_events: int
    aborted: bool = False
    diagnostic: str = ""
    ticks: TickLog | None = None

    @property
    def reaction_time(self) -> float | None:
        if self.detection_time is None or self.onset_time is None:
            return None
        return self.detection_time - self.onset_time


class World:
    """One simulated run; deterministic given (scenario, sim config)."""

    def __init__(self, model: RobotModel, pads: list[SkinPad],
                 scenario: Scenario, sim: SimConfig = SimConfig(),
                 pfl: PflParams = PflParams(),
                 triggers: TriggerTable = TriggerTable(),
                 q0=DEFAULT_Q0, keep_ticks: bool = False):
        self.model = model
        self.pads = sorted(pads, key=lambda p: p.id)
        self.scenario = scenario
        self.sim = sim
        self.pfl = pfl
        self.triggers = triggers
        self.keep_ticks = keep_ticks
        self.rng = np.random.default_rng(sim.seed)

        self.q = np.array(q0, dtype=float)
        self.qdot = np.zeros(model.n)
        self.t = 0.0

        plan = task_plan(scenario.segment_lengths, scenario.speed)
        self.controller = TaskController(model, plan,
                                         retract_hold=scenario.retract_hold,
                                         retract_speed=pfl.v_cmd)
        self.controller.attach(self.q, 0.0)

        self.threshold_timer = ThresholdScheduler(UPDATE_PERIOD)
        self.skin_timer = PeriodicTimer(SAMPLE_PERIOD)
        self.assignment: ThresholdAssignment = compute_thresholds(
            scenario.policy, model, JointState(self.q, self.qdot, 0.0),
            self.pads, pfl)

        self.contact: ContactEvent | None = None
        self._contact_pad: SkinPad | None = None
        self._onset_scheduled: float | None = None
        self._signal_active = False
        self._cleared_notified = True
        self._last_pressures = np.zeros(len(self.pads))
        self._pad_row = {p.id: i for i, p in enumerate(self.pads)}

        self.level_counts = [0, 0, 0]
        self.peak_part_speed = {bp.value: 0.0 for bp in BodyPart}
        self.clamp_events = 0
        self.avoid_distance = 0.0
        self.estimated_force: float | None = None
        self.level_at_onset: int | None = None
        self.level_at_detection: int | None = None
        self.ticks = TickLog() if keep_ticks else None
        self._prev_segment = -1
        # Jitter drawn up front so pacing/ordering cannot influence it.
        self._jitter = float(self.rng.uniform(-scenario.onset_jitter,
                                              scenario.onset_jitter))

    # -- contact scheduling -------------------------------------------------

    def _maybe_schedule_onset(self):
        sc = self.scenario
        if sc.axis is None or sc.body_part is None:
            return
        seg_idx = AXIS_TO_SEGMENT[sc.axis]
        if (self._onset_scheduled is None
                and self.controller.state == TaskController.TASK
                and self.controller.segment_index == seg_idx
                and self._prev_segment != seg_idx):
            seg = self.controller.plan[seg_idx]
            onset = (self.controller.segment_entry_time
                     + sc.onset_frac * seg.duration + self._jitter)
            self._onset_scheduled = max(onset, self.t)
        self._prev_segment = self.controller.segment_index

    def inject_contact(self, event: ContactEvent):
        """Activate a transient contact; only one contact per run."""
        if self.contact is not None:
            raise SimError("only one collision can happen per run")
        self.contact = event
        self._contact_pad = next(p for p in self.pads if p.id == event.pad_id)
        self._cleared_notified = False
        self.level_at_onset = self.assignment.level_of(event.pad_id)
        # Predicted transient-contact force at onset with the half
        # moving-mass estimate; logged for the reaction-time correlation.
        state = JointState(self.q, self.qdot, self.t)
        Rs, ts = fk_arrays(self.model, self.q)
        J = _point_jacobian_from_fk(self.model, Rs, ts,
                                    self._contact_pad.link,
                                    self._contact_pad.center)
        v = float(np.linalg.norm(J[:3] @ self.qdot))
        m_R = 0.5 * moving_mass_up_to(self.model, self._contact_pad.link)
        self.estimated_force = pfl_max_force(v, self.pfl.k, m_R, self.pfl.m_H)

    def _auto_inject(self):
        if (self._onset_scheduled is not None and self.contact is None
                and self.t >= self._onset_scheduled):
            sc = self.scenario
            state = JointState(self.q, self.qdot, self.t)
            pad = select_pad(self.pads, sc.body_part, self.model, state)
            dwell = (DwellRule.FIXED_MAX if sc.reaction is ReactionPolicy.STOP
                     else DwellRule.UNTIL_DETECTED)
            event = ContactEvent(pad_id=pad.id, onset=self.t,
                                 effort=sc.effort, dwell=dwell)
            if dwell is DwellRule.FIXED_MAX:
                event.end_time = self.t + event.max_dwell
            self.inject_contact(event)

    # -- stepping -----------------------------------------------------------

    def step(self):
        dt = self.sim.dt
        state = JointState(self.q, self.qdot, self.t)

        # (0) schedule / inject the scenario contact for this tick.
        self._maybe_schedule_onset()
        self._auto_inject()

        # (1) 25 Hz threshold update.
        if self.threshold_timer.tick(dt):
            self.assignment = compute_thresholds(
                self.scenario.policy, self.model, state, self.pads, self.pfl)
            for lv in self.assignment.levels.values():
                self.level_counts[lv] += 1
            Rs, ts = fk_arrays(self.model, self.q)
            for pad in self.pads:
                J = _point_jacobian_from_fk(self.model, Rs, ts, pad.link,
                                            pad.center)
                sp = float(np.linalg.norm(J[:3] @ self.qdot))
                key = pad.body_part.value
                if sp > self.peak_part_speed[key]:
                    self.peak_part_speed[key] = sp

        # (2) 30 Hz skin sampling and detection.
        detection_pad = None
        if self.skin_timer.tick(dt):
            self._last_pressures[:] = 0.0
            ev = self.contact
            if ev is not None and ev.active(self.t):
                value = pressure_from_contact(ev.effort, self.t - ev.onset)
                row = self._pad_row[ev.pad_id]
                self._last_pressures[row] = value
                sample = PressureSample(ev.pad_id, value, self.t)
                hit = detect(sample, self.assignment, self.triggers)
                if hit is not None and ev.detection_time is None:
                    ev.detection_time = self.t
                    detection_pad = self._contact_pad
                    self.level_at_detection = self.assignment.level_of(ev.pad_id)
                    if ev.dwell is DwellRule.UNTIL_DETECTED:
                        ev.end_time = self.t
                if ev.detection_time is not None and value > 0.0:
                    self._signal_active = True
            if self._signal_active and self._last_pressures.max() == 0.0:
                self._signal_active = False

        # (3) reaction state machine.
        if detection_pad is not None:
            Rs, ts = fk_arrays(self.model, self.q)
            world_normal = Rs[detection_pad.link + 1] @ detection_pad.normal
            self.controller.on_detection(self.scenario.reaction,
                                         detection_pad, world_normal)
        if (not self._signal_active and not self._cleared_notified
                and self.contact is not None
                and self.contact.detection_time is not None
                and not self.contact.active(self.t)):
            self.controller.on_contact_cleared(self.t)
            self._cleared_notified = True

        # (4) controller command.
        retreat_before = self.controller.state == TaskController.RETREAT
        if retreat_before:
            pad = self.controller._retract_pad
            Rs, ts = fk_arrays(self.model, self.q)
            p_before = Rs[pad.link + 1] @ pad.center + ts[pad.link + 1]
        cmd = self.controller.command(state, self._signal_active)
        if cmd.clamped:
            self.clamp_events += 1

        # (5) explicit Euler integration.
        self.qdot = cmd.qdot_cmd
        self.q = self.q + self.qdot * dt
        self.t += dt
        for i, joint in enumerate(self.model.joints):
            lo, hi = joint.position_limits
            if not lo <= self.q[i] <= hi:
                raise RunAborted(
                    f"joint {joint.name} position {self.q[i]:.4f} rad outside "
                    f"[{lo:.4f}, {hi:.4f}] at t={self.t:.3f}s")

        if retreat_before:
            Rs, ts = fk_arrays(self.model, self.q)
            p_after = Rs[pad.link + 1] @ pad.center + ts[pad.link + 1]
            self.avoid_distance += float(np.linalg.norm(p_after - p_before))

        # (6) tick log.
        if self.ticks is not None:
            tk = self.ticks
            tk.time.append(self.t)
            tk.q.append(self.q.copy())
            tk.qdot.append(self.qdot.copy())
            tk.levels.append([self.assignment.level_of(p.id) for p in self.pads])
            tk.pressures.append(self._last_pressures.copy())
            tk.contact_active.append(
                self.contact is not None and self.contact.active(self.t))
            tk.reaction_state.append(self.controller.state)
            Rs, ts = fk_arrays(self.model, self.q)
            tk.ee_position.append(Rs[-1] @ self.model.tool.translation + ts[-1])

    def run(self) -> RunResult:
        wall_start = _time.monotonic()
        aborted, diagnostic = False, ""
        try:
            while not self.controller.done:
                if self.t >= self.sim.max_time:
                    raise RunAborted(
                        f"task incomplete after {self.sim.max_time}s simulated")
                self.step()
                if self.sim.real_time_paced:
                    lag = self.t - (_time.monotonic() - wall_start)
                    if lag > 0:
                        _time.sleep(lag)
        except RunAborted as exc:
            aborted, diagnostic = True, str(exc)
        ev = self.contact
        reacted = ev is not None and ev.detection_time is not None
        return RunResult(
            scenario=self.scenario,
            seed=self.sim.seed,
            reacted=reacted,
            pad_id=ev.pad_id if ev is not None else None,
            onset_time=ev.onset if ev is not None else None,
            detection_time=ev.detection_time if ev is not None else None,
            task_time=self.t,
            avoid_distance=self.avoid_distance,
            level_at_pad=(self.level_at_detection if reacted
                          else self.level_at_onset),
            estimated_force=self.estimated_force,
            level_counts=tuple(self.level_counts),
            peak_part_speed=dict(self.peak_part_speed),
            clamp_events=self.clamp_events,
            aborted=aborted,
            diagnostic=diagnostic,
            ticks=self.ticks,
        )


def run_scenario(model, pads, scenario: Scenario, sim: SimConfig = SimConfig(),
                 pfl: PflParams = PflParams(),
                 triggers: TriggerTable = TriggerTable(),
                 q0=DEFAULT_Q0, keep_ticks: bool = False) -> RunResult:
    world = World(model, pads, scenario, sim, pfl, triggers, q0, keep_ticks)
    return world.run()
