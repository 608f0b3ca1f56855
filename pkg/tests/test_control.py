"""Task plan geometry, resolved motion rate tracking and the two reaction
commands."""

import numpy as np
import pytest

from skinsafe.control import (ControlError, ReactionPolicy, TaskController,
                              TaskSegment, avoid_reaction, clamp_to_limits,
                              rrmc_track, stop_reaction, task_plan,
                              DEFAULT_SEGMENT_LENGTHS)
from skinsafe.kinematics import JointState, point_jacobian
from skinsafe.sim import DEFAULT_Q0


def test_task_plan_directions_and_lengths():
    plan = task_plan()
    dirs = [seg.direction for seg in plan]
    assert np.allclose(dirs[0], [0, 1, 0])
    assert np.allclose(dirs[1], [0, 0, -1])
    assert np.allclose(dirs[2], [0, 0, 1])
    assert np.allclose(dirs[3], [-1, 0, 0])
    assert tuple(seg.length for seg in plan) == DEFAULT_SEGMENT_LENGTHS
    assert all(seg.speed == 0.5 for seg in plan)
    with pytest.raises(ControlError):
        task_plan(lengths=(1.0, 1.0))


def test_task_segment_validation():
    seg = TaskSegment([0.0, 2.0, 0.0], 0.4)
    assert np.allclose(seg.direction, [0, 1, 0])  # normalized
    assert seg.duration == pytest.approx(0.8)
    with pytest.raises(ControlError):
        TaskSegment([0, 0, 0], 0.4)
    with pytest.raises(ControlError):
        TaskSegment([0, 1, 0], -0.1)


def test_rrmc_zero_target_gives_zero_command(model):
    state = JointState(np.array(DEFAULT_Q0), np.zeros(6), 0.0)
    cmd = rrmc_track(model, state, np.zeros(6))
    assert np.all(cmd.qdot_cmd == 0.0)
    assert not cmd.clamped


def test_rrmc_reproduces_target_velocity(model):
    state = JointState(np.array(DEFAULT_Q0), np.zeros(6), 0.0)
    xdot = np.array([0.0, 0.5, 0.0, 0.0, 0.0, 0.0])
    cmd = rrmc_track(model, state, xdot)
    J = point_jacobian(model, state.q, model.n - 1, model.tool.translation)
    assert np.abs(J @ cmd.qdot_cmd - xdot).max() < 1e-6


def test_rrmc_rejects_nonfinite_target(model):
    state = JointState(np.array(DEFAULT_Q0), np.zeros(6), 0.0)
    with pytest.raises(ControlError):
        rrmc_track(model, state, [np.nan, 0, 0, 0, 0, 0])


def test_stop_reaction_zeroes_everything():
    state = JointState(np.zeros(6), np.ones(6), 2.0)
    cmd = stop_reaction(state)
    assert np.all(cmd.qdot_cmd == 0.0)
    assert cmd.time == 2.0


def test_avoid_reaction_moves_pad_against_normal(model, pads):
    state = JointState(np.array(DEFAULT_Q0), np.zeros(6), 0.0)
    pad = pads[10]
    retract = np.array([0.0, 0.0, 1.0])
    cmd = avoid_reaction(model, state, pad, retract, speed=0.5)
    J = point_jacobian(model, state.q, pad.link, pad.center)
    xdot = J @ cmd.qdot_cmd
    # linear velocity opposite the latched direction, zero rotation
    assert np.allclose(xdot[:3], -0.5 * retract, atol=1e-8)
    assert np.abs(xdot[3:]).max() < 1e-8
    # joints distal to the pad's link receive no command
    assert np.all(cmd.qdot_cmd[pad.link + 1:] == 0.0)


def test_clamp_to_limits(model):
    limits = np.array([j.velocity_limit for j in model.joints])
    qdot = limits * 2.0
    clipped, clamped = clamp_to_limits(model, qdot)
    assert clamped
    assert np.allclose(clipped, limits)
    ok, clamped2 = clamp_to_limits(model, limits * 0.5)
    assert not clamped2
    assert np.allclose(ok, limits * 0.5)


def test_controller_endpoints_fixed_at_attach(model):
    plan = task_plan()
    c = TaskController(model, plan)
    c.attach(np.array(DEFAULT_Q0), 0.0)
    p0 = c.tool_position(np.array(DEFAULT_Q0))
    expected = p0.copy()
    for seg, endpoint in zip(plan, c.endpoints):
        expected = expected + seg.direction * seg.length
        assert np.allclose(endpoint, expected, atol=1e-15)
    # the final endpoint closes the +z/-z pair, so it sits at
    # p0 + 0.4*(+y) + (-0.25+0.25)*z - 0.4*x
    assert np.allclose(c.endpoints[-1], p0 + [-0.4, 0.4, 0.0], atol=1e-12)


def test_controller_reaction_transitions(model, pads):
    c = TaskController(model, task_plan())
    c.attach(np.array(DEFAULT_Q0), 0.0)
    assert c.state == TaskController.TASK
    c.on_detection(ReactionPolicy.STOP, pads[0], np.array([0.0, 0.0, 1.0]))
    assert c.state == TaskController.STOPPED
    state = JointState(np.array(DEFAULT_Q0), np.zeros(6), 0.5)
    assert np.all(c.command(state, True).qdot_cmd == 0.0)
    c.on_contact_cleared(1.0)
    assert c.state == TaskController.TASK

    c.on_detection(ReactionPolicy.AVOID, pads[10], np.array([0.0, 0.0, 1.0]))
    assert c.state == TaskController.RETREAT
    cmd = c.command(JointState(np.array(DEFAULT_Q0), np.zeros(6), 1.2), True)
    assert np.abs(cmd.qdot_cmd).max() > 0.0
    c.on_contact_cleared(1.3)
    assert c.state == TaskController.TASK
