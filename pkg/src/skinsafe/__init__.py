"""Adaptive collision-sensitivity thresholds for a skin-covered 6-DOF arm:
kinematics/dynamics engine, PFL safety math, pad emulation, deterministic
simulator and experiment harness."""

__version__ = "0.1.0"

from .config import load_config
from .control import ReactionPolicy, TaskSegment, task_plan
from .dynamics import (EffectiveMass, cartesian_ke_inverse, effective_mass,
                       joint_space_inertia, moving_mass_up_to)
from .kinematics import (JointSpec, JointState, LinkInertia, RobotModel,
                         Transform, forward_kinematics, point_jacobian,
                         pseudoinverse)
from .safety import (PflParams, PolicyKind, ThresholdAssignment,
                     compute_thresholds, force_to_threshold, pfl_max_force,
                     pfl_max_velocity)
from .sim import ContactEvent, Scenario, SimConfig, World, run_scenario
from .skin import BodyPart, SkinPad, TriggerTable

__all__ = [
    "__version__", "load_config", "ReactionPolicy", "TaskSegment",
    "task_plan", "EffectiveMass", "cartesian_ke_inverse", "effective_mass",
    "joint_space_inertia", "moving_mass_up_to", "JointSpec", "JointState",
    "LinkInertia", "RobotModel", "Transform", "forward_kinematics",
    "point_jacobian", "pseudoinverse", "PflParams", "PolicyKind",
    "ThresholdAssignment", "compute_thresholds", "force_to_threshold",
    "pfl_max_force", "pfl_max_velocity", "ContactEvent", "Scenario",
    "SimConfig", "World", "run_scenario", "BodyPart", "SkinPad",
    "TriggerTable",
]
