"""Serial-chain kinematics: transforms, forward kinematics, point Jacobians
and the Moore-Penrose pseudoinverse used by the controller and the safety
engine.

Conventions
-----------
A revolute joint is a fixed origin transform followed by a rotation about a
fixed axis expressed in the parent frame.  Link ``i``'s frame is the frame
right after joint ``i``'s rotation.  ``forward_kinematics`` returns
``n + 1`` world poses: index 0 is the base pose, index ``i + 1`` is link
``i``.  Jacobian angular rows are world-frame angular velocity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ROT_TOL = 1e-9
_AXIS_TOL = 1e-12
# Relative singular-value cutoff for the pseudoinverse; values below
# cutoff * sigma_max are treated as zero so rank-deficient Jacobians stay
# well-behaved near singular configurations.
PINV_CUTOFF = 1e-8


class KinematicsError(ValueError):
    """Rejected input or an invalid model description."""


@dataclass(frozen=True)
class Transform:
    """Rigid transform: orthonormal rotation (det +1) plus translation [m]."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)
        if not np.isfinite(R).all() or not np.isfinite(t).all():
            raise KinematicsError("transform entries must be finite")
        err = np.abs(R @ R.T - np.eye(3)).max()
        if err > 1e-6 or abs(np.linalg.det(R) - 1.0) > 1e-6:
            raise KinematicsError(f"rotation not orthonormal (err={err:.2e})")

    @staticmethod
    def identity() -> "Transform":
        return Transform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_rpy_xyz(rpy, xyz) -> "Transform":
        """Roll-pitch-yaw (XYZ fixed-axis, rad) plus translation."""
        r, p, y = (float(v) for v in rpy)
        cr, sr = np.cos(r), np.sin(r)
        cp, sp = np.cos(p), np.sin(p)
        cy, sy = np.cos(y), np.sin(y)
        Rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
        Ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
        Rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
        return Transform(Rz @ Ry @ Rx, np.asarray(xyz, dtype=float))

    def compose(self, other: "Transform") -> "Transform":
        return Transform(self.rotation @ other.rotation,
                         self.rotation @ other.translation + self.translation)

    def __matmul__(self, other: "Transform") -> "Transform":
        return self.compose(other)

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    C = 1.0 - c
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


@dataclass(frozen=True)
class JointSpec:
    """Revolute joint: origin transform then rotation about `axis`."""

    name: str
    axis: np.ndarray
    origin: Transform
    position_limits: tuple[float, float]
    velocity_limit: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        object.__setattr__(self, "axis", axis)
        if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
            raise KinematicsError(f"joint {self.name}: |axis| != 1")
        if self.velocity_limit <= 0:
            raise KinematicsError(f"joint {self.name}: velocity limit must be > 0")
        lo, hi = self.position_limits
        if not lo < hi:
            raise KinematicsError(f"joint {self.name}: empty position limit range")


@dataclass(frozen=True)
class LinkInertia:
    """Mass [kg], COM in link frame [m], inertia about COM in link frame."""

    mass: float
    com: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        com = np.asarray(self.com, dtype=float).reshape(3)
        I = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        object.__setattr__(self, "com", com)
        object.__setattr__(self, "inertia", I)
        if self.mass <= 0:
            raise KinematicsError("link mass must be > 0")
        if np.abs(I - I.T).max() > 1e-12:
            raise KinematicsError("inertia tensor must be symmetric")
        eig = np.linalg.eigvalsh(I)
        if eig[0] < -1e-12:
            raise KinematicsError("inertia tensor must be positive semidefinite")
        # Principal-moment triangle inequalities for a physical rigid body.
        a, b, c = sorted(eig)
        if a + b < c - 1e-12:
            raise KinematicsError("inertia principal moments violate triangle inequality")


@dataclass(frozen=True)
class RobotModel:
    """Immutable serial chain: ordered (joint, inertia) pairs plus link names."""

    joints: tuple[JointSpec, ...]
    inertias: tuple[LinkInertia, ...]
    link_names: tuple[str, ...]
    base: Transform = field(default_factory=Transform.identity)
    tool: Transform = field(default_factory=Transform.identity)

    def __post_init__(self):
        if not (len(self.joints) == len(self.inertias) == len(self.link_names)):
            raise KinematicsError("joints, inertias and link names must align")
        axes = (np.stack([j.axis for j in self.joints])
                if self.joints else np.zeros((0, 3)))
        object.__setattr__(self, "_axes", axes)

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def total_mass(self) -> float:
        return sum(li.mass for li in self.inertias)


@dataclass(frozen=True)
class JointState:
    """Joint positions [rad], velocities [rad/s] and simulation time [s]."""

    q: np.ndarray
    qdot: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        qd = np.asarray(self.qdot, dtype=float).reshape(-1)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qd)
        if q.shape != qd.shape or not np.isfinite(q).all() or not np.isfinite(qd).all():
            raise KinematicsError("joint state must be finite and consistent")


def _check_q(model: RobotModel, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape != (model.n,):
        raise KinematicsError(f"expected {model.n} joint positions, got {q.shape}")
    if not np.isfinite(q).all():
        raise KinematicsError("joint positions must be finite")
    return q


def fk_arrays(model: RobotModel, q) -> tuple[np.ndarray, np.ndarray]:
    """World link poses as stacked arrays: rotations (n+1,3,3), origins (n+1,3).

    Row 0 is the base, row i+1 is link i.  This is the hot-path variant of
    :func:`forward_kinematics`; both share the same composition.
    """
    q = _check_q(model, q)
    n = model.n
    Rs = np.empty((n + 1, 3, 3))
    ts = np.empty((n + 1, 3))
    R = model.base.rotation
    t = model.base.translation
    Rs[0], ts[0] = R, t
    for i, joint in enumerate(model.joints):
        Ro, to = joint.origin.rotation, joint.origin.translation
        t = R @ to + t
        R = R @ Ro @ rotation_about_axis(joint.axis, q[i])
        Rs[i + 1], ts[i + 1] = R, t
    return Rs, ts


def forward_kinematics(model: RobotModel, q) -> list[Transform]:
    """World pose of the base followed by every link, at configuration q."""
    Rs, ts = fk_arrays(model, q)
    return [Transform(Rs[i], ts[i]) for i in range(model.n + 1)]


def tool_pose(model: RobotModel, q) -> Transform:
    """World pose of the tool frame (last link composed with the tool offset)."""
    Rs, ts = fk_arrays(model, q)
    return Transform(Rs[-1], ts[-1]) @ model.tool


def _world_axes(model: RobotModel, Rs: np.ndarray) -> np.ndarray:
    """World joint axes; joint i's axis is fixed by everything before its q."""
    axes = np.empty((model.n, 3))
    for i, joint in enumerate(model.joints):
        # R(axis, q) leaves its own axis invariant, so link i's rotation works.
        axes[i] = Rs[i + 1] @ joint.axis
    return axes


def point_jacobian(model: RobotModel, q, link: int, point) -> np.ndarray:
    """6 x n Jacobian of a point attached to `link` (linear rows then angular).

    Columns for joints distal to `link` are zero.  ``xdot = J @ qdot`` gives
    the world linear and angular velocity of the attached point.
    """
    if not 0 <= link < model.n:
        raise KinematicsError(f"link index {link} out of range [0, {model.n})")
    point = np.asarray(point, dtype=float).reshape(3)
    if not np.isfinite(point).all():
        raise KinematicsError("point must be finite")
    Rs, ts = fk_arrays(model, q)
    return _point_jacobian_from_fk(model, Rs, ts, link, point)


def _point_jacobian_from_fk(model: RobotModel, Rs, ts, link: int, point) -> np.ndarray:
    """Jacobian reusing precomputed fk_arrays output (hot path)."""
    p_world = Rs[link + 1] @ point + ts[link + 1]
    k = link + 1
    # World joint axes: R(axis, q) leaves its own axis invariant, so each
    # link rotation maps the local axis correctly.
    W = np.einsum("nij,nj->ni", Rs[1:k + 1], model._axes[:k])
    D = p_world - ts[1:k + 1]
    J = np.zeros((6, model.n))
    # Manual cross product, vectorized over joints (np.cross is slow here).
    J[0, :k] = W[:, 1] * D[:, 2] - W[:, 2] * D[:, 1]
    J[1, :k] = W[:, 2] * D[:, 0] - W[:, 0] * D[:, 2]
    J[2, :k] = W[:, 0] * D[:, 1] - W[:, 1] * D[:, 0]
    J[3:, :k] = W.T
    return J


def pseudoinverse(J: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD with a relative cutoff.

    Singular values below PINV_CUTOFF * sigma_max are treated as zero, so
    rank-deficient input is handled without error.
    """
    J = np.asarray(J, dtype=float)
    if not np.isfinite(J).all():
        raise KinematicsError("matrix entries must be finite")
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((J.shape[1], J.shape[0]))
    inv = np.where(s > PINV_CUTOFF * s[0], 1.0 / np.where(s == 0, 1.0, s), 0.0)
    return (Vt.T * inv) @ U.T
