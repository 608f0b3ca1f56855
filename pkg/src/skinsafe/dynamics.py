"""Joint-space inertia, Cartesian kinetic-energy matrix, directional
effective mass and moving-mass bookkeeping for the serial chain.

The joint-space inertia matrix is built with a composite-rigid-body pass
(tip to base); its contract is the energy identity
``0.5 * qdot @ M @ qdot == sum of per-link rigid-body kinetic energies``.

Note on the Cartesian kinetic-energy matrix: it is implemented as
``J M^-1 J^T``, whose linear block has units 1/kg as required for the
effective-mass quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kinematics import (KinematicsError, RobotModel, fk_arrays,
                         _point_jacobian_from_fk)

# Directions with mobility below this are reported as unbounded.
_MOBILITY_EPS = 1e-9


def _cross3(a, b):
    # np.cross call overhead dominates the 25 Hz update path; do it by hand.
    return np.array([a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]])


@dataclass(frozen=True)
class InertiaMatrix:
    """Symmetric positive-definite joint-space inertia [kg m^2]."""

    M: np.ndarray


@dataclass(frozen=True)
class CartesianKEInverse:
    """6x6 inverse Cartesian kinetic-energy matrix; upper-left 3x3 linear
    block has units 1/kg."""

    lambda_inv: np.ndarray

    @property
    def linear_block(self) -> np.ndarray:
        return self.lambda_inv[:3, :3]


@dataclass(frozen=True)
class EffectiveMass:
    """Mass presented at a point along a direction; inf marks a direction of
    zero instantaneous mobility (treated downstream as the full chain mass)."""

    value: float
    direction: np.ndarray

    @property
    def is_unbounded(self) -> bool:
        return math.isinf(self.value)


def _world_inertial_terms(model: RobotModel, q):
    """Per-link world quantities: joint origins, world axes, world COMs,
    masses and world-frame COM inertia tensors."""
    Rs, ts = fk_arrays(model, q)
    n = model.n
    axes = np.empty((n, 3))
    coms = np.empty((n, 3))
    inertias = np.empty((n, 3, 3))
    masses = np.empty(n)
    for i in range(n):
        R = Rs[i + 1]
        axes[i] = R @ model.joints[i].axis
        li = model.inertias[i]
        coms[i] = R @ li.com + ts[i + 1]
        inertias[i] = R @ li.inertia @ R.T
        masses[i] = li.mass
    return Rs, ts, axes, coms, inertias, masses


def joint_space_inertia(model: RobotModel, q) -> InertiaMatrix:
    """Composite-rigid-body computation of M(q).

    For each joint k, the links k..n-1 move as one rigid body under a unit
    joint rate; M[j, k] projects that body's momentum onto joint j's axis.
    """
    _, ts, axes, coms, inertias, masses = _world_inertial_terms(model, q)
    n = model.n
    M = np.zeros((n, n))
    # Composite (tip-to-base) mass, first moment and inertia about the world
    # origin for the link set {k, ..., n-1}.
    mc = 0.0
    smom = np.zeros(3)
    I0 = np.zeros((3, 3))
    eye = np.eye(3)
    for k in range(n - 1, -1, -1):
        c = coms[k]
        mc += masses[k]
        smom = smom + masses[k] * c
        I0 = I0 + inertias[k] + masses[k] * ((c @ c) * eye - np.outer(c, c))
        w = axes[k]
        o_k = ts[k + 1]
        h_lin = _cross3(w, smom - mc * o_k)
        # Angular momentum about the world origin of the composite body.
        L0 = I0 @ w - _cross3(smom, _cross3(w, o_k))
        for j in range(k + 1):
            o_j = ts[j + 1]
            M[j, k] = axes[j] @ (L0 - _cross3(o_j, h_lin))
            M[k, j] = M[j, k]
    return InertiaMatrix(0.5 * (M + M.T))


def cartesian_ke_inverse(model: RobotModel, q, link: int, point) -> CartesianKEInverse:
    """Inverse Cartesian kinetic-energy matrix J M^-1 J^T at a link point."""
    from .kinematics import point_jacobian

    M = joint_space_inertia(model, q).M
    J = point_jacobian(model, q, link, point)
    try:
        Minv_Jt = np.linalg.solve(M, J.T)
    except np.linalg.LinAlgError as exc:  # cannot occur for a valid model
        raise KinematicsError("joint-space inertia numerically singular") from exc
    lam_inv = J @ Minv_Jt
    return CartesianKEInverse(0.5 * (lam_inv + lam_inv.T))


def effective_mass(model: RobotModel, q, link: int, point, u) -> EffectiveMass:
    """Mass presented at `point` on `link` along unit direction `u`."""
    u = np.asarray(u, dtype=float).reshape(3)
    if abs(np.linalg.norm(u) - 1.0) > 1e-9:
        raise KinematicsError("direction u must be a unit vector")
    lam_v_inv = cartesian_ke_inverse(model, q, link, point).linear_block
    mobility = float(u @ lam_v_inv @ u)
    if mobility < _MOBILITY_EPS:
        return EffectiveMass(math.inf, u)
    return EffectiveMass(1.0 / mobility, u)


def moving_mass_up_to(model: RobotModel, link: int) -> float:
    """Sum of link masses from the first joint through `link`, inclusive."""
    if not 0 <= link < model.n:
        raise KinematicsError(f"link index {link} out of range [0, {model.n})")
    return float(sum(model.inertias[i].mass for i in range(link + 1)))
