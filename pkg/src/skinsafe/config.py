"""Robot-model config loading: YAML description of the serial chain, link
inertials and the skin pad layout.  Validation reports the first violation
together with its path into the file."""

from __future__ import annotations

import importlib.resources
from pathlib import Path

import numpy as np
import yaml

from .kinematics import (JointSpec, KinematicsError, LinkInertia, RobotModel,
                         Transform)
from .skin import BodyPart, SkinPad, SkinError


class ConfigError(ValueError):
    """Invalid or inconsistent robot-model config file."""


def default_config_path() -> Path:
    return Path(importlib.resources.files("skinsafe") / "data" / "ur10e.yaml")


def _require(mapping, key, path):
    if key not in mapping:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return mapping[key]


def _transform(node, path) -> Transform:
    try:
        return Transform.from_rpy_xyz(_require(node, "rpy", path),
                                      _require(node, "xyz", path))
    except (KinematicsError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _inertia_matrix(node, path) -> np.ndarray:
    vals = {k: float(_require(node, k, path)) for k in
            ("ixx", "iyy", "izz", "ixy", "ixz", "iyz")}
    return np.array([
        [vals["ixx"], vals["ixy"], vals["ixz"]],
        [vals["ixy"], vals["iyy"], vals["iyz"]],
        [vals["ixz"], vals["iyz"], vals["izz"]],
    ])


def load_config(path: str | Path | None = None) -> tuple[RobotModel, list[SkinPad]]:
    """Load and validate a robot + skin config file.

    Returns the immutable robot model and the pad list.  Raises ConfigError
    naming the offending entry on the first violation found.
    """
    path = Path(path) if path is not None else default_config_path()
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    robot = _require(raw, "robot", str(path))
    joints, inertias, names = [], [], []
    for i, jnode in enumerate(_require(robot, "joints", "robot")):
        jpath = f"robot.joints[{i}]"
        try:
            joints.append(JointSpec(
                name=str(_require(jnode, "name", jpath)),
                axis=np.asarray(_require(jnode, "axis", jpath), dtype=float),
                origin=_transform(_require(jnode, "origin", jpath), jpath + ".origin"),
                position_limits=tuple(float(v) for v in _require(jnode, "position_limits", jpath)),
                velocity_limit=float(_require(jnode, "velocity_limit", jpath)),
            ))
            inertias.append(LinkInertia(
                mass=float(_require(jnode, "mass", jpath)),
                com=np.asarray(_require(jnode, "com", jpath), dtype=float),
                inertia=_inertia_matrix(_require(jnode, "inertia", jpath), jpath + ".inertia"),
            ))
            names.append(str(_require(jnode, "link", jpath)))
        except KinematicsError as exc:
            raise ConfigError(f"{jpath}: {exc}") from exc

    model = RobotModel(
        joints=tuple(joints),
        inertias=tuple(inertias),
        link_names=tuple(names),
        base=_transform(_require(robot, "base", "robot"), "robot.base"),
        tool=_transform(_require(robot, "tool", "robot"), "robot.tool"),
    )

    link_index = {name: i for i, name in enumerate(names)}
    pads: list[SkinPad] = []
    seen_ids: set[int] = set()
    for i, pnode in enumerate(raw.get("skin_pads", [])):
        ppath = f"skin_pads[{i}]"
        pad_id = int(_require(pnode, "id", ppath))
        if pad_id in seen_ids:
            raise ConfigError(f"{ppath}: duplicate pad id {pad_id}")
        seen_ids.add(pad_id)
        link_name = str(_require(pnode, "link", ppath))
        if link_name not in link_index:
            raise ConfigError(f"{ppath}: unknown link '{link_name}'")
        part = str(_require(pnode, "body_part", ppath))
        try:
            pads.append(SkinPad(
                id=pad_id,
                link=link_index[link_name],
                center=np.asarray(_require(pnode, "center", ppath), dtype=float),
                normal=np.asarray(_require(pnode, "normal", ppath), dtype=float),
                body_part=BodyPart(part),
            ))
        except (SkinError, ValueError) as exc:
            raise ConfigError(f"{ppath}: {exc}") from exc
    pads.sort(key=lambda p: p.id)
    return model, pads
