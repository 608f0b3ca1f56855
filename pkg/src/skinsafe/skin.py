"""Emulated pressure-pad array: signal generation from injected contacts,
30 Hz sampling and threshold-crossing detection."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SKIN_RATE_HZ = 30.0
SAMPLE_PERIOD = 1.0 / SKIN_RATE_HZ


class SkinError(ValueError):
    pass


class BodyPart(Enum):
    UPPER = "UPPER"
    LOWER = "LOWER"
    HAND = "HAND"


@dataclass(frozen=True)
class SkinPad:
    """One independently read pad: link attachment, contact geometry and the
    body-part label it belongs to.  Pressure is normalized to [0, 1]."""

    id: int
    link: int
    center: np.ndarray
    normal: np.ndarray
    body_part: BodyPart

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(3)
        n = np.asarray(self.normal, dtype=float).reshape(3)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "normal", n)
        if abs(np.linalg.norm(n) - 1.0) > 1e-9:
            raise SkinError(f"pad {self.id}: normal must be a unit vector")


@dataclass(frozen=True)
class PressureSample:
    pad_id: int
    value: float
    time: float


@dataclass(frozen=True)
class TriggerTable:
    """Normalized pressures required to fire at each sensitivity level.

    p0 is the minimum detectable contact pressure (level 0 catches every
    scenario contact); p1 and p2 sit at 75% and 95% of the pressure range.
    """

    p0: float = 0.05
    p1: float = 0.75
    p2: float = 0.95

    def __post_init__(self):
        if not 0.0 < self.p0 < self.p1 < self.p2 <= 1.0:
            raise SkinError("trigger levels must satisfy 0 < p0 < p1 < p2 <= 1")

    def trigger(self, level: int) -> float:
        return (self.p0, self.p1, self.p2)[level]


def pressure_from_contact(effort: float, elapsed: float,
                          ramp: float = SAMPLE_PERIOD) -> float:
    """Normalized pad pressure `elapsed` seconds after contact onset.

    Rises linearly from 0 to `effort` over one sample period, then holds
    while the contact persists.  The caller zeroes the signal once the
    contact ends.
    """
    if not 0.0 <= effort <= 1.0:
        raise SkinError(f"contact effort {effort} outside [0, 1]")
    if elapsed < 0.0:
        return 0.0
    return effort * min(1.0, elapsed / ramp)


def detect(sample: PressureSample, assignment, triggers: TriggerTable) -> int | None:
    """Pad id if the sample crosses the trigger of the pad's active level.

    `assignment` is any object with a ``level_of(pad_id)`` method (the latched
    per-pad threshold assignment produced by the safety engine).
    """
    level = assignment.level_of(sample.pad_id)
    if sample.value >= triggers.trigger(level):
        return sample.pad_id
    return None
