"""Pad signal generation, trigger placement and detection monotonicity."""

import numpy as np
import pytest

from skinsafe.skin import (BodyPart, PressureSample, SkinError, SkinPad,
                           TriggerTable, SAMPLE_PERIOD, detect,
                           pressure_from_contact)


class _Fixed:
    def __init__(self, level):
        self._level = level

    def level_of(self, pad_id):
        return self._level


def test_pressure_ramp_shape():
    assert pressure_from_contact(0.8, -0.1) == 0.0
    assert pressure_from_contact(0.8, 0.0) == 0.0
    half = pressure_from_contact(0.8, SAMPLE_PERIOD / 2)
    assert abs(half - 0.4) < 1e-12
    assert pressure_from_contact(0.8, SAMPLE_PERIOD) == 0.8
    assert pressure_from_contact(0.8, 10.0) == 0.8  # holds after the ramp


def test_pressure_effort_bounds():
    with pytest.raises(SkinError):
        pressure_from_contact(1.2, 0.1)
    with pytest.raises(SkinError):
        pressure_from_contact(-0.1, 0.1)


def test_trigger_table_placement_and_validation():
    t = TriggerTable()
    assert t.trigger(0) == 0.05
    assert t.trigger(1) == 0.75
    assert t.trigger(2) == 0.95
    with pytest.raises(SkinError):
        TriggerTable(p0=0.8, p1=0.7, p2=0.9)
    with pytest.raises(SkinError):
        TriggerTable(p0=0.0)


def test_detection_against_trigger_levels():
    triggers = TriggerTable()
    s = PressureSample(pad_id=3, value=0.5, time=1.0)
    assert detect(s, _Fixed(0), triggers) == 3     # far above p0
    assert detect(s, _Fixed(1), triggers) is None  # below the 75% trigger
    assert detect(s, _Fixed(2), triggers) is None


def test_detection_monotone_in_level():
    """If a sample triggers at level l, it triggers at every level below l."""
    triggers = TriggerTable()
    for value in np.linspace(0.0, 1.0, 21):
        s = PressureSample(pad_id=0, value=float(value), time=0.0)
        hits = [detect(s, _Fixed(lv), triggers) is not None for lv in (0, 1, 2)]
        # once a more sensitive level misses, all less sensitive ones miss
        assert hits[0] >= hits[1] >= hits[2]


def test_skin_pad_normal_must_be_unit():
    with pytest.raises(SkinError):
        SkinPad(id=0, link=0, center=np.zeros(3),
                normal=np.array([0.0, 0.0, 2.0]), body_part=BodyPart.HAND)
