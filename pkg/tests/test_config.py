"""Config loader: shipped model sanity plus first-violation error reporting."""

import math

import pytest
import yaml

from skinsafe.config import ConfigError, default_config_path, load_config
from skinsafe.skin import BodyPart


def test_shipped_model_loads(model, pads):
    assert model.n == 6
    assert math.isclose(model.total_mass, 29.104, rel_tol=1e-9)
    assert len(pads) == 11
    assert [p.id for p in pads] == list(range(11))
    by_part = {bp: sum(p.body_part is bp for p in pads) for bp in BodyPart}
    assert by_part == {BodyPart.UPPER: 4, BodyPart.LOWER: 4, BodyPart.HAND: 3}


def _mutated_config(tmp_path, mutate):
    raw = yaml.safe_load(default_config_path().read_text())
    mutate(raw)
    path = tmp_path / "robot.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


def test_missing_key_is_reported_with_path(tmp_path):
    def strip_axis(raw):
        del raw["robot"]["joints"][2]["axis"]

    with pytest.raises(ConfigError, match=r"robot\.joints\[2\].*axis"):
        load_config(_mutated_config(tmp_path, strip_axis))


def test_bad_pad_normal_rejected(tmp_path):
    def break_normal(raw):
        raw["skin_pads"][0]["normal"] = [0.0, 2.0, 0.0]

    with pytest.raises(ConfigError, match=r"skin_pads\[0\]"):
        load_config(_mutated_config(tmp_path, break_normal))


def test_duplicate_pad_id_rejected(tmp_path):
    def dup(raw):
        raw["skin_pads"][1]["id"] = raw["skin_pads"][0]["id"]

    with pytest.raises(ConfigError, match="duplicate pad id"):
        load_config(_mutated_config(tmp_path, dup))


def test_unknown_pad_link_rejected(tmp_path):
    def bad_link(raw):
        raw["skin_pads"][0]["link"] = "tentacle"

    with pytest.raises(ConfigError, match="unknown link"):
        load_config(_mutated_config(tmp_path, bad_link))


def test_non_mapping_top_level_rejected(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("- just\n- a\n- list\n")
    with pytest.raises(ConfigError, match="top level"):
        load_config(path)


def test_bad_inertia_rejected(tmp_path):
    def bad_inertia(raw):
        raw["robot"]["joints"][0]["inertia"]["izz"] = 100.0  # triangle violation

    with pytest.raises(ConfigError, match=r"robot\.joints\[0\]"):
        load_config(_mutated_config(tmp_path, bad_inertia))
