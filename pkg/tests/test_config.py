import math

import pytest
import yaml

from nvexotic.config import DEFAULTS, ExperimentConfig, load, merge
from nvexotic.exceptions import ConfigError
from nvexotic.inference import Setup


def test_defaults_build_nominal_setup():
    setup = load(None).setup()
    ref = Setup()
    assert setup.geometry == ref.geometry
    assert setup.vibration.d0 == pytest.approx(ref.vibration.d0)
    assert setup.vibration.omega == pytest.approx(ref.vibration.omega)
    assert setup.theta == pytest.approx(ref.theta, rel=1e-14)
    assert setup.sequence.tau == pytest.approx(ref.sequence.tau)


@pytest.mark.parametrize("user, path", [
    ({"geometry": {"radius_mm": 1}}, "geometry.radius_mm"),
    ({"optics": {}}, "optics"),
    ({"sensor": {"variant": "both"}}, "sensor.variant"),
    ({"geometry": {"radius_um": -1}}, "geometry.radius_um"),
    ({"sensor": {"shots": 1.5}}, "sensor.shots"),
    ({"analysis": {"cl": 1.2}}, "analysis.cl"),
    ({"sensor": {"finite_pulses": "yes"}}, "sensor.finite_pulses"),
    ({"hypothesis": {"lambda_um": [1, -2]}}, "hypothesis.lambda_um[1]"),
    ({"geometry": {"thickness_um": 600}}, "geometry.thickness_um"),
])
def test_invalid_values_name_the_key(user, path):
    with pytest.raises(ConfigError) as info:
        merge(user)
    assert info.value.key_path == path


def test_mass_replaces_lambda():
    cfg = ExperimentConfig.from_dict({"hypothesis": {"mass_ev": [9.8663e-4]}})
    assert cfg.force_ranges()[0] == pytest.approx(200e-6, rel=1e-4)
    with pytest.raises(ConfigError):
        merge({"hypothesis": {"mass_ev": [1e-3], "lambda_um": [1.0]}})


def test_dump_roundtrip(tmp_path):
    cfg = ExperimentConfig.from_dict({"vibration": {"d0_um": 3.0}, "analysis": {"seed": 7}})
    path = tmp_path / "cfg.yaml"
    path.write_text(cfg.dump())
    again = load(path)
    assert again.values == cfg.values
    assert again.digest() == cfg.digest()
    assert again.digest() != load(None).digest()


def test_invalid_yaml(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("geometry: [unclosed\n")
    with pytest.raises(ConfigError):
        load(path)


def test_bundled_nominal_config_matches_defaults():
    from importlib.resources import files
    text = files("nvexotic").joinpath("data/published_nominal.yaml").read_text()
    assert merge(yaml.safe_load(text)) == merge({})


def test_theta_default_is_magic_angle():
    assert math.radians(DEFAULTS["sensor"]["theta_deg"]) == pytest.approx(math.acos(3**-0.5), rel=1e-14)
