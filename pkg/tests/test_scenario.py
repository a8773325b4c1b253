"""Tests for scenario file parsing."""
import pytest

from shell_gsm.errors import ConfigError
from shell_gsm.media import RadialProfile
from shell_gsm.scenario import loads_config, parse_config, sweep_geometries, to_complex

BASE = """\
[geometry]
rb_mm = 150
ra_mm = 180
{extra_geometry}
[[geometry.layers]]
{layer}

[frequency]
start_ghz = 3.2
stop_ghz = 3.8
points = 7

[task]
{task}
"""

ISO_LAYER = 'type = "iso"\nthickness_mm = 30\neps = "5-0.5j"'


def scenario(layer=ISO_LAYER, task='kind = "sparams"', extra_geometry=""):
    return BASE.format(layer=layer, task=task, extra_geometry=extra_geometry)


class TestComplexValues:

    @pytest.mark.parametrize("value,expected", [(5, 5), (2.5, 2.5), ("5-0.5j", 5 - 0.5j), ("4.4 - 0.604j", 4.4 - 0.604j), ([1.0, -2.0], 1 - 2j)])
    def test_forms(self, value, expected):
        assert to_complex(value) == expected

    def test_bad_string(self):
        with pytest.raises(ValueError):
            to_complex("five")


class TestValidScenarios:

    def test_isotropic_shell(self):
        cfg = loads_config(scenario())
        g = cfg.geometry.to_geometry()
        assert g.rb == pytest.approx(0.150)
        assert g.ra == pytest.approx(0.180)
        assert g.segments[0].profile.sample.eps_perp == 5 - 0.5j
        assert cfg.frequency.grid()[0] == pytest.approx(3.2e9)
        assert len(cfg.frequency.grid()) == 7
        assert cfg.antenna.gsm_file == "transparent"

    def test_uniaxial_layers(self):
        layer = 'type = "uniaxial"\nthickness_mm = 15\neps_perp = 4.4\neps_r = 2\nmu_perp = 2.2\nmu_r = 2.2\n\n' \
                '[[geometry.layers]]\ntype = "uniaxial"\nthickness_mm = 15\neps_perp = 8\neps_r = 1\nmu_perp = 5\nmu_r = 2'
        g = loads_config(scenario(layer=layer)).geometry.to_geometry()
        assert len(g.segments) == 2
        assert g.segments[1].profile.sample.mu_perp == 5
        assert g.segments[1].r_outer == g.ra

    def test_profile_layer(self):
        layer = 'type = "profile"\nthickness_mm = 30\neps_perp = "1/r"\neps_r = "2+r"'
        g = loads_config(scenario(layer=layer)).geometry.to_geometry()
        profile = g.segments[0].profile
        assert isinstance(profile, RadialProfile)
        assert profile.at(0.16).eps_perp == pytest.approx(6.25)
        assert profile.at(0.16).mu_r == 1

    def test_regions(self):
        extra = '[geometry.exterior]\neps = [2.0, -0.1]\n'
        g = loads_config(scenario(extra_geometry=extra)).geometry.to_geometry()
        assert g.exterior.eps == 2 - 0.1j
        assert g.bubble.eps == 1

    def test_task_is_optional(self):
        cfg = loads_config(scenario(task=""))
        assert cfg.task.kind is None
        assert cfg.task.planes == ["xoz", "yoz", "xoy"]

    def test_relative_gsm_path(self, tmp_path):
        path = tmp_path / "shell.toml"
        path.write_text(scenario().replace("[task]", '[antenna]\ngsm_file = "horn.json"\n\n[task]'))
        cfg = parse_config(path)
        assert cfg.gsm_path() == tmp_path.resolve() / "horn.json"


class TestErrors:

    def test_syntax_error_has_position(self):
        with pytest.raises(ConfigError) as exc:
            loads_config("[geometry]\nrb_mm = = 3\n")
        assert exc.value.line == 2

    def test_unknown_key(self):
        text = scenario().replace("points = 7", "points = 7\nstep_ghz = 0.1")
        with pytest.raises(ConfigError, match="unknown key") as exc:
            loads_config(text)
        assert exc.value.key == "frequency.step_ghz"
        assert exc.value.line == text.splitlines().index("step_ghz = 0.1") + 1

    def test_missing_key(self):
        with pytest.raises(ConfigError, match="missing key") as exc:
            loads_config(scenario(layer='type = "iso"\neps = 2'))
        assert exc.value.key == "geometry.layers[1].thickness_mm"

    def test_biaxial_rejected(self):
        layer = 'type = "biaxial"\nthickness_mm = 30\neps_perp = 2\neps_r = 3'
        with pytest.raises(ConfigError, match="only radially uniaxial"):
            loads_config(scenario(layer=layer))

    def test_layers_must_tile(self):
        layer = 'type = "iso"\nthickness_mm = 20\neps = 2'
        with pytest.raises(ConfigError, match="sum to 20"):
            loads_config(scenario(layer=layer))

    def test_keys_match_type(self):
        layer = 'type = "iso"\nthickness_mm = 30\neps = 2\neps_r = 3'
        with pytest.raises(ConfigError, match="iso layer takes eps and mu only"):
            loads_config(scenario(layer=layer))

    def test_zero_permittivity(self):
        layer = 'type = "iso"\nthickness_mm = 30\neps = 0'
        with pytest.raises(ConfigError, match="nonzero"):
            loads_config(scenario(layer=layer))

    def test_bad_expression_column(self):
        layer = 'type = "profile"\nthickness_mm = 30\neps_perp = "2+*r"\neps_r = "1"'
        with pytest.raises(ConfigError) as exc:
            loads_config(scenario(layer=layer))
        assert exc.value.column == 3

    def test_frequency_order(self):
        with pytest.raises(ConfigError, match="below start_ghz"):
            loads_config(scenario().replace("stop_ghz = 3.8", "stop_ghz = 3.0"))

    def test_unknown_task(self):
        with pytest.raises(ConfigError) as exc:
            loads_config(scenario(task='kind = "mesh"'))
        assert exc.value.key == "task.kind"

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "missing.toml")


class TestSweep:

    TASK = 'kind = "sweep"\nsweep_layer = 1\nsweep_param = "eps_im"\nsweep_values = [0.0, -0.25, -1.0]'

    def test_geometries(self):
        cfg = loads_config(scenario(task=self.TASK))
        points = sweep_geometries(cfg)
        assert [v for v, _ in points] == [0.0, -0.25, -1.0]
        sample = points[1][1].segments[0].profile.sample
        assert sample.eps_perp == 5 - 0.25j
        assert sample.eps_r == 5 - 0.25j

    def test_incomplete_sweep(self):
        with pytest.raises(ConfigError, match="sweep needs"):
            loads_config(scenario(task='kind = "sweep"\nsweep_layer = 1'))

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError, match="unknown sweep_param"):
            loads_config(scenario(task='kind = "sweep"\nsweep_layer = 1\nsweep_param = "sigma"\nsweep_values = [1.0]'))

    def test_profile_layer_not_sweepable(self):
        layer = 'type = "profile"\nthickness_mm = 30\neps_perp = "1/r"\neps_r = "2"'
        with pytest.raises(ConfigError, match="profile layer"):
            loads_config(scenario(layer=layer, task=self.TASK))
