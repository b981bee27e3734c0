import textwrap

import pytest

from ultralab.config import LOG_LEVEL_ENV, SECTIONS, ExperimentConfig, load_config
from ultralab.exceptions import ConfigError, UltralabError


@pytest.fixture(autouse=True)
def no_level_env(monkeypatch):
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)


@pytest.fixture()
def config():
    return ExperimentConfig()


class test_ExperimentConfig:
    def test_defaults(self, config):
        assert config.weight == "gevrey:s=2"
        assert config.ladder_min == -2
        assert config.ladder_max == 1
        assert config.x0 == (0.0, 0.0)
        assert config.target_s is None
        assert config.validate() is config

    def test_defaults_env_level(self, monkeypatch):
        monkeypatch.setenv(LOG_LEVEL_ENV, "DEBUG")
        assert ExperimentConfig.defaults().log_level == "DEBUG"

    def test_from_ini(self):
        config = ExperimentConfig.from_ini(
            textwrap.dedent(
                """
            [weights]
            weight = logpower:s=3
            jmax = 12
            normalized = no

            [metivier]
            x0 = 0.1, 0.2
            target-s = 2.5
            control = off
            """
            )
        )
        assert config.weight == "logpower:s=3"
        assert config.jmax == 12
        assert not config.normalized
        assert config.x0 == (0.1, 0.2)
        assert config.target_s == 2.5
        assert not config.control
        assert config.nodes == 129

    def test_from_mapping(self):
        config = ExperimentConfig.from_ini({"analysis": {"nodes": "33", "workers": "4"}})
        assert config.nodes == 33
        assert config.workers == 4

    def test_roundtrip(self, config):
        modified = config.merge(jmax=7, target_s=3.0, x0=(0.5, -0.5), dry_run=True)
        assert ExperimentConfig.from_ini(modified.to_ini()) == modified
        assert ExperimentConfig.from_ini(config.to_ini()) == config

    def test_to_ini_sections(self, config):
        text = config.to_ini()
        for section in SECTIONS:
            assert f"[{section}]" in text

    @pytest.mark.parametrize(
        "source,match",
        [
            ("[weigths]\nweight = gevrey:s=2\n", "Did you mean weights"),
            ("[weights]\nwieght = gevrey:s=2\n", "unknown key .wieght. in"),
            ("[weights]\nbox = 0,1\n", "unknown key 'box' in \\[weights\\]"),
            ("[weights]\njmax = many\n", "bad value for weights.jmax"),
            ("[run]\ndry_run = maybe\n", "bad value for run.dry_run"),
            ("weight = gevrey\n", "cannot parse config"),
        ],
    )
    def test_from_ini_errors(self, source, match):
        with pytest.raises(ConfigError, match=match):
            ExperimentConfig.from_ini(source)

    def test_from_file(self, tmp_path):
        path = tmp_path / "lab.ini"
        path.write_text("[analysis]\nbox = 0,2,0,2\n", encoding="utf-8")
        assert ExperimentConfig.from_file(path).box == "0,2,0,2"

    def test_from_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            ExperimentConfig.from_file(tmp_path / "missing.ini")

    def test_merge(self, config):
        merged = config.merge(jmax=5, weight=None)
        assert merged.jmax == 5
        assert merged.weight == config.weight
        assert config.jmax == 60

    def test_merge_unknown(self, config):
        with pytest.raises(ConfigError, match="unknown config keys: bogus"):
            config.merge(bogus=1)

    @pytest.mark.parametrize(
        "overrides,match",
        [
            ({"jmax": -1}, "jmax must be nonnegative"),
            ({"ladder_min": 2}, "ladder_min must not exceed ladder_max"),
            ({"nodes": 4}, "nodes must be an odd integer"),
            ({"tol": 0.0}, "tol must be positive"),
            ({"workers": 0}, "workers must be positive"),
            ({"target_s": 1.5}, "target_s must exceed s"),
            ({"x0": (0.0,)}, "same length"),
            ({"weight": "gevrey:s=0.5"}, "invalid configuration"),
            ({"function": "sin(x3)"}, "invalid configuration"),
            ({"metivier_box": "0,1"}, "differ in dimension"),
        ],
    )
    def test_validate(self, config, overrides, match):
        with pytest.raises(ConfigError, match=match):
            config.merge(**overrides).validate()

    def test_operator_dimension_independent_of_box(self, config):
        # only box-based subcommands compare the operator with the box
        validated = config.merge(operator="x1*d[1]", other="1*d[1]").validate()
        assert validated.box == config.box

    def test_config_error_is_library_error(self):
        assert issubclass(ConfigError, UltralabError)

    def test_as_dict(self, config):
        d = config.as_dict()
        assert d["x0"] == [0.0, 0.0]
        assert d["weight"] == "gevrey:s=2"

    def test_describe(self):
        rows = ExperimentConfig.describe()
        assert ("weights", "jmax", "60", "largest j, h, r for the property suite") in rows
        assert {row[0] for row in rows} == set(SECTIONS)


class test_load_config:
    def test_defaults(self):
        assert load_config() == ExperimentConfig()

    def test_file_with_overrides(self, tmp_path):
        path = tmp_path / "lab.ini"
        path.write_text("[weights]\njmax = 9\nweight = explog:alpha=0.5,beta=1\n", encoding="utf-8")
        config = load_config(path, jmax=3, workers=None)
        assert config.jmax == 3
        assert config.weight == "explog:alpha=0.5,beta=1"
        assert config.workers == 1
