"""
Tests for the packaged configuration.
"""

import json

import pytest

from fsub._settings import Settings, config, settings


class TestSettings:
    def test_packaged_defaults(self):
        assert settings.fuel == 1000
        assert settings.trials == 10000
        assert settings.seed == 0
        assert settings.oracle_depth_limit == 12
        assert settings.debug is True
        assert settings.generator == {"leaf": 0.4, "arrow": 0.3, "forall": 0.3}

    def test_from_dict_copies(self):
        data = dict(config, fuel=7)
        s = Settings(data)
        data["fuel"] = 8
        assert s.fuel == 7
        assert s.config["fuel"] == 7

    def test_from_path(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(dict(config, seed=42)))
        assert Settings(str(path)).seed == 42

    def test_invalid_type(self):
        with pytest.raises(ValueError, match="file path or dictionary"):
            Settings(3)

    def test_missing_key(self):
        data = {k: v for k, v in config.items() if k != "fuel"}
        with pytest.raises(ValueError, match="missing"):
            Settings(data)

    def test_nonpositive_fuel(self):
        with pytest.raises(ValueError):
            Settings(dict(config, fuel=0))

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum"):
            Settings(dict(config, generator={"leaf": 0.5, "arrow": 0.5, "forall": 0.5}))

    def test_weights_named(self):
        with pytest.raises(ValueError, match="leaf"):
            Settings(dict(config, generator={"leaf": 1.0}))

    def test_str(self):
        assert str(settings) == "fsub Settings"
        assert repr(settings).startswith("Settings(config=")
