import json

import pytest

from modcoach.config import AppConfig, load_config, with_request_overrides
from modcoach.errors import ValidationError


class TestLoadConfig:
    def test_defaults(self):
        cfg = load_config(env={})
        assert cfg.thresholds.vol_louder_ratio == 1.1
        assert cfg.mining.min_support_ratio == 0.05
        assert cfg.retrieval.num_trees == 16
        assert cfg.service.max_upload_bytes == 50 * 1024 * 1024

    def test_file_layer(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({
            "mining": {"min_support_ratio": 0.1},
            "retrieval": {"k": 25},
        }))
        cfg = load_config(path, env={})
        assert cfg.mining.min_support_ratio == 0.1
        assert cfg.retrieval.k == 25
        assert cfg.retrieval.num_trees == 16

    def test_env_overrides_file(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"mining": {"min_support_ratio": 0.1}}))
        cfg = load_config(path, env={
            "MODCOACH_MINING_MIN_SUPPORT_RATIO": "0.2",
            "MODCOACH_RETRIEVAL_SEED": "99",
            "MODCOACH_THRESHOLDS_PITCH_RATIO": "1.4",
        })
        assert cfg.mining.min_support_ratio == 0.2
        assert cfg.retrieval.seed == 99
        assert cfg.thresholds.pitch_ratio == 1.4

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"nonsense": {}}))
        with pytest.raises(ValidationError):
            load_config(path, env={})

    def test_unknown_field_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"mining": {"bogus": 1}}))
        with pytest.raises(ValidationError):
            load_config(path, env={})

    def test_malformed_file_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError):
            load_config(path, env={})


class TestRequestOverrides:
    def test_request_layer_on_top(self):
        cfg = with_request_overrides(AppConfig(), min_support=0.3, k=7,
                                     thresholds={"pitch_ratio": 1.5})
        assert cfg.mining.min_support_ratio == 0.3
        assert cfg.retrieval.k == 7
        assert cfg.thresholds.pitch_ratio == 1.5
        assert cfg.thresholds.vol_louder_ratio == 1.1  # untouched default

    def test_invalid_override_rejected(self):
        with pytest.raises(ValidationError):
            with_request_overrides(AppConfig(), min_support=1.5)
