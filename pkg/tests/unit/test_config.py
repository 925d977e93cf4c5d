"""Tests for configuration management"""

import pytest

from fauforensics.config import (
    Config, build_dataclass, from_key_value_text, parse_key_value_text, to_key_value_text
)
from fauforensics.errors import ConfigError
from fauforensics.models.clip import GenConfig, VideoMode
from fauforensics.models.network import HeadMode, ModelConfig
from fauforensics.models.training import TrainConfig


def test_config_initialization():
    """Test basic Config initialization"""
    config = Config()
    assert config.workers == 1
    assert config.log_level == 'INFO'
    assert config.settings == {}


def test_config_from_env_with_env_vars(monkeypatch, tmp_path):
    """Test Config.from_env() with environment variables"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("FF_WORKERS", "4")
    monkeypatch.setenv("FF_LOG_LEVEL", "DEBUG")

    config = Config.from_env()
    assert config.workers == 4
    assert config.log_level == "DEBUG"


def test_config_from_env_cli_override(monkeypatch, tmp_path):
    """Test that CLI params override environment variables"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("FF_WORKERS", "4")

    config = Config.from_env(workers=2)
    assert config.workers == 2


def test_config_from_env_defaults(monkeypatch, tmp_path):
    """Test Config.from_env() with default values"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("FF_WORKERS", raising=False)
    monkeypatch.delenv("FF_LOG_LEVEL", raising=False)

    config = Config.from_env()
    assert config.workers == 1
    assert config.log_level == "INFO"


def test_config_from_env_reads_dotenv(monkeypatch, tmp_path):
    """Test that a .env file in the working directory is honored"""
    monkeypatch.chdir(tmp_path)
    # setenv first so the value loaded from .env is undone after the test
    monkeypatch.setenv("FF_WORKERS", "1")
    monkeypatch.delenv("FF_WORKERS")
    (tmp_path / '.env').write_text("FF_WORKERS=3\n")

    config = Config.from_env()
    assert config.workers == 3


def test_config_invalid_workers_env(monkeypatch, tmp_path):
    """Test a non-integer worker count"""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("FF_WORKERS", "many")

    with pytest.raises(ConfigError, match="FF_WORKERS"):
        Config.from_env()


def test_config_validate_workers():
    """Test validation with zero workers"""
    with pytest.raises(ConfigError, match="workers must be >= 1"):
        Config(workers=0).validate()


def test_config_file_sections(monkeypatch, tmp_path):
    """Test splitting config-file keys per target dataclass"""
    monkeypatch.chdir(tmp_path)
    path = tmp_path / 'run.cfg'
    path.write_text("# tiny run\nL=32\nlr0=0.001\nrho_real=0.9\n")

    config = Config.from_env(config_file=str(path))
    assert config.section(ModelConfig) == {'L': '32'}
    assert config.section(TrainConfig) == {'lr0': '0.001'}
    assert config.section(GenConfig) == {'rho_real': '0.9'}
    config.check_known_keys(GenConfig, ModelConfig, TrainConfig)


def test_config_file_unknown_key(monkeypatch, tmp_path):
    """Test that unknown config keys are rejected"""
    monkeypatch.chdir(tmp_path)
    path = tmp_path / 'run.cfg'
    path.write_text("latent_size=32\n")

    config = Config.from_env(config_file=str(path))
    with pytest.raises(ConfigError, match="latent_size"):
        config.check_known_keys(GenConfig, ModelConfig, TrainConfig)


def test_config_file_missing(monkeypatch, tmp_path):
    """Test a config file that does not exist"""
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigError, match="not found"):
        Config.from_env(config_file=str(tmp_path / 'absent.cfg'))


def test_parse_key_value_text_malformed():
    """Test a line without '='"""
    with pytest.raises(ConfigError, match="Line 2"):
        parse_key_value_text("a=1\nbroken\n")


def test_build_dataclass_layers():
    """Test that later layers win and None values are ignored"""
    cfg = build_dataclass(ModelConfig, {'L': '64', 'head_mode': 'fourclass'}, {'L': 16, 'seed': None})
    assert cfg.L == 16
    assert cfg.head_mode is HeadMode.FOURCLASS
    assert cfg.seed == 0


def test_build_dataclass_coerces_bool_and_enum():
    """Test string coercion of booleans and enums"""
    cfg = build_dataclass(ModelConfig, {'use_tap': 'false', 'video_mode': 'raw'})
    assert cfg.use_tap is False
    assert cfg.video_mode is VideoMode.RAW


def test_build_dataclass_rejects_bad_values():
    """Test invalid values and unknown fields"""
    with pytest.raises(ConfigError, match="Invalid value"):
        build_dataclass(TrainConfig, {'batch': 'large'})
    with pytest.raises(ConfigError, match="no field"):
        build_dataclass(TrainConfig, {'momentum': '0.9'})
    with pytest.raises(ConfigError, match="lr0"):
        build_dataclass(TrainConfig, {'lr0': '0'})


def test_key_value_text_round_trip():
    """Test canonical text of a config rebuilds the same config"""
    cfg = ModelConfig(L=24, head_mode=HeadMode.FOURCLASS, lambda_av=0.7, use_alignment=False)
    assert from_key_value_text(ModelConfig, to_key_value_text(cfg)) == cfg
