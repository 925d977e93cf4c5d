"""Configuration management for FauForensics runs"""

import dataclasses
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Type, TypeVar

from fauforensics.errors import ConfigError

T = TypeVar('T')

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


@dataclass
class Config:
    """Runtime configuration shared by every command"""
    workers: int = 1
    log_level: str = 'INFO'
    settings: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_env(cls,
                 workers: Optional[int] = None,
                 config_file: Optional[str] = None,
                 log_level: Optional[str] = None) -> 'Config':
        """
        Load runtime configuration with CLI override support

        Args:
            workers: Override worker count (falls back to FF_WORKERS, then 1)
            config_file: Optional key=value file with GenConfig/ModelConfig/TrainConfig keys
            log_level: Override log level (falls back to FF_LOG_LEVEL, then INFO)
        """
        # Try to load from .env file if it exists
        env_file = Path('.env')
        if env_file.exists():
            for key, value in parse_key_value_file(env_file).items():
                os.environ.setdefault(key, value)

        if workers is None:
            raw = os.getenv('FF_WORKERS', '1')
            try:
                workers = int(raw)
            except ValueError:
                raise ConfigError(f"FF_WORKERS must be an integer, got {raw!r}")

        settings = parse_key_value_file(Path(config_file)) if config_file else {}

        config = cls(
            workers=workers,
            log_level=log_level or os.getenv('FF_LOG_LEVEL', 'INFO'),
            settings=settings
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Validate configuration"""
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def section(self, cls: Type[T]) -> Dict[str, str]:
        """Settings that name fields of the given dataclass"""
        names = {f.name for f in dataclasses.fields(cls)}
        return {k: v for k, v in self.settings.items() if k in names}

    def check_known_keys(self, *classes: type) -> None:
        """Reject config-file keys that no target dataclass declares"""
        known = set()
        for cls in classes:
            known.update(f.name for f in dataclasses.fields(cls))
        unknown = sorted(set(self.settings) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")


def parse_key_value_file(path: Path) -> Dict[str, str]:
    """Parse a flat key=value file; '#' starts a comment line"""
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    return parse_key_value_text(path.read_text(encoding='utf-8'))


def parse_key_value_text(text: str) -> Dict[str, str]:
    """Parse key=value lines from text"""
    result: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"Line {lineno}: expected key=value, got {line!r}")
        result[key.strip()] = value.strip()
    return result


def _coerce(name: str, target: Any, raw: Any) -> Any:
    """Convert a raw (usually string) value to the type of a dataclass default"""
    if not isinstance(raw, str):
        if isinstance(target, Enum) and not isinstance(raw, Enum):
            return type(target)(raw)
        return raw
    try:
        if isinstance(target, Enum):
            return type(target)(raw)
        if isinstance(target, bool):
            lowered = raw.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(raw)
        if isinstance(target, int):
            return int(raw)
        if isinstance(target, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"Invalid value for {name}: {raw!r}")
    return raw


def build_dataclass(cls: Type[T], *layers: Optional[Mapping[str, Any]]) -> T:
    """
    Build a dataclass from its defaults overridden by each layer in order

    Later layers win; None values inside a layer are ignored so argparse
    defaults of None leave lower layers intact.
    """
    defaults = cls()
    values: Dict[str, Any] = {}
    names = {f.name for f in dataclasses.fields(cls)}
    for layer in layers:
        if not layer:
            continue
        for key, raw in layer.items():
            if raw is None:
                continue
            if key not in names:
                raise ConfigError(f"{cls.__name__} has no field {key!r}")
            values[key] = _coerce(key, getattr(defaults, key), raw)
    instance = dataclasses.replace(defaults, **values)
    validate = getattr(instance, 'validate', None)
    if validate is not None:
        validate()
    return instance


def to_key_value_text(obj: Any, prefix: str = '') -> str:
    """Canonical sorted key=value text of a dataclass instance"""
    lines = []
    for f in sorted(dataclasses.fields(obj), key=lambda f: f.name):
        value = getattr(obj, f.name)
        if isinstance(value, Enum):
            value = value.value
        elif isinstance(value, bool):
            value = 'true' if value else 'false'
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{prefix}{f.name}={value}")
    return '\n'.join(lines) + '\n'


def from_key_value_text(cls: Type[T], text: str) -> T:
    """Inverse of to_key_value_text"""
    return build_dataclass(cls, parse_key_value_text(text))


def pairs_to_text(pairs: Iterable[tuple]) -> str:
    """key=value lines in the given order"""
    return ''.join(f"{k}={v}\n" for k, v in pairs)
