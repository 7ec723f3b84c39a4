import os
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, TypeVar, Union

import yaml
from mashumaro.config import BaseConfig

from fewshape.exceptions import ConfigurationError
from fewshape.types import PosixPathStrategy

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib  # type: ignore

__all__ = [
    "RecordConfig",
    "ENV_PREFIX",
    "env_name",
    "load_settings_file",
    "resolve_setting",
    "Settings",
]


ENV_PREFIX = "FEWSHAPE_"

T = TypeVar("T")


class RecordConfig(BaseConfig):
    omit_none = True
    serialize_by_alias = True
    serialization_strategy = {Path: PosixPathStrategy()}


def env_name(flag: str) -> str:
    return ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()


def load_settings_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Configuration file {path} does not exist")
    text = path.read_text(encoding="utf8")
    if path.suffix == ".toml":
        data = tomllib.loads(text)
    elif path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
    else:
        raise ConfigurationError(
            f"Unsupported configuration file type {path.suffix!r}"
        )
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must contain a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve_setting(
    name: str,
    flag_value: Optional[T],
    file_values: Mapping[str, Any],
    default: T,
    convert: Callable[[Any], T] = lambda v: v,  # type: ignore
    environ: Optional[Mapping[str, str]] = None,
) -> T:
    """Resolve a setting with precedence flag > env > file > default."""
    if flag_value is not None:
        return flag_value
    environ = os.environ if environ is None else environ
    env_value = environ.get(env_name(name))
    try:
        if env_value is not None:
            return convert(env_value)
        key = name.replace("-", "_")
        if key in file_values:
            return convert(file_values[key])
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid value for {name}: {e}") from e
    return default


class Settings:
    """Bundle of the configuration sources a command resolves against."""

    def __init__(
        self,
        file_values: Optional[Mapping[str, Any]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ):
        self.file_values = dict(file_values or {})
        self.environ = environ

    @classmethod
    def from_file(
        cls,
        path: Optional[Union[str, Path]],
        environ: Optional[Mapping[str, str]] = None,
    ) -> "Settings":
        return cls(load_settings_file(path) if path else {}, environ)

    def get(
        self,
        name: str,
        flag_value: Optional[T],
        default: T,
        convert: Callable[[Any], T] = lambda v: v,  # type: ignore
    ) -> T:
        return resolve_setting(
            name,
            flag_value,
            self.file_values,
            default,
            convert,
            self.environ,
        )
