"""
Config Loader

Builds a SceneConfig from, in increasing precedence: dataclass defaults, a
flat `key = value` file, RIS_ISAC_* environment variables and explicit
overrides (CLI flags).
"""

import logging
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from dotenv import dotenv_values

from .errors import ConfigError
from .scene_structure import SceneConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "RIS_ISAC_"


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Read a flat key = value file; keys must be SceneConfig field names."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    values = dotenv_values(path, encoding="utf-8")
    return {key.strip(): value for key, value in values.items() if value is not None}


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """Collect RIS_ISAC_<FIELD> variables from the environment."""
    environ = os.environ if environ is None else environ
    names = {f.name for f in fields(SceneConfig)}
    found = {}
    for key, value in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            if name in names:
                found[name] = value
    return found


def load_scene_config(path: Optional[Union[str, Path]] = None,
                      overrides: Optional[Dict[str, Any]] = None,
                      environ: Optional[Mapping[str, str]] = None) -> SceneConfig:
    """
    Load a SceneConfig with file, environment and explicit overrides applied.

    Args:
        path: Optional config file path
        overrides: Values that win over everything else (None values are ignored)
        environ: Environment mapping (defaults to os.environ)

    Returns:
        Validated SceneConfig
    """
    data: Dict[str, Any] = {}
    if path is not None:
        data.update(read_config_file(path))
        logger.debug("Loaded %d keys from %s", len(data), path)
    data.update(env_overrides(environ))
    if overrides:
        data.update({k: v for k, v in overrides.items() if v is not None})
    return SceneConfig.from_dict(data)


def save_scene_config(cfg: SceneConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cfg.to_text(), encoding="utf-8")
    return path
