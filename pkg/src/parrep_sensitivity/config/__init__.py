"""
Configuration module for parrep-sensitivity.
"""

from .run_config import RunConfig, parse_config
from .settings import DEFAULT_SETTINGS, Settings

__all__ = ["RunConfig", "parse_config", "DEFAULT_SETTINGS", "Settings"]
