"""Robust joint spectrum and power allocation for cellular V2X under imperfect CSI."""

from .config import ScenarioConfig, load_config

__all__ = ["ScenarioConfig", "load_config"]
__version__ = "0.1.0"
