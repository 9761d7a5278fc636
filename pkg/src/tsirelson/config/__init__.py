"""Configuration module for tsirelson."""

from .app_settings import AppSettings, settings

__all__ = ["AppSettings", "settings"]
