"""Toolkit and deterministic runtime for the GIML scene markup language."""

from __future__ import annotations

__version__ = "0.1.0"
