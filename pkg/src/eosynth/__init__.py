"""Ontology-driven synthetic Earth-observation scenes and detection metrics."""
from __future__ import annotations

__version__ = "0.1.0"
