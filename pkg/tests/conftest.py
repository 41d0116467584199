"""Shared helpers: gallery access and system builders used across the suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from stabkit.schema import SystemFile, load_system

GALLERY = Path(__file__).resolve().parent.parent / "src" / "stabkit" / "gallery"


def gallery_file(name: str) -> Path:
    return GALLERY / f"{name}.json"


def gallery_system(name: str):
    """Build the toolkit object for a bundled gallery definition."""
    return load_system(gallery_file(name)).build()


def gallery_doc(name: str) -> SystemFile:
    return load_system(gallery_file(name))


@pytest.fixture
def build():
    return gallery_system
