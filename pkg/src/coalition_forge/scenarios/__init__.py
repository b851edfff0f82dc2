"""Bundled scenario files usable by name from the CLI."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def names() -> list[str]:
    root = resources.files(__package__)
    return sorted(
        entry.name[:-5]
        for entry in root.iterdir()
        if entry.name.endswith(".json")
    )


def path(name: str) -> Path:
    return Path(str(resources.files(__package__).joinpath(f"{name}.json")))
