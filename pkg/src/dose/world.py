"""Three-dimensional grid of ecological cells."""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator

from .genetics import atomic_write

ECO_FORMAT_VERSION = 1

Coord = tuple[int, int, int]

# number of non-zero offset components -> contact class
CONTACT = {1: "face", 2: "edge", 3: "corner"}


class EcoFormatError(ValueError):
    pass


@dataclass
class EcoCell:
    local_input: list[float] = field(default_factory=list)
    local_output: list[float] = field(default_factory=list)
    temporary_input: list[float] = field(default_factory=list)
    temporary_output: list[float] = field(default_factory=list)
    organisms: int = 0


class World:
    """Dense ``world_x * world_y * world_z`` ecosystem with hard boundaries."""

    def __init__(self, world_x: int, world_y: int, world_z: int):
        dims = (world_x, world_y, world_z)
        if any(not isinstance(d, int) or isinstance(d, bool) or d < 1 for d in dims):
            raise ValueError(f"world dimensions must be positive integers, got {dims}")
        self.dims: Coord = dims
        self.cells = [[[EcoCell() for _ in range(world_z)] for _ in range(world_y)]
                      for _ in range(world_x)]

    @property
    def world_x(self) -> int:
        return self.dims[0]

    @property
    def world_y(self) -> int:
        return self.dims[1]

    @property
    def world_z(self) -> int:
        return self.dims[2]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, World):
            return NotImplemented
        return self.dims == other.dims and self.cells == other.cells

    def __len__(self) -> int:
        return self.world_x * self.world_y * self.world_z

    def contains(self, coord: Coord) -> bool:
        return len(coord) == 3 and all(0 <= c < d for c, d in zip(coord, self.dims))

    def cell(self, coord: Coord) -> EcoCell:
        if not self.contains(coord):
            raise IndexError(f"coordinate {coord} outside world {self.dims}")
        x, y, z = coord
        return self.cells[x][y][z]

    def coords(self) -> Iterator[Coord]:
        """Row-major order: x outermost, z innermost."""
        return itertools.product(range(self.world_x), range(self.world_y), range(self.world_z))

    def neighbors(self, coord: Coord) -> list[tuple[Coord, str]]:
        if not self.contains(coord):
            raise IndexError(f"coordinate {coord} outside world {self.dims}")
        out = []
        for offset in itertools.product((-1, 0, 1), repeat=3):
            moved = sum(1 for o in offset if o)
            if not moved:
                continue
            n = tuple(c + o for c, o in zip(coord, offset))
            if self.contains(n):
                out.append((n, CONTACT[moved]))
        return out

    # persistence

    def to_dict(self) -> dict:
        return {
            "format_version": ECO_FORMAT_VERSION,
            "dims": list(self.dims),
            "cells": [asdict(self.cell(c)) for c in self.coords()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> World:
        if not isinstance(doc, dict) or doc.get("format_version") != ECO_FORMAT_VERSION:
            raise EcoFormatError("unsupported ecosystem format version")
        try:
            world = cls(*doc["dims"])
            cells = doc["cells"]
            if len(cells) != len(world):
                raise EcoFormatError(f"expected {len(world)} cells, found {len(cells)}")
            for coord, rec in zip(world.coords(), cells):
                x, y, z = coord
                world.cells[x][y][z] = EcoCell(**rec)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, EcoFormatError):
                raise
            raise EcoFormatError(f"malformed ecosystem record ({exc})") from exc
        return world

    def eco_burial(self, filename: Path | str) -> Path:
        path = Path(filename)
        atomic_write(path, json.dumps(self.to_dict(), sort_keys=True, allow_nan=False) + "\n")
        return path

    @classmethod
    def eco_excavate(cls, filename: Path | str) -> World:
        try:
            doc = json.loads(Path(filename).read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise EcoFormatError(f"{filename}: corrupt ecosystem file ({exc})") from exc
        return cls.from_dict(doc)


def new_world(x: int, y: int, z: int) -> World:
    return World(x, y, z)
