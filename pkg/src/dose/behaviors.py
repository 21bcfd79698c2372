"""The user-definable hook bundle and the built-in presets.

A behaviour bundle is one object carrying every hook the driver calls. The
base class implements each hook as a no-op; a simulation overrides the ones it
needs. Presets are looked up by name: built-ins first, then the
``dose.presets`` entry-point group, then a ``package.module:attribute`` path.
"""

from __future__ import annotations

import importlib
import random
from importlib.metadata import entry_points
from typing import Any, Callable

from .config import SimulationConfig
from .genetics import Organism, Population
from .world import World


class Behaviors:
    def __init__(self, config: SimulationConfig):
        self.config = config
        self.world: World | None = None
        self.populations: dict[str, Population] = {}

    def bind(self, world: World, populations: dict[str, Population]) -> None:
        """Give the bundle access to the running world before the first generation."""
        self.world = world
        self.populations = populations

    # organism level

    def fitness(self, organism: Organism) -> Any:
        return None

    def mutation_scheme(self, organism: Organism, rng: random.Random) -> None:
        pass

    # population level

    def prepopulation_control(self, population: Population, rng: random.Random) -> None:
        pass

    def mating(self, population: Population, rng: random.Random) -> None:
        pass

    def postpopulation_control(self, population: Population, rng: random.Random) -> None:
        pass

    def generation_events(self, population: Population, rng: random.Random) -> None:
        pass

    def report(self, population: Population) -> Any:
        return None

    # world level

    def ecoregulate(self, world: World, rng: random.Random) -> None:
        pass

    def update_ecology(self, world: World, x: int, y: int, z: int, rng: random.Random) -> None:
        pass

    def update_local(self, world: World, x: int, y: int, z: int, rng: random.Random) -> None:
        pass

    def organism_movement(self, world: World, x: int, y: int, z: int, rng: random.Random) -> None:
        pass

    def organism_location(self, world: World, x: int, y: int, z: int, rng: random.Random) -> None:
        pass

    def world_report(self, world: World) -> dict:
        return {}


HOOKS = (
    "fitness", "mutation_scheme",
    "prepopulation_control", "mating", "postpopulation_control", "generation_events", "report",
    "organism_movement", "organism_location", "ecoregulate", "update_ecology", "update_local",
    "world_report",
)


class NoopBehaviors(Behaviors):
    pass


class DivergenceBehaviors(Behaviors):
    """One round of point mutation per organism per generation; reports the genomes."""

    def mutation_scheme(self, organism: Organism, rng: random.Random) -> None:
        organism.genome[0].rmutate("point", self.config.additional_mutation_rate, rng)

    def report(self, population: Population) -> str:
        return "\t".join("".join(org.genome[0].sequence) for org in population.agents)


class CytoplasmBehaviors(DivergenceBehaviors):
    """Same mutation scheme as ``divergence``; reports each organism's cytoplasm."""

    def report(self, population: Population) -> str:
        return "\t".join(org.get_cytoplasm() for org in population.agents)


PresetFactory = Callable[[SimulationConfig], Behaviors]

PRESETS: dict[str, PresetFactory] = {
    "noop": NoopBehaviors,
    "divergence": DivergenceBehaviors,
    "cytoplasm": CytoplasmBehaviors,
}

ENTRY_POINT_GROUP = "dose.presets"


class UnknownPreset(LookupError):
    pass


def _plugin(name: str) -> PresetFactory | None:
    for ep in entry_points(group=ENTRY_POINT_GROUP):
        if ep.name == name:
            return ep.load()
    return None


def resolve_preset(name: str) -> PresetFactory:
    if name in PRESETS:
        return PRESETS[name]
    factory = _plugin(name)
    if factory is not None:
        return factory
    if ":" in name:
        module, _, attr = name.partition(":")
        try:
            return getattr(importlib.import_module(module), attr)
        except (ImportError, AttributeError) as exc:
            raise UnknownPreset(f"cannot load behaviour preset {name!r}: {exc}") from exc
    raise UnknownPreset(f"unknown behaviour preset {name!r} (built-in: {', '.join(sorted(PRESETS))})")


def load_preset(name: str, config: SimulationConfig) -> Behaviors:
    return resolve_preset(name)(config)
