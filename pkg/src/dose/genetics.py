"""Chromosome, organism and population, with mutation, crossover and fossil files."""

from __future__ import annotations

import json
import logging
import math
import os
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

log = logging.getLogger(__name__)

DIGITS = tuple("0123456789")

FOSSIL_FORMAT_VERSION = 1


class HookError(RuntimeError):
    """A user-supplied behaviour hook raised; the hook name is attached."""

    def __init__(self, hook: str, exc: BaseException):
        super().__init__(f"hook {hook!r} failed: {exc!r}")
        self.hook = hook


class FossilFormatError(ValueError):
    pass


def mutation_events(rate: float, length: int) -> int:
    """Number of point-mutation events for a per-base rate over ``length`` bases.

    Fractional events are dropped (floor). The epsilon keeps products such as
    0.29 * 100 = 28.999999999999996 on the intended integer.
    """
    return max(0, math.floor(rate * length + 1e-9))


class Chromosome:
    def __init__(self, sequence: Sequence[str], alphabet: Sequence[str] = DIGITS,
                 background_mutation_rate: float = 0.0):
        self.sequence = list(sequence)
        self.alphabet = tuple(alphabet)
        self.background_mutation_rate = float(background_mutation_rate)
        if not self.sequence:
            raise ValueError("chromosome sequence must not be empty")
        stray = set(self.sequence) - set(self.alphabet)
        if stray:
            raise ValueError(f"symbols outside alphabet: {sorted(stray)}")

    def __repr__(self) -> str:
        return f"Chromosome({''.join(self.sequence)!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chromosome):
            return NotImplemented
        return (self.sequence == other.sequence and self.alphabet == other.alphabet
                and self.background_mutation_rate == other.background_mutation_rate)

    def __len__(self) -> int:
        return len(self.sequence)

    def replicate(self) -> Chromosome:
        return Chromosome(self.sequence, self.alphabet, self.background_mutation_rate)

    def rmutate(self, style: str, additional_rate: float, rng: random.Random) -> int:
        """Point-mutate positions anywhere in the sequence; returns the event count."""
        return self.kmutate(0, len(self.sequence), additional_rate, rng, style=style)

    def kmutate(self, start: int, end: int, rate: float, rng: random.Random,
                style: str = "point") -> int:
        """Point-mutate positions drawn from ``[start, end)``.

        The effective rate is the background rate plus ``rate``. Each event picks
        a position with replacement and writes a symbol drawn from the whole
        alphabet, so an event may rewrite a base with itself.
        """
        if style != "point":
            raise ValueError(f"unsupported mutation style {style!r}")
        if not 0 <= start < end <= len(self.sequence):
            raise ValueError(f"invalid segment [{start}, {end}) for length {len(self.sequence)}")
        effective = max(0.0, self.background_mutation_rate + rate)
        events = mutation_events(effective, end - start)
        span = end - start
        alphabet = self.alphabet
        seq = self.sequence
        for _ in range(events):
            pos = start + rng.randrange(span)
            seq[pos] = alphabet[rng.randrange(len(alphabet))]
        return events


def crossover(a: Chromosome, b: Chromosome, position: int) -> tuple[Chromosome, Chromosome]:
    """Single-point exchange of the tails after ``position``."""
    if not 0 <= position <= min(len(a), len(b)):
        raise ValueError(f"crossover position {position} outside [0, {min(len(a), len(b))}]")
    first = Chromosome(a.sequence[:position] + b.sequence[position:], a.alphabet,
                       a.background_mutation_rate)
    second = Chromosome(b.sequence[:position] + a.sequence[position:], b.alphabet,
                        b.background_mutation_rate)
    return first, second


def format_value(x: float) -> str:
    return repr(float(x))


@dataclass(eq=True)
class Organism:
    genome: list[Chromosome] = field(default_factory=list)
    status: dict[str, Any] = field(default_factory=dict)
    cytoplasm: list[float] = field(default_factory=lambda: [0.0])

    def get_cytoplasm(self) -> str:
        return ",".join(format_value(x) for x in self.cytoplasm)

    def source(self) -> str:
        return "".join("".join(c.sequence) for c in self.genome)


@dataclass
class Population:
    name: str
    agents: list[Organism] = field(default_factory=list)
    generation: int = 0
    maximum_generations: int = 1


# stream(organism_index, purpose) -> random stream; organism_index -1 is population-level
StreamFactory = Callable[[int, str], random.Random]


def _call(hook_name: str, fn: Callable, *args):
    try:
        return fn(*args)
    except Exception as exc:
        raise HookError(hook_name, exc) from exc


def generation_step(population: Population, hooks: Any, stream: StreamFactory) -> Any:
    """Advance one generation through the population hooks and return the report.

    ``hooks`` is any object with the population and organism hook methods
    (see ``dose.behaviors.Behaviors``).
    """
    _call("prepopulation_control", hooks.prepopulation_control, population, stream(-1, "prepopulation_control"))
    _call("mating", hooks.mating, population, stream(-1, "mating"))
    _call("postpopulation_control", hooks.postpopulation_control, population, stream(-1, "postpopulation_control"))
    for i, organism in enumerate(population.agents):
        _call("mutation_scheme", hooks.mutation_scheme, organism, stream(i, "mutation"))
    _call("generation_events", hooks.generation_events, population, stream(-1, "generation_events"))
    population.generation += 1
    return _call("report", hooks.report, population)


# ---------------------------------------------------------------------------
# fossils


def fossil_sample_size(n_agents: int, ratio: float) -> int:
    return min(n_agents, max(round_half_away(ratio * n_agents), min(n_agents, 100)))


def round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def _organism_record(org: Organism) -> dict:
    return {
        "genome": ["".join(c.sequence) for c in org.genome],
        "chromosomes": [
            {"alphabet": "".join(c.alphabet), "background_mutation_rate": c.background_mutation_rate}
            for c in org.genome
        ],
        "status": org.status,
        "cytoplasm": [float(x) for x in org.cytoplasm],
    }


def _organism_from_record(rec: dict) -> Organism:
    genome = [
        Chromosome(seq, tuple(meta["alphabet"]), meta["background_mutation_rate"])
        for seq, meta in zip(rec["genome"], rec["chromosomes"], strict=True)
    ]
    status = dict(rec["status"])
    if isinstance(status.get("location"), list):
        status["location"] = tuple(status["location"])
    return Organism(genome=genome, status=status, cytoplasm=[float(x) for x in rec["cytoplasm"]])


def dumps_fossil(organisms: Sequence[Organism], generation: int, population_name: str) -> str:
    doc = {
        "format_version": FOSSIL_FORMAT_VERSION,
        "generation": generation,
        "population_name": population_name,
        "sample_size": len(organisms),
        "organisms": [_organism_record(o) for o in organisms],
    }
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def unused_path(path: Path) -> Path:
    """``path`` itself, or the first ``stem-N.suffix`` that does not exist yet."""
    if not path.exists():
        return path
    n = 1
    while True:
        candidate = path.with_name(f"{path.stem}-{n}{path.suffix}")
        if not candidate.exists():
            log.warning("%s exists; writing %s instead", path, candidate)
            return candidate
        n += 1


def freeze(population: Population, prefix: str, ratio: float, generation: int,
           rng: random.Random, directory: Path | str = ".", avoid_overwrite: bool = False) -> Path:
    """Write a uniform sample of the population to ``<prefix>_<generation>_<size>.gap``.

    At least ``min(100, population size)`` organisms are kept. The sample is
    written in population order so the file is canonical.
    """
    if not 0 < ratio <= 1:
        raise ValueError(f"fossilization ratio {ratio} outside (0, 1]")
    n = len(population.agents)
    size = fossil_sample_size(n, ratio)
    chosen = sorted(rng.sample(range(n), size))
    path = Path(directory) / f"{prefix}_{generation}_{size}.gap"
    if avoid_overwrite:
        path = unused_path(path)
    atomic_write(path, dumps_fossil([population.agents[i] for i in chosen], generation, population.name))
    return path


def load_fossil(path: Path | str) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FossilFormatError(f"{path}: corrupt fossil file ({exc})") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FOSSIL_FORMAT_VERSION:
        raise FossilFormatError(f"{path}: unsupported fossil format version")
    try:
        organisms = [_organism_from_record(r) for r in doc["organisms"]]
        if len(organisms) != doc["sample_size"]:
            raise FossilFormatError(f"{path}: sample_size does not match organism count")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FossilFormatError):
            raise
        raise FossilFormatError(f"{path}: malformed fossil record ({exc})") from exc
    doc["organisms"] = organisms
    return doc


def revive(path: Path | str) -> list[Organism]:
    return load_fossil(path)["organisms"]
