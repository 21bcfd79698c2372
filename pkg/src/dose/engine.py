"""Generation loop tying world, populations and genome execution together."""

from __future__ import annotations

import logging
import os
from contextlib import contextmanager
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, TextIO

from .behaviors import Behaviors
from .config import SimulationConfig
from .genetics import (DIGITS, Chromosome, HookError, Organism, Population, freeze,
                       generation_step, unused_path)
from .isa import OpcodeTable, build_instruction_set
from .rng import LazyStream, derive_stream
from .vm import MachineState, format_trace_line, interpret
from .world import World

log = logging.getLogger(__name__)

Clock = Callable[[], str]


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def fixed_clock(stamp: str) -> Clock:
    datetime.fromisoformat(stamp)
    return lambda: stamp


class DriverAbort(RuntimeError):
    def __init__(self, generation: int, phase: str, cause: BaseException):
        super().__init__(f"generation {generation}, phase {phase}: {cause}")
        self.generation = generation
        self.phase = phase
        self.cause = cause


@dataclass
class RunArtifacts:
    result_files: dict[str, Path] = field(default_factory=dict)
    fossil_files: list[Path] = field(default_factory=list)
    eco_files: list[Path] = field(default_factory=list)
    records: dict[str, list[tuple[int, str]]] = field(default_factory=dict)
    world: World | None = None
    populations: dict[str, Population] = field(default_factory=dict)


def instruction_set(config: SimulationConfig) -> OpcodeTable:
    if config.ragaraja_version == 0:
        return build_instruction_set(0, config.toggle_path().read_text(encoding="utf-8"))
    return build_instruction_set(config.ragaraja_version)


def write_result_header(config: SimulationConfig, table: OpcodeTable, f: TextIO, clock: Clock) -> None:
    lines = [
        ("initial_chromosome", config.initial_chromosome),
        ("chromosome_size", len(config.initial_chromosome)),
        ("cytoplasm_size", config.cytoplasm_size),
        ("population_size", config.population_size),
        ("population_names", config.population_names),
        ("world_x", config.world_x),
        ("world_y", config.world_y),
        ("world_z", config.world_z),
        ("population_locations", config.population_locations),
        ("background_mutation_rate", config.background_mutation_rate),
        ("additional_mutation_rate", config.additional_mutation_rate),
        ("maximum_generations", config.maximum_generations),
        ("fossilized_ratio", config.fossilized_ratio),
        ("fossilized_frequency", config.fossilized_frequency),
        ("fossil_files", config.fossil_files),
        ("print_frequency", config.print_frequency),
        ("result_files", config.result_files),
        ("ragaraja_version", config.ragaraja_version),
        ("instruction_set", table.instruction_list()),
    ]
    f.write(f"STARTING SIMULATION - {clock()}\n")
    f.write("DOSE parameters:\n")
    for key, value in lines:
        f.write(f"{key} = {value}\n")


def initial_populations(config: SimulationConfig, world: World) -> dict[str, Population]:
    ancestor = Chromosome(config.initial_chromosome, DIGITS, config.background_mutation_rate)
    populations = {}
    for name, loc in zip(config.population_names, config.population_locations):
        agents = [
            Organism(genome=[ancestor.replicate()], status={"location": loc},
                     cytoplasm=[0.0] * config.cytoplasm_size)
            for _ in range(config.population_size)
        ]
        populations[name] = Population(name, agents, 0, config.maximum_generations)
        world.cell(loc).organisms = len(agents)
    return populations


# ---------------------------------------------------------------------------
# genome execution

_worker_table: OpcodeTable | None = None


def _init_worker(table: OpcodeTable) -> None:
    global _worker_table
    _worker_table = table


def _execute(job: tuple) -> MachineState:
    source, tape, inputs, max_tape, max_codon, key = job
    return interpret(source, _worker_table, inputs, tape, max_tape, max_codon, LazyStream(*key))


def _run_genomes(jobs: list[tuple], table: OpcodeTable, pool: ProcessPoolExecutor | None,
                 trace: Callable[[str], None] | None) -> list[MachineState]:
    if pool is not None:
        return list(pool.map(_execute, jobs, chunksize=max(1, len(jobs) // (4 * (os.cpu_count() or 1)))))
    results = []
    for source, tape, inputs, max_tape, max_codon, key in jobs:
        hook = None
        if trace is not None:
            trace(f"# generation {key[1]} population {key[2]} organism {key[3]}")
            hook = lambda st, codon, ptr, before: trace(format_trace_line(st, codon, ptr, before))
        results.append(interpret(source, table, inputs, tape, max_tape, max_codon, LazyStream(*key), hook))
    return results


# ---------------------------------------------------------------------------
# driver


def run_simulation(config: SimulationConfig, behaviors: Behaviors, clock: Clock = utc_now,
                   directory: Path | str = ".", workers: int = 1,
                   trace: Callable[[str], None] | None = None,
                   progress: Callable[[int, str, Any], None] | None = None,
                   avoid_overwrite: bool = True) -> RunArtifacts:
    """Run the whole simulation, writing result, fossil and ecosystem files to ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    table = instruction_set(config)
    seed = config.rng_seed
    world = World(*config.dims)
    populations = initial_populations(config, world)
    behaviors.bind(world, populations)
    art = RunArtifacts(world=world, populations=populations)

    for name in config.population_names:
        path = directory / f"{config.result_files[name]}.result.txt"
        with path.open("a", encoding="utf-8") as f:
            write_result_header(config, table, f, clock)
        art.result_files[name] = path
        art.records[name] = []

    pool = None
    if workers > 1 and trace is None:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(table,))
    try:
        for gen in range(1, config.maximum_generations + 1):
            _generation(gen, config, behaviors, world, populations, table, seed, directory,
                        pool, trace, progress, clock, art, avoid_overwrite)
    finally:
        if pool is not None:
            pool.shutdown()
    return art


@contextmanager
def _phase(gen: int, name: str):
    try:
        yield
    except DriverAbort:
        raise
    except Exception as exc:
        raise DriverAbort(gen, name, exc) from exc


def _world_hook(behaviors: Behaviors, hook: str, *args) -> Any:
    try:
        return getattr(behaviors, hook)(*args)
    except Exception as exc:
        raise HookError(hook, exc) from exc


def _generation(gen: int, config: SimulationConfig, behaviors: Behaviors, world: World,
                populations: dict[str, Population], table: OpcodeTable, seed: int,
                directory: Path, pool, trace, progress, clock: Clock, art: RunArtifacts,
                avoid_overwrite: bool) -> None:
    with _phase(gen, "ecoregulate"):
        _world_hook(behaviors, "ecoregulate", world, LazyStream(seed, gen, -1, -1, "ecoregulate"))

    with _phase(gen, "update_ecology/update_local"):
        for x, y, z in world.coords():
            _world_hook(behaviors, "update_ecology", world, x, y, z,
                        LazyStream(seed, gen, -1, -1, f"update_ecology:{x},{y},{z}"))
            _world_hook(behaviors, "update_local", world, x, y, z,
                        LazyStream(seed, gen, -1, -1, f"update_local:{x},{y},{z}"))

    with _phase(gen, "genome execution"):
        jobs, owners = [], []
        for p, name in enumerate(config.population_names):
            for i, org in enumerate(populations[name].agents):
                if not org.genome:
                    continue
                tape = [0.0] * config.cytoplasm_size if config.clean_cytoplasm else org.cytoplasm
                cell = world.cell(org.status["location"])
                jobs.append((org.source(), tape, cell.local_input, config.max_cytoplasm_size,
                             config.max_codon, (seed, gen, p, i, "vm")))
                owners.append((org, cell))
        for (org, cell), state in zip(owners, _run_genomes(jobs, table, pool, trace)):
            org.cytoplasm = state.tape
            cell.temporary_input = state.input
            cell.temporary_output = state.output

    for p, name in enumerate(config.population_names):
        pop = populations[name]
        with _phase(gen, f"generation_step[{name}]"):
            report = generation_step(
                pop, behaviors, lambda i, purpose, p=p: LazyStream(seed, gen, p, i, purpose))
        if gen % config.fossilized_frequency == 0:
            with _phase(gen, f"fossilize[{name}]"):
                path = freeze(pop, config.fossil_files[name], config.fossilized_ratio, gen,
                              derive_stream(seed, gen, p, -1, "freeze"), directory,
                              avoid_overwrite=avoid_overwrite)
                art.fossil_files.append(path)
        if gen % config.print_frequency == 0:
            with _phase(gen, f"report[{name}]"):
                payload = str(report)
                with art.result_files[name].open("a", encoding="utf-8") as f:
                    f.write("\t".join([clock(), str(gen), payload]) + "\n")
                art.records[name].append((gen, payload))
                if progress is not None:
                    progress(gen, name, report)

    with _phase(gen, "organism_movement/organism_location"):
        for x, y, z in world.coords():
            _world_hook(behaviors, "organism_movement", world, x, y, z,
                        LazyStream(seed, gen, -1, -1, f"organism_movement:{x},{y},{z}"))
            _world_hook(behaviors, "organism_location", world, x, y, z,
                        LazyStream(seed, gen, -1, -1, f"organism_location:{x},{y},{z}"))
    with _phase(gen, "world_report"):
        _world_hook(behaviors, "world_report", world)

    if gen % config.eco_buried_frequency == 0:
        with _phase(gen, "eco_burial"):
            path = directory / f"{config.eco_burial_file}_{gen}.eco"
            if avoid_overwrite:
                path = unused_path(path)
            art.eco_files.append(world.eco_burial(path))
