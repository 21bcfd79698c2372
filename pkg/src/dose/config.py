"""Simulation parameters: ``key = value`` files with Python-literal values."""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .isa import VERSIONS


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class SimulationConfig:
    initial_chromosome: list[str]
    background_mutation_rate: float
    additional_mutation_rate: float
    cytoplasm_size: int
    max_cytoplasm_size: int
    clean_cytoplasm: bool
    max_codon: int
    population_names: list[str]
    population_size: int
    world_x: int
    world_y: int
    world_z: int
    population_locations: list[tuple[int, int, int]]
    maximum_generations: int
    fossilized_frequency: int
    fossilized_ratio: float
    fossil_files: dict[str, str]
    print_frequency: int
    result_files: dict[str, str]
    ragaraja_version: float
    eco_buried_frequency: int
    eco_burial_file: str
    user_defined_instructions: str = "ragaraja_instructions.txt"
    rng_seed: int = 0
    base_dir: Path = field(default=Path("."), compare=False, repr=False)

    def __post_init__(self) -> None:
        _validate(self)

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.world_x, self.world_y, self.world_z)

    def replace(self, **changes: Any) -> SimulationConfig:
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SimulationConfig(**values)

    def toggle_path(self) -> Path:
        return self.base_dir / self.user_defined_instructions


OPTIONAL = {"user_defined_instructions", "rng_seed", "base_dir"}


def _positive_int(cfg, key):
    v = getattr(cfg, key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ConfigError(key, f"expected a positive integer, got {v!r}")


def _nonneg_int(cfg, key):
    v = getattr(cfg, key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ConfigError(key, f"expected a non-negative integer, got {v!r}")


def _real(cfg, key):
    v = getattr(cfg, key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(key, f"expected a number, got {v!r}")


def _validate(cfg: SimulationConfig) -> None:
    chrom = cfg.initial_chromosome
    if isinstance(chrom, str):
        cfg.initial_chromosome = chrom = list(chrom)
    if (not isinstance(chrom, list) or not chrom
            or not all(isinstance(s, str) and len(s) == 1 and s.isdigit() for s in chrom)):
        raise ConfigError("initial_chromosome", "expected a non-empty list of decimal digits")
    for key in ("background_mutation_rate", "additional_mutation_rate", "fossilized_ratio"):
        _real(cfg, key)
    for key in ("cytoplasm_size", "max_cytoplasm_size", "max_codon", "population_size",
                "world_x", "world_y", "world_z", "fossilized_frequency", "print_frequency",
                "eco_buried_frequency"):
        _positive_int(cfg, key)
    _nonneg_int(cfg, "maximum_generations")
    _nonneg_int(cfg, "rng_seed")
    if not isinstance(cfg.clean_cytoplasm, bool):
        raise ConfigError("clean_cytoplasm", f"expected True or False, got {cfg.clean_cytoplasm!r}")
    if cfg.cytoplasm_size > cfg.max_cytoplasm_size:
        raise ConfigError("cytoplasm_size", "must not exceed max_cytoplasm_size")
    if not 0 < cfg.fossilized_ratio <= 1:
        raise ConfigError("fossilized_ratio", "must lie in (0, 1]")
    if cfg.ragaraja_version not in VERSIONS or isinstance(cfg.ragaraja_version, bool):
        raise ConfigError("ragaraja_version", f"expected one of 0, 0.1, 1, got {cfg.ragaraja_version!r}")
    names = cfg.population_names
    if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
        raise ConfigError("population_names", "expected a non-empty list of names")
    if len(set(names)) != len(names):
        raise ConfigError("population_names", "names must be unique")
    locs = cfg.population_locations
    if not isinstance(locs, list) or len(locs) != len(names):
        raise ConfigError("population_locations", "need exactly one location per population")
    cfg.population_locations = locs = [tuple(loc) if isinstance(loc, (list, tuple)) else loc for loc in locs]
    for loc in locs:
        if (not isinstance(loc, tuple) or len(loc) != 3
                or not all(isinstance(c, int) and 0 <= c < d for c, d in zip(loc, cfg.dims))):
            raise ConfigError("population_locations", f"location {loc!r} outside world {cfg.dims}")
    for key in ("fossil_files", "result_files"):
        mapping = getattr(cfg, key)
        if not isinstance(mapping, dict):
            raise ConfigError(key, "expected a {name: prefix} mapping")
        missing = [n for n in names if not isinstance(mapping.get(n), str)]
        if missing:
            raise ConfigError(key, f"no file prefix for population(s) {missing}")
    for key in ("eco_burial_file", "user_defined_instructions"):
        if not isinstance(getattr(cfg, key), str):
            raise ConfigError(key, "expected a file name")


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def _depth(text: str) -> int:
    return sum(text.count(o) - text.count(c) for o, c in ("[]", "()", "{}"))


def parse_pairs(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; bracketed values may continue over several lines."""
    pairs: dict[str, Any] = {}
    pending: tuple[str, str, int] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if pending is not None:
            key, value, start = pending
            value = f"{value} {line}"
            if _depth(value) > 0:
                pending = (key, value, start)
                continue
            pending = None
            pairs[key] = _literal(value)
            continue
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key.isidentifier():
            raise ConfigError(key or f"line {lineno}", f"line {lineno}: expected 'key = value'")
        if key in pairs:
            raise ConfigError(key, f"line {lineno}: duplicate key")
        if _depth(value) > 0:
            pending = (key, value, lineno)
            continue
        pairs[key] = _literal(value)
    if pending is not None:
        raise ConfigError(pending[0], f"line {pending[2]}: unterminated bracketed value")
    return pairs


def _literal(value: str) -> Any:
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        return value


def load_config(text: str, base_dir: Path | str = ".") -> SimulationConfig:
    pairs = parse_pairs(text)
    known = {f.name for f in fields(SimulationConfig)} - {"base_dir"}
    unknown = sorted(set(pairs) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown parameter")
    missing = [k for k in sorted(known - OPTIONAL) if k not in pairs]
    if missing:
        raise ConfigError(missing[0], "missing required parameter")
    if pairs.get("ragaraja_version") == 0 and "user_defined_instructions" not in pairs:
        raise ConfigError("user_defined_instructions", "required when ragaraja_version = 0")
    return SimulationConfig(**pairs, base_dir=Path(base_dir))


def load_config_file(path: Path | str) -> SimulationConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config file ({exc.strerror})") from exc
    return load_config(text, base_dir=path.parent)


DEFAULT_CONFIG = """\
# Ancestor chromosome (58 bases)
initial_chromosome = ['0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0',
    '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0',
    '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0',
    '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0', '0',
    '0', '0', '0', '0']
background_mutation_rate = 0.1
additional_mutation_rate = 0
cytoplasm_size = 50
max_cytoplasm_size = 200
clean_cytoplasm = True
max_codon = 2000
population_names = ['pop1', 'pop2']
population_size = 100
world_x = 5
world_y = 5
world_z = 5
population_locations = [(0, 0, 0), (4, 4, 4)]
maximum_generations = 500
fossilized_frequency = 100
fossilized_ratio = 0.01
fossil_files = {'pop1': 'pop1', 'pop2': 'pop2'}
print_frequency = 10
result_files = {'pop1': 'pop1', 'pop2': 'pop2'}
ragaraja_version = 0.1
user_defined_instructions = 'ragaraja_instructions.txt'
eco_buried_frequency = 500
eco_burial_file = 'eco'
rng_seed = 0
"""


def default_config(**changes: Any) -> SimulationConfig:
    cfg = load_config(DEFAULT_CONFIG)
    return cfg.replace(**changes) if changes else cfg
