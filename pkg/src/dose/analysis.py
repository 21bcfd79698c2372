"""Post-run analysis: genome divergence, cytoplasm averages and correlation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .genetics import Organism, revive

HEADER_MARK = "STARTING SIMULATION - "


class ResultFormatError(ValueError):
    pass


def hamming_distance(a: Sequence, b: Sequence) -> int:
    if len(a) != len(b):
        raise ValueError(f"sequences differ in length ({len(a)} != {len(b)})")
    return sum(1 for x, y in zip(a, b) if x != y)


@dataclass
class DistanceSeries:
    baseline_generation: int
    genome_length: int
    # (generation, mean distance to baseline)
    points: list[tuple[int, float]] = field(default_factory=list)
    pairing: str = "index"

    def generations(self) -> list[int]:
        return [g for g, _ in self.points]

    def distances(self) -> list[float]:
        return [d for _, d in self.points]

    def normalized(self) -> list[float]:
        return [d / self.genome_length for _, d in self.points]


def read_result_runs(path: Path | str) -> list[dict[int, str]]:
    """Records of each run appended to a result file, as ``{generation: payload}``."""
    runs: list[dict[int, str]] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if line.startswith(HEADER_MARK):
            runs.append({})
            continue
        parts = line.split("\t", 2)
        if len(parts) < 2 or not parts[1].isdigit():
            continue  # parameter echo line
        if not runs:
            raise ResultFormatError(f"{path}:{lineno}: record before any run header")
        gen = int(parts[1])
        if gen in runs[-1]:
            raise ResultFormatError(f"{path}:{lineno}: generation {gen} recorded twice in one run")
        runs[-1][gen] = parts[2] if len(parts) > 2 else ""
    return runs


def read_result_file(path: Path | str, run: int = -1) -> dict[int, str]:
    runs = read_result_runs(path)
    if not runs:
        raise ResultFormatError(f"{path}: no simulation run found")
    return runs[run]


def _genomes(payload: str) -> list[str]:
    return payload.split("\t") if payload else []


def divergence_from_records(records: dict[int, str], baseline_generation: int,
                            interval: int) -> DistanceSeries:
    if interval < 1:
        raise ValueError("interval must be positive")
    if baseline_generation not in records:
        raise ValueError(f"baseline generation {baseline_generation} not recorded")
    base = _genomes(records[baseline_generation])
    if not base:
        raise ValueError("baseline record has no genomes")
    series = DistanceSeries(baseline_generation, len(base[0]))
    for gen in sorted(records):
        if gen < baseline_generation or (gen - baseline_generation) % interval:
            continue
        genomes = _genomes(records[gen])
        if len(genomes) != len(base):
            raise ValueError(f"generation {gen}: {len(genomes)} organisms, baseline has {len(base)}")
        mean = sum(hamming_distance(g, b) for g, b in zip(genomes, base)) / len(base)
        series.points.append((gen, mean))
    return series


def divergence_series(result_file: Path | str, baseline_generation: int = 10,
                      interval: int = 10, run: int = -1) -> DistanceSeries:
    """Mean Hamming distance of each organism's genome to its own genome at the baseline.

    Organisms are paired by position in the population across generations.
    """
    return divergence_from_records(read_result_file(result_file, run), baseline_generation, interval)


def mean_cytoplasm(organisms: Iterable[Organism] | Path | str) -> float:
    if isinstance(organisms, (str, Path)):
        organisms = revive(organisms)
    values = [x for org in organisms for x in org.cytoplasm]
    if not values:
        raise ValueError("no cytoplasm values in snapshot")
    return math.fsum(values) / len(values)


def mean_cytoplasm_payload(payload: str) -> float:
    """Mean over a report of TAB-separated, comma-joined cytoplasm strings."""
    values = [float(v) for org in payload.split("\t") if org for v in org.split(",")]
    if not values:
        raise ValueError("no cytoplasm values in record")
    return math.fsum(values) / len(values)


def cytoplasm_series(result_file: Path | str, run: int = -1) -> list[tuple[int, float]]:
    records = read_result_file(result_file, run)
    return [(g, mean_cytoplasm_payload(records[g])) for g in sorted(records)]


def pearson_r(xs: Sequence[float], ys: Sequence[float]) -> float:
    n = len(xs)
    if n != len(ys):
        raise ValueError("xs and ys differ in length")
    if n < 2:
        raise ValueError("need at least two points")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise ValueError("correlation undefined for zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))
