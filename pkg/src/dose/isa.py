"""Ragaraja instruction set: defined codons, versioned opcode tables, toggle files, NucleotideBF."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Kind(str, Enum):
    POINTER_MOVE = "pointer-move"
    CELL_ARITH = "cell-arith"
    TAPE_STRUCTURAL = "tape-structural"
    IO = "io"
    RANDOM = "random"
    MATH = "math"
    LOGIC = "logic"
    AGGREGATE = "aggregate"
    REGISTER_STORE = "register-store"
    REGISTER_LOAD = "register-load"
    UNDEFINED = "undefined"


# Inclusive ranges of defined codons (version 1).
DEFINED_RANGES: tuple[tuple[int, int], ...] = (
    (0, 13), (16, 25), (32, 47), (50, 81), (84, 117), (120, 128),
    (140, 147), (150, 171), (189, 189), (196, 198), (201, 299), (301, 399),
)


def _codons(*ranges: tuple[int, int]) -> list[str]:
    return [f"{n:03d}" for lo, hi in ranges for n in range(lo, hi + 1)]


DEFINED_CODONS: frozenset[str] = frozenset(_codons(*DEFINED_RANGES))

_KIND_RANGES: dict[Kind, tuple[tuple[int, int], ...]] = {
    Kind.POINTER_MOVE: ((0, 7), (43, 45), (61, 62), (140, 143)),
    Kind.CELL_ARITH: ((8, 13), (32, 33), (65, 80), (84, 87), (144, 145)),
    Kind.TAPE_STRUCTURAL: ((16, 19), (34, 35), (46, 46), (81, 81), (161, 164)),
    Kind.IO: ((20, 25), (36, 42), (47, 47), (63, 64)),
    Kind.RANDOM: ((50, 60),),
    Kind.MATH: ((88, 117),),
    Kind.LOGIC: ((120, 128),),
    Kind.AGGREGATE: ((146, 147), (150, 160), (165, 171), (189, 189), (196, 198)),
    Kind.REGISTER_STORE: ((201, 299),),
    Kind.REGISTER_LOAD: ((301, 399),),
}

KINDS: dict[str, Kind] = {
    codon: kind for kind, ranges in _KIND_RANGES.items() for codon in _codons(*ranges)
}


def kind_of(codon: str) -> Kind:
    if len(codon) != 3 or not codon.isdigit():
        raise ValueError(f"not a codon: {codon!r}")
    return KINDS.get(codon, Kind.UNDEFINED)


@dataclass(frozen=True)
class Opcode:
    codon: str
    kind: Kind


# NucleotideBF letter -> codon.
NBF_CODONS: dict[str, str] = {
    "G": "000", "C": "004", "A": "008", "T": "011", ".": "020",
    "R": "050", "Y": "051", "S": "052", "W": "053", "K": "054", "M": "055",
    "B": "056", "D": "057", "H": "058", "V": "059", "N": "060",
}

NBF_INSTRUCTIONS: frozenset[str] = frozenset(NBF_CODONS.values())

VERSIONS = (0, 0.1, 1)


class ToggleParseError(ValueError):
    """A line in an instruction toggle file is not ``NNN=Y`` or ``NNN=N``."""

    def __init__(self, lineno: int, line: str):
        super().__init__(f"line {lineno}: expected NNN=Y or NNN=N, got {line!r}")
        self.lineno = lineno
        self.line = line


@dataclass(frozen=True)
class OpcodeTable:
    """Immutable set of enabled codons for one instruction-set version."""

    enabled: frozenset[str]
    version: float

    def __post_init__(self) -> None:
        stray = self.enabled - DEFINED_CODONS
        if stray:
            raise ValueError(f"codons not defined in the instruction set: {sorted(stray)}")

    def __contains__(self, codon: object) -> bool:
        return codon in self.enabled

    def __len__(self) -> int:
        return len(self.enabled)

    def opcodes(self) -> list[Opcode]:
        return [Opcode(c, KINDS[c]) for c in sorted(self.enabled)]

    def instruction_list(self) -> list[str]:
        return sorted(self.enabled)


def parse_toggles(text: str) -> frozenset[str]:
    """Codons marked ``Y`` in toggle-file text, restricted to defined codons."""
    enabled = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        codon, sep, flag = line.partition("=")
        codon, flag = codon.strip(), flag.strip()
        if not sep or len(codon) != 3 or not codon.isdigit() or flag not in ("Y", "N"):
            raise ToggleParseError(lineno, raw)
        if flag == "Y":
            enabled.add(codon)
    return frozenset(enabled & DEFINED_CODONS)


def normalize_version(version: float | int | str) -> float:
    try:
        v = float(version)
    except (TypeError, ValueError):
        raise ValueError(f"unknown instruction set version: {version!r}") from None
    if v not in VERSIONS:
        raise ValueError(f"unknown instruction set version: {version!r} (expected 0, 0.1 or 1)")
    return v


def build_instruction_set(version: float | int | str, toggle_text: str | None = None) -> OpcodeTable:
    v = normalize_version(version)
    if v == 0:
        if toggle_text is None:
            raise ValueError("version 0 requires toggle file text")
        return OpcodeTable(parse_toggles(toggle_text), 0)
    if toggle_text is not None:
        raise ValueError(f"toggle text is only accepted for version 0, not {version}")
    if v == 0.1:
        return OpcodeTable(NBF_INSTRUCTIONS, 0.1)
    return OpcodeTable(DEFINED_CODONS, 1)


def nbf_transliterate(letters: str) -> str:
    out = []
    for i, ch in enumerate(letters):
        try:
            out.append(NBF_CODONS[ch])
        except KeyError:
            raise ValueError(f"unknown NucleotideBF character {ch!r} at position {i}") from None
    return "".join(out)
