"""Multi-tape register machine executing Ragaraja genomes.

The machine reads its source tape three digits at a time and computes on a
working tape of reals (the cytoplasm), with an input list, an output list and
99 registers. Runtime faults never propagate: they end execution with a trap
and leave the state exactly as it was after the last completed instruction.
Every handler below computes its result before touching the state, which is
what makes that guarantee hold without snapshotting.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, Optional

from .isa import DEFINED_CODONS, OpcodeTable

N_REGISTERS = 99

RUNNING = "running"
END_OF_SOURCE = "end-of-source"
BUDGET_EXHAUSTED = "budget-exhausted"


class TrapKind(str, Enum):
    INDEX = "index-out-of-range"
    ZERO_DIVISION = "zero-division"
    OVERFLOW = "overflow"
    DOMAIN = "domain-error"


def trapped(kind: TrapKind) -> str:
    return f"trapped({kind.value})"


@dataclass(slots=True)
class MachineState:
    tape: list[float]
    source: str = ""
    tape_pointer: int = 0
    source_pointer: int = 0
    input: list[float] = field(default_factory=list)
    output: list[float] = field(default_factory=list)
    registers: list[float] = field(default_factory=lambda: [0.0] * N_REGISTERS)
    instruction_count: int = 0
    max_tape_size: int = 200
    halt_reason: str = RUNNING
    trap: Optional[TrapKind] = None

    def copy(self) -> MachineState:
        return MachineState(
            list(self.tape), self.source, self.tape_pointer, self.source_pointer,
            list(self.input), list(self.output), list(self.registers),
            self.instruction_count, self.max_tape_size, self.halt_reason, self.trap,
        )


def remaining_codons(state: MachineState) -> int:
    """Whole codons left to fetch; a trailing fragment shorter than 3 never executes."""
    return max(0, len(state.source) - state.source_pointer) // 3


# ---------------------------------------------------------------------------
# handlers


def _finite(x: float) -> float:
    if not math.isfinite(x):
        raise OverflowError("value outside double-precision range")
    return x


def _all_finite(values: list[float]) -> list[float]:
    for x in values:
        if not math.isfinite(x):
            raise OverflowError("value outside double-precision range")
    return values


def _mean(values: list[float]) -> float:
    return _finite(math.fsum(values) / len(values))


def _factorial(x: float) -> float:
    n = int(x)
    if n < 0:
        raise ValueError("factorial of a negative value")
    if n > 170:
        raise OverflowError("factorial exceeds double-precision range")
    return float(math.factorial(n))


def _harmonic_mean(values: list[float]) -> float:
    if any(v == 0 for v in values):
        raise ValueError("harmonic mean with a zero value")
    return _finite(len(values) / math.fsum(1.0 / v for v in values))


def _geometric_mean(values: list[float]) -> float:
    if any(v <= 0 for v in values):
        raise ValueError("geometric mean needs positive values")
    return _finite(math.exp(math.fsum(math.log(v) for v in values) / len(values)))


def _truth(x: float) -> bool:
    return x > 0


Handler = Callable[[MachineState, random.Random], None]
HANDLERS: dict[str, Handler] = {}


def _op(*codons: str):
    def register(fn: Handler) -> Handler:
        for c in codons:
            HANDLERS[c] = fn
        return fn
    return register


def _move(k: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.tape_pointer = (s.tape_pointer + k) % len(s.tape)
    return op


def _move_square(sign: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        v = s.tape[s.tape_pointer]
        s.tape_pointer = (s.tape_pointer + sign * math.floor(v * v)) % len(s.tape)
    return op


def _move_by_cell(sign: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.tape_pointer = (s.tape_pointer + sign * int(s.tape[s.tape_pointer])) % len(s.tape)
    return op


def _cell(fn: Callable[[float], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        p = s.tape_pointer
        s.tape[p] = _finite(fn(s.tape[p]))
    return op


def _with_next(fn: Callable[[float, float], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        p = s.tape_pointer
        s.tape[p] = _finite(fn(s.tape[p], s.tape[p + 1]))
    return op


def _with_input(index: int, fn: Callable[[float, float], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        p = s.tape_pointer
        s.tape[p] = _finite(fn(s.tape[p], s.input[index]))
    return op


def _whole_tape(fn: Callable[[float], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.tape[:] = _all_finite([fn(x) for x in s.tape])
    return op


def _after(fn: Callable[[float], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        p = s.tape_pointer + 1
        s.tape[p:] = _all_finite([fn(x) for x in s.tape[p:]])
    return op


def _before(fn: Callable[[float], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        p = s.tape_pointer
        s.tape[:p] = _all_finite([fn(x) for x in s.tape[:p]])
    return op


def _set_from_tape(fn: Callable[[list[float], int], float]) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.tape[s.tape_pointer] = _finite(fn(s.tape, s.tape_pointer))
    return op


def _skip(k: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        if s.source_pointer + 3 + 3 * k <= len(s.source):
            s.source_pointer += 3 * k
    return op


def _random_of(*choices: str) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        HANDLERS[rng.choice(choices)](s, rng)
    return op


def _store(k: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.registers[k - 1] = s.tape[s.tape_pointer]
    return op


def _load(k: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.tape[s.tape_pointer] = s.registers[k - 1]
    return op


# pointer moves; past either end the destination wraps modulo the tape length
HANDLERS["000"] = _move(1)
HANDLERS["001"] = _move(5)
HANDLERS["002"] = _move(10)
HANDLERS["003"] = _move_square(1)
HANDLERS["004"] = _move(-1)
HANDLERS["005"] = _move(-5)
HANDLERS["006"] = _move(-10)
HANDLERS["007"] = _move_square(-1)

for _codon, _delta in (("008", 1), ("009", 5), ("010", 10), ("011", -1), ("012", -5), ("013", -10)):
    HANDLERS[_codon] = _cell(lambda x, d=_delta: x + d)


@_op("016")
def _grow1(s: MachineState, rng: random.Random) -> None:
    if len(s.tape) < s.max_tape_size:
        s.tape.append(0.0)


@_op("017")
def _grow10(s: MachineState, rng: random.Random) -> None:
    s.tape.extend([0.0] * max(0, min(10, s.max_tape_size - len(s.tape))))


def _shrink(k: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        new_len = max(1, len(s.tape) - k)
        del s.tape[new_len:]
        if s.tape_pointer >= new_len:
            s.tape_pointer = new_len - 1
    return op


HANDLERS["018"] = _shrink(1)
HANDLERS["019"] = _shrink(10)


@_op("020")
def _out_value(s: MachineState, rng: random.Random) -> None:
    s.output.append(s.tape[s.tape_pointer])


@_op("021")
def _out_tape_location(s: MachineState, rng: random.Random) -> None:
    s.output.append(float(s.tape_pointer))


@_op("022")
def _out_source_location(s: MachineState, rng: random.Random) -> None:
    s.output.append(float(s.source_pointer))


HANDLERS["023"] = _skip(1)
HANDLERS["024"] = _skip(5)
HANDLERS["025"] = _skip(10)

HANDLERS["032"] = _cell(lambda x: x * 2)
HANDLERS["033"] = _cell(lambda x: x / 2)


@_op("034")
def _insert_after(s: MachineState, rng: random.Random) -> None:
    if len(s.tape) < s.max_tape_size:
        s.tape.insert(s.tape_pointer + 1, 0.0)


@_op("035")
def _delete_current(s: MachineState, rng: random.Random) -> None:
    if len(s.tape) > 1:
        del s.tape[s.tape_pointer]
        if s.tape_pointer >= len(s.tape):
            s.tape_pointer = len(s.tape) - 1


@_op("036")
def _delete_to_output(s: MachineState, rng: random.Random) -> None:
    if len(s.tape) > 1:
        s.output.append(s.tape.pop(s.tape_pointer))
        if s.tape_pointer >= len(s.tape):
            s.tape_pointer = len(s.tape) - 1


@_op("037")
def _take_last_output(s: MachineState, rng: random.Random) -> None:
    s.tape[s.tape_pointer] = s.output[-1]
    s.output.pop()


@_op("038")
def _copy_last_output(s: MachineState, rng: random.Random) -> None:
    s.tape[s.tape_pointer] = s.output[-1]


@_op("039")
def _take_first_output(s: MachineState, rng: random.Random) -> None:
    s.tape[s.tape_pointer] = s.output[0]
    del s.output[0]


@_op("040")
def _copy_first_output(s: MachineState, rng: random.Random) -> None:
    s.tape[s.tape_pointer] = s.output[0]


@_op("041")
def _drop_first_output(s: MachineState, rng: random.Random) -> None:
    if not s.output:
        raise IndexError("output list is empty")
    del s.output[0]


@_op("042")
def _drop_last_output(s: MachineState, rng: random.Random) -> None:
    s.output.pop()


@_op("043")
def _to_first(s: MachineState, rng: random.Random) -> None:
    s.tape_pointer = 0


@_op("044")
def _to_last(s: MachineState, rng: random.Random) -> None:
    s.tape_pointer = len(s.tape) - 1


@_op("045")
def _to_last_output(s: MachineState, rng: random.Random) -> None:
    s.tape_pointer = int(s.output[-1]) % len(s.tape)


@_op("046")
def _flip_tape(s: MachineState, rng: random.Random) -> None:
    s.tape.reverse()


@_op("047")
def _flip_output(s: MachineState, rng: random.Random) -> None:
    s.output.reverse()


# option order follows the instruction table
HANDLERS["050"] = _random_of("008", "000")
HANDLERS["051"] = _random_of("011", "004")
HANDLERS["052"] = _random_of("000", "004")
HANDLERS["053"] = _random_of("008", "011")
HANDLERS["054"] = _random_of("000", "011")
HANDLERS["055"] = _random_of("004", "008")
HANDLERS["056"] = _random_of("000", "004", "011")
HANDLERS["057"] = _random_of("000", "008", "011")
HANDLERS["058"] = _random_of("004", "008", "011")
HANDLERS["059"] = _random_of("000", "004", "008")
HANDLERS["060"] = _random_of("000", "004", "008", "011")

HANDLERS["061"] = _move_by_cell(1)
HANDLERS["062"] = _move_by_cell(-1)


@_op("063")
def _read_input(s: MachineState, rng: random.Random) -> None:
    s.tape[s.tape_pointer] = s.input.pop(0) if s.input else 0.0


@_op("064")
def _peek_input(s: MachineState, rng: random.Random) -> None:
    s.tape[s.tape_pointer] = s.input[0] if s.input else 0.0


HANDLERS["065"] = _with_next(lambda a, b: a + b)
HANDLERS["066"] = _with_input(0, lambda a, i: a + i)
HANDLERS["067"] = _with_input(-1, lambda a, i: a + i)
HANDLERS["068"] = _with_next(lambda a, b: b - a)
HANDLERS["069"] = _with_input(0, lambda a, i: i - a)
HANDLERS["070"] = _with_input(-1, lambda a, i: i - a)
HANDLERS["071"] = _with_next(lambda a, b: b * a)
HANDLERS["072"] = _with_input(0, lambda a, i: i * a)
HANDLERS["073"] = _with_input(-1, lambda a, i: i * a)
HANDLERS["074"] = _with_next(lambda a, b: b / a)
HANDLERS["075"] = _with_input(0, lambda a, i: i / a)
HANDLERS["076"] = _with_input(-1, lambda a, i: i / a)
HANDLERS["077"] = _with_next(lambda a, b: b % a)
HANDLERS["078"] = _with_input(0, lambda a, i: i % a)
HANDLERS["079"] = _with_input(-1, lambda a, i: i % a)
HANDLERS["080"] = _cell(lambda x: float(math.floor(x)))


@_op("081")
def _swap_next(s: MachineState, rng: random.Random) -> None:
    p = s.tape_pointer
    s.tape[p], s.tape[p + 1] = s.tape[p + 1], s.tape[p]


HANDLERS["084"] = _cell(lambda x: 0.0)
HANDLERS["085"] = _cell(lambda x: -1.0)
HANDLERS["086"] = _cell(lambda x: 1.0)
HANDLERS["087"] = _cell(lambda x: -x)
HANDLERS["088"] = _cell(math.sin)
HANDLERS["089"] = _cell(math.cos)
HANDLERS["090"] = _cell(math.tan)
HANDLERS["091"] = _cell(math.asin)
HANDLERS["092"] = _cell(math.acos)
HANDLERS["093"] = _cell(math.atan)
HANDLERS["094"] = _cell(lambda x: 1 / x)
HANDLERS["095"] = _cell(math.sqrt)
HANDLERS["096"] = _cell(math.log)
HANDLERS["097"] = _cell(lambda x: math.pi)
HANDLERS["098"] = _cell(lambda x: math.e)
HANDLERS["099"] = _cell(math.sinh)
HANDLERS["100"] = _cell(math.cosh)
HANDLERS["101"] = _cell(math.tanh)
HANDLERS["102"] = _cell(math.asinh)
HANDLERS["103"] = _cell(math.acosh)
HANDLERS["104"] = _cell(math.atanh)
HANDLERS["105"] = _cell(math.degrees)
HANDLERS["106"] = _cell(math.radians)
HANDLERS["107"] = _cell(lambda x: math.pow(x, math.e))
HANDLERS["108"] = _cell(math.exp)
HANDLERS["109"] = _cell(lambda x: math.pow(10.0, x))
HANDLERS["110"] = _with_next(lambda a, b: math.pow(a, b))
HANDLERS["111"] = _with_next(lambda a, b: math.pow(a, 1 / b))
HANDLERS["112"] = _cell(math.erf)
HANDLERS["113"] = _cell(math.erfc)
HANDLERS["114"] = _cell(_factorial)
HANDLERS["115"] = _cell(lambda x: _factorial(abs(x)))
HANDLERS["116"] = _with_next(math.hypot)
HANDLERS["117"] = _with_next(lambda a, b: math.log(a, b))

HANDLERS["120"] = _with_next(lambda a, b: float(_truth(a) and _truth(b)))
HANDLERS["121"] = _with_next(lambda a, b: float(_truth(a) or _truth(b)))
HANDLERS["122"] = _cell(lambda x: float(not _truth(x)))
HANDLERS["123"] = _with_next(lambda a, b: float(a < b))
HANDLERS["124"] = _with_next(lambda a, b: float(a > b))
HANDLERS["125"] = _with_next(lambda a, b: float(a == b))
HANDLERS["126"] = _with_next(lambda a, b: float(a != b))
HANDLERS["127"] = _with_next(lambda a, b: float(a <= b))
HANDLERS["128"] = _with_next(lambda a, b: float(a >= b))


def _to_fraction(num: int, den: int) -> Handler:
    def op(s: MachineState, rng: random.Random) -> None:
        s.tape_pointer = (num * len(s.tape)) // den
    return op


HANDLERS["140"] = _to_fraction(1, 2)
HANDLERS["141"] = _to_fraction(1, 4)
HANDLERS["142"] = _to_fraction(3, 4)


@_op("143")
def _to_cell_value(s: MachineState, rng: random.Random) -> None:
    s.tape_pointer = int(s.tape[s.tape_pointer]) % len(s.tape)


HANDLERS["144"] = _cell(lambda x: x / 10)
HANDLERS["145"] = _cell(lambda x: x * 10)

HANDLERS["146"] = _set_from_tape(lambda t, n: math.fsum(t[n + 1:]))
HANDLERS["147"] = _set_from_tape(lambda t, n: math.fsum(t[n:]))
HANDLERS["150"] = _set_from_tape(lambda t, n: math.fsum(t))
HANDLERS["151"] = _set_from_tape(lambda t, n: _mean(t[n + 1:]))
HANDLERS["152"] = _set_from_tape(lambda t, n: _mean(t[n:]))
HANDLERS["153"] = _set_from_tape(lambda t, n: _mean(t[:n]))
HANDLERS["154"] = _set_from_tape(lambda t, n: _mean(t[:n + 1]))

HANDLERS["155"] = _whole_tape(lambda x: x / 2)
HANDLERS["156"] = _whole_tape(lambda x: x * 2)
HANDLERS["157"] = _whole_tape(lambda x: x / 10)
HANDLERS["158"] = _whole_tape(lambda x: x * 10)
HANDLERS["159"] = _whole_tape(lambda x: x / 100)
HANDLERS["160"] = _whole_tape(lambda x: x * 100)


@_op("161")
def _rotate_to_current(s: MachineState, rng: random.Random) -> None:
    p = s.tape_pointer
    s.tape[:] = s.tape[p:] + s.tape[:p]
    s.tape_pointer = 0


@_op("162")
def _rotate_after_current(s: MachineState, rng: random.Random) -> None:
    p = s.tape_pointer
    s.tape[:] = s.tape[p + 1:] + s.tape[:p + 1]
    s.tape_pointer = len(s.tape) - 1


@_op("163")
def _current_to_front(s: MachineState, rng: random.Random) -> None:
    s.tape.insert(0, s.tape.pop(s.tape_pointer))
    s.tape_pointer = 0


@_op("164")
def _current_to_end(s: MachineState, rng: random.Random) -> None:
    s.tape.append(s.tape.pop(s.tape_pointer))
    s.tape_pointer = len(s.tape) - 1


HANDLERS["165"] = _whole_tape(lambda x: -x)
HANDLERS["166"] = _after(lambda x: x * x)
HANDLERS["167"] = _before(lambda x: x * x)
HANDLERS["168"] = _whole_tape(lambda x: x * x)
HANDLERS["169"] = _whole_tape(math.sqrt)
HANDLERS["170"] = _after(math.sqrt)
HANDLERS["171"] = _before(math.sqrt)
HANDLERS["189"] = _whole_tape(lambda x: 0.0)

HANDLERS["196"] = _set_from_tape(lambda t, n: statistics.pstdev(t))
HANDLERS["197"] = _set_from_tape(lambda t, n: _geometric_mean(t))
HANDLERS["198"] = _set_from_tape(lambda t, n: _harmonic_mean(t))

for _k in range(1, N_REGISTERS + 1):
    HANDLERS[f"{200 + _k:03d}"] = _store(_k)
    HANDLERS[f"{300 + _k:03d}"] = _load(_k)

assert set(HANDLERS) == DEFINED_CODONS, sorted(set(HANDLERS) ^ DEFINED_CODONS)


# ---------------------------------------------------------------------------
# execution

_TRAPS: tuple[tuple[type[BaseException], TrapKind], ...] = (
    (IndexError, TrapKind.INDEX),
    (ZeroDivisionError, TrapKind.ZERO_DIVISION),
    (OverflowError, TrapKind.OVERFLOW),
    (ValueError, TrapKind.DOMAIN),
)
_TRAP_TYPES = tuple(t for t, _ in _TRAPS)


def classify_trap(exc: BaseException) -> TrapKind:
    for etype, kind in _TRAPS:
        if isinstance(exc, etype):
            return kind
    raise TypeError(f"not a trap: {exc!r}")


@lru_cache(maxsize=32)
def dispatch_table(table: OpcodeTable) -> dict[str, Handler]:
    return {c: HANDLERS[c] for c in table.enabled}


def apply_opcode(state: MachineState, codon: str, table: OpcodeTable,
                 rng: random.Random) -> MachineState:
    """Execute one codon in place. Disabled or undefined codons only advance the machine."""
    if state.halt_reason != RUNNING:
        raise ValueError(f"machine is not running ({state.halt_reason})")
    handler = HANDLERS.get(codon) if codon in table.enabled else None
    if handler is not None:
        try:
            handler(state, rng)
        except _TRAP_TYPES as exc:
            state.trap = classify_trap(exc)
            state.halt_reason = trapped(state.trap)
            return state
    state.source_pointer += 3
    state.instruction_count += 1
    return state


# called after every completed instruction with
# (state, codon, tape pointer before, cell value before)
TraceHook = Callable[[MachineState, str, int, float], None]


def interpret(source: str, table: OpcodeTable, input: Iterable[float] = (),
              tape: Iterable[float] = (0.0,), max_tape_size: int = 200,
              max_codon: int = 2000, rng: random.Random | None = None,
              trace: TraceHook | None = None) -> MachineState:
    """Run ``source`` to completion and return the final machine state."""
    if not source.isdigit() and source:
        raise ValueError("source must contain only decimal digits")
    if max_codon < 1:
        raise ValueError("max_codon must be positive")
    state = MachineState(
        tape=[float(x) for x in tape], source=source, input=[float(x) for x in input],
        max_tape_size=max_tape_size,
    )
    if not 1 <= len(state.tape) <= max_tape_size:
        raise ValueError(f"tape length {len(state.tape)} outside [1, {max_tape_size}]")
    run(state, table, max_codon, rng if rng is not None else random.Random(0), trace)
    return state


def run(state: MachineState, table: OpcodeTable, max_codon: int, rng: random.Random,
        trace: TraceHook | None = None) -> MachineState:
    ops = dispatch_table(table)
    src = state.source
    end = len(src)
    while True:
        sp = state.source_pointer
        if sp + 3 > end:
            state.halt_reason = END_OF_SOURCE
            break
        if state.instruction_count >= max_codon:
            state.halt_reason = BUDGET_EXHAUSTED
            break
        codon = src[sp:sp + 3]
        handler = ops.get(codon)
        if trace is not None:
            ptr = state.tape_pointer
            before = state.tape[ptr]
        if handler is not None:
            try:
                handler(state, rng)
            except _TRAP_TYPES as exc:
                state.trap = classify_trap(exc)
                state.halt_reason = trapped(state.trap)
                break
        state.source_pointer += 3
        state.instruction_count += 1
        if trace is not None:
            trace(state, codon, ptr, before)
    return state


def format_trace_line(state: MachineState, codon: str, pointer: int, before: float) -> str:
    after = state.tape[pointer] if pointer < len(state.tape) else float("nan")
    return f"{state.instruction_count} {codon} {pointer} {before!r} {after!r}"
