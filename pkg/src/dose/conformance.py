"""Per-opcode conformance cases for the instruction set.

Every defined codon has at least one hand-computed case: a starting machine
state and the state expected after executing that single codon. Cases that
expect a trap also require the state to be left exactly as it was.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterator

from .isa import DEFINED_CODONS, OpcodeTable
from .vm import N_REGISTERS, RUNNING, MachineState, TrapKind, apply_opcode

PI = 3.141592653589793
E = 2.718281828459045

IDX, ZERO, OVER, DOM = TrapKind.INDEX, TrapKind.ZERO_DIVISION, TrapKind.OVERFLOW, TrapKind.DOMAIN


@dataclass
class Case:
    codon: str
    tape: list[float]
    ptr: int = 0
    input: list[float] = field(default_factory=list)
    output: list[float] = field(default_factory=list)
    registers: dict[int, float] = field(default_factory=dict)
    source: str | None = None
    sp: int = 0
    max_tape: int = 200
    expect: dict = field(default_factory=dict)
    note: str = ""

    def state(self) -> MachineState:
        regs = [0.0] * N_REGISTERS
        for k, v in self.registers.items():
            regs[k - 1] = v
        return MachineState(
            tape=[float(x) for x in self.tape], source=self.source or self.codon,
            tape_pointer=self.ptr, source_pointer=self.sp, input=list(self.input),
            output=list(self.output), registers=regs, max_tape_size=self.max_tape,
        )


def C(codon: str, tape, expect: dict | None = None, **kw) -> Case:
    return Case(codon, list(tape), expect=expect or {}, **kw)


def _cases() -> list[Case]:
    cases = [
        # pointer moves (wrap modulo tape length)
        C("000", [0] * 5, {"ptr": 2}, ptr=1),
        C("000", [0] * 5, {"ptr": 0}, ptr=4),
        C("001", [0] * 20, {"ptr": 7}, ptr=2),
        C("001", [0] * 20, {"ptr": 3}, ptr=18),
        C("002", [0] * 20, {"ptr": 12}, ptr=2),
        C("003", [4.2] + [0] * 29, {"ptr": 17}, note="4.2 moves 17 cells"),
        C("003", [-4.2] + [0] * 29, {"ptr": 17}),
        C("004", [0] * 5, {"ptr": 1}, ptr=2),
        C("004", [0] * 5, {"ptr": 4}, ptr=0),
        C("005", [0] * 20, {"ptr": 2}, ptr=7),
        C("006", [0] * 20, {"ptr": 2}, ptr=12),
        C("007", [0] * 20 + [4.2] + [0] * 9, {"ptr": 3}, ptr=20),
        # increments
        C("008", [1.5], {"tape": [2.5]}),
        C("009", [1.5], {"tape": [6.5]}),
        C("010", [1.5], {"tape": [11.5]}),
        C("011", [1.5], {"tape": [0.5]}),
        C("012", [1.5], {"tape": [-3.5]}),
        C("013", [1.5], {"tape": [-8.5]}),
        # growth and shrinkage
        C("016", [1, 2], {"tape": [1, 2, 0]}),
        C("016", [1, 2], {"tape": [1, 2]}, max_tape=2),
        C("017", [1], {"tape": [1] + [0] * 10}),
        C("017", [1], {"tape": [1, 0, 0, 0, 0]}, max_tape=5),
        C("018", [1, 2, 3], {"tape": [1, 2], "ptr": 1}, ptr=2),
        C("018", [1], {"tape": [1]}),
        C("019", list(range(12)), {"tape": [0, 1], "ptr": 1}, ptr=11),
        C("019", [1, 2, 3, 4, 5], {"tape": [1], "ptr": 0}, ptr=3),
        # output and source
        C("020", [1, 2.5, 3], {"output": [9, 2.5]}, ptr=1, output=[9]),
        C("021", [0, 0, 0], {"output": [2]}, ptr=2),
        C("022", [0], {"output": [6], "sp": 9}, source="000000022", sp=6),
        C("023", [0], {"sp": 6}, source="023008008"),
        C("023", [0], {"sp": 3}, source="023"),
        C("024", [0], {"sp": 18}, source="024" + "000" * 6),
        C("024", [0], {"sp": 3}, source="024" + "000" * 4),
        C("025", [0], {"sp": 33}, source="025" + "000" * 10),
        C("025", [0], {"sp": 3}, source="025" + "000" * 9),
        C("032", [3.5], {"tape": [7]}),
        C("033", [3.5], {"tape": [1.75]}),
        C("034", [1, 2, 3], {"tape": [1, 2, 0, 3], "ptr": 1}, ptr=1),
        C("034", [1, 2, 3], {"tape": [1, 2, 3]}, ptr=1, max_tape=3),
        C("035", [1, 2, 3], {"tape": [1, 3], "ptr": 1}, ptr=1),
        C("035", [1, 2, 3], {"tape": [1, 2], "ptr": 1}, ptr=2),
        C("035", [4], {"tape": [4]}),
        C("036", [1, 2, 3], {"tape": [1, 3], "output": [2]}, ptr=1),
        C("036", [4], {"tape": [4], "output": []}),
        C("037", [1], {"tape": [5], "output": [4]}, output=[4, 5]),
        C("037", [1], {"trap": IDX}),
        C("038", [1], {"tape": [5], "output": [4, 5]}, output=[4, 5]),
        C("038", [1], {"trap": IDX}),
        C("039", [1], {"tape": [4], "output": [5]}, output=[4, 5]),
        C("039", [1], {"trap": IDX}),
        C("040", [1], {"tape": [4], "output": [4, 5]}, output=[4, 5]),
        C("040", [1], {"trap": IDX}),
        C("041", [1], {"output": [5]}, output=[4, 5]),
        C("041", [1], {"trap": IDX}),
        C("042", [1], {"output": [4]}, output=[4, 5]),
        C("042", [1], {"trap": IDX}),
        C("043", [0] * 5, {"ptr": 0}, ptr=3),
        C("044", [0] * 5, {"ptr": 4}, ptr=1),
        C("045", [0] * 5, {"ptr": 3}, output=[3]),
        C("045", [0] * 5, {"ptr": 2}, output=[7]),
        C("045", [0] * 5, {"trap": IDX}),
        C("046", [1, 2, 3], {"tape": [3, 2, 1], "ptr": 0}, note="pointer stays put"),
        C("047", [0], {"output": [3, 2, 1]}, output=[1, 2, 3]),
        # moves by cell value
        C("061", [0, 3, 0, 0, 0, 0], {"ptr": 4}, ptr=1),
        C("061", [0, 2.7, 0, 0, 0, 0], {"ptr": 3}, ptr=1),
        C("061", [0, -2, 0, 0, 0, 0], {"ptr": 5}, ptr=1),
        C("062", [0, 0, 0, 0, 2, 0], {"ptr": 2}, ptr=4),
        # input
        C("063", [1], {"tape": [5], "input": [6]}, input=[5, 6]),
        C("063", [1], {"tape": [0], "input": []}, note="empty input writes 0"),
        C("064", [1], {"tape": [5], "input": [5, 6]}, input=[5, 6]),
        C("064", [1], {"tape": [0]}),
        # arithmetic with the next cell or the input list
        C("065", [2, 3], {"tape": [5, 3]}),
        C("065", [2, 3], {"trap": IDX}, ptr=1),
        C("066", [2], {"tape": [12]}, input=[10, 20]),
        C("066", [2], {"trap": IDX}),
        C("067", [2], {"tape": [22]}, input=[10, 20]),
        C("067", [2], {"trap": IDX}),
        C("068", [2, 3], {"tape": [1, 3]}),
        C("069", [2], {"tape": [8]}, input=[10, 20]),
        C("070", [2], {"tape": [18]}, input=[10, 20]),
        C("071", [2, 3], {"tape": [6, 3]}),
        C("072", [2], {"tape": [20]}, input=[10, 20]),
        C("073", [2], {"tape": [40]}, input=[10, 20]),
        C("074", [2, 3], {"tape": [1.5, 3]}),
        C("074", [0, 3], {"trap": ZERO}),
        C("075", [4], {"tape": [2.5]}, input=[10, 20]),
        C("075", [0], {"trap": ZERO}, input=[10, 20]),
        C("076", [4], {"tape": [5]}, input=[10, 20]),
        C("076", [0], {"trap": ZERO}, input=[10, 20]),
        C("077", [4, 10], {"tape": [2, 10]}),
        C("077", [0, 10], {"trap": ZERO}),
        C("078", [4], {"tape": [2]}, input=[10, 21]),
        C("078", [0], {"trap": ZERO}, input=[10, 21]),
        C("079", [4], {"tape": [1]}, input=[10, 21]),
        C("079", [0], {"trap": ZERO}, input=[10, 21]),
        C("080", [6.7], {"tape": [6]}),
        C("080", [-6.7], {"tape": [-7]}),
        C("081", [5, 7], {"tape": [7, 5]}),
        C("081", [5, 7], {"trap": IDX}, ptr=1),
        C("084", [3], {"tape": [0]}),
        C("085", [3], {"tape": [-1]}),
        C("086", [3], {"tape": [1]}),
        C("087", [3], {"tape": [-3]}),
        # math
        C("088", [PI / 6], {"tape": [0.5]}),
        C("089", [PI / 3], {"tape": [0.5]}),
        C("090", [PI / 4], {"tape": [1.0]}),
        C("091", [0.5], {"tape": [0.5235987755982988]}),
        C("091", [2.0], {"trap": DOM}),
        C("092", [0.5], {"tape": [1.0471975511965976]}),
        C("092", [-1.5], {"trap": DOM}),
        C("093", [1.0], {"tape": [0.7853981633974483]}),
        C("094", [4], {"tape": [0.25]}),
        C("094", [0], {"trap": ZERO}),
        C("095", [9], {"tape": [3]}),
        C("095", [-1], {"trap": DOM}),
        C("096", [E], {"tape": [1]}),
        C("096", [0], {"trap": DOM}),
        C("096", [-1], {"trap": DOM}),
        C("097", [0], {"tape": [PI]}),
        C("098", [0], {"tape": [E]}),
        C("099", [1], {"tape": [1.1752011936438014]}),
        C("099", [1000], {"trap": OVER}),
        C("100", [1], {"tape": [1.5430806348152437]}),
        C("100", [1000], {"trap": OVER}),
        C("101", [1], {"tape": [0.7615941559557649]}),
        C("102", [1], {"tape": [0.881373587019543]}),
        C("103", [1], {"tape": [0]}),
        C("103", [0.5], {"trap": DOM}),
        C("104", [0.5], {"tape": [0.5493061443340549]}),
        C("104", [1], {"trap": DOM}),
        C("105", [PI], {"tape": [180]}),
        C("106", [180], {"tape": [PI]}),
        C("107", [E], {"tape": [15.154262241479262]}),
        C("107", [-2], {"trap": DOM}),
        C("107", [1e300], {"trap": OVER}),
        C("108", [1], {"tape": [E]}),
        C("108", [1000], {"trap": OVER}),
        C("109", [2], {"tape": [100]}),
        C("109", [400], {"trap": OVER}),
        C("110", [2, 10], {"tape": [1024, 10]}),
        C("110", [0, -1], {"trap": DOM}),
        C("110", [10, 400], {"trap": OVER}),
        C("111", [27, 3], {"tape": [3, 3]}),
        C("111", [8, 0], {"trap": ZERO}),
        C("112", [1], {"tape": [0.8427007929497149]}),
        C("113", [0], {"tape": [1]}),
        C("114", [5.7], {"tape": [120]}),
        C("114", [-3], {"trap": DOM}),
        C("114", [200], {"trap": OVER}),
        C("115", [-5.2], {"tape": [120]}),
        C("115", [-200], {"trap": OVER}),
        C("116", [3, 4], {"tape": [5, 4]}),
        C("117", [8, 2], {"tape": [3, 2]}),
        C("117", [-8, 2], {"trap": DOM}),
        C("117", [8, 1], {"trap": ZERO}),
        # logic: positive is true; results are 1 or 0
        C("120", [1, 2], {"tape": [1, 2]}),
        C("120", [1, -2], {"tape": [0, -2]}),
        C("121", [0, 2], {"tape": [1, 2]}),
        C("121", [0, -1], {"tape": [0, -1]}),
        C("122", [0], {"tape": [1]}),
        C("122", [3], {"tape": [0]}),
        C("123", [1, 2], {"tape": [1, 2]}),
        C("123", [2, 1], {"tape": [0, 1]}),
        C("124", [2, 1], {"tape": [1, 1]}),
        C("124", [1, 2], {"tape": [0, 2]}),
        C("125", [2, 2], {"tape": [1, 2]}),
        C("125", [2, 3], {"tape": [0, 3]}),
        C("126", [2, 3], {"tape": [1, 3]}),
        C("126", [2, 2], {"tape": [0, 2]}),
        C("127", [2, 2], {"tape": [1, 2]}),
        C("127", [3, 2], {"tape": [0, 2]}),
        C("128", [2, 2], {"tape": [1, 2]}),
        C("128", [1, 2], {"tape": [0, 2]}),
        # absolute pointer placement
        C("140", [0] * 285, {"ptr": 142}, max_tape=1000, note="142nd of 285"),
        C("140", [0] * 1000, {"ptr": 500}, max_tape=1000),
        C("141", [0] * 285, {"ptr": 71}, max_tape=1000, note="71st of 285"),
        C("141", [0] * 1000, {"ptr": 250}, max_tape=1000),
        C("142", [0] * 285, {"ptr": 213}, max_tape=1000, note="213rd of 285"),
        C("142", [0] * 1000, {"ptr": 750}, max_tape=1000),
        C("143", [3, 0, 0, 0, 0], {"ptr": 3}),
        C("143", [0] * 7 + [13.9], {"ptr": 5}, ptr=7),
        C("144", [25], {"tape": [2.5]}),
        C("145", [2.5], {"tape": [25]}),
        C("145", [1e308], {"trap": OVER}),
        # aggregates
        C("146", [1, 2, 3, 4], {"tape": [1, 7, 3, 4]}, ptr=1),
        C("146", [1, 2, 3, 4], {"tape": [1, 2, 3, 0]}, ptr=3),
        C("147", [1, 2, 3, 4], {"tape": [1, 9, 3, 4]}, ptr=1),
        C("150", [1, 2, 3, 4], {"tape": [1, 10, 3, 4]}, ptr=1),
        C("151", [1, 2, 3, 4], {"tape": [1, 3.5, 3, 4]}, ptr=1),
        C("151", [1, 2, 3, 4], {"trap": ZERO}, ptr=3),
        C("152", [1, 2, 3, 4], {"tape": [1, 3, 3, 4]}, ptr=1),
        C("153", [1, 2, 3, 4], {"tape": [1, 2, 1.5, 4]}, ptr=2),
        C("153", [1, 2, 3, 4], {"trap": ZERO}, ptr=0),
        C("154", [1, 2, 3, 4], {"tape": [1, 2, 2, 4]}, ptr=2),
        C("155", [2, 4], {"tape": [1, 2]}),
        C("156", [2, 4], {"tape": [4, 8]}),
        C("156", [1, 1e308], {"trap": OVER}),
        C("157", [20, 40], {"tape": [2, 4]}),
        C("158", [2, 4], {"tape": [20, 40]}),
        C("158", [1, 1e308], {"trap": OVER}),
        C("159", [200, 400], {"tape": [2, 4]}),
        C("160", [2, 4], {"tape": [200, 400]}),
        C("160", [1, 1e308], {"trap": OVER}),
        # rearrangements
        C("161", [1, 2, 3, 4, 5], {"tape": [3, 4, 5, 1, 2], "ptr": 0}, ptr=2),
        C("162", [1, 2, 3, 4, 5], {"tape": [4, 5, 1, 2, 3], "ptr": 4}, ptr=2),
        C("163", [1, 2, 3, 4, 5], {"tape": [3, 1, 2, 4, 5], "ptr": 0}, ptr=2),
        C("164", [1, 2, 3, 4, 5], {"tape": [1, 2, 4, 5, 3], "ptr": 4}, ptr=2),
        C("165", [1, -2], {"tape": [-1, 2]}),
        C("166", [2, 3, 4], {"tape": [2, 3, 16]}, ptr=1),
        C("167", [2, 3, 4], {"tape": [4, 3, 4]}, ptr=1),
        C("168", [2, 3, 4], {"tape": [4, 9, 16]}),
        C("169", [4, 9, 16], {"tape": [2, 3, 4]}),
        C("169", [4, -1], {"trap": DOM}),
        C("170", [4, 9, 16], {"tape": [4, 9, 4]}, ptr=1),
        C("170", [4, 9, -16], {"trap": DOM}, ptr=1),
        C("171", [4, 9, 16], {"tape": [2, 9, 16]}, ptr=1),
        C("171", [-4, 9, 16], {"trap": DOM}, ptr=1),
        C("189", [1, 2, 3], {"tape": [0, 0, 0]}),
        C("196", [0, 4, 4, 4, 5, 5, 7, 9], {"tape": [2.436698586202241, 4, 4, 4, 5, 5, 7, 9]}),
        C("196", [2, 4, 4, 4, 5, 5, 7, 9], {"tape": [2, 4, 4, 4, 5, 5, 7, 9]}),
        C("197", [1, 2, 4], {"tape": [2, 2, 4]}),
        C("197", [1, 0], {"trap": DOM}),
        C("197", [1, -2], {"trap": DOM}),
        C("198", [1, 2, 4], {"tape": [1.7142857142857142, 2, 4]}),
        C("198", [1, 0], {"trap": DOM}),
    ]
    for k in range(1, N_REGISTERS + 1):
        cases.append(C(f"{200 + k:03d}", [k + 0.5], {"registers": {k: k + 0.5}, "tape": [k + 0.5]}))
        cases.append(C(f"{300 + k:03d}", [0], {"tape": [k * 1.25]}, registers={k: k * 1.25}))
    return cases


CASES = _cases()

# codon -> possible underlying effects, written as the codons they stand for
RANDOM_OPTIONS = {
    "050": {"008", "000"}, "051": {"011", "004"}, "052": {"000", "004"},
    "053": {"008", "011"}, "054": {"000", "011"}, "055": {"004", "008"},
    "056": {"000", "004", "011"}, "057": {"000", "008", "011"},
    "058": {"004", "008", "011"}, "059": {"000", "004", "008"},
    "060": {"000", "004", "008", "011"},
}


def random_outcome(state: MachineState) -> str:
    """Which basic codon a random codon acted as, starting from tape [0,0,0] at cell 1."""
    if state.tape_pointer == 2:
        return "000"
    if state.tape_pointer == 0:
        return "004"
    return {1.0: "008", -1.0: "011"}.get(state.tape[1], "?")


@dataclass
class CodonResult:
    codon: str
    passed: bool
    checks: int
    failures: list[str] = field(default_factory=list)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def check_case(case: Case, table: OpcodeTable) -> str | None:
    """None if the case passes, else a description of the mismatch."""
    before = case.state()
    after = apply_opcode(before.copy(), case.codon, table, random.Random(0))
    exp = case.expect
    if "trap" in exp:
        want = f"trapped({exp['trap'].value})"
        if after.halt_reason != want:
            return f"expected {want}, got {after.halt_reason}"
        before.halt_reason, before.trap = after.halt_reason, after.trap
        if after != before:
            return "trap modified machine state"
        return None
    if after.halt_reason != RUNNING:
        return f"unexpected {after.halt_reason}"
    want_tape = exp.get("tape", before.tape)
    if len(after.tape) != len(want_tape) or not all(map(_close, after.tape, want_tape)):
        return f"tape {after.tape[:12]} != {list(want_tape)[:12]}"
    checks = {
        "ptr": after.tape_pointer,
        "output": after.output,
        "input": after.input,
        "sp": after.source_pointer,
    }
    defaults = {"ptr": before.tape_pointer, "output": before.output, "input": before.input,
                "sp": before.source_pointer + 3}
    for key, got in checks.items():
        want = exp.get(key, defaults[key])
        if isinstance(want, list):
            want = [float(x) for x in want]
        if got != want:
            return f"{key} {got} != {want}"
    want_regs = list(before.registers)
    for k, v in exp.get("registers", {}).items():
        want_regs[k - 1] = v
    if after.registers != want_regs:
        return "registers differ"
    if after.instruction_count != before.instruction_count + 1:
        return "instruction count did not advance by one"
    return None


def check_random(codon: str, table: OpcodeTable, draws: int = 400) -> str | None:
    rng = random.Random(int(codon))
    seen = set()
    for _ in range(draws):
        st = apply_opcode(MachineState(tape=[0.0, 0.0, 0.0], source=codon, tape_pointer=1),
                          codon, table, rng)
        seen.add(random_outcome(st))
    if seen != RANDOM_OPTIONS[codon]:
        return f"outcomes {sorted(seen)} != {sorted(RANDOM_OPTIONS[codon])}"
    return None


def cases_for(codon: str) -> list[Case]:
    return [c for c in CASES if c.codon == codon]


def run_conformance(table: OpcodeTable) -> Iterator[CodonResult]:
    """Check every codon enabled in ``table``, in codon order."""
    for codon in sorted(table.enabled):
        failures = []
        cases = cases_for(codon)
        for case in cases:
            msg = check_case(case, table)
            if msg:
                failures.append(msg + (f" [{case.note}]" if case.note else ""))
        checks = len(cases)
        if codon in RANDOM_OPTIONS:
            checks += 1
            msg = check_random(codon, table)
            if msg:
                failures.append(msg)
        if checks == 0:
            failures.append("no conformance case")
        yield CodonResult(codon, not failures, checks, failures)


def coverage_gaps() -> set[str]:
    covered = {c.codon for c in CASES} | set(RANDOM_OPTIONS)
    return DEFINED_CODONS - covered
