import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from dose.conformance import CASES, RANDOM_OPTIONS, check_case, check_random, random_outcome
from dose.isa import DEFINED_CODONS, build_instruction_set
from dose.vm import (BUDGET_EXHAUSTED, END_OF_SOURCE, HANDLERS, RUNNING, MachineState, TrapKind,
                     apply_opcode, format_trace_line, interpret, remaining_codons, trapped)

from oracles import naive_bf

FULL = build_instruction_set(1)
NBF = build_instruction_set(0.1)

reals = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).map(lambda x: round(x, 3))
wild = st.one_of(reals, st.sampled_from([0.0, -0.0, 1.0, -1.0, 1e300, -1e300, 1e308, 0.5]))


def test_handlers_cover_defined_codons():
    assert set(HANDLERS) == DEFINED_CODONS


@pytest.mark.parametrize("case", CASES, ids=[f"{c.codon}-{i}" for i, c in enumerate(CASES)])
def test_conformance_case(case):
    assert check_case(case, FULL) is None


@pytest.mark.parametrize("codon", sorted(RANDOM_OPTIONS))
def test_random_codon_options(codon):
    assert check_random(codon, FULL) is None


# literal examples from the instruction table


def test_move_by_squared_value():
    st_ = interpret("003", FULL, tape=[4.2] + [0.0] * 29)
    assert st_.tape_pointer == 17


@pytest.mark.parametrize("codon,index", [("140", 142), ("141", 71), ("142", 213)])
def test_fractional_pointer_placement(codon, index):
    assert interpret(codon, FULL, tape=[0.0] * 285, max_tape_size=285).tape_pointer == index


def test_empty_input_reads_zero():
    assert interpret("063", FULL, tape=[7.0]).tape == [0.0]


def test_flip_tape_and_swap():
    assert interpret("046", FULL, tape=[1, 2, 3]).tape == [3, 2, 1]
    assert interpret("081", FULL, tape=[1, 2, 3]).tape == [2, 1, 3]


# execution loop


def test_end_of_source_and_trailing_fragment():
    s = interpret("00800808", FULL)
    assert s.halt_reason == END_OF_SOURCE
    assert s.tape == [2.0] and s.instruction_count == 2 and s.source_pointer == 6


def test_empty_source():
    s = interpret("", FULL)
    assert s.halt_reason == END_OF_SOURCE and s.instruction_count == 0


def test_budget_exhausted():
    s = interpret("008" * 10, FULL, max_codon=4)
    assert s.halt_reason == BUDGET_EXHAUSTED
    assert s.tape == [4.0] and s.instruction_count == 4


def test_budget_equal_to_length_is_end_of_source():
    assert interpret("008" * 4, FULL, max_codon=4).halt_reason == END_OF_SOURCE


def test_trap_stops_and_keeps_prior_state():
    s = interpret("008084094008", FULL)
    assert s.halt_reason == trapped(TrapKind.ZERO_DIVISION)
    assert s.trap is TrapKind.ZERO_DIVISION
    assert s.tape == [0.0] and s.instruction_count == 2 and s.source_pointer == 6


def test_disabled_codon_is_skipped():
    s = interpret("003008", NBF, tape=[4.2, 0, 0])
    assert s.tape_pointer == 0 and s.tape[0] == 5.2 and s.instruction_count == 2


def test_undefined_codon_is_skipped():
    s = interpret("999008", FULL)
    assert s.tape == [1.0] and s.instruction_count == 2


@pytest.mark.parametrize("kwargs", [dict(source="00a"), dict(source="008", max_codon=0),
                                    dict(source="008", tape=[]),
                                    dict(source="008", tape=[0.0] * 5, max_tape_size=4)])
def test_interpret_validates_arguments(kwargs):
    source = kwargs.pop("source")
    with pytest.raises(ValueError):
        interpret(source, FULL, **kwargs)


def test_apply_opcode_refuses_halted_machine():
    s = MachineState(tape=[0.0], halt_reason=END_OF_SOURCE)
    with pytest.raises(ValueError):
        apply_opcode(s, "008", FULL, random.Random(0))


def test_remaining_codons():
    s = MachineState(tape=[0.0], source="00800808", source_pointer=3)
    assert remaining_codons(s) == 1


def test_trace_hook_and_line():
    lines = []
    interpret("008000009", FULL, tape=[0.0, 0.0],
              trace=lambda s, c, p, b: lines.append(format_trace_line(s, c, p, b)))
    assert lines == ["1 008 0 0.0 1.0", "2 000 0 1.0 1.0", "3 009 1 0.0 5.0"]


def test_registers_start_at_zero():
    assert interpret("350", FULL, tape=[9.0]).tape == [0.0]


# properties


@given(st.lists(reals, min_size=1, max_size=12), st.integers(0, 11))
def test_flip_is_involution(tape, ptr):
    ptr %= len(tape)
    s = MachineState(tape=list(tape), source="046046", tape_pointer=ptr)
    for _ in range(2):
        apply_opcode(s, "046", FULL, random.Random(0))
    assert s.tape == tape and s.tape_pointer == ptr


@given(st.lists(reals, min_size=1, max_size=12))
def test_negate_tape_is_involution(tape):
    s = MachineState(tape=list(tape))
    for _ in range(2):
        apply_opcode(s, "165", FULL, random.Random(0))
    assert s.tape == tape


@given(st.lists(reals, min_size=2, max_size=12), st.integers(0, 10))
def test_swap_is_involution(tape, ptr):
    ptr %= len(tape) - 1
    s = MachineState(tape=list(tape), tape_pointer=ptr)
    for _ in range(2):
        apply_opcode(s, "081", FULL, random.Random(0))
    assert s.tape == tape


@given(st.lists(st.integers(-1000, 1000).map(float), min_size=1, max_size=8), st.integers(0, 7))
def test_increment_decrement_cancel(tape, ptr):
    ptr %= len(tape)
    s = MachineState(tape=list(tape), tape_pointer=ptr)
    for codon in ("008", "011", "010", "013", "000", "004"):
        apply_opcode(s, codon, FULL, random.Random(0))
    assert s.tape == tape and s.tape_pointer == ptr


@given(st.lists(reals, min_size=1, max_size=8))
def test_double_then_halve(tape):
    s = MachineState(tape=list(tape))
    for codon in ("032", "033", "156", "155"):
        apply_opcode(s, codon, FULL, random.Random(0))
    assert s.tape == tape


@given(st.integers(1, 99), reals)
def test_register_round_trip(k, value):
    s = interpret(f"{200 + k:03d}084{300 + k:03d}", FULL, tape=[value])
    assert s.tape == [value]
    assert s.registers[k - 1] == value


@given(st.sampled_from(sorted(DEFINED_CODONS)), st.lists(wild, min_size=1, max_size=6),
       st.integers(0, 5), st.lists(wild, max_size=3), st.lists(wild, max_size=3))
@settings(max_examples=2000, deadline=None)
def test_trap_leaves_state_untouched(codon, tape, ptr, inputs, outputs):
    before = MachineState(tape=list(tape), source=codon, tape_pointer=ptr % len(tape),
                          input=list(inputs), output=list(outputs), max_tape_size=8)
    after = apply_opcode(before.copy(), codon, FULL, random.Random(1))
    if after.halt_reason == RUNNING:
        assert after.source_pointer == 3 and after.instruction_count == 1
        assert all(math.isfinite(x) for x in after.tape)
        assert 1 <= len(after.tape) <= 8
        assert 0 <= after.tape_pointer < len(after.tape)
    else:
        assert after.trap is not None
        after.halt_reason, after.trap = RUNNING, None
        assert after == before


def test_random_codon_is_uniform():
    rng = random.Random(2024)
    counts = {c: 0 for c in RANDOM_OPTIONS["060"]}
    for _ in range(10_000):
        s = apply_opcode(MachineState(tape=[0.0, 0.0, 0.0], tape_pointer=1), "060", FULL, rng)
        counts[random_outcome(s)] += 1
    assert chisquare(list(counts.values())).pvalue >= 0.001


def test_random_codons_follow_stream():
    src = "060" * 50
    a = interpret(src, FULL, tape=[0.0] * 10, rng=random.Random(5))
    b = interpret(src, FULL, tape=[0.0] * 10, rng=random.Random(5))
    assert a == b


@given(st.text("0123456789", max_size=300), st.lists(reals, max_size=4))
@settings(max_examples=300, deadline=None)
def test_random_genomes_halt_within_budget(source, inputs):
    pointers = []
    s = interpret(source, FULL, inputs, tape=[0.0] * 5, max_codon=50,
                  trace=lambda st_, c, p, b: pointers.append(st_.source_pointer))
    assert s.halt_reason != RUNNING
    assert s.instruction_count <= 50
    assert pointers == sorted(pointers)


@given(st.lists(st.sampled_from(["000", "004", "008", "011", "020", "063"]), max_size=60),
       st.lists(st.integers(-5, 5).map(float), min_size=1, max_size=6),
       st.lists(st.integers(-5, 5).map(float), max_size=6))
def test_matches_naive_evaluator(codons, tape, inputs):
    source = "".join(codons)
    s = interpret(source, FULL, inputs, tape)
    tape_, out, rest = naive_bf(source, tape, inputs)
    assert (s.tape, s.output, s.input) == (tape_, out, rest)
