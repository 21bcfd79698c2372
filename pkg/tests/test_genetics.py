import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dose.genetics import (Chromosome, FossilFormatError, HookError, Organism, Population,
                           crossover, dumps_fossil, fossil_sample_size, freeze, generation_step,
                           load_fossil, mutation_events, revive, round_half_away, unused_path)


@pytest.mark.parametrize("rate,length,events", [
    (0.02, 58, 1), (0.03, 58, 1), (0.04, 58, 2), (0.05, 58, 2),
    (0.1, 58, 5), (0.0, 58, 0), (0.29, 100, 29), (1.0, 7, 7), (-0.5, 10, 0),
])
def test_mutation_events(rate, length, events):
    assert mutation_events(rate, length) == events


def test_chromosome_validation():
    with pytest.raises(ValueError):
        Chromosome([])
    with pytest.raises(ValueError):
        Chromosome("01x")


def test_replicate_is_independent_copy():
    a = Chromosome("0123", background_mutation_rate=0.5)
    b = a.replicate()
    assert a == b and a is not b
    b.sequence[0] = "9"
    assert a.sequence[0] == "0"


def test_rmutate_event_count_and_background():
    c = Chromosome("0" * 100, background_mutation_rate=0.1)
    assert c.rmutate("point", 0.05, random.Random(1)) == 15
    assert c.rmutate("point", 0.0, random.Random(1)) == 10
    assert sum(x != "0" for x in c.sequence) <= 25


def test_kmutate_stays_inside_segment():
    c = Chromosome("0" * 50)
    c.kmutate(10, 20, 1.0, random.Random(3))
    assert set(c.sequence[:10] + c.sequence[20:]) == {"0"}
    assert any(x != "0" for x in c.sequence[10:20])


def test_kmutate_is_deterministic_per_stream():
    a, b = Chromosome("0" * 60), Chromosome("0" * 60)
    a.rmutate("point", 0.2, random.Random(42))
    b.rmutate("point", 0.2, random.Random(42))
    assert a == b


def test_mutation_uses_alphabet():
    c = Chromosome("ab" * 20, alphabet="ab")
    c.rmutate("point", 1.0, random.Random(0))
    assert set(c.sequence) <= {"a", "b"}


@pytest.mark.parametrize("args", [(0, 0), (-1, 3), (2, 11)])
def test_kmutate_rejects_bad_segments(args):
    with pytest.raises(ValueError):
        Chromosome("0" * 10).kmutate(*args, 0.5, random.Random(0))


def test_only_point_style():
    with pytest.raises(ValueError):
        Chromosome("00").rmutate("insertion", 0.5, random.Random(0))


def test_crossover():
    a, b = Chromosome("00000"), Chromosome("11111")
    x, y = crossover(a, b, 2)
    assert "".join(x.sequence) == "00111" and "".join(y.sequence) == "11000"
    with pytest.raises(ValueError):
        crossover(a, b, 6)


def test_get_cytoplasm_round_trips():
    org = Organism(cytoplasm=[0.1, -2.0, 1e-300, 3.0])
    assert [float(v) for v in org.get_cytoplasm().split(",")] == org.cytoplasm
    assert org.get_cytoplasm() == "0.1,-2.0,1e-300,3.0"


class Recorder:
    def __init__(self, fail=None):
        self.calls = []
        self.fail = fail

    def __getattr__(self, name):
        def hook(*args):
            self.calls.append(name)
            if name == self.fail:
                raise RuntimeError("boom")
            return f"report {args[0].generation}" if name == "report" else None
        return hook


def _population(n=3):
    return Population("p", [Organism([Chromosome("000")]) for _ in range(n)], 0, 10)


def test_generation_step_order():
    rec = Recorder()
    pop = _population()
    report = generation_step(pop, rec, lambda i, purpose: random.Random(0))
    assert rec.calls == ["prepopulation_control", "mating", "postpopulation_control",
                         "mutation_scheme", "mutation_scheme", "mutation_scheme",
                         "generation_events", "report"]
    assert pop.generation == 1 and report == "report 1"


def test_generation_step_streams_keyed_by_organism():
    seen = []
    generation_step(_population(2), Recorder(), lambda i, purpose: seen.append((i, purpose)))
    assert (0, "mutation") in seen and (1, "mutation") in seen and (-1, "mating") in seen


def test_hook_failure_names_hook():
    with pytest.raises(HookError) as err:
        generation_step(_population(), Recorder(fail="mating"), lambda i, p: random.Random(0))
    assert err.value.hook == "mating"


@pytest.mark.parametrize("n,ratio,size", [(100, 0.01, 100), (1000, 0.01, 100), (1000, 0.5, 500),
                                          (50, 0.01, 50), (250, 0.002, 100), (1001, 0.5, 501)])
def test_fossil_sample_size(n, ratio, size):
    assert fossil_sample_size(n, ratio) == size


def test_round_half_away():
    assert [round_half_away(x) for x in (0.5, 1.5, 2.5, -0.5, 2.4)] == [1, 2, 3, -1, 2]


def _random_population(rng: random.Random) -> Population:
    agents = []
    for _ in range(rng.randint(1, 30)):
        genome = [Chromosome([rng.choice("0123456789") for _ in range(rng.randint(1, 40))],
                             background_mutation_rate=rng.choice([0.0, 0.1, 0.025]))
                  for _ in range(rng.randint(0, 3))]
        status = {"location": (rng.randrange(5), rng.randrange(5), rng.randrange(5)),
                  "age": rng.randint(0, 9), "tag": rng.choice(["a", "b"])}
        cytoplasm = [rng.uniform(-1e6, 1e6) for _ in range(rng.randint(1, 10))]
        agents.append(Organism(genome, status, cytoplasm))
    return Population("pop", agents, rng.randint(0, 500), 500)


def test_freeze_revive_round_trip(tmp_path):
    rng = random.Random(7)
    for k in range(100):
        pop = _random_population(rng)
        path = freeze(pop, f"p{k}", 1.0, pop.generation, random.Random(k), tmp_path)
        assert path.name == f"p{k}_{pop.generation}_{len(pop.agents)}.gap"
        assert revive(path) == pop.agents


def test_freeze_sample_is_canonical(tmp_path):
    pop = Population("x", [Organism([Chromosome(str(i % 10))], {"i": i}) for i in range(300)])
    path = freeze(pop, "x", 0.5, 3, random.Random(1), tmp_path)
    organisms = revive(path)
    assert path.name == "x_3_150.gap" and len(organisms) == 150
    indices = [o.status["i"] for o in organisms]
    assert indices == sorted(set(indices))


def test_freeze_avoids_overwrite(tmp_path):
    pop = _population()
    first = freeze(pop, "p", 1.0, 1, random.Random(0), tmp_path, avoid_overwrite=True)
    second = freeze(pop, "p", 1.0, 1, random.Random(0), tmp_path, avoid_overwrite=True)
    assert first.name == "p_1_3.gap" and second.name == "p_1_3-1.gap"
    assert unused_path(first).name == "p_1_3-2.gap"


def test_freeze_rejects_bad_ratio(tmp_path):
    with pytest.raises(ValueError):
        freeze(_population(), "p", 0, 1, random.Random(0), tmp_path)


def test_fossil_is_sorted_json(tmp_path):
    text = dumps_fossil(_population().agents, 4, "p")
    doc = json.loads(text)
    assert doc["format_version"] == 1 and doc["sample_size"] == 3
    assert text == json.dumps(doc, sort_keys=True, indent=1) + "\n"


@pytest.mark.parametrize("mangle", [
    lambda t: t[: len(t) // 2],
    lambda t: t.replace('"format_version": 1', '"format_version": 99'),
    lambda t: t.replace('"sample_size": 3', '"sample_size": 4'),
    lambda t: t.replace('"genome"', '"genes"'),
    lambda t: "[]",
])
def test_load_fossil_rejects_bad_files(tmp_path, mangle):
    path = tmp_path / "bad.gap"
    path.write_text(mangle(dumps_fossil(_population().agents, 1, "p")))
    with pytest.raises(FossilFormatError):
        load_fossil(path)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
@settings(max_examples=50)
def test_cytoplasm_floats_survive_fossil(values):
    org = Organism([Chromosome("1")], {}, values)
    doc = json.loads(dumps_fossil([org], 0, "p"))
    assert doc["organisms"][0]["cytoplasm"] == values
