import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dose.analysis import (ResultFormatError, cytoplasm_series, divergence_from_records,
                           divergence_series, hamming_distance, mean_cytoplasm,
                           mean_cytoplasm_payload, pearson_r, read_result_runs)
from dose.genetics import Chromosome, Organism, Population, freeze

from oracles import naive_hamming


def test_hamming_examples():
    assert hamming_distance("000", "000") == 0
    assert hamming_distance("000", "001") == 1
    with pytest.raises(ValueError):
        hamming_distance("00", "000")


def test_hamming_matches_naive_count():
    rng = random.Random(60)
    for _ in range(200):
        a = [rng.choice("0123456789") for _ in range(60)]
        b = [rng.choice("0123456789") for _ in range(60)]
        assert hamming_distance(a, b) == naive_hamming(a, b)


HEADER = "STARTING SIMULATION - t\nDOSE parameters:\nchromosome_size = 4\n"


def _write(tmp_path, body, name="r.result.txt"):
    path = tmp_path / name
    path.write_text(body)
    return path


def test_divergence_toy_file(tmp_path):
    path = _write(tmp_path, HEADER + "t\t10\t0000\t1111\n"
                  "t\t15\t9999\t9999\n"
                  "t\t20\t0001\t1111\n"
                  "t\t30\t0011\t0000\n")
    s = divergence_series(path, 10, 10)
    assert s.points == [(10, 0.0), (20, 0.5), (30, 3.0)]
    assert s.normalized() == [0.0, 0.125, 0.75]
    assert s.pairing == "index" and s.genome_length == 4


def test_divergence_requires_baseline(tmp_path):
    path = _write(tmp_path, HEADER + "t\t20\t0000\n")
    with pytest.raises(ValueError):
        divergence_series(path, 10, 10)


def test_divergence_zero_rate_is_flat():
    records = {g: "0123\t4567" for g in range(10, 110, 10)}
    assert set(divergence_from_records(records, 10, 10).distances()) == {0.0}


def test_divergence_invariant_to_line_order(tmp_path):
    lines = ["t\t10\t0000\t1111", "t\t20\t0101\t1111", "t\t30\t0111\t1011"]
    a = divergence_series(_write(tmp_path, HEADER + "\n".join(lines) + "\n", "a.result.txt"))
    b = divergence_series(_write(tmp_path, HEADER + "\n".join(lines[::-1]) + "\n", "b.result.txt"))
    assert a == b


def test_divergence_uses_last_run_by_default(tmp_path):
    path = _write(tmp_path, HEADER + "t\t10\t00\n" + "t\t20\t11\n" + HEADER + "t\t10\t00\n" + "t\t20\t01\n")
    assert divergence_series(path).points[-1] == (20, 1.0)
    assert divergence_series(path, run=0).points[-1] == (20, 2.0)
    assert len(read_result_runs(path)) == 2


def test_duplicate_generation_in_run_is_an_error(tmp_path):
    path = _write(tmp_path, HEADER + "t\t10\t00\nt\t10\t01\n")
    with pytest.raises(ResultFormatError):
        read_result_runs(path)


def test_record_before_header_is_an_error(tmp_path):
    with pytest.raises(ResultFormatError):
        read_result_runs(_write(tmp_path, "t\t10\t00\n"))


def test_mean_cytoplasm():
    assert mean_cytoplasm([Organism(cytoplasm=[0.0, 0.0])]) == 0.0
    assert mean_cytoplasm([Organism(cytoplasm=[1, 1]), Organism(cytoplasm=[-1, -1])]) == 0.0
    with pytest.raises(ValueError):
        mean_cytoplasm([])


def test_mean_cytoplasm_matches_naive_sum(tmp_path):
    rng = random.Random(5)
    orgs = [Organism([Chromosome("0")], {}, [rng.uniform(-10, 10) for _ in range(rng.randint(1, 9))])
            for _ in range(40)]
    values = [v for o in orgs for v in o.cytoplasm]
    naive = 0.0
    for v in values:
        naive += v
    naive /= len(values)
    assert mean_cytoplasm(orgs) == pytest.approx(naive, abs=1e-12)
    path = freeze(Population("p", orgs), "p", 1.0, 1, random.Random(0), tmp_path)
    assert mean_cytoplasm(path) == mean_cytoplasm(orgs)


def test_cytoplasm_series(tmp_path):
    path = _write(tmp_path, HEADER + "t\t1\t1.0,3.0\t-2.0\nt\t2\t0.5\t0.5\n")
    assert cytoplasm_series(path) == [(1, 2.0 / 3), (2, 0.5)]
    assert mean_cytoplasm_payload("1.0,2.0") == 1.5


def test_pearson_examples():
    xs = [1.0, 2.0, 4.0, 7.0]
    assert pearson_r(xs, xs) == pytest.approx(1.0)
    assert pearson_r(xs, [-x for x in xs]) == pytest.approx(-1.0)
    # by hand: deviations (-1, 0, 1) and (-1, -1, 2); sxy = 3, sxx = 2, syy = 6
    assert pearson_r([1, 2, 3], [2, 2, 5]) == pytest.approx(3 / math.sqrt(12), abs=1e-15)


def test_pearson_errors():
    with pytest.raises(ValueError):
        pearson_r([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        pearson_r([1], [1])
    with pytest.raises(ValueError):
        pearson_r([1, 2], [1, 2, 3])


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30),
       st.floats(0.1, 100), st.floats(-50, 50))
def test_pearson_affine_invariance(pairs, scale, shift):
    xs, ys = [p[0] for p in pairs], [p[1] for p in pairs]
    try:
        r = pearson_r(xs, ys)
    except ValueError:
        return
    if min(max(xs) - min(xs), max(ys) - min(ys)) < 1e-3:
        return
    assert pearson_r([scale * x + shift for x in xs], ys) == pytest.approx(r, abs=1e-12)
    assert pearson_r([-scale * x + shift for x in xs], ys) == pytest.approx(-r, abs=1e-12)
