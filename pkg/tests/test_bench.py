import hashlib

import numpy as np
import pytest

from weft.bench import (
    SCENARIOS,
    SHARING_SCENARIOS,
    conjunction_text,
    gen_scenario,
    gen_trace,
    run_bench,
    verdict_checksums,
    write_trace,
)
from weft.compiler import TimeModel, compile_texts
from weft.engine import EvalSession


def test_best_case_shared_differs_only_in_bound():
    texts = gen_scenario("best-case-shared")
    assert len(texts) == 10
    assert texts[0] == "(historically(once[0:10] q -> (!p since r)) || once[0:1] p)"
    assert all(t.replace(f"once[0:{k}] p)", "") == texts[0].replace("once[0:1] p)", "")
               for k, t in enumerate(texts, 1))


def test_nested_best_first_property():
    texts = gen_scenario("nested-best")
    assert texts[0] == "historically(p || q)"
    assert texts[2] == "historically(((p || q) || r) || p)"


def test_scenarios_deterministic():
    for name in SCENARIOS:
        assert gen_scenario(name, seed=3) == gen_scenario(name, seed=3)


def test_unknown_scenario():
    with pytest.raises(ValueError):
        gen_scenario("nope")


def test_worst_unique_bounds_are_unique():
    m = compile_texts(gen_scenario("worst-unique"))
    temporal = [r for r in m.schedule if r.bound is not None]
    assert len(temporal) == 30


def test_compression_monotonicity():
    ratio = {n: compile_texts(gen_scenario(n)).compression_ratio() for n in SHARING_SCENARIOS}
    assert min(ratio["best-case-shared"], ratio["nested-best"]) > max(ratio["worst-unique"], ratio["nested-worst"])


def test_adversarial_trace():
    times, rows, mode = gen_trace("adversarial", 6, seed=0)
    assert rows[:, 1].tolist() == [1, 0, 1, 0, 1, 0]
    assert times.tolist() == list(range(6))
    assert mode == TimeModel.DISCRETE


def test_uniform_trace_deterministic(tmp_path):
    for i in range(2):
        times, rows, mode = gen_trace("uniform", 500, seed=11)
        write_trace(tmp_path / f"u{i}.bin", "bin", times, rows, mode)
    assert (tmp_path / "u0.bin").read_bytes() == (tmp_path / "u1.bin").read_bytes()


def test_dense_record_count_near_expectation():
    times, _, mode = gen_trace("dense", 10**6, seed=5, density=100)
    assert mode == TimeModel.DENSE
    assert times[0] == 0 and times[-1] == 10**6
    assert np.all(np.diff(times) > 0)
    assert abs(len(times) - 10**4) <= 10**3


def test_and_config_adds_conjunction_nodes():
    for name in SHARING_SCENARIOS:
        texts = gen_scenario(name)
        multi = compile_texts(texts)
        conj = compile_texts([conjunction_text(texts)])
        assert conj.node_count == multi.node_count + len(texts) - 1


def test_adversarial_marking_bound():
    texts = gen_scenario("adversarial-alternating")
    m = compile_texts(texts)
    s = EvalSession(m)
    _, rows, _ = gen_trace("adversarial", 2000)
    s.run_discrete(rows[:, [1]])
    for text, root in zip(texts, m.roots):
        b = int(text.split("[")[1].split(":")[0])
        assert s.state_max[root] == -(-b // 2)
    assert s.arena.high_water <= s.arena.capacity


@pytest.mark.parametrize("mode", list(TimeModel))
def test_configurations_agree(tmp_path, mode):
    kind = "dense" if mode == TimeModel.DENSE else "uniform"
    times, rows, _ = gen_trace(kind, 3000, seed=2, density=4)
    path = tmp_path / "t.bin"
    write_trace(path, "bin", times, rows, mode)
    reports = {c: run_bench("best-case-shared", path, c, "bin", mode, repeats=1) for c in ("sequential", "multi", "and")}
    assert reports["sequential"].checksums == reports["multi"].checksums
    assert reports["multi"].nodes_shared == 29
    assert reports["and"].nodes_evaluated == 29 + 9
    assert all(r.alloc_counter == 0 for r in reports.values())
    assert reports["multi"].steps == (3000 if mode == TimeModel.DISCRETE else len(times) - 1)


def test_and_stream_is_conjunction_of_multi():
    texts = gen_scenario("worst-unique")
    _, rows, _ = gen_trace("uniform", 4000, seed=9)
    multi = compile_texts(texts)
    conj = compile_texts([conjunction_text(texts)])
    out = EvalSession(multi).run_discrete(rows)
    both = EvalSession(conj).run_discrete(rows)
    assert np.array_equal(out.all(axis=1).astype(np.uint8), both[:, 0])
    assert verdict_checksums([conjunction_text(texts)], np.arange(4000), rows, "discrete") == \
        [hashlib.sha256(both[:, 0].tobytes()).hexdigest()]
