"""Circuit IR: evaluation, metrics, normalization, serialization."""

import random

import pytest

from satcirc.circuit import (
    AND, CONST, Circuit, CircuitError, Gate, INPUT, Metrics, NEG_INPUT, NOT,
    OR, THRESHOLD_GE, THRESHOLD_LE, bigram11_fixture, depth_map, eval,
    eval_batch, family_analyze, from_json, metrics, normalize_negations,
    to_dot, to_json,
)

from oracles import contains_bigram11, recursive_eval


def circ_to_dict(c):
    return {
        "n": c.n,
        "gates": [{"id": g.id, "kind": g.kind, "inputs": list(g.inputs),
                   "k": g.k, "idx": g.idx} for g in c.gates],
        "outputs": list(c.outputs),
    }


def all_bits(n):
    return [tuple((m >> i) & 1 for i in range(n)) for m in range(2 ** n)]


# ---------------------------------------------------------------------------
# construction and validation


def test_gate_validation():
    with pytest.raises(CircuitError):
        Gate(0, "XOR")
    with pytest.raises(CircuitError):
        Gate(0, INPUT)  # missing idx
    with pytest.raises(CircuitError):
        Gate(0, CONST, k=2)
    with pytest.raises(CircuitError):
        Gate(0, NOT, (1, 2))
    with pytest.raises(CircuitError):
        Gate(0, THRESHOLD_GE, (1,), k=-1)


def test_circuit_validation():
    g = [Gate(0, INPUT, idx=0), Gate(1, NOT, (0,))]
    Circuit(1, tuple(g), (1,))
    with pytest.raises(CircuitError, match="missing id 7"):
        Circuit(1, (Gate(0, INPUT, idx=0), Gate(1, NOT, (7,))), (1,))
    with pytest.raises(CircuitError, match="output"):
        Circuit(1, (Gate(0, INPUT, idx=0),), (5,))
    with pytest.raises(CircuitError, match="duplicate"):
        Circuit(1, (Gate(0, INPUT, idx=0), Gate(0, INPUT, idx=0)), (0,))
    with pytest.raises(CircuitError, match="cycle"):
        Circuit(1, (Gate(0, INPUT, idx=0), Gate(1, AND, (1, 0))), (1,))
    with pytest.raises(CircuitError, match=">= n"):
        Circuit(1, (Gate(0, INPUT, idx=3),), (0,))
    with pytest.raises(CircuitError, match="output"):
        Circuit(1, (Gate(0, INPUT, idx=0),), ())


# ---------------------------------------------------------------------------
# evaluation


def test_threshold_example():
    c = Circuit(6, tuple([Gate(i, INPUT, idx=i) for i in range(6)]
                         + [Gate(6, THRESHOLD_GE, (0, 1, 2, 3, 4, 5), k=3)]),
                (6,))
    assert eval(c, "110011") == (1,)
    assert eval(c, "110000") == (0,)


def test_empty_fanin_conventions():
    c = Circuit(1, (Gate(0, INPUT, idx=0), Gate(1, AND), Gate(2, OR),
                    Gate(3, THRESHOLD_GE, (), k=0)), (1, 2, 3))
    assert eval(c, "0") == (1, 0, 1)


def test_threshold_le():
    gates = [Gate(i, INPUT, idx=i) for i in range(4)]
    gates.append(Gate(4, THRESHOLD_LE, (0, 1, 2, 3), k=2))
    c = Circuit(4, tuple(gates), (4,))
    for bits in all_bits(4):
        assert eval(c, bits) == (int(sum(bits) <= 2),)


def test_arity_mismatch():
    c = bigram11_fixture()
    with pytest.raises(CircuitError):
        eval(c, "011")
    with pytest.raises(CircuitError):
        eval(c, "01a10")


def random_circuit(rng, n_inputs, n_gates):
    gates = []
    for i in range(n_inputs):
        gates.append(Gate(i, INPUT, idx=i))
    for j in range(n_inputs, n_inputs + n_gates):
        kind = rng.choice([AND, OR, NOT, THRESHOLD_GE, THRESHOLD_LE,
                           CONST, NEG_INPUT])
        if kind == CONST:
            gates.append(Gate(j, CONST, k=rng.randint(0, 1)))
        elif kind == NEG_INPUT:
            gates.append(Gate(j, NEG_INPUT, idx=rng.randrange(n_inputs)))
        elif kind == NOT:
            gates.append(Gate(j, NOT, (rng.randrange(j),)))
        else:
            fanin = rng.randint(0 if kind in (AND, OR) else 1, min(j, 5))
            ins = tuple(rng.sample(range(j), fanin))
            k = rng.randint(0, fanin + 1) if kind in (THRESHOLD_GE,
                                                      THRESHOLD_LE) else None
            gates.append(Gate(j, kind, ins, k=k))
    n_out = rng.randint(1, min(3, n_inputs + n_gates))
    outs = tuple(rng.sample(range(n_inputs + n_gates), n_out))
    return Circuit(n_inputs, tuple(gates), outs)


def test_eval_matches_recursive_oracle():
    rng = random.Random(2024)
    for _ in range(10_000):
        c = random_circuit(rng, rng.randint(1, 4), rng.randint(1, 16))
        bits = tuple(rng.randint(0, 1) for _ in range(c.n))
        assert eval(c, bits) == recursive_eval(circ_to_dict(c), bits)


def test_eval_batch_matches_eval():
    rng = random.Random(77)
    for _ in range(300):
        c = random_circuit(rng, rng.randint(1, 5), rng.randint(1, 20))
        xs = [tuple(rng.randint(0, 1) for _ in range(c.n))
              for _ in range(rng.randint(1, 40))]
        assert eval_batch(c, xs) == [eval(c, x) for x in xs]


def test_eval_batch_thresholds_wide():
    # wide thresholds stress the bit-sliced counter
    n = 48
    gates = [Gate(i, INPUT, idx=i) for i in range(n)]
    outs = []
    for j, k in enumerate((0, 1, 7, 24, 47, 48)):
        gates.append(Gate(n + 2 * j, THRESHOLD_GE, tuple(range(n)), k=k))
        gates.append(Gate(n + 2 * j + 1, THRESHOLD_LE, tuple(range(n)), k=k))
        outs += [n + 2 * j, n + 2 * j + 1]
    c = Circuit(n, tuple(gates), tuple(outs))
    rng = random.Random(5)
    xs = [tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(500)]
    got = eval_batch(c, xs)
    for x, row in zip(xs, got):
        ones = sum(x)
        want = []
        for k in (0, 1, 7, 24, 47, 48):
            want += [int(ones >= k), int(ones <= k)]
        assert row == tuple(want)


def test_eval_batch_empty():
    assert eval_batch(bigram11_fixture(), []) == []


# ---------------------------------------------------------------------------
# metrics


def test_metrics_single_input_is_free():
    c = Circuit(1, (Gate(0, INPUT, idx=0),), (0,))
    m = metrics(c)
    assert m == Metrics(size=0, depth=0, theta_count=0, max_fanin=0)


def test_metrics_bigram_fixture_golden():
    m = metrics(bigram11_fixture())
    assert m == Metrics(size=5, depth=2, theta_count=0, max_fanin=4)


def test_bigram_fixture_language():
    c = bigram11_fixture()
    for bits in all_bits(5):
        w = "".join(map(str, bits))
        assert eval(c, w) == (int(contains_bigram11(w)),)


def test_depth_counts_gates_not_leaves():
    g = [Gate(0, INPUT, idx=0), Gate(1, NOT, (0,)), Gate(2, NOT, (1,)),
         Gate(3, AND, (0, 2))]
    c = Circuit(1, tuple(g), (3,))
    assert depth_map(c) == {0: 0, 1: 1, 2: 2, 3: 3}
    assert metrics(c).depth == 3


def test_metrics_invariant_under_id_permutation():
    rng = random.Random(123)
    for _ in range(50):
        c = random_circuit(rng, 3, 12)
        ids = [g.id for g in c.gates]
        perm = ids[:]
        rng.shuffle(perm)
        rename = dict(zip(ids, perm))
        gates = tuple(Gate(rename[g.id], g.kind,
                           tuple(rename[i] for i in g.inputs), g.k, g.idx)
                      for g in c.gates)
        shuffled = list(gates)
        rng.shuffle(shuffled)
        c2 = Circuit(c.n, tuple(shuffled),
                     tuple(rename[o] for o in c.outputs))
        assert metrics(c2) == metrics(c)
        bits = tuple(rng.randint(0, 1) for _ in range(c.n))
        assert eval(c2, bits) == eval(c, bits)


# ---------------------------------------------------------------------------
# family analysis


def bigram_family(n):
    gates = [Gate(i, INPUT, idx=i) for i in range(n)]
    ands = []
    for i in range(n - 1):
        gates.append(Gate(n + i, AND, (i, i + 1)))
        ands.append(n + i)
    gates.append(Gate(2 * n - 1, OR, tuple(ands)))
    return Circuit(n, tuple(gates), (2 * n - 1,))


def test_family_analyze_bigram():
    rep = family_analyze(bigram_family, [4, 8, 16, 32, 64])
    assert rep.depth_constant and rep.theta_free
    assert 0.8 < rep.slope < 1.2
    assert [r.size for r in rep.rows] == [4, 8, 16, 32, 64]


def test_family_analyze_needs_three_points():
    with pytest.raises(CircuitError):
        family_analyze(bigram_family, [4, 8])


# ---------------------------------------------------------------------------
# negation normalization


def test_normalize_negations_removes_nots():
    rng = random.Random(31)
    for _ in range(200):
        c = random_circuit(rng, rng.randint(1, 3), rng.randint(1, 14))
        norm = normalize_negations(c)
        assert all(g.kind != NOT for g in norm.gates)
        for bits in all_bits(c.n):
            assert eval(norm, bits) == eval(c, bits)


def test_normalize_negations_exhaustive_wider():
    # a fixed NOT-heavy circuit over 12 inputs, checked on all 4096 inputs
    n = 12
    gates = [Gate(i, INPUT, idx=i) for i in range(n)]
    gates.append(Gate(12, THRESHOLD_GE, tuple(range(6)), k=2))
    gates.append(Gate(13, NOT, (12,)))
    gates.append(Gate(14, THRESHOLD_LE, tuple(range(6, 12)), k=3))
    gates.append(Gate(15, NOT, (14,)))
    gates.append(Gate(16, AND, (13, 15)))
    gates.append(Gate(17, NOT, (16,)))
    gates.append(Gate(18, OR, (17, 13)))
    c = Circuit(n, tuple(gates), (18, 17))
    norm = normalize_negations(c)
    assert all(g.kind != NOT for g in norm.gates)
    inputs = all_bits(n)
    assert eval_batch(norm, inputs) == eval_batch(c, inputs)


def test_normalize_preserves_labels():
    c = bigram11_fixture()
    norm = normalize_negations(c)
    assert list(norm.labels.values()) == ["has-11"]


# ---------------------------------------------------------------------------
# serialization


def test_json_roundtrip():
    rng = random.Random(99)
    for _ in range(100):
        c = random_circuit(rng, rng.randint(1, 4), rng.randint(1, 12))
        c2 = from_json(to_json(c))
        assert c2.n == c.n and c2.outputs == c.outputs
        assert c2.gates == c.gates and dict(c2.labels) == dict(c.labels)


def test_json_minimal_document():
    doc = ('{"n": 2, "gates": [{"id": 0, "kind": "INPUT", "idx": 0}, '
           '{"id": 1, "kind": "INPUT", "idx": 1}, '
           '{"id": 2, "kind": "AND", "inputs": [0, 1]}], "outputs": [2]}')
    c = from_json(doc)
    assert eval(c, "11") == (1,) and eval(c, "10") == (0,)


def test_json_errors_name_the_problem():
    with pytest.raises(CircuitError, match="JSON"):
        from_json("{nope")
    with pytest.raises(CircuitError, match="missing id 9"):
        from_json('{"n": 1, "gates": [{"id": 0, "kind": "INPUT", "idx": 0}, '
                  '{"id": 1, "kind": "NOT", "inputs": [9]}], "outputs": [1]}')
    with pytest.raises(CircuitError, match="missing field"):
        from_json('{"n": 1, "gates": [{"id": 0, "kind": "INPUT", "idx": 0}]}')


def test_labels_survive_json():
    c = bigram11_fixture()
    c2 = from_json(to_json(c, indent=2))
    assert c2.labels == {9: "has-11"}


def test_dot_export_mentions_gates():
    dot = to_dot(bigram11_fixture())
    assert dot.startswith("digraph")
    assert "x1" in dot and "AND" in dot and "has-11" in dot
    assert dot.count("->") == 12
