"""Compiled circuits against the machine, word for word.

Everything here leans on one oracle: recognize() is already trusted
(its own suite checks it against plain python predicates), so circuit
correctness means agreeing with it on every tested word.
"""

import dataclasses
import itertools

import pytest

from satcirc.bitnum import flt
from satcirc.builtins import (build_hard_demo, build_majority,
                              build_majority_layernorm,
                              build_prime_universal,
                              build_resource_bounded)
from satcirc.circuit import eval_batch, metrics
from satcirc.compile import (CompileError, compile_hard, compile_saturated,
                             default_samples, encode_word, plan_widths,
                             verify_equivalence)
from satcirc.machine import (Add, Arg, AttentionKind, Const, Div, HeadSpec,
                             LayerSpec, Proj, Select, Sqrt, TransformerSpec,
                             Tup, recognize, run)


def all_words(spec, n):
    return ["".join(t) for t in itertools.product(spec.alphabet, repeat=n)]


def assert_matches_machine(spec, circ, words):
    got = eval_batch(circ, [encode_word(spec, w) for w in words])
    for w, out in zip(words, got):
        assert bool(out[0]) == recognize(spec, w), w


MAJ = build_majority("F")


def two_layer_spec():
    """Saturated scoring on first-layer outputs, so layer-2 tie sets
    genuinely depend on the input."""
    embed = Tup(Proj(1, Arg(0)), Const(0))
    l0 = LayerSpec((HeadSpec(AttentionKind.SATURATED, Const(1)),),
                   Tup(Proj(0, Arg(1)), Proj(0, Arg(0))))
    l1 = LayerSpec((HeadSpec(AttentionKind.SATURATED, Proj(1, Arg(1))),),
                   Tup(Add(Proj(0, Arg(1)), Proj(1, Arg(1))), Const(0)))
    return TransformerSpec(("a", "b"), "F", 2, embed, (l0, l1),
                           ((1, 1), (0, 1)), (-3, 2), name="two-layer")


def uniform_spec():
    embed = Tup(Proj(1, Arg(0)), Const(0))
    layer = LayerSpec((HeadSpec(AttentionKind.UNIFORM, Const(1)),),
                      Tup(Proj(0, Arg(1)), Const(0)))
    return TransformerSpec(("a", "b"), "F", 2, embed, (layer,),
                           ((1, 1), (0, 1)), (-1, 2), name="uniform-mean")


def sqrt_spec():
    """Values 1 or 4 at embedding; the activation square-roots them, so
    the lookup-table sqrt path gets exercised end to end."""
    embed = Tup(Select(Proj(1, Arg(0)), Const(4), Const(1)), Const(0))
    layer = LayerSpec((HeadSpec(AttentionKind.SATURATED, Const(1)),),
                      Tup(Sqrt(Proj(0, Arg(0))), Const(0)))
    return TransformerSpec(("a", "b"), "F", 2, embed, (layer,),
                           ((1, 1), (0, 1)), (-3, 2), name="sqrt-gate")


# ---------------------------------------------------------------------------
# bit-exactness


def test_majority_exhaustive_small_n():
    for n in range(1, 6):
        c = compile_saturated(MAJ, n)
        assert_matches_machine(MAJ, c, all_words(MAJ, n))


def test_majority_depth_is_n_independent():
    depths = {n: metrics(compile_saturated(MAJ, n)).depth
              for n in (4, 8, 16)}
    assert len(set(depths.values())) == 1, depths


def test_majority_spends_threshold_gates():
    assert metrics(compile_saturated(MAJ, 8)).theta_count > 0


def test_two_layer_exhaustive():
    spec = two_layer_spec()
    for n in (2, 4, 5):
        c = compile_saturated(spec, n)
        assert_matches_machine(spec, c, all_words(spec, n))


def test_uniform_head_exhaustive():
    spec = uniform_spec()
    for n in (1, 3, 4, 6):
        c = compile_saturated(spec, n)
        assert_matches_machine(spec, c, all_words(spec, n))


def test_sqrt_lookup_exhaustive():
    spec = sqrt_spec()
    for n in (2, 4):
        c = compile_saturated(spec, n)
        assert_matches_machine(spec, c, all_words(spec, n))


def test_hard_demo_theta_free_and_exact():
    spec = build_hard_demo()
    for n in (2, 4, 6, 8):
        c = compile_hard(spec, n)
        assert metrics(c).theta_count == 0
        assert_matches_machine(spec, c, all_words(spec, n))


def test_compile_hard_wants_hard_heads():
    with pytest.raises(CompileError, match="hard heads only"):
        compile_hard(MAJ, 4)


def test_final_values_emitted_and_correct():
    w = "0110"
    c = compile_saturated(MAJ, 4, include_values=True)
    out = eval_batch(c, [encode_word(MAJ, w)])[0]
    by_label = {c.labels[o]: bit for o, bit in zip(c.outputs, out)
                if o in c.labels}
    t = run(MAJ, w)
    checked = 0
    for i in range(4):
        for k, v in enumerate(t.values[-1][i]):
            prefix = f"v{i + 1}[{k}]"
            for lab, bit in by_label.items():
                if not lab.startswith(prefix + "."):
                    continue
                part = lab[len(prefix) + 1:]
                if part == "sign":
                    want = 0 if v.signed_num < 0 else 1
                else:
                    t_idx = int(part[1:])
                    src = v.p.value if part[0] == "p" else v.e
                    want = (src >> t_idx) & 1
                assert bit == want, lab
                checked += 1
    # pooled values coincide across positions, so packs share wires and
    # labels collapse; at least one full pack must survive
    assert checked >= 4


# ---------------------------------------------------------------------------
# refusals


def test_rational_specs_are_refused():
    with pytest.raises(CompileError, match="F datatype"):
        compile_saturated(build_majority("Q"), 4)


def test_host_primitives_are_refused():
    spec = build_resource_bounded(lambda w: w.endswith("1"), "F")
    with pytest.raises(CompileError, match="pow2/host"):
        compile_saturated(spec, 4)
    with pytest.raises(CompileError):
        compile_saturated(build_prime_universal(lambda w: True), 4)


def test_wide_sqrt_is_refused():
    with pytest.raises(CompileError, match="lookup cap"):
        compile_saturated(build_majority_layernorm(), 4)


def test_division_by_live_value_is_refused():
    embed = Tup(Div(Const(1), Select(Proj(0, Arg(0)), Const(1), Const(2))),
                Const(0))
    layer = LayerSpec((HeadSpec(AttentionKind.SATURATED, Const(1)),),
                      Tup(Proj(0, Arg(1)), Const(0)))
    spec = TransformerSpec(("a", "b"), "F", 2, embed, (layer,),
                           ((1, 1), (0, 1)), (-1, 2), name="bad-div")
    with pytest.raises(CompileError, match="constant divisors"):
        compile_saturated(spec, 3)


def test_encode_word_rejects_unknown_tokens():
    with pytest.raises(CompileError, match="alphabet"):
        encode_word(MAJ, "01x")


# ---------------------------------------------------------------------------
# width plans


def test_analytic_plan_changes_nothing():
    plan = plan_widths(MAJ, 5)
    assert plan.mode == "analytic"
    a = compile_saturated(MAJ, 5)
    b = compile_saturated(MAJ, 5, plan)
    assert a.gates == b.gates and a.outputs == b.outputs


def test_analytic_plan_covers_every_measured_role():
    plan = plan_widths(MAJ, 6)
    for role, need in plan.measured.items():
        have = plan.roles[role]
        assert have[0] >= need[0] and have[1] >= need[1], role


def test_empirical_plan_still_bit_exact():
    plan = plan_widths(MAJ, 5, mode="empirical")
    c = compile_saturated(MAJ, 5, plan)
    assert_matches_machine(MAJ, c, all_words(MAJ, 5))


def test_corrupted_plan_fails_loudly_naming_the_role():
    plan = plan_widths(MAJ, 5, mode="empirical")
    role = "L0.h0.out[0]"
    bad = dataclasses.replace(plan, roles={**plan.roles, role: (1, 0)})
    with pytest.raises(CompileError, match="L0.h0.out"):
        compile_saturated(MAJ, 5, bad)


def test_silent_plan_corruption_shows_up_as_mismatch():
    plan = plan_widths(MAJ, 5, mode="empirical")
    role = "L0.h0.out[0]"
    bad = dataclasses.replace(plan, roles={**plan.roles, role: (1, 0)},
                              measured={**plan.measured, role: (1, 0)})
    rep = verify_equivalence(MAJ, [5], plans={5: bad})
    assert not rep.ok
    assert rep.rows[0].mismatches > 0
    assert rep.rows[0].first_counterexample is not None


def test_plan_validation():
    with pytest.raises(CompileError, match="sample"):
        plan_widths(MAJ, 4, samples=[])
    with pytest.raises(CompileError, match="length"):
        plan_widths(MAJ, 4, samples=["000"])
    with pytest.raises(CompileError, match="mode"):
        plan_widths(MAJ, 4, mode="psychic")
    plan = plan_widths(MAJ, 4)
    with pytest.raises(CompileError, match="n=4"):
        compile_saturated(MAJ, 5, plan)
    assert len(default_samples(MAJ, 7)) >= 3


# ---------------------------------------------------------------------------
# the verifier


def test_verify_exhaustive_report():
    rep = verify_equivalence(MAJ, [2, 3, 4], mode="exhaustive")
    assert rep.ok
    assert [r.tested for r in rep.rows] == [4, 8, 16]
    assert all(r.first_counterexample is None for r in rep.rows)


def test_verify_random_is_seeded_and_clean():
    a = verify_equivalence(MAJ, [9], mode="random", samples=60, seed=3)
    b = verify_equivalence(MAJ, [9], mode="random", samples=60, seed=3)
    assert a.ok and a.rows == b.rows
    assert a.rows[0].tested == 60


def test_verify_refuses_oversized_exhaustive_runs():
    with pytest.raises(CompileError, match="too large"):
        verify_equivalence(MAJ, [21], mode="exhaustive")
    with pytest.raises(CompileError, match="mode"):
        verify_equivalence(MAJ, [3], mode="sideways")


def test_verify_hard_compiles_through_compile_fn():
    rep = verify_equivalence(build_hard_demo(), [3, 5],
                             compile_fn=compile_hard)
    assert rep.ok
