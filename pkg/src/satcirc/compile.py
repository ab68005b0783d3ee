"""Transformer-spec-to-circuit compiler.

For a spec over the dyadic floats and a fixed input length n, emits one
circuit whose accept bit equals recognize(spec, w) for every length-n
word w, encoded position-major as one-hot token groups. Attention is
expanded per position pair: scores are compiled expressions, the
maximizer set comes from pairwise comparators, tie counts from the
exact-count gadget, pooling from the counting float adder, and the
1/|M| weighting from the per-divisor reciprocal shifts. Hard heads mux
the first maximizer's value directly and never spend threshold gates.

Expressions compile structurally primitive-by-primitive. When every
non-constant input wire of a whole embedding/scorer/activation fits the
lookup budget, the expression is instead emitted as one truth table,
and the structural form is built alongside and cross-checked against
the table on all assignments before being discarded.

Width plans certify how wide every value role is. Analytic plans carry
the structurally propagated widths; empirical plans carry widths
measured on sample traces plus a safety margin, and the compiler
narrows its packs to the plan, so a plan that understates a role either
fails loudly here (when it cannot even hold the measured traces) or
shows up as a verification mismatch.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from . import synth as S
from .bitnum import Flt, flt, flt_sqrt
from .circuit import Circuit, eval_batch, metrics
from .machine import (
    AttentionKind, FuncExpr, MachineError, TransformerSpec, eval_expr,
    is_size_preserving, recognize,
)
from .machine import run as machine_run
from .synth import Builder, SynthError, WirePack, clog2


class CompileError(ValueError):
    pass


EXPR_LOOKUP_BITS = 14  # whole-expression truth tables up to here
SQRT_LOOKUP_BITS = 16


def _const_flt(number) -> Flt:
    num, den = number
    if den <= 0 or den & (den - 1):
        raise CompileError(f"{num}/{den} is not representable over F")
    return flt(num, den.bit_length() - 1)


def _check_compilable(spec: TransformerSpec):
    if spec.datatype != "F":
        raise CompileError(
            "only the F datatype compiles to circuits; exact rationals "
            "need gcd reduction, which has no constant-depth gadget here")
    exprs = [spec.embedding]
    for layer in spec.layers:
        exprs.append(layer.activation)
        exprs.extend(h.scorer for h in layer.heads)
    for e in exprs:
        if not is_size_preserving(e):
            raise CompileError(
                "spec uses pow2/host primitives; their growth is not "
                "size-preserving, so they do not compile to circuits")


def encode_word(spec: TransformerSpec, w: str) -> list[int]:
    """Position-major one-hot token encoding, the circuit's input."""
    idx = {a: k for k, a in enumerate(spec.alphabet)}
    bits = []
    for ch in w:
        if ch not in idx:
            raise CompileError(f"token {ch!r} not in alphabet {spec.alphabet}")
        bits.extend(int(k == idx[ch]) for k in range(len(spec.alphabet)))
    return bits


# ---------------------------------------------------------------------------
# width plans


@dataclass(frozen=True)
class WidthPlan:
    """Certified per-role (p bits, exponent bound) widths at one n."""

    n: int
    mode: str  # analytic | empirical
    roles: Mapping[str, tuple[int, int]]
    measured: Mapping[str, tuple[int, int]]
    samples: tuple[str, ...]


def _covers(have: tuple[int, int], need: tuple[int, int]) -> bool:
    return have[0] >= need[0] and have[1] >= need[1]


def default_samples(spec: TransformerSpec, n: int, count: int = 6,
                    seed: int = 0) -> list[str]:
    alpha = spec.alphabet
    words = {alpha[0] * n, alpha[-1] * n,
             "".join(alpha[i % len(alpha)] for i in range(n))}
    rng = random.Random(seed)
    while len(words) < count:
        words.add("".join(rng.choice(alpha) for _ in range(n)))
    return sorted(words)


def _measure_roles(spec: TransformerSpec, n: int, samples) -> dict:
    meas: dict = {}

    def rec(role: str, v: Flt):
        old = meas.get(role, (0, 0))
        meas[role] = (max(old[0], len(v.p)), max(old[1], v.e))

    for w in samples:
        t = machine_run(spec, w)
        for i in range(n):
            for c, comp in enumerate(t.values[0][i]):
                rec(f"embed[{c}]", comp)
        for li, layer in enumerate(spec.layers):
            for h, head in enumerate(layer.heads):
                if head.attention is not AttentionKind.UNIFORM:
                    for i in range(n):
                        for s in t.scores[li][h][i]:
                            rec(f"L{li}.h{h}.score", s)
                for i in range(n):
                    for c, comp in enumerate(t.head_out[li][h][i]):
                        rec(f"L{li}.h{h}.out[{c}]", comp)
            for i in range(n):
                for c, comp in enumerate(t.values[li + 1][i]):
                    rec(f"L{li}.act[{c}]", comp)
    return meas


def plan_widths(spec: TransformerSpec, n: int, samples=None,
                mode: str = "analytic") -> WidthPlan:
    """Derive a width plan, measuring sample traces and checking they
    fit under the structurally propagated bounds."""
    _check_compilable(spec)
    if samples is None:
        samples = default_samples(spec, n)
    samples = list(samples)
    if not samples:
        raise CompileError("width planning needs at least one sample input")
    for w in samples:
        if len(w) != n:
            raise CompileError(f"sample {w!r} is not length {n}")
    measured = _measure_roles(spec, n, samples)
    analytic = _Compiler(spec, n, None).dry_roles()
    for role, need in measured.items():
        have = analytic.get(role)
        if have is not None and not _covers(have, need):
            raise CompileError(
                f"analytic width for {role} is p{have[0]}/e{have[1]} but a "
                f"sample trace reached p{need[0]}/e{need[1]}")
    if mode == "analytic":
        roles = dict(analytic)
    elif mode == "empirical":
        roles = {r: (p + 2, e + 1) for r, (p, e) in measured.items()}
    else:
        raise CompileError(f"unknown width plan mode {mode!r}")
    return WidthPlan(n, mode, roles, measured, tuple(samples))


def _check_plan(spec: TransformerSpec, n: int, plan: WidthPlan):
    if plan is None:
        return
    if plan.n != n:
        raise CompileError(f"width plan is for n={plan.n}, compiling n={n}")
    for role, need in plan.measured.items():
        have = plan.roles.get(role)
        if have is not None and not _covers(have, need):
            raise CompileError(
                f"width plan overflow at {role}: declared p{have[0]}/"
                f"e{have[1]} cannot hold the traced p{need[0]}/e{need[1]}")


def _narrow(b: Builder, pack: WirePack, p_bits: int, e_max: int) -> WirePack:
    ew = clog2(e_max + 1)
    p = S._pad(b, list(pack.p[:p_bits]), p_bits)
    e = S._pad(b, list(pack.e[:ew]), ew)
    still = pack.canonical and p_bits >= len(pack.p) and e_max >= pack.e_max
    return S.float_pack(pack.sign, p, e, e_max, still, pack.name)


# ---------------------------------------------------------------------------
# expression values: WirePack or nested tuples of packs


def _flatten_packs(val, out: list):
    if isinstance(val, tuple):
        for v in val:
            _flatten_packs(v, out)
    else:
        out.append(val)


def _pack_const(b: Builder, pack: WirePack):
    """The Flt a pack always encodes, or None if any wire is live."""
    bits = []
    for w in pack.wires:
        v = b.const_value(w)
        if v is None:
            return None
        bits.append(v)
    pv = S.decode_uint(bits[1:1 + pack.p_width])
    ev = S.decode_uint(bits[1 + pack.p_width:])
    return Flt.make(pv if bits[0] else -pv, ev)


def _dnf_wires(b: Builder, in_wires, rows) -> list[int]:
    """Truth table over existing wires as two-level AND/OR."""
    outs = []
    for t in range(len(rows[0])):
        terms = []
        for m, row in enumerate(rows):
            if row[t]:
                terms.append(b.and_(*[
                    w if (m >> i) & 1 else b.not_(w)
                    for i, w in enumerate(in_wires)]))
        outs.append(b.or_(*terms))
    return outs


# ---------------------------------------------------------------------------
# the compiler


class _Compiler:
    def __init__(self, spec: TransformerSpec, n: int, plan: WidthPlan):
        self.spec = spec
        self.n = n
        self.plan = plan
        self.b = Builder(n * len(spec.alphabet))
        self.roles: dict = {}
        self._xchecked: set = set()

    # role bookkeeping ------------------------------------------------

    def _register(self, role: str, pack: WirePack) -> WirePack:
        got = (len(pack.p), pack.e_max)
        old = self.roles.get(role, (0, 0))
        self.roles[role] = (max(old[0], got[0]), max(old[1], got[1]))
        if self.plan is None:
            return pack
        want = self.plan.roles.get(role)
        if want is None or _covers(want, got):
            return pack
        return _narrow(self.b, pack, min(got[0], want[0]),
                       min(got[1], want[1]))

    def dry_roles(self) -> dict:
        self.build()
        return dict(self.roles)

    # expression compilation -------------------------------------------

    def _scalar(self, v, what: str) -> WirePack:
        if isinstance(v, tuple):
            raise CompileError(f"{what}: expected a scalar, got a "
                               f"{len(v)}-tuple")
        return v

    def _expr_auto(self, e: FuncExpr, args):
        """Structural by default; whole-expression truth table when all
        live input wires fit the lookup budget (cross-checked)."""
        b = self.b
        packs: list = []
        _flatten_packs(args, packs)
        live, seen = [], set()
        for pk in packs:
            for w in pk.wires:
                if b.const_value(w) is None and w not in seen:
                    seen.add(w)
                    live.append(w)
        ref = self._expr(e, args)
        if not (1 <= len(live) <= EXPR_LOOKUP_BITS) or e.op == "arg":
            return ref
        rows = self._table_rows(e, args, ref, live)
        if rows is None:
            return ref
        sig = (e, _shape_sig(b, args))
        if sig not in self._xchecked:
            self._cross_check(e, args, ref, live, rows)
            self._xchecked.add(sig)
        return _unflatten(_dnf_wires(b, live, rows), ref)

    def _table_rows(self, e, args, ref, live):
        b = self.b
        rows = []
        for m in range(1 << len(live)):
            asn = {w: (m >> t) & 1 for t, w in enumerate(live)}
            try:
                vals = _decode_args(b, args, asn)
                out = eval_expr(e, vals, self.spec.domain, self.spec.hosts)
                rows.append(_encode_result(out, ref))
            except (MachineError, SynthError):
                return None  # not tabulable; keep the structural form
        return rows

    def _cross_check(self, e, args, ref, live, rows):
        main_b = self.b
        b2 = Builder(len(live))
        wmap = {w: b2.input(t) for t, w in enumerate(live)}

        def clone(val):
            if isinstance(val, tuple):
                return tuple(clone(v) for v in val)
            ws = []
            for w in val.wires:
                cv = main_b.const_value(w)
                ws.append(wmap[w] if cv is None else b2.const(cv))
            return WirePack(val.tag, tuple(ws), val.p_width, val.e_width,
                            val.e_max, val.canonical, val.name)

        self.b = b2
        try:
            ref2 = self._expr(e, clone(args))
        finally:
            self.b = main_b
        packs2: list = []
        _flatten_packs(ref2, packs2)
        outs2 = [w for pk in packs2 for w in pk.wires]
        c2 = b2.build(outs2)
        xs = [[(m >> t) & 1 for t in range(len(live))]
              for m in range(len(rows))]
        for m, (got_bits, row) in enumerate(zip(eval_batch(c2, xs), rows)):
            if _decode_result(got_bits, ref2) != _decode_result(row, ref):
                raise CompileError(
                    f"structural/lookup cross-check failed for {e.op!r} "
                    f"on assignment {m}")

    def _expr(self, e: FuncExpr, args):
        b = self.b
        op = e.op
        if op == "const":
            return S.f_const(b, _const_flt(e.data))
        if op == "arg":
            j = e.data
            if not 0 <= j < len(args):
                raise CompileError(f"arg {j} out of range (have {len(args)})")
            return args[j]
        if op == "proj":
            v = self._expr(e.args[0], args)
            if not isinstance(v, tuple):
                raise CompileError("proj applied to a scalar")
            k = e.data
            if not 0 <= k < len(v):
                raise CompileError(f"proj index {k} out of range "
                                   f"(width {len(v)})")
            return v[k]
        if op == "tup":
            return tuple(self._scalar(self._expr(a, args), "tup component")
                         for a in e.args)
        if op == "select":
            cond = self._scalar(self._expr(e.args[0], args), op)
            cw = S.f_nonzero(b, cond)
            return self._select_val(cw, self._expr(e.args[1], args),
                                    self._expr(e.args[2], args))
        vals = [self._expr(a, args) for a in e.args]
        if op == "add":
            return S.f_add(b, self._scalar(vals[0], op),
                           self._scalar(vals[1], op))
        if op == "mul":
            return self._mul(vals[0], vals[1])
        if op == "div":
            num = self._scalar(vals[0], op)
            den = self._scalar(vals[1], op)
            dc = _pack_const(b, den)
            if dc is None:
                raise CompileError(
                    "division compiles only for compile-time constant "
                    "divisors (the tie-count division is internal)")
            if dc.is_zero():
                raise CompileError("division by the constant zero")
            return S.f_div_const(b, num, dc)
        if op == "sqrt":
            return self._sqrt(self._scalar(vals[0], op))
        if op == "neg":
            return S.f_neg(b, self._scalar(vals[0], op))
        if op == "relu":
            return S.f_relu(b, self._scalar(vals[0], op))
        if op == "gt":
            return S.f_from_bit(b, S.f_gt(b, self._scalar(vals[0], op),
                                          self._scalar(vals[1], op)))
        if op == "eq":
            return S.f_from_bit(b, S.f_eq(b, self._scalar(vals[0], op),
                                          self._scalar(vals[1], op)))
        if op == "affine":
            coeffs, bias = e.data
            terms = [S.f_const(b, _const_flt(bias))]
            for cf, v in zip(coeffs, vals):
                cfl = _const_flt(cf)
                if not cfl.is_zero():
                    terms.append(S.f_mul_const(b, self._scalar(v, op), cfl))
            return S.f_sum_tree(b, terms)
        raise CompileError(f"cannot compile op {op!r}")

    def _mul(self, x, y):
        b = self.b
        x = self._scalar(x, "mul")
        y = self._scalar(y, "mul")
        cy = _pack_const(b, y)
        if cy is not None:
            return S.f_mul_const(b, x, cy)
        cx = _pack_const(b, x)
        if cx is not None:
            return S.f_mul_const(b, y, cx)
        return S.f_mul(b, x, y)

    def _select_val(self, cw: int, x, y):
        if isinstance(x, tuple) or isinstance(y, tuple):
            if not (isinstance(x, tuple) and isinstance(y, tuple)
                    and len(x) == len(y)):
                raise CompileError("select branches must have the same shape")
            return tuple(self._select_val(cw, xa, ya)
                         for xa, ya in zip(x, y))
        return S.f_select(self.b, cw, x, y)

    def _sqrt(self, x: WirePack) -> WirePack:
        """Square root as a truth table over the numerator/exponent
        wires; refuses packs wider than the lookup cap."""
        b = self.b
        wires = list(x.p) + list(x.e)
        live = [w for w in wires if b.const_value(w) is None]
        if len(live) > SQRT_LOOKUP_BITS:
            raise CompileError(
                f"sqrt operand has {len(live)} live bits, over the "
                f"lookup cap {SQRT_LOOKUP_BITS}; not compilable")
        results = []
        for m in range(1 << len(live)):
            asn = {w: (m >> t) & 1 for t, w in enumerate(live)}
            bits = [asn.get(w, b.const_value(w)) for w in wires]
            pv = S.decode_uint(bits[:len(x.p)])
            ev = min(S.decode_uint(bits[len(x.p):]), x.e_max)
            results.append(flt_sqrt(Flt.make(pv, ev)))
        p_w = max(max((len(r.p) for r in results), default=0), 1)
        e_mx = max(r.e for r in results)
        e_w = clog2(e_mx + 1)
        rows = [tuple(S.encode_flt(r, p_w, e_w)[1:]) for r in results]
        outs = _dnf_wires(b, live, rows) if live else [
            b.const(v) for v in rows[0]]
        return S.float_pack(b.const(1), outs[:p_w], outs[p_w:], e_mx,
                            canonical=True)

    # attention ----------------------------------------------------------

    def _gate_pack(self, g: int, pack: WirePack) -> WirePack:
        b = self.b
        return S.float_pack(pack.sign, [b.and_(g, w) for w in pack.p],
                            [b.and_(g, w) for w in pack.e], pack.e_max,
                            False, pack.name)

    def _onehot_merge(self, hots, packs) -> WirePack:
        b = self.b
        pw = max(len(pk.p) for pk in packs)
        ew = max(len(pk.e) for pk in packs)
        emax = max(pk.e_max for pk in packs)
        p = [b.or_(*[b.and_(h, S._pad(b, list(pk.p), pw)[t])
                     for h, pk in zip(hots, packs)]) for t in range(pw)]
        e = [b.or_(*[b.and_(h, S._pad(b, list(pk.e), ew)[t])
                     for h, pk in zip(hots, packs)]) for t in range(ew)]
        sign = b.or_(*[b.and_(h, pk.sign) for h, pk in zip(hots, packs)])
        return S.float_pack(sign, p, e, emax, False)

    def _head_output(self, li: int, h: int, head, vecs, i: int,
                     block) -> tuple:
        b = self.b
        n = self.n
        kind = head.attention
        if kind is AttentionKind.UNIFORM:
            outs = []
            for c in block:
                sm = S.f_sum(b, [vecs[j][c] for j in range(n)])
                outs.append(S.f_div_const(b, sm, flt(n)))
            return tuple(outs)
        scores = []
        for j in range(n):
            s = self._scalar(
                self._expr_auto(head.scorer, (vecs[i], vecs[j])), "scorer")
            scores.append(self._register(f"L{li}.h{h}.score", s))
        flags = []  # flags[j]: score j is maximal in the row
        for j in range(n):
            comps = [S.f_ge(b, scores[j], scores[k])
                     for k in range(n) if k != j]
            flags.append(b.and_(*comps))
        if kind is AttentionKind.HARD:
            hots = []  # one-hot at the least maximizer
            for j in range(n):
                hots.append(b.and_(flags[j],
                                   *[b.not_(flags[t]) for t in range(j)]))
            return tuple(self._onehot_merge(hots, [vecs[j][c]
                                                   for j in range(n)])
                         for c in block)
        counts = S._exact_count(b, flags)  # |M| one-hot over 0..n
        outs = []
        for c in block:
            gated = [self._gate_pack(flags[j], vecs[j][c]) for j in range(n)]
            sm = S.f_sum(b, gated)
            outs.append(S.f_div_by_indicators(b, sm, counts))
        return tuple(outs)

    # whole-network build -------------------------------------------------

    def _vector(self, v, what: str) -> tuple:
        if not isinstance(v, tuple) or len(v) != self.spec.width:
            got = (f"{len(v)}-tuple" if isinstance(v, tuple)
                   else "a scalar")
            raise CompileError(f"{what} must produce a "
                               f"{self.spec.width}-tuple, got {got}")
        return v

    def build(self, include_values: bool = False) -> Circuit:
        spec, n, b = self.spec, self.n, self.b
        nsym = len(spec.alphabet)
        in_labels = {}
        vecs = []
        for i in range(n):
            hot = []
            for a in range(nsym):
                wire = b.input(i * nsym + a)
                in_labels[wire] = f"w{i + 1}={spec.alphabet[a]}"
                hot.append(S.f_from_bit(b, wire))
            pos = S.f_const(b, flt(i + 1))
            v = self._vector(self._expr_auto(spec.embedding,
                                             (tuple(hot), pos)), "embedding")
            vecs.append(tuple(self._register(f"embed[{c}]", comp)
                              for c, comp in enumerate(v)))
        bw = spec.block_width
        for li, layer in enumerate(spec.layers):
            per_head = []
            for h, head in enumerate(layer.heads):
                block = range(h * bw, (h + 1) * bw)
                outs_h = []
                for i in range(n):
                    out = self._head_output(li, h, head, vecs, i, block)
                    outs_h.append(tuple(
                        self._register(f"L{li}.h{h}.out[{c}]", pk)
                        for c, pk in enumerate(out)))
                per_head.append(outs_h)
            nxt = []
            for i in range(n):
                bcat = tuple(pk for h in range(spec.n_heads)
                             for pk in per_head[h][i])
                v = self._vector(
                    self._expr_auto(layer.activation, (vecs[i], bcat)),
                    f"layer {li} activation")
                nxt.append(tuple(self._register(f"L{li}.act[{c}]", comp)
                                 for c, comp in enumerate(v)))
            vecs = nxt
        terms = [S.f_const(b, _const_flt(spec.classifier_b))]
        for wk, comp in zip(spec.classifier_w, vecs[0]):
            cf = _const_flt(wk)
            if not cf.is_zero():
                terms.append(S.f_mul_const(b, comp, cf))
        cls = self._register("classifier", S.f_sum_tree(b, terms))
        accept = b.and_(cls.sign, S.f_nonzero(b, cls))
        outputs = [accept]
        labels = dict(in_labels)
        labels[accept] = "accept"
        if include_values:
            for i in range(n):
                for c, comp in enumerate(vecs[i]):
                    pk = S.f_canon(b, comp)
                    S._emit_float(outputs, labels, pk, f"v{i + 1}[{c}]")
        return b.build(outputs, labels)


# ---------------------------------------------------------------------------
# lookup-table plumbing


def _shape_sig(b: Builder, val):
    if isinstance(val, tuple):
        return tuple(_shape_sig(b, v) for v in val)
    return (val.p_width, val.e_width, val.e_max,
            tuple(b.const_value(w) for w in val.wires))


def _decode_args(b: Builder, val, asn):
    if isinstance(val, tuple):
        return tuple(_decode_args(b, v, asn) for v in val)
    bits = []
    for w in val.wires:
        cv = b.const_value(w)
        bits.append(asn[w] if cv is None else cv)
    return S.decode_flt(bits, val.p_width, val.e_width)


def _encode_result(val, ref) -> tuple:
    bits: list[int] = []

    def go(v, r):
        if isinstance(r, tuple):
            if not isinstance(v, tuple) or len(v) != len(r):
                raise SynthError("result shape mismatch")
            for vv, rr in zip(v, r):
                go(vv, rr)
        else:
            if isinstance(v, tuple):
                raise SynthError("result shape mismatch")
            if v.e > r.e_max:
                raise SynthError("exponent exceeds the static bound")
            bits.extend(S.encode_flt(v, r.p_width, r.e_width))

    go(val, ref)
    return tuple(bits)


def _decode_result(bits, ref):
    pos = 0

    def go(r):
        nonlocal pos
        if isinstance(r, tuple):
            return tuple(go(rr) for rr in r)
        w = 1 + r.p_width + r.e_width
        chunk = bits[pos:pos + w]
        pos += w
        return S.decode_flt(chunk, r.p_width, r.e_width)

    return go(ref)


def _unflatten(outs, ref):
    pos = 0

    def go(r):
        nonlocal pos
        if isinstance(r, tuple):
            return tuple(go(rr) for rr in r)
        w = 1 + r.p_width + r.e_width
        ws = outs[pos:pos + w]
        pos += w
        return S.float_pack(ws[0], ws[1:1 + r.p_width], ws[1 + r.p_width:],
                            r.e_max, canonical=True, name=r.name)

    return go(ref)


# ---------------------------------------------------------------------------
# entry points


def compile_saturated(spec: TransformerSpec, n: int, plan: WidthPlan = None,
                      include_values: bool = False) -> Circuit:
    """Compile for saturated/uniform (and mux-style hard) attention."""
    _check_compilable(spec)
    if n < 1:
        raise CompileError("need n >= 1")
    _check_plan(spec, n, plan)
    return _Compiler(spec, n, plan).build(include_values)


def compile_hard(spec: TransformerSpec, n: int, plan: WidthPlan = None,
                 include_values: bool = False) -> Circuit:
    """All-hard compilation; the result must be threshold-free."""
    for layer in spec.layers:
        for head in layer.heads:
            if head.attention is not AttentionKind.HARD:
                raise CompileError("compile_hard wants hard heads only; "
                                   f"found {head.attention.value}")
    c = compile_saturated(spec, n, plan, include_values)
    m = metrics(c)
    assert m.theta_count == 0, \
        f"hard compilation emitted {m.theta_count} threshold gates"
    return c


# ---------------------------------------------------------------------------
# machine equivalence


@dataclass(frozen=True)
class EquivRow:
    n: int
    mode: str
    tested: int
    mismatches: int
    first_counterexample: str = None


@dataclass(frozen=True)
class EquivReport:
    name: str
    rows: tuple[EquivRow, ...]

    @property
    def ok(self) -> bool:
        return all(r.mismatches == 0 for r in self.rows)


def _word_batch(spec, n, mode, samples, seed):
    if mode == "exhaustive":
        if len(spec.alphabet) ** n > 1 << 20:
            raise CompileError(f"exhaustive verification over "
                               f"{len(spec.alphabet)}^{n} words is too large")
        return ["".join(t) for t in
                itertools.product(spec.alphabet, repeat=n)]
    if mode == "random":
        rng = random.Random(f"{seed}:{n}")
        return ["".join(rng.choice(spec.alphabet) for _ in range(n))
                for _ in range(samples)]
    raise CompileError(f"unknown verification mode {mode!r}")


def verify_equivalence(spec: TransformerSpec, ns: Sequence[int],
                       mode: str = "exhaustive", samples: int = 1000,
                       seed: int = 0, plans: Mapping[int, WidthPlan] = None,
                       compile_fn: Callable = None) -> EquivReport:
    """Compare the compiled circuit's accept bit against the machine on
    every word in the batch; reports per-n counts and the first
    counterexample if any."""
    builder = compile_fn or compile_saturated
    rows = []
    for n in ns:
        plan = plans.get(n) if plans else None
        c = builder(spec, n, plan)
        words = _word_batch(spec, n, mode, samples, seed)
        got = eval_batch(c, [encode_word(spec, w) for w in words])
        bad = 0
        first = None
        for w, out in zip(words, got):
            if bool(out[0]) != recognize(spec, w):
                bad += 1
                if first is None:
                    first = w
        rows.append(EquivRow(n, mode, len(words), bad, first))
    return EquivReport(spec.name or "spec", tuple(rows))
