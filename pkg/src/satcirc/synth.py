"""Gate-level synthesis library.

Everything here builds onto a Builder: a gate pool with hash-consing
(structurally identical gates are emitted once) and optional folding
(constant propagation, identity-element removal, double-negation). The
folding rules never change a wire's value, only the circuit's shape, so
gadgets that promise an exact depth build themselves inside a no_fold()
region where every gate is emitted verbatim.

Numbers on wires are little-endian unsigned bit vectors. Floats are
WirePacks: a sign wire (1 = nonnegative, matching the evaluator), p bits
and e bits, with a static bound e_max on the exponent's value. Packs are
"raw" until f_canon strips trailing zeros; all arithmetic is value-exact
on raw packs, so canonicalization is only needed where bit-for-bit
agreement with the evaluator's canonical form is required.

Data-dependent exponent arithmetic is done by value enumeration (muxes
keyed on "e == u" indicators, u <= e_max), never by ripple arithmetic on
the e wires; this keeps every float gadget's depth independent of the
widths that grow with n.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Sequence

from .bitnum import Flt
from .circuit import (
    AND, CONST, Circuit, Gate, INPUT, NEG_INPUT, NOT, OR, THRESHOLD_GE,
    THRESHOLD_LE, depth_map, metrics,
)


class SynthError(ValueError):
    pass


def clog2(x: int) -> int:
    return (x - 1).bit_length() if x > 1 else 0


# ---------------------------------------------------------------------------
# builder


class Builder:
    """Gate pool with hash-consing and optional folding."""

    def __init__(self, n: int):
        self.n = n
        self._gates: list[tuple] = []  # (kind, inputs, k, idx)
        self._memo: dict = {}
        self._nofold = 0

    @property
    def folding(self) -> bool:
        return self._nofold == 0

    @contextmanager
    def no_fold(self):
        """Emit gates verbatim: no constant folding, no passthrough, no
        leaf-negation rewriting. Shape-uniform gadgets live in here."""
        self._nofold += 1
        try:
            yield self
        finally:
            self._nofold -= 1

    def _emit(self, kind, inputs=(), k=None, idx=None) -> int:
        key = (kind, inputs, k, idx)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        gid = len(self._gates)
        self._gates.append((kind, inputs, k, idx))
        self._memo[key] = gid
        return gid

    def kind_of(self, w: int) -> str:
        return self._gates[w][0]

    def const_value(self, w: int):
        """0/1 if the wire is a CONST gate, else None."""
        g = self._gates[w]
        return g[2] if g[0] == CONST else None

    def input(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise SynthError(f"input index {i} out of range")
        return self._emit(INPUT, idx=i)

    def neg_input(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise SynthError(f"input index {i} out of range")
        return self._emit(NEG_INPUT, idx=i)

    def const(self, v: int) -> int:
        return self._emit(CONST, k=1 if v else 0)

    def and_(self, *ws) -> int:
        ws = _flatten(ws)
        if self.folding:
            kept = []
            for w in ws:
                cv = self.const_value(w)
                if cv == 0:
                    return self.const(0)
                if cv is None:
                    kept.append(w)
            kept = sorted(set(kept))
            if not kept:
                return self.const(1)
            if len(kept) == 1:
                return kept[0]
            return self._emit(AND, tuple(kept))
        return self._emit(AND, tuple(sorted(ws)))

    def or_(self, *ws) -> int:
        ws = _flatten(ws)
        if self.folding:
            kept = []
            for w in ws:
                cv = self.const_value(w)
                if cv == 1:
                    return self.const(1)
                if cv is None:
                    kept.append(w)
            kept = sorted(set(kept))
            if not kept:
                return self.const(0)
            if len(kept) == 1:
                return kept[0]
            return self._emit(OR, tuple(kept))
        return self._emit(OR, tuple(sorted(ws)))

    def not_(self, w: int) -> int:
        if self.folding:
            kind, inputs, k, idx = self._gates[w]
            if kind == CONST:
                return self.const(1 - k)
            if kind == NOT:
                return inputs[0]
            if kind == INPUT:
                return self._emit(NEG_INPUT, idx=idx)
            if kind == NEG_INPUT:
                return self._emit(INPUT, idx=idx)
        return self._emit(NOT, (w,))

    def ge(self, ws, k: int) -> int:
        ws = tuple(ws)
        if self.folding:
            known = [self.const_value(w) for w in ws]
            base = sum(1 for v in known if v == 1)
            live = tuple(sorted(w for w, v in zip(ws, known) if v is None))
            k2 = k - base
            if k2 <= 0:
                return self.const(1)
            if k2 > len(live):
                return self.const(0)
            if k2 == 1:
                return self.or_(*live)
            if k2 == len(live):
                return self.and_(*live)
            return self._emit(THRESHOLD_GE, live, k=k2)
        if k < 0:
            raise SynthError("threshold wants k >= 0")
        return self._emit(THRESHOLD_GE, tuple(sorted(ws)), k=k)

    def le(self, ws, k: int) -> int:
        ws = tuple(ws)
        if self.folding:
            return self.not_(self.ge(ws, k + 1))
        if k < 0:
            raise SynthError("threshold wants k >= 0")
        return self._emit(THRESHOLD_LE, tuple(sorted(ws)), k=k)

    def xor2(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, self.not_(b)),
                        self.and_(self.not_(a), b))

    def mux(self, c: int, a: int, b: int) -> int:
        """a if c else b."""
        return self.or_(self.and_(c, a), self.and_(self.not_(c), b))

    def build(self, outputs: Sequence[int], labels=None) -> Circuit:
        """Prune to the cone of the outputs and renumber densely."""
        outputs = tuple(outputs)
        keep = set()
        stack = list(outputs)
        while stack:
            w = stack.pop()
            if w in keep:
                continue
            keep.add(w)
            stack.extend(self._gates[w][1])
        rename = {}
        gates = []
        for old in sorted(keep):  # creation order is topological
            kind, inputs, k, idx = self._gates[old]
            new = len(gates)
            rename[old] = new
            gates.append(Gate(new, kind, tuple(rename[i] for i in inputs),
                              k, idx))
        out_ids = tuple(rename[o] for o in outputs)
        lab = {}
        if labels:
            for w, text in labels.items():
                if w in rename:
                    lab[rename[w]] = text
        return Circuit(self.n, tuple(gates), out_ids, lab)


def _flatten(ws) -> list:
    out = []
    for w in ws:
        if isinstance(w, (list, tuple)):
            out.extend(w)
        else:
            out.append(w)
    return out


# ---------------------------------------------------------------------------
# wire packs and encodings


@dataclass(frozen=True)
class WirePack:
    """Fixed-width bundle of wires with a numeric reading.

    uint: wires are little-endian value bits. float: wires[0] is the
    sign (1 = nonnegative), then p_width numerator bits (little-endian),
    then the exponent bits; e_max bounds the exponent's value.
    """

    tag: str
    wires: tuple[int, ...]
    p_width: int = None
    e_width: int = None
    e_max: int = None
    canonical: bool = False
    name: str = ""

    def __post_init__(self):
        if self.tag == "float":
            if len(self.wires) != 1 + self.p_width + self.e_width:
                raise SynthError("float pack width mismatch")
        elif self.tag != "uint":
            raise SynthError(f"unknown pack tag {self.tag!r}")

    @property
    def sign(self) -> int:
        return self.wires[0]

    @property
    def p(self) -> tuple[int, ...]:
        return self.wires[1:1 + self.p_width]

    @property
    def e(self) -> tuple[int, ...]:
        return self.wires[1 + self.p_width:]


def uint_pack(wires, name="") -> WirePack:
    return WirePack("uint", tuple(wires), name=name)


def float_pack(sign, p, e, e_max, canonical=False, name="") -> WirePack:
    return WirePack("float", (sign, *p, *e), len(tuple(p)), len(tuple(e)),
                    e_max, canonical, name)


def encode_uint(value: int, width: int) -> list[int]:
    if value < 0 or value >= (1 << width):
        raise SynthError(f"{value} does not fit in {width} bits")
    return [(value >> i) & 1 for i in range(width)]


def decode_uint(bits: Sequence[int]) -> int:
    return sum(b << i for i, b in enumerate(bits))


def encode_flt(x: Flt, p_width: int, e_width: int) -> list[int]:
    if len(x.p) > p_width or x.e.bit_length() > e_width:
        raise SynthError(f"{x} does not fit in p{p_width}/e{e_width}")
    return ([x.sign] + encode_uint(x.p.value, p_width)
            + encode_uint(x.e, e_width))


def decode_flt(bits: Sequence[int], p_width: int, e_width: int) -> Flt:
    sign = bits[0]
    p = decode_uint(bits[1:1 + p_width])
    e = decode_uint(bits[1 + p_width:1 + p_width + e_width])
    return Flt.make(p if sign else -p, e)


# ---------------------------------------------------------------------------
# DNF lookup (truth-table synthesis)

LOOKUP_CAP = 16


@dataclass(frozen=True)
class LookupSpec:
    c: int
    d: int
    table: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.c < 1 or self.c > LOOKUP_CAP:
            raise SynthError(f"lookup width {self.c} outside 1..{LOOKUP_CAP}")
        if len(self.table) != 1 << self.c:
            raise SynthError("table must have exactly 2^c rows")
        if any(len(row) != self.d for row in self.table):
            raise SynthError("every table row must have d bits")

    @classmethod
    def from_function(cls, c: int, d: int, fn: Callable) -> "LookupSpec":
        rows = []
        for m in range(1 << c):
            bits = tuple((m >> i) & 1 for i in range(c))
            out = tuple(int(v) for v in fn(bits))
            rows.append(out)
        return cls(c, d, tuple(rows))


def dnf_lookup(spec: LookupSpec) -> Circuit:
    """Truth table as a depth-exactly-3 DNF: a NOT layer, an AND layer
    of minterms, and one OR per output. Outputs whose DNF has no
    negated literal on any path (constants, a single all-ones minterm)
    are padded with the false term x1 AND NOT x1 so every output still
    sits at depth 3. Size is asserted against (2^c + c + 1) * d."""
    b = Builder(spec.c)
    with b.no_fold():
        xs = [b.input(i) for i in range(spec.c)]
        nots = {}

        def neg(i):
            if i not in nots:
                nots[i] = b.not_(xs[i])
            return nots[i]

        false_term = None
        outs = []
        for bit in range(spec.d):
            rows = [m for m in range(1 << spec.c) if spec.table[m][bit]]
            terms = []
            deep = False  # does some term pass through the NOT layer?
            for m in rows:
                lits = []
                for i in range(spec.c):
                    if (m >> i) & 1:
                        lits.append(xs[i])
                    else:
                        lits.append(neg(i))
                        deep = True
                terms.append(b.and_(*lits))
            if not deep:
                if false_term is None:
                    false_term = b.and_(xs[0], neg(0))
                terms.append(false_term)
            outs.append(b.or_(*terms))
    c = b.build(outs, labels={o: f"f{t}" for t, o in enumerate(outs)})
    m = metrics(c)
    dm = depth_map(c)
    d = [dm[o] for o in c.outputs]
    assert all(v == 3 for v in d), f"dnf depth {d} != 3"
    bound = (2 ** spec.c + spec.c + 1) * spec.d
    assert m.size <= bound, f"dnf size {m.size} > bound {bound}"
    return c


# ---------------------------------------------------------------------------
# counting gadgets


def _exact_count(b: Builder, ws) -> list[int]:
    """Indicator wires: result[m] = 1 iff exactly m of ws are 1."""
    ws = tuple(ws)
    return [b.and_(b.ge(ws, m), b.le(ws, m)) for m in range(len(ws) + 1)]


def _count_bits(b: Builder, ws) -> list[int]:
    """Binary popcount of ws, little-endian."""
    ws = tuple(ws)
    ind = _exact_count(b, ws)
    width = len(ws).bit_length()
    bits = []
    for t in range(width):
        members = [ind[m] for m in range(len(ws) + 1) if (m >> t) & 1]
        bits.append(b.or_(*members))
    return bits


def exact_count_indicators(n: int) -> Circuit:
    if n < 1:
        raise SynthError("need n >= 1")
    b = Builder(n)
    with b.no_fold():
        outs = _exact_count(b, [b.input(i) for i in range(n)])
    return b.build(outs, {o: f"count={m}" for m, o in enumerate(outs)})


def count_bits(n: int) -> Circuit:
    if n < 1:
        raise SynthError("need n >= 1")
    b = Builder(n)
    with b.no_fold():
        outs = _count_bits(b, [b.input(i) for i in range(n)])
    return b.build(outs, {o: f"bit{t}" for t, o in enumerate(outs)})


# ---------------------------------------------------------------------------
# two-number adder, subtractor, comparators (theta-free, flat)


def _pad(b: Builder, ws, width: int) -> list[int]:
    ws = list(ws)
    if len(ws) < width:
        zero = b.const(0)
        ws += [zero] * (width - len(ws))
    return ws


def _adder2(b: Builder, aws, bws) -> list[int]:
    """a + b via merged carry-lookahead DNF; width max(|a|,|b|)+1.

    The carry into j is expanded inside each sum bit's DNF: carry
    terms are generate-and-propagate chains, no-carry terms are
    kill-and-no-generate chains, each AND'ed directly with the parity
    literals of position j, so the whole output is a depth-4 OR of ANDs
    regardless of width.
    """
    W = max(len(aws), len(bws), 1)
    a = _pad(b, aws, W)
    c = _pad(b, bws, W)
    na = [b.not_(w) for w in a]
    nc = [b.not_(w) for w in c]
    g = [b.and_(a[t], c[t]) for t in range(W)]
    p = [b.or_(a[t], c[t]) for t in range(W)]
    ng = [b.or_(na[t], nc[t]) for t in range(W)]
    np_ = [b.and_(na[t], nc[t]) for t in range(W)]
    out = []
    for j in range(W):
        terms = []
        for k in range(j):  # carry into j from a generate at k
            chain = [g[k]] + p[k + 1:j]
            terms.append(b.and_(*chain, a[j], c[j]))
            terms.append(b.and_(*chain, na[j], nc[j]))
        opts = [ng[0:j]]  # no generate below j at all
        for t in range(j):  # kill at t, no generate above it
            opts.append([np_[t]] + ng[t + 1:j])
        for opt in opts:
            terms.append(b.and_(*opt, a[j], nc[j]))
            terms.append(b.and_(*opt, na[j], c[j]))
        out.append(b.or_(*terms))
    carry = [b.and_(g[k], *p[k + 1:W]) for k in range(W)]
    out.append(b.or_(*carry))
    return out


def _eq_bits(b: Builder, a, c, W):
    return [b.or_(b.and_(a[t], c[t]),
                  b.and_(b.not_(a[t]), b.not_(c[t]))) for t in range(W)]


def _sub(b: Builder, aws, bws) -> list[int]:
    """a - b, correct when a >= b; merged borrow-lookahead DNF."""
    W = max(len(aws), len(bws), 1)
    a = _pad(b, aws, W)
    c = _pad(b, bws, W)
    na = [b.not_(w) for w in a]
    nc = [b.not_(w) for w in c]
    eq = _eq_bits(b, a, c, W)
    out = []
    for j in range(W):
        terms = []
        for k in range(j):  # borrow into j raised at k
            chain = [na[k], c[k]] + eq[k + 1:j]
            terms.append(b.and_(*chain, a[j], c[j]))
            terms.append(b.and_(*chain, na[j], nc[j]))
        opts = [eq[0:j]]  # no borrow: everything below equal
        for t in range(j):  # or strictly greater at t
            opts.append([a[t], nc[t]] + eq[t + 1:j])
        for opt in opts:
            terms.append(b.and_(*opt, a[j], nc[j]))
            terms.append(b.and_(*opt, na[j], c[j]))
        out.append(b.or_(*terms))
    return out


def _geq_u(b: Builder, aws, bws) -> int:
    """a >= b on unsigned wires, theta-free depth <= 4."""
    W = max(len(aws), len(bws), 1)
    a = _pad(b, aws, W)
    c = _pad(b, bws, W)
    eq = _eq_bits(b, a, c, W)
    terms = [b.and_(*eq)]
    for j in range(W):
        terms.append(b.and_(a[j], b.not_(c[j]), *eq[j + 1:]))
    return b.or_(*terms)


def _gt_u(b: Builder, aws, bws) -> int:
    W = max(len(aws), len(bws), 1)
    a = _pad(b, aws, W)
    c = _pad(b, bws, W)
    eq = _eq_bits(b, a, c, W)
    terms = []
    for j in range(W):
        terms.append(b.and_(a[j], b.not_(c[j]), *eq[j + 1:]))
    return b.or_(*terms)


def _eq_u(b: Builder, aws, bws) -> int:
    W = max(len(aws), len(bws), 1)
    a = _pad(b, aws, W)
    c = _pad(b, bws, W)
    return b.and_(*_eq_bits(b, a, c, W))


def _mux_bits(b: Builder, cond: int, aws, bws) -> list[int]:
    W = max(len(aws), len(bws))
    a = _pad(b, aws, W)
    c = _pad(b, bws, W)
    nc = b.not_(cond)
    return [b.or_(b.and_(cond, a[t]), b.and_(nc, c[t])) for t in range(W)]


def adder2(B: int) -> Circuit:
    if B < 1:
        raise SynthError("need B >= 1")
    b = Builder(2 * B)
    with b.no_fold():
        outs = _adder2(b, [b.input(i) for i in range(B)],
                       [b.input(B + i) for i in range(B)])
    return b.build(outs, {o: f"s{t}" for t, o in enumerate(outs)})


def comparator(B: int) -> Circuit:
    if B < 1:
        raise SynthError("need B >= 1")
    b = Builder(2 * B)
    out = _geq_u(b, [b.input(i) for i in range(B)],
                 [b.input(B + i) for i in range(B)])
    return b.build([out], {out: "a>=b"})


# ---------------------------------------------------------------------------
# iterated addition

ITADD_MAX_N = 32767  # two reduction rounds always reach <= 4 summands
ITADD_TREE = 4


def _itadd(b: Builder, summands, out_width: int = None) -> list[int]:
    """Sum of unsigned rows (may be ragged); fixed-shape construction:
    exactly two column-count reduction rounds, then a 4-leaf adder tree,
    so the depth added is identical for every summand count up to
    ITADD_MAX_N. Built fold-free throughout."""
    rows = [list(r) for r in summands]
    if not rows:
        raise SynthError("need at least one summand")
    if len(rows) > ITADD_MAX_N:
        raise SynthError(f"itadd supports at most {ITADD_MAX_N} summands")
    total_max = sum((1 << len(r)) - 1 for r in rows)
    W = max(total_max.bit_length(), 1)
    with b.no_fold():
        zero = b.const(0)

        def reduce_round(rows):
            cols = []
            for cpos in range(max((len(r) for r in rows), default=0)):
                cols.append([r[cpos] for r in rows if len(r) > cpos])
            if not cols:
                return [[zero]]
            R = max(len(h).bit_length() for h in cols)
            new = [dict() for _ in range(R)]
            for cpos, col in enumerate(cols):
                if not col:
                    continue
                bits = _count_bits(b, col)
                tgt = new[cpos % R]
                for off, wire in enumerate(bits):
                    assert cpos + off not in tgt
                    tgt[cpos + off] = wire
            out = []
            for tgt in new:
                if not tgt:
                    out.append([zero])
                    continue
                width = max(tgt) + 1
                out.append([tgt.get(t, zero) for t in range(width)])
            return out

        rows = reduce_round(rows)
        rows = reduce_round(rows)
        assert len(rows) <= ITADD_TREE, "reduction did not reach the tree"
        while len(rows) < ITADD_TREE:
            rows.append([zero])
        t1 = _adder2(b, rows[0], rows[1])
        t2 = _adder2(b, rows[2], rows[3])
        total = _adder2(b, t1, t2)
        want = W if out_width is None else out_width
        total = _pad(b, total, want)[:want]
    return total


def itadd(n: int, B: int) -> Circuit:
    """Sum of n unsigned B-bit numbers; inputs summand-major."""
    if n < 1 or B < 1:
        raise SynthError("need n >= 1 and B >= 1")
    b = Builder(n * B)
    rows = [[b.input(i * B + t) for t in range(B)] for i in range(n)]
    outs = _itadd(b, rows, out_width=B + clog2(n))
    return b.build(outs, {o: f"s{t}" for t, o in enumerate(outs)})


# ---------------------------------------------------------------------------
# max selection


def _max_select(b: Builder, vecs) -> tuple[list[int], list[int]]:
    """(max value bits, one-hot first-winner flags)."""
    n = len(vecs)
    flags = []
    for i in range(n):
        comps = [_geq_u(b, vecs[i], vecs[j]) for j in range(n) if j != i]
        flags.append(b.and_(*comps))
    wins = []
    for i in range(n):
        wins.append(b.and_(flags[i], *[b.not_(flags[t]) for t in range(i)]))
    W = max(len(v) for v in vecs)
    value = []
    for t in range(W):
        value.append(b.or_(*[b.and_(wins[i], _pad(b, vecs[i], W)[t])
                             for i in range(n)]))
    return value, wins


def max_select(n: int, B: int) -> Circuit:
    """Outputs: B max-value bits, then n winner flags (first maximal)."""
    if n < 1 or B < 1:
        raise SynthError("need n >= 1 and B >= 1")
    b = Builder(n * B)
    vecs = [[b.input(i * B + t) for t in range(B)] for i in range(n)]
    value, wins = _max_select(b, vecs)
    outs = value + wins
    labels = {o: f"max{t}" for t, o in enumerate(value)}
    labels.update({o: f"win{i}" for i, o in enumerate(wins)})
    return b.build(outs, labels)


# ---------------------------------------------------------------------------
# multiplication and shifting


def _mul_u(b: Builder, aws, bws) -> list[int]:
    """Product via AND-gated shifted partial products + itadd."""
    aws, bws = list(aws), list(bws)
    zero = b.const(0)
    rows = []
    for k, bk in enumerate(bws):
        rows.append([zero] * k + [b.and_(ai, bk) for ai in aws])
    out_w = len(aws) + len(bws)
    return _pad(b, _itadd(b, rows, out_width=out_w), out_w)[:out_w]


def _mul_const_u(b: Builder, aws, c: int) -> list[int]:
    """Multiply by a compile-time constant: shifted copies summed by
    the theta-free adder tree (popcount of c is a constant)."""
    if c == 0:
        return [b.const(0)]
    out_w = len(aws) + c.bit_length()
    rows = []
    k = 0
    zero = b.const(0)
    while c:
        if c & 1:
            rows.append([zero] * k + list(aws))
        c >>= 1
        k += 1
    if len(rows) == 1:
        return rows[0]
    return _tree_usum(b, rows, out_w)


def _enum_eq(b: Builder, ws, value: int) -> int:
    """Indicator wire for 'these wires read exactly value'."""
    ws = tuple(ws)
    if value >= (1 << len(ws)):
        return b.const(0)
    lits = []
    for t, w in enumerate(ws):
        lits.append(w if (value >> t) & 1 else b.not_(w))
    return b.and_(*lits)


def _barrel_left(b: Builder, vws, sws, max_shift: int) -> list[int]:
    """value << shift for shift in 0..max_shift, by equality-gated
    pre-shifted copies; width len(v) + max_shift."""
    vws = list(vws)
    W = len(vws) + max_shift
    sels = [_enum_eq(b, sws, s) for s in range(max_shift + 1)]
    out = []
    for t in range(W):
        terms = []
        for s in range(max_shift + 1):
            src = t - s
            if 0 <= src < len(vws):
                terms.append(b.and_(sels[s], vws[src]))
        out.append(b.or_(*terms))
    return out


def tc0_multiplier(B: int) -> Circuit:
    if not 1 <= B <= 64:
        raise SynthError("need 1 <= B <= 64")
    b = Builder(2 * B)
    outs = _mul_u(b, [b.input(i) for i in range(B)],
                  [b.input(B + i) for i in range(B)])
    return b.build(outs, {o: f"p{t}" for t, o in enumerate(outs)})


def barrel_shift(B: int, max_shift: int) -> Circuit:
    """Inputs: B value bits, then ceil(log2(max_shift+1)) shift bits."""
    if B < 1 or max_shift < 0:
        raise SynthError("need B >= 1 and max_shift >= 0")
    sw = clog2(max_shift + 1)
    b = Builder(B + sw)
    outs = _barrel_left(b, [b.input(i) for i in range(B)],
                        [b.input(B + i) for i in range(sw)], max_shift)
    return b.build(outs, {o: f"v{t}" for t, o in enumerate(outs)})


# ---------------------------------------------------------------------------
# float wire arithmetic

# All ops are value-exact on raw packs; f_canon produces the unique
# canonical form (p odd or e = 0; zero is +0/2^0) bit-identical to the
# evaluator's encoding.


def f_const(b: Builder, x: Flt, name="") -> WirePack:
    p = [b.const(bit) for bit in encode_uint(x.p.value, max(len(x.p), 1))]
    e = [b.const(bit) for bit in encode_uint(x.e, clog2(x.e + 1))]
    return float_pack(b.const(x.sign), p, e, x.e, canonical=True, name=name)


def f_from_bit(b: Builder, w: int, name="") -> WirePack:
    return float_pack(b.const(1), (w,), (), 0, canonical=True, name=name)


def _aligned_mags(b: Builder, packs) -> tuple[list[list[int]], int]:
    """Numerators scaled to the common denominator 2^ecap."""
    ecap = max(pk.e_max for pk in packs)
    rows = []
    for pk in packs:
        if not pk.e:  # exponent statically 0
            rows.append([b.const(0)] * ecap + list(pk.p))
            continue
        width = len(pk.p) + ecap
        sels = [_enum_eq(b, pk.e, u) for u in range(pk.e_max + 1)]
        row = []
        for t in range(width):
            terms = []
            for u in range(pk.e_max + 1):
                src = t - (ecap - u)
                if 0 <= src < len(pk.p):
                    terms.append(b.and_(sels[u], pk.p[src]))
            row.append(b.or_(*terms))
        rows.append(row)
    return rows, ecap


def _const_e_wires(b: Builder, value: int, e_max: int) -> list[int]:
    width = clog2(e_max + 1)
    return [b.const(bit) for bit in encode_uint(value, width)]


def _tree_usum(b: Builder, rows, out_width: int) -> list[int]:
    """Sum of unsigned rows by a balanced tree of two-number adders;
    theta-free, depth grows with log of the row count, so this is for
    sums whose summand count is a compile-time constant."""
    rows = [list(r) for r in rows]
    while len(rows) > 1:
        nxt = [_adder2(b, rows[i], rows[i + 1])
               for i in range(0, len(rows) - 1, 2)]
        if len(rows) % 2:
            nxt.append(rows[-1])
        rows = nxt
    return _pad(b, rows[0], out_width)[:out_width]


def _banked_sum(b: Builder, packs, usum, name="") -> WirePack:
    """Exact sum of float packs; raw result over denominator 2^ecap.

    Signs route each aligned numerator into a positive or a negative
    bank; the banks are summed by usum, compared, and subtracted. When
    every sign is the same compile-time constant the spare bank
    disappears.
    """
    packs = list(packs)
    if not packs:
        raise SynthError("need at least one float")
    mags, ecap = _aligned_mags(b, packs)
    out_w = max(len(m) for m in mags) + clog2(len(packs) + 1) + 1
    one, zero = b.const(1), b.const(0)
    signs = [pk.sign for pk in packs]
    if all(s == one for s in signs):
        mag = usum(mags, out_w)
        sign = one
    elif all(s == zero for s in signs):
        mag = usum(mags, out_w)
        sign = zero
    else:
        pos = [[b.and_(s, w) for w in m] for s, m in zip(signs, mags)]
        neg = [[b.and_(b.not_(s), w) for w in m] for s, m in zip(signs, mags)]
        P = usum(pos, out_w)
        N = usum(neg, out_w)
        sign = _geq_u(b, P, N)
        mag = _mux_bits(b, sign, _sub(b, P, N), _sub(b, N, P))
    return float_pack(sign, mag, _const_e_wires(b, ecap, ecap), ecap,
                      canonical=False, name=name)


def f_sum(b: Builder, packs, name="") -> WirePack:
    """n-ary sum via counting-based iterated addition: the added depth
    is one fixed constant for every summand count, which is what keeps
    compiled attention pooling at the same depth across sequence
    lengths. Spends threshold gates."""
    return _banked_sum(b, packs,
                       lambda rows, w: _itadd(b, rows, out_width=w), name)


def f_sum_tree(b: Builder, packs, name="") -> WirePack:
    """Theta-free sum for compile-time-constant summand counts
    (activation affine forms, classifier dot products)."""
    return _banked_sum(b, packs,
                       lambda rows, w: _tree_usum(b, rows, w), name)


def f_add(b: Builder, x: WirePack, y: WirePack, name="") -> WirePack:
    return f_sum_tree(b, [x, y], name=name)


def f_neg(b: Builder, x: WirePack, name="") -> WirePack:
    return float_pack(b.not_(x.sign), x.p, x.e, x.e_max, False, name)


def f_nonzero(b: Builder, x: WirePack) -> int:
    return b.or_(*x.p)


def f_pos_or_zero(b: Builder, x: WirePack) -> int:
    return b.or_(x.sign, b.not_(f_nonzero(b, x)))


def f_relu(b: Builder, x: WirePack, name="") -> WirePack:
    keep = x.sign
    return float_pack(b.const(1), [b.and_(keep, w) for w in x.p],
                      [b.and_(keep, w) for w in x.e], x.e_max, False, name)


def _e_value_map(b: Builder, x: WirePack, f: Callable[[int], int],
                 new_max: int) -> list[int]:
    """Exponent wires for e' = f(e), by value enumeration."""
    width = clog2(new_max + 1)
    if not width:
        return []
    if not x.e:
        return [b.const(bit) for bit in encode_uint(f(0), width)]
    sels = [(u, _enum_eq(b, x.e, u)) for u in range(x.e_max + 1)]
    out = []
    for t in range(width):
        out.append(b.or_(*[s for u, s in sels if (f(u) >> t) & 1]))
    return out


def f_mul(b: Builder, x: WirePack, y: WirePack, name="") -> WirePack:
    p = _mul_u(b, x.p, y.p)
    sign = b.or_(b.and_(x.sign, y.sign),
                 b.and_(b.not_(x.sign), b.not_(y.sign)))
    emax = x.e_max + y.e_max
    width = clog2(emax + 1)
    if not x.e:
        e = list(y.e)
    elif not y.e:
        e = list(x.e)
    else:
        pairs = []
        for u in range(x.e_max + 1):
            su = _enum_eq(b, x.e, u)
            for v in range(y.e_max + 1):
                pairs.append((u + v, b.and_(su, _enum_eq(b, y.e, v))))
        e = [b.or_(*[s for val, s in pairs if (val >> t) & 1])
             for t in range(width)]
    return float_pack(sign, p, e, emax, False, name)


def f_mul_const(b: Builder, x: WirePack, c: Flt, name="") -> WirePack:
    if c.is_zero():
        return f_const(b, c, name)
    p = _mul_const_u(b, x.p, c.p.value)
    emax = x.e_max + c.e
    e = list(x.e) if c.e == 0 else _e_value_map(b, x, lambda u: u + c.e, emax)
    sign = x.sign if c.sign else b.not_(x.sign)
    return float_pack(sign, p, e, emax, False, name)


def f_div_const(b: Builder, x: WirePack, c: Flt, name="") -> WirePack:
    """x / c for a compile-time constant c, per the reciprocal-scaling
    rule: k = floor(2^|c.p| / c.p), p' = p*k*2^c.e, e' = e + |c.p|."""
    if c.is_zero():
        raise SynthError("division by the constant zero")
    pw = len(c.p)
    k = (1 << pw) // c.p.value
    p = _mul_const_u(b, x.p, k << c.e)
    emax = x.e_max + pw
    e = _e_value_map(b, x, lambda u: u + pw, emax)
    sign = x.sign if c.sign else b.not_(x.sign)
    return float_pack(sign, p, e, emax, False, name)


def f_div_by_indicators(b: Builder, x: WirePack, indicators,
                        name="") -> WirePack:
    """x / m where the divisor m in 1..n is given by one-hot indicator
    wires (indicators[m]); bit-equal to dividing by the float m.

    floor(2^|m|/m) is 2 when m is a power of two (or 1) and 1 otherwise,
    so each branch is a 0/1-bit shift of p plus the constant exponent
    bump |m|, gated by its indicator and OR-merged.
    """
    n = len(indicators) - 1
    if n < 1:
        raise SynthError("need at least one possible divisor")
    pw = len(x.p) + 1
    emax = x.e_max + n.bit_length()
    ew = clog2(emax + 1)
    p_terms = [[] for _ in range(pw)]
    e_terms = [[] for _ in range(ew)]
    e_sels = ([(u, _enum_eq(b, x.e, u)) for u in range(x.e_max + 1)]
              if x.e else [(0, b.const(1))])
    for m in range(1, n + 1):
        ind = indicators[m]
        L = m.bit_length()
        k = (1 << L) // m
        shift = 1 if k == 2 else 0
        for t in range(pw):
            src = t - shift
            if 0 <= src < len(x.p):
                p_terms[t].append(b.and_(ind, x.p[src]))
        for u, sel in e_sels:
            val = u + L
            gated = b.and_(ind, sel)
            for t in range(ew):
                if (val >> t) & 1:
                    e_terms[t].append(gated)
    p = [b.or_(*ts) for ts in p_terms]
    e = [b.or_(*ts) for ts in e_terms]
    return float_pack(x.sign, p, e, emax, False, name)


def f_canon(b: Builder, x: WirePack, name="") -> WirePack:
    """Strip shared trailing zeros: p' = p >> r, e' = e - r with
    r = min(trailing zeros of p, e); zero becomes +0/2^0 exactly."""
    if x.canonical:
        return x
    pw = len(x.p)
    nonzero = f_nonzero(b, x)
    npbits = [b.not_(w) for w in x.p]
    tz = []  # tz[t]: p != 0 and trailing zeros == t
    for t in range(pw):
        tz.append(b.and_(*npbits[:t], x.p[t]))
    e_sels = ([(u, _enum_eq(b, x.e, u)) for u in range(x.e_max + 1)]
              if x.e else [(0, b.const(1))])
    pairs = []  # (r, e-after, indicator)
    for t, tzw in enumerate(tz):
        for u, esel in e_sels:
            r = min(t, u)
            pairs.append((r, u - r, b.and_(tzw, esel)))
    p_out = []
    for i in range(pw):
        terms = [b.and_(sel, x.p[i + r]) for r, _, sel in pairs
                 if i + r < pw]
        p_out.append(b.or_(*terms))
    ew = clog2(x.e_max + 1)
    e_out = []
    for t in range(ew):
        e_out.append(b.or_(*[sel for _, left, sel in pairs
                             if (left >> t) & 1]))
    sign = b.or_(x.sign, b.not_(nonzero))
    return float_pack(sign, p_out, e_out, x.e_max, canonical=True, name=name)


def _cross_mags(b: Builder, x: WirePack, y: WirePack):
    """p_x * 2^(e_y) and p_y * 2^(e_x): common-denominator numerators."""
    def scaled(p, e_wires, e_max):
        if not e_wires:
            return list(p)
        width = len(p) + e_max
        sels = [(u, _enum_eq(b, e_wires, u)) for u in range(e_max + 1)]
        out = []
        for t in range(width):
            terms = [b.and_(sel, p[t - u]) for u, sel in sels
                     if 0 <= t - u < len(p)]
            out.append(b.or_(*terms))
        return out

    return scaled(x.p, y.e, y.e_max), scaled(y.p, x.e, x.e_max)


def f_ge(b: Builder, x: WirePack, y: WirePack) -> int:
    A, B_ = _cross_mags(b, x, y)
    sx, sy = f_pos_or_zero(b, x), f_pos_or_zero(b, y)
    return b.or_(b.and_(sx, b.not_(sy)),
                 b.and_(sx, sy, _geq_u(b, A, B_)),
                 b.and_(b.not_(sx), b.not_(sy), _geq_u(b, B_, A)))


def f_gt(b: Builder, x: WirePack, y: WirePack) -> int:
    A, B_ = _cross_mags(b, x, y)
    sx, sy = f_pos_or_zero(b, x), f_pos_or_zero(b, y)
    return b.or_(b.and_(sx, b.not_(sy)),
                 b.and_(sx, sy, _gt_u(b, A, B_)),
                 b.and_(b.not_(sx), b.not_(sy), _gt_u(b, B_, A)))


def f_eq(b: Builder, x: WirePack, y: WirePack) -> int:
    A, B_ = _cross_mags(b, x, y)
    sx, sy = f_pos_or_zero(b, x), f_pos_or_zero(b, y)
    same_sign = b.or_(b.and_(sx, sy), b.and_(b.not_(sx), b.not_(sy)))
    return b.and_(same_sign, _eq_u(b, A, B_))


def f_select(b: Builder, cond: int, x: WirePack, y: WirePack,
             name="") -> WirePack:
    pw = max(len(x.p), len(y.p))
    ew = max(len(x.e), len(y.e))
    ncond = b.not_(cond)
    p = [b.or_(b.and_(cond, w1), b.and_(ncond, w2))
         for w1, w2 in zip(_pad(b, x.p, pw), _pad(b, y.p, pw))]
    e = [b.or_(b.and_(cond, w1), b.and_(ncond, w2))
         for w1, w2 in zip(_pad(b, x.e, ew), _pad(b, y.e, ew))]
    sign = b.or_(b.and_(cond, x.sign), b.and_(ncond, y.sign))
    return float_pack(sign, p, e, max(x.e_max, y.e_max),
                      x.canonical and y.canonical, name)


# ---------------------------------------------------------------------------
# public float gadgets


def _declare_float_inputs(b: Builder, n: int, p_width: int, e_max: int):
    ew = clog2(e_max + 1)
    stride = 1 + p_width + ew
    packs = []
    for i in range(n):
        base = i * stride
        packs.append(float_pack(
            b.input(base),
            [b.input(base + 1 + t) for t in range(p_width)],
            [b.input(base + 1 + p_width + t) for t in range(ew)],
            e_max, canonical=True, name=f"x{i}"))
    return packs


def _emit_float(c_outputs: list, labels: dict, pack: WirePack, prefix: str):
    c_outputs.append(pack.sign)
    labels[pack.sign] = f"{prefix}.sign"
    for t, w in enumerate(pack.p):
        c_outputs.append(w)
        labels[w] = f"{prefix}.p{t}"
    for t, w in enumerate(pack.e):
        c_outputs.append(w)
        labels[w] = f"{prefix}.e{t}"


def float_sum(n: int, p_width: int, e_max: int) -> Circuit:
    """Sum n canonical floats (packs of 1+p_width+ew wires each);
    output is the canonical float of the exact sum."""
    if n < 1 or p_width < 1 or e_max < 0:
        raise SynthError("need n >= 1, p_width >= 1, e_max >= 0")
    ew = clog2(e_max + 1)
    b = Builder(n * (1 + p_width + ew))
    packs = _declare_float_inputs(b, n, p_width, e_max)
    result = f_canon(b, f_sum(b, packs, "sum"))
    outs, labels = [], {}
    _emit_float(outs, labels, result, "sum")
    c = b.build(outs, labels)
    return c


def float_sum_widths(n: int, p_width: int, e_max: int):
    """(p, e) output widths of float_sum with these parameters."""
    return p_width + e_max + clog2(n + 1) + 1, clog2(e_max + 1)


def divide_by_count(B: int, n: int, e_max: int = 8) -> Circuit:
    """Inputs: a float pack (1+B+ew wires), then n+1 one-hot count
    indicator wires; output: the canonical float of pack / count."""
    if B < 1 or n < 1:
        raise SynthError("need B >= 1 and n >= 1")
    ew = clog2(e_max + 1)
    b = Builder(1 + B + ew + n + 1)
    pack = float_pack(b.input(0), [b.input(1 + t) for t in range(B)],
                      [b.input(1 + B + t) for t in range(ew)], e_max,
                      canonical=True)
    inds = [b.input(1 + B + ew + m) for m in range(n + 1)]
    result = f_canon(b, f_div_by_indicators(b, pack, inds, "q"))
    outs, labels = [], {}
    _emit_float(outs, labels, result, "q")
    return b.build(outs, labels)


def manifest(circuit: Circuit, name: str, **params) -> dict:
    m = metrics(circuit)
    return {"name": name, "params": params, "size": m.size,
            "depth": m.depth, "theta_count": m.theta_count,
            "max_fanin": m.max_fanin, "inputs": circuit.n,
            "outputs": len(circuit.outputs)}
