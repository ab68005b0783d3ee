"""Boolean/threshold circuit IR.

Gates form a DAG with unbounded fan-in AND/OR/THRESHOLD nodes, leaf
INPUT/NEG_INPUT/CONST nodes, and (internally) NOT gates that a
normalization pass can push down to negated leaves. Conventions fixed
here and relied on everywhere else:

  depth   leaves are at depth 0, every internal gate is 1 + max over
          its inputs, circuit depth is the max over output gates
  size    internal gates only; leaves are free (they are just wires)
  AND()   = 1, OR() = 0, THRESHOLD_GE(0) = 1   (identity elements)
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

INPUT = "INPUT"
NEG_INPUT = "NEG_INPUT"
CONST = "CONST"
AND = "AND"
OR = "OR"
NOT = "NOT"
THRESHOLD_GE = "THRESHOLD_GE"
THRESHOLD_LE = "THRESHOLD_LE"

LEAF_KINDS = frozenset({INPUT, NEG_INPUT, CONST})
THRESHOLD_KINDS = frozenset({THRESHOLD_GE, THRESHOLD_LE})
ALL_KINDS = LEAF_KINDS | THRESHOLD_KINDS | {AND, OR, NOT}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    id: int
    kind: str
    inputs: tuple[int, ...] = ()
    k: int = None  # threshold constant, or CONST value
    idx: int = None  # input position for INPUT/NEG_INPUT

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise CircuitError(f"gate {self.id}: unknown kind {self.kind!r}")
        if self.kind in (INPUT, NEG_INPUT):
            if self.inputs or self.idx is None or self.idx < 0:
                raise CircuitError(f"gate {self.id}: bad input leaf")
        elif self.kind == CONST:
            if self.inputs or self.k not in (0, 1):
                raise CircuitError(f"gate {self.id}: CONST wants k in {{0,1}}")
        elif self.kind == NOT:
            if len(self.inputs) != 1:
                raise CircuitError(f"gate {self.id}: NOT wants one input")
        elif self.kind in THRESHOLD_KINDS:
            if self.k is None or self.k < 0:
                raise CircuitError(f"gate {self.id}: threshold wants k >= 0")


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]
    labels: Mapping[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.outputs:
            raise CircuitError("circuit needs at least one output")
        table = {}
        for g in self.gates:
            if g.id in table:
                raise CircuitError(f"duplicate gate id {g.id}")
            table[g.id] = g
        for g in self.gates:
            for ref in g.inputs:
                if ref not in table:
                    raise CircuitError(f"gate {g.id} references missing id {ref}")
            if g.kind in (INPUT, NEG_INPUT) and g.idx >= self.n:
                raise CircuitError(f"gate {g.id}: input index {g.idx} >= n={self.n}")
        for o in self.outputs:
            if o not in table:
                raise CircuitError(f"output references missing id {o}")
        object.__setattr__(self, "_table", table)
        object.__setattr__(self, "_order", _topo_order(table))

    def gate(self, gid: int) -> Gate:
        return self._table[gid]

    @property
    def order(self) -> tuple[int, ...]:
        return self._order


def _topo_order(table: Mapping[int, Gate]) -> tuple[int, ...]:
    """DFS topological order; raises on cycles."""
    order, state = [], {}
    for root in table:
        if state.get(root):
            continue
        stack = [(root, 0)]
        while stack:
            gid, phase = stack.pop()
            if phase == 0:
                st = state.get(gid)
                if st == 2:
                    continue
                if st == 1:
                    raise CircuitError(f"cycle through gate {gid}")
                state[gid] = 1
                stack.append((gid, 1))
                for ref in table[gid].inputs:
                    if state.get(ref) != 2:
                        stack.append((ref, 0))
            else:
                if state[gid] != 2:
                    state[gid] = 2
                    order.append(gid)
    return tuple(order)


@dataclass(frozen=True)
class Metrics:
    size: int
    depth: int
    theta_count: int
    max_fanin: int


def _coerce_bits(x, n: int) -> tuple[int, ...]:
    try:
        bits = tuple(int(b) for b in x)
    except (TypeError, ValueError):
        raise CircuitError(f"want a length-{n} bit vector") from None
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise CircuitError(f"want a length-{n} bit vector")
    return bits


def eval(c: Circuit, x) -> tuple[int, ...]:
    bits = _coerce_bits(x, c.n)
    val = {}
    for gid in c.order:
        g = c.gate(gid)
        if g.kind == INPUT:
            val[gid] = bits[g.idx]
        elif g.kind == NEG_INPUT:
            val[gid] = 1 - bits[g.idx]
        elif g.kind == CONST:
            val[gid] = g.k
        elif g.kind == NOT:
            val[gid] = 1 - val[g.inputs[0]]
        elif g.kind == AND:
            val[gid] = int(all(val[i] for i in g.inputs))
        elif g.kind == OR:
            val[gid] = int(any(val[i] for i in g.inputs))
        else:
            ones = sum(val[i] for i in g.inputs)
            if g.kind == THRESHOLD_GE:
                val[gid] = int(ones >= g.k)
            else:
                val[gid] = int(ones <= g.k)
    return tuple(val[o] for o in c.outputs)


def _bitplane_sum(masks: Sequence[int]) -> list[int]:
    """Bit-sliced counter: planes[b] has sample bit set iff bit b of the
    per-sample count of set masks is 1."""
    planes: list[int] = []
    for m in masks:
        carry = m
        for b in range(len(planes)):
            if not carry:
                break
            planes[b], carry = planes[b] ^ carry, planes[b] & carry
        if carry:
            planes.append(carry)
    return planes


def _planes_ge(planes: Sequence[int], k: int, full: int) -> int:
    """Per-sample mask of count >= k given bit-sliced planes."""
    if k <= 0:
        return full
    width = max(len(planes), k.bit_length())
    gt, eq = 0, full
    for b in range(width - 1, -1, -1):
        plane = planes[b] if b < len(planes) else 0
        kb = (k >> b) & 1
        if kb:
            eq &= plane
        else:
            gt |= eq & plane
    return gt | eq


def eval_batch(c: Circuit, xs: Sequence) -> list[tuple[int, ...]]:
    """Evaluate many inputs at once, one integer bitmask per wire."""
    rows = [_coerce_bits(x, c.n) for x in xs]
    m = len(rows)
    if m == 0:
        return []
    full = (1 << m) - 1
    in_masks = [0] * c.n
    for s, row in enumerate(rows):
        for i, b in enumerate(row):
            if b:
                in_masks[i] |= 1 << s
    val = {}
    plane_cache: dict[tuple[int, ...], list[int]] = {}
    for gid in c.order:
        g = c.gate(gid)
        if g.kind == INPUT:
            v = in_masks[g.idx]
        elif g.kind == NEG_INPUT:
            v = full ^ in_masks[g.idx]
        elif g.kind == CONST:
            v = full if g.k else 0
        elif g.kind == NOT:
            v = full ^ val[g.inputs[0]]
        elif g.kind == AND:
            v = full
            for i in g.inputs:
                v &= val[i]
                if not v:
                    break
        elif g.kind == OR:
            v = 0
            for i in g.inputs:
                v |= val[i]
                if v == full:
                    break
        else:
            planes = plane_cache.get(g.inputs)
            if planes is None:
                planes = _bitplane_sum([val[i] for i in g.inputs])
                plane_cache[g.inputs] = planes
            ge = _planes_ge(planes, g.k, full)
            v = ge if g.kind == THRESHOLD_GE else full ^ _planes_ge(
                planes, g.k + 1, full)
        val[gid] = v
    return [tuple((val[o] >> s) & 1 for o in c.outputs) for s in range(m)]


def depth_map(c: Circuit) -> dict[int, int]:
    d = {}
    for gid in c.order:
        g = c.gate(gid)
        if g.kind in LEAF_KINDS:
            d[gid] = 0
        else:
            d[gid] = 1 + max((d[i] for i in g.inputs), default=0)
    return d


def metrics(c: Circuit) -> Metrics:
    d = depth_map(c)
    size = sum(1 for g in c.gates if g.kind not in LEAF_KINDS)
    depth = max(d[o] for o in c.outputs)
    theta = sum(1 for g in c.gates if g.kind in THRESHOLD_KINDS)
    fanin = max((len(g.inputs) for g in c.gates), default=0)
    return Metrics(size, depth, theta, fanin)


def bigram11_fixture() -> Circuit:
    """n=5 detector for the substring 11: OR of AND(x_i, x_{i+1})."""
    gates = [Gate(i, INPUT, idx=i) for i in range(5)]
    ands = []
    for i in range(4):
        gid = 5 + i
        gates.append(Gate(gid, AND, (i, i + 1)))
        ands.append(gid)
    gates.append(Gate(9, OR, tuple(ands)))
    return Circuit(5, tuple(gates), (9,), {9: "has-11"})


@dataclass(frozen=True)
class FamilyRow:
    n: int
    size: int
    depth: int
    theta_count: int
    max_fanin: int


@dataclass(frozen=True)
class FamilyReport:
    rows: tuple[FamilyRow, ...]
    slope: float
    depth_constant: bool
    theta_free: bool

    @property
    def depths(self):
        return tuple(r.depth for r in self.rows)


def family_analyze(family: Callable[[int], Circuit],
                   ns: Sequence[int]) -> FamilyReport:
    """Measure one circuit per n; slope is d log2(size) / d log2(n)."""
    if len(ns) < 3:
        raise CircuitError("need at least three values of n")
    rows = []
    for n in ns:
        m = metrics(family(n))
        rows.append(FamilyRow(n, m.size, m.depth, m.theta_count, m.max_fanin))
    xs = [math.log2(r.n) for r in rows]
    ys = [math.log2(max(r.size, 1)) for r in rows]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    den = sum((x - mx) ** 2 for x in xs)
    slope = 0.0 if den == 0 else sum(
        (x - mx) * (y - my) for x, y in zip(xs, ys)) / den
    return FamilyReport(tuple(rows), slope,
                        len({r.depth for r in rows}) == 1,
                        all(r.theta_count == 0 for r in rows))


def normalize_negations(c: Circuit) -> Circuit:
    """Push every NOT down to the leaves (De Morgan), eliminating NOT
    gates; thresholds flip between >=k and <=k-1 forms."""
    out_gates: list[Gate] = []
    memo: dict[tuple[int, bool], int] = {}

    def emit(kind, inputs=(), k=None, idx=None):
        gid = len(out_gates)
        out_gates.append(Gate(gid, kind, tuple(inputs), k, idx))
        return gid

    def walk(gid: int, negate: bool) -> int:
        key = (gid, negate)
        if key in memo:
            return memo[key]
        g = c.gate(gid)
        if g.kind == INPUT:
            res = emit(NEG_INPUT if negate else INPUT, idx=g.idx)
        elif g.kind == NEG_INPUT:
            res = emit(INPUT if negate else NEG_INPUT, idx=g.idx)
        elif g.kind == CONST:
            res = emit(CONST, k=(1 - g.k) if negate else g.k)
        elif g.kind == NOT:
            res = walk(g.inputs[0], not negate)
        elif g.kind in (AND, OR):
            kind = g.kind
            if negate:
                kind = OR if kind == AND else AND
            res = emit(kind, [walk(i, negate) for i in g.inputs])
        elif g.kind == THRESHOLD_GE:
            ins = [walk(i, False) for i in g.inputs]
            if negate:
                res = emit(THRESHOLD_LE, ins, k=g.k - 1) if g.k >= 1 \
                    else emit(CONST, k=0)
            else:
                res = emit(THRESHOLD_GE, ins, k=g.k)
        else:
            ins = [walk(i, False) for i in g.inputs]
            res = emit(THRESHOLD_GE, ins, k=g.k + 1) if negate \
                else emit(THRESHOLD_LE, ins, k=g.k)
        memo[key] = res
        return res

    outs = tuple(walk(o, False) for o in c.outputs)
    labels = {o2: c.labels[o1] for o1, o2 in zip(c.outputs, outs)
              if o1 in c.labels}
    return Circuit(c.n, tuple(out_gates), outs, labels)


# ---------------------------------------------------------------------------
# serialization


def to_json(c: Circuit, indent: int = None) -> str:
    gates = []
    for g in c.gates:
        rec = {"id": g.id, "kind": g.kind}
        if g.k is not None:
            rec["k"] = g.k
        if g.idx is not None:
            rec["idx"] = g.idx
        if g.inputs:
            rec["inputs"] = list(g.inputs)
        gates.append(rec)
    doc = {"n": c.n, "gates": gates, "outputs": list(c.outputs)}
    if c.labels:
        doc["labels"] = {str(k): v for k, v in c.labels.items()}
    return json.dumps(doc, indent=indent)


def from_json(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitError(f"not valid JSON: {exc}") from exc
    try:
        gates = tuple(
            Gate(int(rec["id"]), rec["kind"],
                 tuple(int(i) for i in rec.get("inputs", ())),
                 rec.get("k"), rec.get("idx"))
            for rec in doc["gates"])
        labels = {int(k): str(v) for k, v in doc.get("labels", {}).items()}
        return Circuit(int(doc["n"]), gates,
                       tuple(int(o) for o in doc["outputs"]), labels)
    except KeyError as exc:
        raise CircuitError(f"missing field {exc}") from exc


_DOT_SHAPE = {INPUT: "plaintext", NEG_INPUT: "plaintext", CONST: "plaintext",
              AND: "box", OR: "ellipse", NOT: "diamond",
              THRESHOLD_GE: "hexagon", THRESHOLD_LE: "hexagon"}


def to_dot(c: Circuit) -> str:
    lines = ["digraph circuit {", "  rankdir=BT;"]
    outset = set(c.outputs)
    for g in c.gates:
        if g.kind == INPUT:
            label = f"x{g.idx + 1}"
        elif g.kind == NEG_INPUT:
            label = f"!x{g.idx + 1}"
        elif g.kind == CONST:
            label = str(g.k)
        elif g.kind == THRESHOLD_GE:
            label = f">={g.k}"
        elif g.kind == THRESHOLD_LE:
            label = f"<={g.k}"
        else:
            label = g.kind
        if g.id in c.labels:
            label += f"\\n{c.labels[g.id]}"
        style = ' style=bold' if g.id in outset else ""
        lines.append(f'  g{g.id} [label="{label}" '
                     f'shape={_DOT_SHAPE[g.kind]}{style}];')
        for ref in g.inputs:
            lines.append(f"  g{ref} -> g{g.id};")
    lines.append("}")
    return "\n".join(lines)
