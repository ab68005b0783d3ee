"""Saturated-attention transformer abstract machine.

A transformer here is a tuple of: alphabet, datatype (F = dyadic floats,
Q = exact rationals), width m, an embedding expression, layers of
attention heads plus an activation expression, and an affine classifier.
Input position i (1-based) and the token's one-hot vector feed the
embedding; each head scores all position pairs, turns scores into
weights (hard, saturated, or uniform attention), and emits the weighted
sum of one m/H-wide block of the previous values; the activation maps
(previous value, concatenated head outputs) to the next value. A string
is accepted iff W . v_final(position 1) + b > 0, strictly.

Expressions are a closed DSL of size-preserving primitives (const,
projection, add, mul, div, sqrt, neg, relu, compare, select, affine,
tuple) plus two escape hatches that are deliberately not size-preserving
and therefore not compilable: pow2 and named host callbacks.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence, Union

from .bitnum import (
    BitNumError, Flt, Rat, SizeProfile, flt, flt_add, flt_cmp, flt_div,
    flt_mul, flt_neg, flt_sqrt, rat, rat_add, rat_cmp, rat_mul, rat_neg,
    relu as bitnum_relu, size,
)


class MachineError(ValueError):
    """Ill-formed spec, expression, or input."""


Scalar = Union[Flt, Rat]
Number = tuple[int, int]  # (signed numerator, positive denominator)


def _number(num: int, den: int = 1) -> Number:
    if den == 0:
        raise MachineError("zero denominator in constant")
    if den < 0:
        num, den = -num, -den
    return (num, den)


# ---------------------------------------------------------------------------
# datatypes


class Domain:
    """Arithmetic dispatch for one of the two datatypes."""

    def __init__(self, name: str):
        assert name in ("F", "Q")
        self.name = name
        self.zero = self.from_int(0)
        self.one = self.from_int(1)

    def from_pair(self, num: int, den: int = 1) -> Scalar:
        if self.name == "Q":
            return rat(num, den)
        if den <= 0 or den & (den - 1):
            raise MachineError(f"{num}/{den} is not representable over F")
        return flt(num, den.bit_length() - 1)

    def from_int(self, v: int) -> Scalar:
        return self.from_pair(v, 1)

    def add(self, x: Scalar, y: Scalar) -> Scalar:
        return flt_add(x, y) if self.name == "F" else rat_add(x, y)

    def mul(self, x: Scalar, y: Scalar) -> Scalar:
        return flt_mul(x, y) if self.name == "F" else rat_mul(x, y)

    def div(self, x: Scalar, y: Scalar) -> Scalar:
        if self.name == "F":
            if y.is_zero():
                raise MachineError("division by zero")
            return flt_div(x, y)
        num, den = y.as_pair()
        if num == 0:
            raise MachineError("division by zero")
        xn, xd = x.as_pair()
        return rat(xn * den, xd * num)

    def sqrt(self, x: Scalar) -> Scalar:
        if self.name != "F":
            raise MachineError("sqrt is defined over F only")
        try:
            return flt_sqrt(x)
        except BitNumError as exc:
            raise MachineError(str(exc)) from exc

    def neg(self, x: Scalar) -> Scalar:
        return flt_neg(x) if self.name == "F" else rat_neg(x)

    def relu(self, x: Scalar) -> Scalar:
        return bitnum_relu(x)

    def cmp(self, x: Scalar, y: Scalar) -> int:
        return flt_cmp(x, y) if self.name == "F" else rat_cmp(x, y)

    def is_zero(self, x: Scalar) -> bool:
        return x.p.value == 0

    def __repr__(self):
        return f"Domain({self.name})"


DOMAIN_F = Domain("F")
DOMAIN_Q = Domain("Q")


def domain_of(name: str) -> Domain:
    if name == "F":
        return DOMAIN_F
    if name == "Q":
        return DOMAIN_Q
    raise MachineError(f"unknown datatype {name!r} (want F or Q)")


# ---------------------------------------------------------------------------
# expression DSL


@dataclass(frozen=True)
class FuncExpr:
    """Closed expression tree; ``data`` holds the op-specific payload."""

    op: str
    args: tuple["FuncExpr", ...] = ()
    data: Any = None

    def __repr__(self):
        inner = ", ".join(repr(a) for a in self.args)
        payload = f"[{self.data!r}]" if self.data is not None else ""
        return f"{self.op}{payload}({inner})"


def Const(num: int, den: int = 1) -> FuncExpr:
    return FuncExpr("const", data=_number(num, den))


def Arg(j: int) -> FuncExpr:
    return FuncExpr("arg", data=j)


def Proj(k: int, e: FuncExpr) -> FuncExpr:
    return FuncExpr("proj", (e,), data=k)


def Tup(*es: FuncExpr) -> FuncExpr:
    return FuncExpr("tup", tuple(es))


def Add(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    return FuncExpr("add", (a, b))


def Mul(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    return FuncExpr("mul", (a, b))


def Div(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    return FuncExpr("div", (a, b))


def Sqrt(a: FuncExpr) -> FuncExpr:
    return FuncExpr("sqrt", (a,))


def Neg(a: FuncExpr) -> FuncExpr:
    return FuncExpr("neg", (a,))


def Relu(a: FuncExpr) -> FuncExpr:
    return FuncExpr("relu", (a,))


def Gt(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    return FuncExpr("gt", (a, b))


def Eq(a: FuncExpr, b: FuncExpr) -> FuncExpr:
    return FuncExpr("eq", (a, b))


def Select(cond: FuncExpr, a: FuncExpr, b: FuncExpr) -> FuncExpr:
    return FuncExpr("select", (cond, a, b))


def Affine(coeffs: Sequence[Number], bias: Number, *es: FuncExpr) -> FuncExpr:
    coeffs = tuple(_number(*c) for c in coeffs)
    if len(coeffs) != len(es):
        raise MachineError("affine: one coefficient per operand")
    return FuncExpr("affine", tuple(es), data=(coeffs, _number(*bias)))


def Pow2(a: FuncExpr) -> FuncExpr:
    """2**value(a); exponential in the input's numeric value, hence not
    size-preserving and rejected by the circuit compiler."""
    return FuncExpr("pow2", (a,))


def Host(name: str, *es: FuncExpr) -> FuncExpr:
    """Named host callback; the black-box escape hatch."""
    return FuncExpr("host", tuple(es), data=name)


_NON_SIZE_PRESERVING = {"pow2", "host"}


def expr_ops(e: FuncExpr) -> set:
    ops = {e.op}
    for a in e.args:
        ops |= expr_ops(a)
    return ops


def is_size_preserving(e: FuncExpr) -> bool:
    """True iff the tree uses only the bounded-growth primitives."""
    return not (expr_ops(e) & _NON_SIZE_PRESERVING)


def eval_expr(e: FuncExpr, args: Sequence[Any], domain: Domain,
              hosts: Mapping[str, Callable] = None):
    """Evaluate ``e`` with ``args`` as the values of (arg 0), (arg 1), ...

    Scalars are Flt/Q values of the domain; vectors are plain tuples.
    """

    def scalar(x, what):
        if isinstance(x, tuple):
            raise MachineError(f"{what}: expected a scalar, got a {len(x)}-tuple")
        return x

    def ev(node):
        op = node.op
        if op == "const":
            return domain.from_pair(*node.data)
        if op == "arg":
            j = node.data
            if not 0 <= j < len(args):
                raise MachineError(f"arg {j} out of range (have {len(args)})")
            return args[j]
        if op == "proj":
            v = ev(node.args[0])
            if not isinstance(v, tuple):
                raise MachineError("proj applied to a scalar")
            k = node.data
            if not 0 <= k < len(v):
                raise MachineError(f"proj index {k} out of range (width {len(v)})")
            return v[k]
        if op == "tup":
            return tuple(scalar(ev(a), "tup component") for a in node.args)
        if op == "select":
            # short-circuit: the untaken branch is never evaluated, so a
            # guard like (gt x 0) really does protect a division
            c = scalar(ev(node.args[0]), op)
            if domain.cmp(c, domain.one) == 0:
                return ev(node.args[1])
            if domain.is_zero(c):
                return ev(node.args[2])
            raise MachineError("select condition must be 0 or 1")
        vals = [ev(a) for a in node.args]
        if op == "add":
            return domain.add(scalar(vals[0], op), scalar(vals[1], op))
        if op == "mul":
            return domain.mul(scalar(vals[0], op), scalar(vals[1], op))
        if op == "div":
            return domain.div(scalar(vals[0], op), scalar(vals[1], op))
        if op == "sqrt":
            return domain.sqrt(scalar(vals[0], op))
        if op == "neg":
            return domain.neg(scalar(vals[0], op))
        if op == "relu":
            return domain.relu(scalar(vals[0], op))
        if op == "gt":
            return domain.one if domain.cmp(vals[0], vals[1]) > 0 else domain.zero
        if op == "eq":
            return domain.one if domain.cmp(vals[0], vals[1]) == 0 else domain.zero
        if op == "affine":
            coeffs, bias = node.data
            acc = domain.from_pair(*bias)
            for cf, v in zip(coeffs, vals):
                acc = domain.add(acc, domain.mul(domain.from_pair(*cf), scalar(v, op)))
            return acc
        if op == "pow2":
            v = scalar(vals[0], op)
            num, den = v.as_pair()
            if den != 1 or num < 0:
                raise MachineError("pow2 wants a nonnegative integer value")
            return domain.from_int(1 << num)
        if op == "host":
            table = hosts or {}
            if node.data not in table:
                raise MachineError(f"unknown host function {node.data!r}")
            out = table[node.data](domain, *vals)
            if isinstance(out, bool):
                return domain.from_int(int(out))
            if isinstance(out, int):
                return domain.from_int(out)
            return out
        raise MachineError(f"unknown op {op!r}")

    return ev(e)


# ---------------------------------------------------------------------------
# attention


class AttentionKind(enum.Enum):
    HARD = "hard"
    SATURATED = "saturated"
    UNIFORM = "uniform"

    @staticmethod
    def of(name: str) -> "AttentionKind":
        try:
            return AttentionKind(name.lower())
        except ValueError:
            raise MachineError(f"unknown attention kind {name!r}") from None


def max_set(scores: Sequence[Scalar], domain: Domain) -> tuple[int, ...]:
    """Indices of the score maximizers, by exact comparison."""
    if not scores:
        raise MachineError("empty score sequence")
    best = 0
    for j in range(1, len(scores)):
        if domain.cmp(scores[j], scores[best]) > 0:
            best = j
    return tuple(j for j in range(len(scores))
                 if domain.cmp(scores[j], scores[best]) == 0)


def attend(kind: AttentionKind, scores: Sequence[Scalar],
           domain: Domain) -> tuple[Scalar, ...]:
    """Attention weights for one score row.

    Uniform is 1/n everywhere; hard is one-hot at the least maximizer;
    saturated is 1/|M| on the maximizer set M and 0 elsewhere. Over F
    the reciprocals go through flt_div, so they are the approximate
    floor-reciprocal floats; over Q they are exact and sum to 1.
    """
    n = len(scores)
    if n == 0:
        raise MachineError("empty score sequence")
    if kind is AttentionKind.UNIFORM:
        w = domain.div(domain.one, domain.from_int(n))
        return (w,) * n
    ties = max_set(scores, domain)
    if kind is AttentionKind.HARD:
        hot = ties[0]
        return tuple(domain.one if j == hot else domain.zero for j in range(n))
    w = domain.div(domain.one, domain.from_int(len(ties)))
    members = set(ties)
    return tuple(w if j in members else domain.zero for j in range(n))


# ---------------------------------------------------------------------------
# transformer specs


@dataclass(frozen=True)
class HeadSpec:
    attention: AttentionKind
    scorer: FuncExpr


@dataclass(frozen=True)
class LayerSpec:
    heads: tuple[HeadSpec, ...]
    activation: FuncExpr


@dataclass(frozen=True)
class TransformerSpec:
    alphabet: tuple[str, ...]
    datatype: str
    width: int
    embedding: FuncExpr
    layers: tuple[LayerSpec, ...]
    classifier_w: tuple[Number, ...]
    classifier_b: Number
    hosts: Mapping[str, Callable] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if not self.alphabet or len(set(self.alphabet)) != len(self.alphabet):
            raise MachineError("alphabet must be nonempty and duplicate-free")
        domain_of(self.datatype)
        if self.layers:
            h = len(self.layers[0].heads)
            if any(len(l.heads) != h for l in self.layers) or h == 0:
                raise MachineError("every layer needs the same nonzero head count")
            if self.width % h:
                raise MachineError("width must be a multiple of the head count")
        if len(self.classifier_w) != self.width:
            raise MachineError("classifier needs one weight per value component")

    @property
    def domain(self) -> Domain:
        return domain_of(self.datatype)

    @property
    def n_heads(self) -> int:
        return len(self.layers[0].heads) if self.layers else 0

    @property
    def block_width(self) -> int:
        return self.width // self.n_heads if self.layers else self.width


@dataclass(frozen=True)
class ValueTrace:
    """Everything the machine computed on one input.

    ``values[l][i]`` is the m-tuple after layer l (layer 0 = embeddings);
    ``scores[l][h][i][j]``, ``ties[l][h][i]``, and ``head_out[l][h][i]``
    cover the attention internals. When the trace was produced lazily
    (recognition), unevaluated final-layer positions hold None and
    ``partial`` is True.
    """

    input: str
    n: int
    values: tuple
    scores: tuple
    ties: tuple
    head_out: tuple
    layer_max_size: tuple[int, ...]
    partial: bool = False

    def final(self, i: int = 0):
        v = self.values[-1][i]
        if v is None:
            raise MachineError(f"position {i} not evaluated in this trace")
        return v


def _check_vector(v, width, what):
    if not isinstance(v, tuple) or len(v) != width:
        got = f"{len(v)}-tuple" if isinstance(v, tuple) else type(v).__name__
        raise MachineError(f"{what} must produce a {width}-tuple, got {got}")
    return v


def run(spec: TransformerSpec, w: str, _final_positions=None) -> ValueTrace:
    """Full evaluation of ``spec`` on token string ``w``.

    ``_final_positions`` restricts which positions get their last-layer
    value (recognition only needs position 1); everything feeding the
    restricted layer is still evaluated everywhere.
    """
    domain = spec.domain
    if len(w) == 0:
        raise MachineError("empty input (languages here are over nonempty strings)")
    alpha_index = {a: k for k, a in enumerate(spec.alphabet)}
    for ch in w:
        if ch not in alpha_index:
            raise MachineError(f"token {ch!r} not in alphabet {spec.alphabet}")
    n = len(w)
    onehot = []
    for ch in w:
        onehot.append(tuple(domain.one if alpha_index[ch] == k else domain.zero
                            for k in range(len(spec.alphabet))))

    values = []
    v0 = tuple(
        _check_vector(
            eval_expr(spec.embedding, (onehot[i], domain.from_int(i + 1)),
                      domain, spec.hosts),
            spec.width, "embedding")
        for i in range(n))
    values.append(v0)

    all_scores, all_ties, all_heads = [], [], []
    bw = spec.block_width
    last_layer = len(spec.layers) - 1
    for li, layer in enumerate(spec.layers):
        prev = values[-1]
        keep = (set(_final_positions) if (_final_positions is not None
                                          and li == last_layer) else None)
        layer_scores, layer_ties, layer_heads = [], [], []
        for h, head in enumerate(layer.heads):
            rows, ties_h, outs = [], [], []
            for i in range(n):
                if keep is not None and i not in keep:
                    rows.append(None)
                    ties_h.append(None)
                    outs.append(None)
                    continue
                row = tuple(
                    eval_expr(head.scorer, (prev[i], prev[j]), domain, spec.hosts)
                    for j in range(n))
                for s in row:
                    if isinstance(s, tuple):
                        raise MachineError("scorer must produce a scalar")
                weights = attend(head.attention, row, domain)
                block = range(h * bw, (h + 1) * bw)
                acc = [domain.zero] * bw
                for j, wt in enumerate(weights):
                    if domain.is_zero(wt):
                        continue
                    for c, comp in enumerate(block):
                        acc[c] = domain.add(acc[c], domain.mul(wt, prev[j][comp]))
                rows.append(row)
                ties_h.append(max_set(row, domain))
                outs.append(tuple(acc))
            layer_scores.append(tuple(rows))
            layer_ties.append(tuple(ties_h))
            layer_heads.append(tuple(outs))
        nxt = []
        for i in range(n):
            if keep is not None and i not in keep:
                nxt.append(None)
                continue
            bcat = tuple(c for h in range(spec.n_heads) for c in layer_heads[h][i])
            nxt.append(_check_vector(
                eval_expr(layer.activation, (prev[i], bcat), domain, spec.hosts),
                spec.width, f"layer {li} activation"))
        values.append(tuple(nxt))
        all_scores.append(tuple(layer_scores))
        all_ties.append(tuple(layer_ties))
        all_heads.append(tuple(layer_heads))

    max_sizes = []
    for layer_vals in values:
        sizes = [size(c) for v in layer_vals if v is not None for c in v]
        max_sizes.append(max(sizes) if sizes else 0)
    return ValueTrace(w, n, tuple(values), tuple(all_scores), tuple(all_ties),
                      tuple(all_heads), tuple(max_sizes),
                      partial=_final_positions is not None)


def classifier_value(spec: TransformerSpec, w: str,
                     trace: ValueTrace = None) -> Scalar:
    """W . v_final(position 1) + b, exactly."""
    domain = spec.domain
    t = trace or run(spec, w, _final_positions=(0,))
    v = t.final(0)
    acc = domain.from_pair(*spec.classifier_b)
    for wk, comp in zip(spec.classifier_w, v):
        acc = domain.add(acc, domain.mul(domain.from_pair(*wk), comp))
    return acc


def recognize(spec: TransformerSpec, w: str) -> bool:
    """Strict-positivity acceptance on the first position's final value."""
    return spec.domain.cmp(classifier_value(spec, w), spec.domain.zero) > 0


# ---------------------------------------------------------------------------
# instrumentation


@dataclass(frozen=True)
class HeadSumBound:
    """One head-sum check of the linear-bits bound 4cz + 2 log2 n + 1."""

    n: int
    layer: int
    head: int
    z: int
    measured: int
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.measured


@dataclass(frozen=True)
class SizeRow:
    n: int
    per_layer: tuple[int, ...]
    overall: int


@dataclass(frozen=True)
class SizeGrowthReport:
    """Measured value sizes against an a + b*log2(n) envelope.

    ``b`` is the OLS slope (clamped at 0); ``a`` is lifted so the line
    dominates every measurement, making ``margins`` nonnegative by
    construction; ``a_ols`` keeps the raw intercept for reference. The
    meaningful number is b: logarithmic growth shows up as a small
    finite slope.
    """

    rows: tuple[SizeRow, ...]
    a: float
    b: float
    a_ols: float
    margins: tuple[float, ...]
    head_bounds: tuple[HeadSumBound, ...]

    @property
    def ok(self) -> bool:
        return (all(m >= 0 for m in self.margins)
                and all(hb.margin >= 0 for hb in self.head_bounds))


def _ols(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    den = sum((x - mx) ** 2 for x in xs)
    b = 0.0 if den == 0 else sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / den
    return my - b * mx, b


def instrument_sizes(spec: TransformerSpec,
                     inputs_by_n: Mapping[int, Sequence[str]],
                     c: int = 2) -> SizeGrowthReport:
    """Trace the given inputs and report per-layer max value sizes, the
    fitted log envelope, and the head-sum bound 4cz + 2 log2 n + 1 where
    z is the largest summand size feeding that head."""
    domain = spec.domain
    rows, head_bounds = [], []
    for n in sorted(inputs_by_n):
        per_layer = None
        z_by_head: dict = {}
        measured_by_head: dict = {}
        for w in inputs_by_n[n]:
            if len(w) != n:
                raise MachineError(f"input {w!r} is not length {n}")
            t = run(spec, w)
            sizes = t.layer_max_size
            per_layer = sizes if per_layer is None else tuple(
                max(a, b) for a, b in zip(per_layer, sizes))
            for li in range(len(spec.layers)):
                for h in range(spec.n_heads):
                    key = (li, h)
                    for i in range(n):
                        row = t.scores[li][h][i]
                        weights = attend(spec.layers[li].heads[h].attention,
                                         row, domain)
                        block = range(h * spec.block_width,
                                      (h + 1) * spec.block_width)
                        for j, wt in enumerate(weights):
                            if domain.is_zero(wt):
                                continue
                            for comp in block:
                                term = domain.mul(wt, t.values[li][j][comp])
                                z_by_head[key] = max(z_by_head.get(key, 0),
                                                     size(term))
                        for out_c in t.head_out[li][h][i]:
                            measured_by_head[key] = max(
                                measured_by_head.get(key, 0), size(out_c))
        rows.append(SizeRow(n, per_layer, max(per_layer)))
        for (li, h), z in sorted(z_by_head.items()):
            bound = 4 * c * z + 2 * math.log2(n) + 1
            head_bounds.append(HeadSumBound(n, li, h, z,
                                            measured_by_head[(li, h)], bound))
    xs = [math.log2(r.n) for r in rows]
    ys = [float(r.overall) for r in rows]
    a_ols, b = _ols(xs, ys)
    b = max(b, 0.0)
    a = max(y - b * x for x, y in zip(xs, ys))
    margins = tuple(a + b * x - y for x, y in zip(xs, ys))
    return SizeGrowthReport(tuple(rows), a, b, a_ols, margins,
                            tuple(head_bounds))


def check_elementwise_size_preserving(kind: AttentionKind,
                                      samples: Iterable[Sequence[Scalar]],
                                      domain: Domain,
                                      n0: int = 1, cap: int = 8) -> SizeProfile:
    """Profile weight sizes against the max score-component size.

    The defining bound is stated per component but saturated weights
    depend on the whole score vector, so the input size used here is the
    row maximum; this is the recorded reading of that mismatch.
    """
    pairs = []
    for row in samples:
        weights = attend(kind, row, domain)
        ins = max(size(s) for s in row)
        for wt in weights:
            pairs.append((ins, size(wt)))
    c = None
    worst = None
    for ins, outs in pairs:
        if ins < n0 or ins == 0:
            continue
        need = -(-outs // ins)
        if c is None or need > c:
            c, worst = need, (ins, outs)
    ok = c is not None and c <= cap
    return SizeProfile(tuple(pairs), c, n0, cap, ok, worst)


# ---------------------------------------------------------------------------
# spec files: one s-expression document


_TOKEN_RE = re.compile(r"[()]|[^()\s;]+|;[^\n]*")


def _read_sexp(text: str):
    tokens = [t for t in _TOKEN_RE.findall(text) if not t.startswith(";")]
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise MachineError("unexpected end of spec file")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(read())
            if pos >= len(tokens):
                raise MachineError("unbalanced ( in spec file")
            pos += 1
            return items
        if tok == ")":
            raise MachineError("unbalanced ) in spec file")
        return tok

    form = read()
    if pos != len(tokens):
        raise MachineError("trailing content after the top-level form")
    return form


_NUM_RE = re.compile(r"([+-]?\d+)(?:/(?:2\^(\d+)|(\d+)))?")


def _parse_number(atom: str) -> Number:
    m = _NUM_RE.fullmatch(atom)
    if not m:
        raise MachineError(f"not a number literal: {atom!r}")
    num = int(m.group(1))
    if m.group(2) is not None:
        return _number(num, 2 ** int(m.group(2)))
    return _number(num, int(m.group(3) or 1))


def _is_number(atom) -> bool:
    return isinstance(atom, str) and _NUM_RE.fullmatch(atom) is not None


def _parse_expr(form, block_width: int) -> FuncExpr:
    """Expression syntax (indices 1-based in files):

    atoms: N, p/q, p/2^e as constants
    (const N) (arg J) (proj K E) (tup E...) (add E E...) (mul E E...)
    (div E E) (sqrt E) (neg E) (relu E) (gt E E) (eq E E)
    (select C A B) (affine (w N...) (b N) E...) (pow2 E) (host NAME E...)
    sugar: (tok K) (pos) (q K) (key K) (v K) (head H K)
    """
    def rec(f):
        if isinstance(f, str):
            if _is_number(f):
                return Const(*_parse_number(f))
            raise MachineError(f"bare atom {f!r} is not an expression")
        if not f:
            raise MachineError("empty expression")
        op, rest = f[0], f[1:]
        if op == "const":
            return Const(*_parse_number(rest[0]))
        if op == "arg":
            return Arg(int(rest[0]) - 1)
        if op == "proj":
            return Proj(int(rest[0]) - 1, rec(rest[1]))
        if op in ("tok", "q", "v"):
            return Proj(int(rest[0]) - 1, Arg(0))
        if op == "pos":
            return Arg(1)
        if op == "key":
            return Proj(int(rest[0]) - 1, Arg(1))
        if op == "head":
            h, k = int(rest[0]) - 1, int(rest[1]) - 1
            return Proj(h * block_width + k, Arg(1))
        if op == "tup":
            return Tup(*[rec(x) for x in rest])
        if op in ("add", "mul"):
            if len(rest) < 2:
                raise MachineError(f"{op} wants at least two operands")
            acc = rec(rest[0])
            ctor = Add if op == "add" else Mul
            for x in rest[1:]:
                acc = ctor(acc, rec(x))
            return acc
        if op == "div":
            return Div(rec(rest[0]), rec(rest[1]))
        if op == "sqrt":
            return Sqrt(rec(rest[0]))
        if op == "neg":
            return Neg(rec(rest[0]))
        if op == "relu":
            return Relu(rec(rest[0]))
        if op == "gt":
            return Gt(rec(rest[0]), rec(rest[1]))
        if op == "eq":
            return Eq(rec(rest[0]), rec(rest[1]))
        if op == "select":
            return Select(rec(rest[0]), rec(rest[1]), rec(rest[2]))
        if op == "affine":
            wf, bf = rest[0], rest[1]
            if not (isinstance(wf, list) and wf and wf[0] == "w"
                    and isinstance(bf, list) and bf and bf[0] == "b"):
                raise MachineError("affine wants (w ...) then (b ...)")
            coeffs = [_parse_number(x) for x in wf[1:]]
            bias = _parse_number(bf[1])
            return Affine(coeffs, bias, *[rec(x) for x in rest[2:]])
        if op == "pow2":
            return Pow2(rec(rest[0]))
        if op == "host":
            return Host(rest[0], *[rec(x) for x in rest[1:]])
        raise MachineError(f"unknown expression op {op!r}")

    return rec(form)


def parse_spec(text: str) -> TransformerSpec:
    """Parse a transformer spec document; grammar in the README."""
    form = _read_sexp(text)
    if not isinstance(form, list) or not form or form[0] != "transformer":
        raise MachineError("spec file must be a (transformer ...) form")
    fields = {"name": "", "alphabet": None, "datatype": None, "width": None,
              "embedding": None, "classifier": None}
    layer_forms = []
    for section in form[1:]:
        if not isinstance(section, list) or not section:
            raise MachineError(f"bad section: {section!r}")
        key = section[0]
        if key == "layer":
            layer_forms.append(section[1:])
        elif key in fields:
            fields[key] = section[1:]
        else:
            raise MachineError(f"unknown section {key!r}")
    for req in ("alphabet", "datatype", "width", "embedding", "classifier"):
        if fields[req] is None:
            raise MachineError(f"missing ({req} ...) section")
    if not layer_forms:
        raise MachineError("missing (layer ...) section")
    alphabet = tuple(fields["alphabet"])
    datatype = fields["datatype"][0]
    width = int(fields["width"][0])

    head_counts = [sum(1 for it in lf if isinstance(it, list) and it[0] == "head")
                   for lf in layer_forms]
    if min(head_counts) != max(head_counts) or head_counts[0] == 0:
        raise MachineError("every layer needs the same nonzero head count")
    if width % head_counts[0]:
        raise MachineError("width must be a multiple of the head count")
    bw = width // head_counts[0]

    layers = []
    for lf in layer_forms:
        heads, activation = [], None
        for item in lf:
            if not isinstance(item, list) or not item:
                raise MachineError(f"bad layer item: {item!r}")
            if item[0] == "head":
                heads.append(HeadSpec(AttentionKind.of(item[1]),
                                      _parse_expr(item[2], bw)))
            elif item[0] == "activation":
                activation = _parse_expr(item[1], bw)
            else:
                raise MachineError(f"unknown layer item {item[0]!r}")
        if activation is None:
            raise MachineError("layer missing (activation ...)")
        layers.append(LayerSpec(tuple(heads), activation))

    wf = bf = None
    for item in fields["classifier"]:
        if isinstance(item, list) and item and item[0] == "w":
            wf = [_parse_number(x) for x in item[1:]]
        elif isinstance(item, list) and item and item[0] == "b":
            bf = _parse_number(item[1])
    if wf is None or bf is None:
        raise MachineError("classifier wants (w ...) and (b ...)")

    name = fields["name"][0] if fields["name"] else ""
    return TransformerSpec(alphabet, datatype, width,
                           _parse_expr(fields["embedding"][0], bw),
                           tuple(layers), tuple(wf), bf, {}, name)


def load_spec(path: str) -> TransformerSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())
