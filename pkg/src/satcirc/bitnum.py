"""Exact arithmetic over binary-string numerals.

Three value kinds share one size accounting:

* ``UNat``: an unsigned integer with bits x_1..x_k weighted 2^(i-1)
  (little-endian storage; textual display is most-significant-first, so
  the string "101" means five). ``size`` is the stored bit length, and
  padding zeros are kept when a value is built from an explicit bit
  string.
* ``Rat``: sign plus reduced numerator/denominator; numeric value is
  (2*sign - 1) * p/q and size is 2*max(|p|, |q|) + 1.
* ``Flt``: a rational whose denominator is a power of two, stored as the
  exponent e; the denominator is still charged e+1 bits by ``size``.
  Addition and multiplication are exact; division is the approximate
  floor(2^|p|/p) reciprocal and is the only inexact operation.

All values are immutable and every operation is pure, so concurrent use
needs no coordination.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union


class BitNumError(ValueError):
    """Domain error: zero denominator, negative square root, and kin."""


# ---------------------------------------------------------------------------
# bit strings


@dataclass(frozen=True)
class BitString:
    """A finite 0/1 sequence, index origin 1; no implicit canonical form."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise BitNumError("bits must be 0 or 1")

    def bit(self, i: int) -> int:
        """The i-th bit, 1-origin."""
        if not 1 <= i <= len(self.bits):
            raise BitNumError(f"bit index {i} out of range 1..{len(self.bits)}")
        return self.bits[i - 1]

    def __len__(self) -> int:
        return len(self.bits)

    def display(self) -> str:
        """Most-significant-bit-first text; the empty string shows as 0."""
        if not self.bits:
            return "0"
        return "".join(str(b) for b in reversed(self.bits))

    @staticmethod
    def parse(text: str) -> "BitString":
        """Parse most-significant-first 0/1 text ("0" parses to empty)."""
        if not text or set(text) - {"0", "1"}:
            raise BitNumError(f"not a bit string: {text!r}")
        bits = tuple(int(ch) for ch in reversed(text))
        if bits == (0,):
            bits = ()
        return BitString(bits)


# ---------------------------------------------------------------------------
# unsigned integers


class UNat:
    """Unsigned integer numeral. Equality and size respect padding zeros."""

    __slots__ = ("_bits", "_value")

    def __init__(self, bits: Union[BitString, Sequence[int]]):
        if not isinstance(bits, BitString):
            bits = BitString(tuple(bits))
        object.__setattr__(self, "_bits", bits)
        object.__setattr__(self, "_value", sum(b << i for i, b in enumerate(bits.bits)))

    @classmethod
    def from_int(cls, value: int) -> "UNat":
        """Minimal-length numeral (no padding); zero has no bits."""
        if value < 0:
            raise BitNumError("UNat cannot be negative")
        bits = []
        v = value
        while v:
            bits.append(v & 1)
            v >>= 1
        return cls(tuple(bits))

    @property
    def bits(self) -> BitString:
        return self._bits

    @property
    def value(self) -> int:
        return self._value

    def __len__(self) -> int:
        return len(self._bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, UNat) and self._bits.bits == other._bits.bits

    def __hash__(self) -> int:
        return hash(self._bits.bits)

    def display(self) -> str:
        return self._bits.display()

    def __str__(self) -> str:
        return str(self._value)

    def __repr__(self) -> str:
        return f"UNat({self.display()!r})"


def parse_unat(text: str) -> UNat:
    """Accepts unsigned decimal ("13") or binary with prefix ("0b1101")."""
    text = text.strip()
    if text.startswith("0b") or text.startswith("0B"):
        return UNat(BitString.parse(text[2:]))
    if not text.isdigit():
        raise BitNumError(f"not an unsigned literal: {text!r}")
    return UNat.from_int(int(text))


def uadd(a: UNat, b: UNat) -> UNat:
    return UNat.from_int(a.value + b.value)


def umul(a: UNat, b: UNat) -> UNat:
    return UNat.from_int(a.value * b.value)


def ucmp(a: UNat, b: UNat) -> int:
    """-1, 0, or 1 by numeric value; padding zeros ignored."""
    if a.value < b.value:
        return -1
    return 1 if a.value > b.value else 0


def gcd(a: UNat, b: UNat) -> UNat:
    """Binary GCD; works by shifting, the native move on bit strings."""
    x, y = a.value, b.value
    if x == 0 and y == 0:
        raise BitNumError("gcd(0, 0) is undefined")
    if x == 0:
        return UNat.from_int(y)
    if y == 0:
        return UNat.from_int(x)
    shift = 0
    while (x | y) & 1 == 0:
        x >>= 1
        y >>= 1
        shift += 1
    while x & 1 == 0:
        x >>= 1
    while y:
        while y & 1 == 0:
            y >>= 1
        if x > y:
            x, y = y, x
        y -= x
    return UNat.from_int(x << shift)


def rat_red(p: UNat, q: UNat) -> tuple[UNat, UNat]:
    """Reduced magnitude pair p/g, q/g with g = gcd(p, q); requires q > 0."""
    if q.value == 0:
        raise BitNumError("denominator must be positive")
    if p.value == 0:
        return UNat.from_int(0), UNat.from_int(1)
    g = gcd(p, q).value
    return UNat.from_int(p.value // g), UNat.from_int(q.value // g)


# ---------------------------------------------------------------------------
# rationals


@dataclass(frozen=True)
class Rat:
    """Reduced signed rational; value (2*sign - 1) * p/q, sign 1 = positive.

    Construct through ``rat`` (or ``Rat.make``): invariants are q > 0,
    gcd(p, q) = 1, and canonical zero +0/1.
    """

    sign: int
    p: UNat
    q: UNat

    @staticmethod
    def make(num: int, den: int = 1) -> "Rat":
        if den == 0:
            raise BitNumError("denominator must be nonzero")
        sign = 1 if (num >= 0) == (den > 0) else 0
        num, den = abs(num), abs(den)
        if num == 0:
            return Rat(1, UNat.from_int(0), UNat.from_int(1))
        p, q = rat_red(UNat.from_int(num), UNat.from_int(den))
        return Rat(sign, p, q)

    @property
    def signed_num(self) -> int:
        return self.p.value if self.sign else -self.p.value

    def as_pair(self) -> tuple[int, int]:
        """(signed numerator, denominator)."""
        return self.signed_num, self.q.value

    def __str__(self) -> str:
        return f"{'+' if self.sign else '-'}{self.p.value}/{self.q.value}"

    def __repr__(self) -> str:
        return f"Rat({str(self)!r})"


def rat(num: int, den: int = 1) -> Rat:
    return Rat.make(num, den)


def parse_rat(text: str) -> Rat:
    m = re.fullmatch(r"\s*([+-]?)(\d+)(?:/(\d+))?\s*", text)
    if not m:
        raise BitNumError(f"not a rational literal: {text!r}")
    sign, p, q = m.group(1), int(m.group(2)), int(m.group(3) or 1)
    return rat(-p if sign == "-" else p, q)


def rat_add(r: Rat, s: Rat) -> Rat:
    (pn, pd), (qn, qd) = r.as_pair(), s.as_pair()
    return rat(pn * qd + qn * pd, pd * qd)


def rat_mul(r: Rat, s: Rat) -> Rat:
    (pn, pd), (qn, qd) = r.as_pair(), s.as_pair()
    return rat(pn * qn, pd * qd)


def rat_cmp(r: Rat, s: Rat) -> int:
    lhs = r.signed_num * s.q.value
    rhs = s.signed_num * r.q.value
    return (lhs > rhs) - (lhs < rhs)


def rat_neg(r: Rat) -> Rat:
    return rat(-r.signed_num, r.q.value)


# ---------------------------------------------------------------------------
# floats (power-of-two denominators)


@dataclass(frozen=True)
class Flt:
    """Canonical dyadic rational: value (2*sign - 1) * p / 2^e.

    Canonical means p odd or e = 0; zero is +0/2^0. Construct through
    ``flt`` (or ``Flt.make``), which canonicalizes by stripping shared
    trailing zero factors.
    """

    sign: int
    p: UNat
    e: int

    @staticmethod
    def make(num: int, e: int = 0) -> "Flt":
        if e < 0:
            raise BitNumError("exponent must be nonnegative")
        sign = 1 if num >= 0 else 0
        p = abs(num)
        if p == 0:
            return Flt(1, UNat.from_int(0), 0)
        while p & 1 == 0 and e > 0:
            p >>= 1
            e -= 1
        return Flt(sign, UNat.from_int(p), e)

    @property
    def signed_num(self) -> int:
        return self.p.value if self.sign else -self.p.value

    def as_pair(self) -> tuple[int, int]:
        """(signed numerator, denominator) with the denominator expanded."""
        return self.signed_num, 1 << self.e

    def is_zero(self) -> bool:
        return self.p.value == 0

    def __str__(self) -> str:
        return f"{'+' if self.sign else '-'}{self.p.value}/2^{self.e}"

    def __repr__(self) -> str:
        return f"Flt({str(self)!r})"


def flt(num: int, e: int = 0) -> Flt:
    return Flt.make(num, e)


def parse_flt(text: str) -> Flt:
    m = re.fullmatch(r"\s*([+-]?)(\d+)(?:/2\^(\d+))?\s*", text)
    if not m:
        raise BitNumError(f"not a float literal: {text!r}")
    sign, p, e = m.group(1), int(m.group(2)), int(m.group(3) or 0)
    return flt(-p if sign == "-" else p, e)


def flt_add(x: Flt, y: Flt) -> Flt:
    e = max(x.e, y.e)
    num = (x.signed_num << (e - x.e)) + (y.signed_num << (e - y.e))
    return flt(num, e)


def flt_mul(x: Flt, y: Flt) -> Flt:
    return flt(x.signed_num * y.signed_num, x.e + y.e)


def flt_div(x: Flt, y: Flt) -> Flt:
    """Approximate division through the reciprocal floor(2^|p|/p) / 2^|p|.

    With y = p/2^e: result numerator is floor(2^|p|/p) * p_x * 2^e and
    the result exponent is |p| + e_x. Exact whenever y is a power of two;
    in general (x / y) * y may differ from x.
    """
    if y.is_zero():
        raise BitNumError("division by zero")
    pw = y.p.value.bit_length()
    k = (1 << pw) // y.p.value
    num = x.p.value * k << y.e
    sign = 1 if x.sign == y.sign else 0
    return flt(num if sign else -num, pw + x.e)


def flt_sqrt(x: Flt) -> Flt:
    """Truncated square root: numerator isqrt(p), exponent e/2.

    Odd exponents are first rewritten p <- 2p, e <- e+1 (same value), so
    the result is isqrt(2p)/2^((e+1)/2). Requires x >= 0.
    """
    if not x.sign and not x.is_zero():
        raise BitNumError("square root of a negative value")
    p, e = x.p.value, x.e
    if e % 2 == 1:
        p <<= 1
        e += 1
    return flt(math.isqrt(p), e // 2)


def flt_cmp(x: Flt, y: Flt) -> int:
    lhs = x.signed_num << y.e
    rhs = y.signed_num << x.e
    return (lhs > rhs) - (lhs < rhs)


def flt_neg(x: Flt) -> Flt:
    return flt(-x.signed_num, x.e)


Value = Union[UNat, Rat, Flt]


def relu(v: Value) -> Value:
    """max(v, 0) in v's own kind."""
    if isinstance(v, UNat):
        return v
    if isinstance(v, Rat):
        return v if rat_cmp(v, rat(0)) > 0 else rat(0)
    if isinstance(v, Flt):
        return v if flt_cmp(v, flt(0)) > 0 else flt(0)
    raise BitNumError(f"relu undefined for {type(v).__name__}")


# ---------------------------------------------------------------------------
# size accounting


def size(v) -> int:
    """Bit size: UNat = bit length; Rat/Flt = 2*max(|p|, |q|) + 1 with the
    float denominator charged e+1 bits; tuples charge 2*max(component)+1."""
    if isinstance(v, UNat):
        return len(v)
    if isinstance(v, Rat):
        return 2 * max(len(v.p), len(v.q)) + 1
    if isinstance(v, Flt):
        return 2 * max(len(v.p), v.e + 1) + 1
    if isinstance(v, tuple):
        if not v:
            return 0
        return 2 * max(size(c) for c in v) + 1
    raise BitNumError(f"size undefined for {type(v).__name__}")


# ---------------------------------------------------------------------------
# size-preservation checks


@dataclass(frozen=True)
class SizeProfile:
    """Measured (input size, output size) pairs and the fitted bound.

    ``c`` is the smallest integer with out <= c * in over every sample
    whose input size is at least ``n0`` (None when no sample qualifies);
    the check passes iff c exists and c <= cap.
    """

    samples: tuple[tuple[int, int], ...]
    c: Union[int, None]
    n0: int
    cap: int
    ok: bool
    worst: Union[tuple[int, int], None] = None

    def __str__(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        return (f"SizeProfile({verdict}: c={self.c}, n0={self.n0}, cap={self.cap}, "
                f"{len(self.samples)} samples, worst={self.worst})")


def check_size_preserving(f: Callable[..., object],
                          sample_plan: Iterable[tuple],
                          n0: int = 4,
                          cap: int = 8) -> SizeProfile:
    """Measure |f(x)| against c*|x| over a sample plan of argument tuples.

    Multi-argument samples are sized by the tuple rule (2*max+1), single
    arguments by their own size. A violation is a reported outcome (ok
    False), never an exception.
    """
    pairs = []
    for args in sample_plan:
        args = tuple(args)
        out = f(*args)
        ins = size(args[0]) if len(args) == 1 else size(args)
        pairs.append((ins, size(out)))
    c = None
    worst = None
    for ins, outs in pairs:
        if ins < n0:
            continue
        need = -(-outs // ins) if ins else None
        if ins and (c is None or need > c):
            c = need
            worst = (ins, outs)
    ok = c is not None and c <= cap
    return SizeProfile(tuple(pairs), c, n0, cap, ok, worst)
